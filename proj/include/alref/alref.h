#ifndef ALREF_ALREF_H
#define ALREF_ALREF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ALREF_BUILDING)
#    define ALREF_API __declspec(dllexport)
#  else
#    define ALREF_API __declspec(dllimport)
#  endif
#else
#  define ALREF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum alref_status {
  ALREF_OK = 0,
  ALREF_ERR_INVALID_ARGUMENT = 1,
  ALREF_ERR_CONFIG = 2,
  ALREF_ERR_IO = 3,
  ALREF_ERR_BACKEND = 4,
  ALREF_ERR_PROTOCOL = 5,
  ALREF_ERR_TIMEOUT = 6,
  ALREF_ERR_REFERENT_ABSENT = 7,
  ALREF_ERR_SCENARIO = 8,
  ALREF_ERR_INTERNAL = 9
} alref_status;

typedef struct alref_engine alref_engine;

ALREF_API const char* alref_version(void);
ALREF_API const char* alref_status_name(alref_status status);

/* Message of the last failed call on this thread ("" if none). */
ALREF_API const char* alref_last_error(void);

/* Strings returned through char** out-parameters are owned by the caller. */
ALREF_API void alref_string_free(char* s);

ALREF_API alref_status alref_engine_create(const char* config_path, const char* backends_path, alref_engine** out);

/* Relative paths inside either document resolve against base_dir (may be NULL). */
ALREF_API alref_status alref_engine_create_from_json(const char* config_json, const char* backends_json,
                                                    const char* base_dir, alref_engine** out);
ALREF_API void alref_engine_destroy(alref_engine* engine);

/* keys: task, jobs, dump_prompts, ablation ("frame=<s>" or "box=<s>"),
   dataset_root, cache_dir, prompts_dir */
ALREF_API alref_status alref_engine_set(alref_engine* engine, const char* key, const char* value);

/* Effective configuration as JSON. */
ALREF_API alref_status alref_engine_config_json(const alref_engine* engine, char** out_json);

/* Checks configuration and decodes the dataset; makes no backend calls. */
ALREF_API alref_status alref_engine_validate(alref_engine* engine, char** out_json);

/* Runs every sample. Succeeds when the run completed, even if some samples
   failed; *out_failed (may be NULL) receives the failed sample count. */
ALREF_API alref_status alref_engine_run(alref_engine* engine, const char* out_dir, size_t* out_failed,
                                       char** out_report_json);

/* Scores predictions. out_json_path / out_csv_path may be NULL. */
ALREF_API alref_status alref_score(const char* layout, const char* pred_dir, const char* dataset_root,
                                  int group_by_annotator, const char* out_json_path, const char* out_csv_path,
                                  char** out_report_json);

/* config_path may be NULL (prompts only, no image reconstruction). */
ALREF_API alref_status alref_replay(const char* audit_log, const char* out_dir, const char* config_path,
                                   char** out_summary_json);

/* Clip windows for a video of frame_count frames, as JSON. */
ALREF_API alref_status alref_plan_clips(int64_t frame_count, int frames_per_clip, int interval, char** out_json);

/* Region similarity and boundary F of one mask pair (row-major, nonzero = foreground). */
ALREF_API alref_status alref_mask_metrics(const uint8_t* pred, const uint8_t* gt, int height, int width,
                                         double* out_j, double* out_f);

#ifdef __cplusplus
}
#endif

#endif
