#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "alref/backends/oracle.hpp"
#include "alref/core/audio.hpp"
#include "alref/core/types.hpp"

namespace alref::eval {

enum class DatasetLayout { ref_youtube_vos, ref_davis17, mevis, avsbench };

const char* to_string(DatasetLayout l);
DatasetLayout parse_layout(const std::string& s);

struct DatasetSample {
  std::string video_id;
  std::string expression_id;  // "0" for AVS
  std::string expression;     // RVOS text; empty for AVS
  std::vector<std::string> categories;  // AVS labels in palette-index order, when known
  std::string annotator;      // DAVIS anno_id
  std::vector<std::string> frame_names;
  std::vector<std::filesystem::path> frame_paths;
  std::vector<std::filesystem::path> annotation_paths;  // empty path = frame not annotated
  std::vector<std::uint32_t> object_ids;                // RVOS palette ids
  std::vector<std::string> mask_ids;                    // MeViS anno_ids
  std::filesystem::path audio_path;
  Rational fps{30, 1};

  std::string key() const { return video_id + "/" + expression_id; }
  bool has_ground_truth() const;
};

struct DatasetOptions {
  Rational default_fps{30, 1};
  bool verify_images = false;  // decode every frame and annotation while loading
};

struct Dataset {
  DatasetLayout layout = DatasetLayout::ref_youtube_vos;
  std::filesystem::path root;
  std::vector<DatasetSample> samples;
  std::vector<std::string> warnings;  // one line per skipped sample or problem
  std::size_t skipped = 0;
};

// Layouts under `root`:
//   ref_youtube_vos / ref_davis17: meta_expressions.json, JPEGImages/<vid>/<frame>.{jpg,png},
//     Annotations/<vid>/<frame>.png (palette ids)
//   mevis: meta_expressions.json, JPEGImages/..., mask_dict.json (COCO RLE per anno_id)
//   avsbench: metadata.csv (uid[,label][,fps]), <uid>/frames/*, <uid>/labels/*.png, <uid>/audio.wav
Dataset load_dataset(DatasetLayout layout, const std::filesystem::path& root, const DatasetOptions& options = {});

VideoClip load_video(const DatasetSample& sample);
AudioClip load_audio(const DatasetSample& sample);

struct GroundTruth {
  std::vector<BinaryMask> masks;  // the referent (AVS: union of all sounding objects)
  std::vector<bool> annotated;
  std::vector<backends::OracleObject> objects;  // per-object truth for oracle backends
};

/// Ground truth sized to height x width. Throws ErrorCode::io when absent or unreadable.
GroundTruth load_ground_truth(const Dataset& dataset, const DatasetSample& sample, int height, int width);

/// Minimal RFC 4180 reader: returns rows of fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace alref::eval
