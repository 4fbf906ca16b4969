// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "alref/app/engine.hpp"
#include "alref/audio_seg/audio_seg.hpp"
#include "alref/backends/mocks.hpp"
#include "alref/core/error.hpp"
#include "alref/eval/metrics.hpp"
#include "alref/gpt_ps/gpt_ps.hpp"
#include "alref/io/files.hpp"
#include "alref/lbru/lbru.hpp"
#include "alref/orchestrator/clip_plan.hpp"
#include "alref/orchestrator/pipeline.hpp"
#include "alref/prompting/audit.hpp"
#include "alref/symbolic/symbolic.hpp"
#include "oracles.hpp"
#include "testkit.hpp"

using namespace alref;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Collects failed expectations for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::string note;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------

void oracle_end_to_end(Check& c) {
  const auto dir = testkit::fresh_dir("acc_e2e");
  const auto set = testkit::oracle_video_set();
  testkit::write_rvos_dataset(dir / "data", set);
  auto cfg = orchestrator::preset("ref_youtube_vos");
  cfg.dataset_root = dir / "data";
  cfg.jobs = 4;
  const auto t0 = std::chrono::steady_clock::now();
  app::Engine engine(cfg, backends::parse_backend_config(json{{"default", "mock:oracle"}}));
  const auto summary = engine.run(dir / "out");
  const auto report = app::score({eval::DatasetLayout::ref_youtube_vos, dir / "data", dir / "out"});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::size_t expressions = 0;
  for (const auto& s : set) expressions += s.expressions.size();
  c.expect(set.size() == 5, "fixture set has 5 videos");
  c.expect(summary.failed == 0 && summary.degraded == 0, "every sample ok");
  c.expect(report.objects.size() == expressions, "every expression scored");
  for (const auto& o : report.objects)
    c.expect(std::abs(o.j - 1.0) <= 1e-9 && std::abs(o.f - 1.0) <= 1e-9,
             o.video_id + "/" + o.expression_id + " J " + fmt(o.j) + " F " + fmt(o.f));
  c.expect(std::abs(report.jf - 1.0) <= 1e-9, "J&F " + fmt(report.jf));
  c.expect(seconds < 10.0, "runtime " + fmt(seconds) + " s");
  c.note = "J&F " + fmt(report.jf) + " over " + std::to_string(expressions) + " expressions in " +
           fmt(std::round(seconds * 100) / 100) + " s";
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------

void metric_oracles(Check& c) {
  std::mt19937 rng(2024);
  int pairs = 0, nontrivial = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int h = std::uniform_int_distribution<int>(8, 128)(rng);
    const int w = std::uniform_int_distribution<int>(8, 128)(rng);
    const auto a = oracle::random_shape(rng, h, w);
    auto b = oracle::random_shape(rng, h, w);
    // Most pairs are perturbed copies so scores spread across (0, 1).
    if (i % 4 != 0) {
      b = a;
      for (int k = 0; k < h * w / 20; ++k) b.bits[static_cast<std::size_t>(rng() % b.bits.size())] ^= 1;
    }
    const int tol = eval::boundary_tolerance(h, w);
    const double got = eval::boundary_f(a, b, tol).f;
    const double want = oracle::boundary_f_all_pairs(a, b, tol).f;
    worst = std::max(worst, std::abs(got - want));
    c.expect(std::abs(got - want) <= 1e-9, "pair " + std::to_string(i) + ": " + fmt(got) + " vs " + fmt(want));
    if (want > 0 && want < 1) ++nontrivial;
    ++pairs;

    const std::vector<BinaryMask> p{a, b}, g{b, a};
    c.expect(eval::region_j(p, g) == oracle::region_j_counts(p, g), "region J pair " + std::to_string(i));
  }
  c.expect(pairs >= 50 && nontrivial >= 50, "at least 50 nontrivial pairs");
  c.note = std::to_string(pairs) + " pairs (" + std::to_string(nontrivial) + " with 0 < F < 1), max |dF| " + fmt(worst);
}

// ---------------------------------------------------------------------------

void clip_plan(Check& c) {
  const auto plan = orchestrator::plan_clips(100, 5, 10);
  c.expect(plan.clips.size() == 2, "two clips");
  if (plan.clips.size() == 2) {
    c.expect(plan.clips[0] == orchestrator::ClipWindow{0, 50, {0, 10, 20, 30, 40}}, "first clip [0,50)");
    c.expect(plan.clips[1] == orchestrator::ClipWindow{50, 100, {50, 60, 70, 80, 90}}, "second clip [50,100)");
  }
  std::mt19937 rng(17);
  int trials = 0;
  for (; trials < 2000; ++trials) {
    const std::int64_t t = 1 + static_cast<std::int64_t>(rng() % 600);
    const int fpc = 1 + static_cast<int>(rng() % 8);
    const int interval = 1 + static_cast<int>(rng() % 20);
    const auto p = orchestrator::plan_clips(t, fpc, interval);
    const std::string tag = "T=" + std::to_string(t) + " " + std::to_string(fpc) + "/" + std::to_string(interval);
    std::int64_t cursor = 0;
    std::set<std::int64_t> seen;
    bool ok = !p.clips.empty();
    for (const auto& w : p.clips) {
      ok = ok && w.start == cursor && w.end > w.start && !w.sampled.empty();
      for (std::size_t k = 0; k < w.sampled.size(); ++k) {
        ok = ok && w.sampled[k] >= w.start && w.sampled[k] < w.end && seen.insert(w.sampled[k]).second;
        if (k > 0) ok = ok && w.sampled[k] > w.sampled[k - 1];
      }
      ok = ok && static_cast<int>(w.sampled.size()) <= fpc;
      cursor = w.end;
    }
    ok = ok && cursor == t;
    c.expect(ok, "tiling " + tag);
  }
  c.note = "exact plan for T=100 and " + std::to_string(trials) + " random plans";
}

// ---------------------------------------------------------------------------

// Audio where segment i carries the constant (i + 1) / 64 so the table
// embedder can tell which segment it received.
AudioClip tagged_audio(const std::vector<audio_seg::AudioSegment>& segs, int rate) {
  std::vector<float> s(static_cast<std::size_t>(std::llround(segs.back().end * rate)));
  for (std::size_t k = 0; k < s.size(); ++k)
    s[k] = static_cast<float>(audio_seg::segment_at(segs, static_cast<double>(k) / rate) + 1) / 64.0f;
  return AudioClip(std::move(s), rate);
}

class TableEmbedder : public backends::CrossModalEmbedderBackend {
 public:
  std::map<int, std::vector<double>> audio;
  std::map<std::string, std::vector<double>> text;
  backends::EmbeddingVector embed_audio(const AudioClip& seg) override {
    return {audio.at(static_cast<int>(std::lround(seg.samples().at(0) * 64.0f)) - 1)};
  }
  backends::EmbeddingVector embed_text(const std::string& t) override { return {text.at(t)}; }
};

void label_assignment(Check& c) {
  std::mt19937 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  int fixtures = 0;
  for (; fixtures < 150; ++fixtures) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const int s = 1 + static_cast<int>(rng() % 6);
    const int dim = 2 + static_cast<int>(rng() % 8);
    std::vector<std::string> cats;
    for (int i = 0; i < n; ++i) cats.push_back("cat" + std::to_string(i));
    const auto combos = audio_seg::enumerate_combinations(cats);
    std::vector<audio_seg::AudioSegment> segs;
    for (int i = 0; i < s; ++i) segs.push_back({static_cast<double>(i), static_cast<double>(i + 1), i});
    const auto audio = tagged_audio(segs, 200);

    TableEmbedder emb;
    std::vector<std::vector<double>> tvec;
    for (int i = 0; i < s; ++i) {
      std::vector<double> v(static_cast<std::size_t>(dim));
      for (auto& x : v) x = g(rng);
      emb.audio[i] = v;
    }
    for (const auto& combo : combos) {
      std::vector<double> v(static_cast<std::size_t>(dim));
      for (auto& x : v) x = g(rng);
      emb.text[combo.rendered_text] = v;
      tvec.push_back(v);
    }
    std::vector<int> want;
    for (int i = 0; i < s; ++i) want.push_back(static_cast<int>(oracle::cosine_argmax(emb.audio[i], tvec)) + 1);
    const auto got = audio_seg::assign_labels(audio, segs, combos, emb);
    const std::string tag = "fixture " + std::to_string(fixtures);
    c.expect(got.combination == want, tag + " argmax");
    c.expect(!got.degraded, tag + " not degraded");

    for (auto& [id, v] : emb.audio) {
      const double k = scale(rng);
      for (auto& x : v) x *= k;
    }
    c.expect(audio_seg::assign_labels(audio, segs, combos, emb).combination == got.combination, tag + " scaled");
  }
  c.note = std::to_string(fixtures) + " fixtures, each also rescaled";
}

// ---------------------------------------------------------------------------

void lbru_contract(Check& c) {
  const std::vector<std::string> categories{"dog",     "cat",   "acoustic guitar", "piano",    "baby",
                                            "man",     "woman", "car",             "helicopter", "violin",
                                            "drum",    "lion",  "horse",           "bird",     "keyboard",
                                            "train",   "motorcycle", "cello",      "tabla",    "ukulele"};
  for (const auto& cat : categories) {
    const auto r = lbru::render_reference(cat);
    c.expect(r.text == "the " + cat + " that is making sound", "reference for " + cat);
  }

  std::vector<FrameImage> frames;
  for (int i = 0; i < 4; ++i) frames.push_back({i, Raster(8, 6, static_cast<std::uint8_t>(40 * i))});
  const VideoClip clip("v", {1, 1}, std::move(frames));
  const auto grid = symbolic::compose_grid(clip, {0, 1, 2, 3});
  const lbru::AudioTagList tags{{{"Dog", 0.9}, {"Bark", 0.8}, {"Speech", 0.4}, {"Music", 0.3}, {"Wind", 0.1}}, 5};
  const auto lib = prompting::PromptLibrary::builtin();
  int cases = 0;
  for (const std::string bad : {"", "I hear a dog.", "[1, 2]", "[\"\", \"  \"]", "!timeout"}) {
    testkit::FakeChat chat({bad});
    prompting::LlmChannel ch(chat, lib, nullptr, nullptr, 3);
    const auto out = lbru::identify_sounding_categories(lbru::build_prompt_bundle(tags, grid), tags, ch);
    const std::string tag = "reply '" + bad + "'";
    c.expect(chat.calls() == 3 && out.attempts == 3, tag + ": exactly 3 attempts");
    c.expect(out.degraded, tag + ": degraded");
    c.expect(out.set.categories == std::vector<std::string>{"dog", "bark", "speech", "music", "wind"},
             tag + ": falls back to all tags");
    ++cases;
  }
  c.note = std::to_string(categories.size()) + " categories, " + std::to_string(cases) + " unparseable replies";
}

// ---------------------------------------------------------------------------

VideoClip flat_clip(int frames, int w = 64, int h = 48) {
  std::vector<FrameImage> out;
  for (int i = 0; i < frames; ++i) out.push_back({i, Raster(w, h, static_cast<std::uint8_t>(3 * i))});
  return VideoClip("c", {10, 1}, std::move(out));
}

void gpt_ps_robustness(Check& c) {
  const auto clip = flat_clip(50);
  const std::vector<std::int64_t> idx{0, 10, 20, 30, 40};
  const auto grid = symbolic::compose_grid(clip, idx);
  const std::vector<BoundingBox> boxes{{2, 2, 20, 20, 0.4, ""}, {30, 5, 60, 40, 0.7, ""}, {10, 25, 25, 45, 0.3, ""}};
  const auto lib = prompting::PromptLibrary::builtin();
  const auto ref = Reference::from_text("the dog");

  // (frame reply, box reply, frame valid, box valid)
  struct Script {
    std::string frame, box;
    bool frame_ok, box_ok;
  };
  const std::vector<Script> suite{
      {"{\"frame\": 4}", "{\"box\": 3}", true, true},
      {"", "", false, false},
      {"I cannot tell.", "Box number one, probably.", false, false},
      {"{\"frame\": 0}", "{\"box\": 0}", false, false},
      {"{\"frame\": 6}", "{\"box\": 4}", false, false},
      {"{\"frame\": -2}", "{\"box\": -1}", false, false},
      {"{\"frame\": \"three\"}", "{\"box\": \"two\"}", false, false},
      {"frame 99", "box 77", false, false},
      {"{\"frame\": 2.5}", "{\"box\": 1.5}", false, false},
      {"!timeout", "!timeout", false, false},
      {"{\"frame\": null}", "{\"box\": null}", false, false},
      {"Reasoning...\n```json\n{\"frame\": 1}\n```", "nothing useful", true, false},
      {"[]", "```json\n{\"box\": 1}\n```", false, true},
  };
  int runs = 0;
  for (const auto& s : suite) {
    const std::string tag = "'" + s.frame + "' / '" + s.box + "'";
    testkit::FakeChat frame_chat({s.frame});
    prompting::LlmChannel fch(frame_chat, lib, nullptr, nullptr, 3);
    gpt_ps::PivotFrame f;
    gpt_ps::PivotBox b;
    try {
      f = gpt_ps::select_pivot_frame(grid, ref, fch);
      const auto marked = symbolic::paint_boxes(clip.frame(f.frame_index), boxes);
      const auto ctx = symbolic::compose_pivot_context(marked, clip, idx);
      testkit::FakeChat box_chat({s.box});
      prompting::LlmChannel bch(box_chat, lib, nullptr, nullptr, 3);
      b = gpt_ps::select_pivot_box(ctx, marked, ref, f.event_summary, bch);
    } catch (const std::exception& e) {
      c.expect(false, tag + " threw: " + e.what());
      continue;
    }
    const bool frame_valid = f.sampled_position >= 1 && f.sampled_position <= 5 &&
                             f.frame_index == idx[static_cast<std::size_t>(f.sampled_position - 1)];
    const bool box_valid = b.box_id >= 1 && b.box_id <= 3 && b.box == boxes[static_cast<std::size_t>(b.box_id - 1)] &&
                           b.box.valid_for(64, 48);
    c.expect(frame_valid && box_valid, tag + ": structurally valid selection");
    c.expect(f.degraded == !s.frame_ok, tag + ": frame degraded flag");
    c.expect(b.degraded == !s.box_ok, tag + ": box degraded flag");
    // Degraded fallbacks: middle sampled frame, top-score box.
    if (!s.frame_ok) c.expect(f.sampled_position == 3 && f.attempts == 3, tag + ": frame fallback");
    if (!s.box_ok) c.expect(b.box_id == 2 && b.attempts == 3, tag + ": box fallback");
    ++runs;
  }

  // Short-circuits.
  testkit::FakeChat chat({"{\"box\": 1}"});
  prompting::LlmChannel ch(chat, lib, nullptr, nullptr, 3);
  const auto one = symbolic::paint_boxes(clip.frame(10), {boxes[0]});
  const auto ctx = symbolic::compose_pivot_context(one, clip, idx);
  for (auto st : {gpt_ps::BoxStrategy::gpt, gpt_ps::BoxStrategy::describe, gpt_ps::BoxStrategy::nodesc,
                  gpt_ps::BoxStrategy::avs}) {
    const auto b = gpt_ps::select_pivot_box(ctx, one, ref, "", ch, st);
    c.expect(b.box_id == 1 && !b.degraded, "single candidate picked");
  }
  const auto single = gpt_ps::select_pivot_frame(symbolic::compose_grid(clip, {7}), ref, ch);
  c.expect(single.frame_index == 7, "single frame picked");
  c.expect(chat.calls() == 0, "short-circuits made " + std::to_string(chat.calls()) + " LLM calls");
  c.note = std::to_string(runs) + " scripted runs, 0 LLM calls on short-circuits";
}

// ---------------------------------------------------------------------------

bool in_outline(const BoundingBox& b, int t, int x, int y) {
  if (x < b.x_min || x >= b.x_max || y < b.y_min || y >= b.y_max) return false;
  return x < b.x_min + t || x >= b.x_max - t || y < b.y_min + t || y >= b.y_max - t;
}

std::vector<std::pair<std::string, std::vector<std::uint8_t>>> prompt_images(const fs::path& out) {
  auto snap = testkit::snapshot(out / "prompts");
  return snap;
}

void composition_determinism(Check& c) {
  const auto spec = testkit::oracle_video_set().front();
  const auto clip = testkit::to_clip(spec.video, testkit::render(spec.video));
  const std::vector<std::int64_t> idx{0, 10, 20, 30, 40};
  const std::vector<BoundingBox> boxes{{2, 2, 30, 20, 0.8, ""}, {20, 10, 60, 40, 0.6, ""}, {40, 30, 63, 47, 0.5, ""}};
  auto build = [&] {
    const auto g = symbolic::compose_grid(clip, idx);
    const auto m = symbolic::paint_boxes(clip.frame(20), boxes);
    return std::vector<Raster>{g.pixels, m.pixels, symbolic::compose_pivot_context(m, clip, idx).pixels};
  };
  const auto first = build();
  c.expect(build() == first, "second run identical");
  std::vector<std::vector<Raster>> results(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) threads.emplace_back([&, t] { results[static_cast<std::size_t>(t)] = build(); });
  for (auto& t : threads) t.join();
  for (const auto& r : results) c.expect(r == first, "threaded run identical");

  // Paint diff confined to outlines and ID plates.
  const auto m = symbolic::paint_boxes(clip.frame(20), boxes);
  const auto& src = clip.frame(20).pixels;
  std::size_t changed = 0, stray = 0;
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      const auto* p = m.pixels.at(x, y);
      const auto* q = src.at(x, y);
      if (p[0] == q[0] && p[1] == q[1] && p[2] == q[2]) continue;
      ++changed;
      bool explained = false;
      for (std::size_t i = 0; i < boxes.size(); ++i)
        explained = explained || in_outline(boxes[i], m.outline_thickness, x, y) || m.label_plates[i].contains(x, y);
      if (!explained) ++stray;
    }
  c.expect(changed > 0 && stray == 0, std::to_string(stray) + " changed pixels outside outlines and labels");

  // Prompt images written by full runs at different job counts.
  const auto dir = testkit::fresh_dir("acc_jobs");
  auto set = testkit::oracle_video_set();
  testkit::write_rvos_dataset(dir / "data", set);
  io::write_text(dir / "s.json", R"({"ground": [{"boxes": [
      {"x_min": 2, "y_min": 2, "x_max": 20, "y_max": 16, "score": 0.5},
      {"x_min": 28, "y_min": 10, "x_max": 46, "y_max": 30, "score": 0.7}]}],
      "chat": [{"match": {"contains": "Frame ID 1 is video frame"}, "reply": "{\"frame\": 2}"},
               {"match": {"contains": "numbered candidate boxes"}, "reply": "{\"box\": 1}"}]})");
  const auto be = backends::parse_backend_config(
      json{{"chat_vision", "mock:s.json"}, {"grounding", "mock:s.json"}, {"video_segmenter", "mock:boxfill"}}, dir);
  std::vector<std::vector<std::pair<std::string, std::vector<std::uint8_t>>>> dumps;
  for (int jobs : {1, 4}) {
    auto cfg = orchestrator::preset("ref_youtube_vos");
    cfg.dataset_root = dir / "data";
    cfg.jobs = jobs;
    cfg.dump_prompts = true;
    app::Engine engine(cfg, be);
    const auto out = dir / ("out" + std::to_string(jobs));
    c.expect(engine.run(out).failed == 0, "run with jobs " + std::to_string(jobs));
    dumps.push_back(prompt_images(out));
  }
  c.expect(!dumps[0].empty() && dumps[0] == dumps[1], "prompt images identical for jobs 1 and 4");
  c.note = std::to_string(dumps[0].size()) + " prompt images identical across jobs, " + std::to_string(changed) +
           " painted pixels all on outlines or labels";
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------

void silent_frames(Check& c) {
  const auto spec = testkit::alternating_avs_video();
  auto truth = testkit::avs_truth(spec);
  auto counters = std::make_shared<backends::CallCounters>();
  const auto set = backends::guarded(backends::oracle_backends(truth), counters);
  const auto cfg = orchestrator::preset("avs_s4");
  const auto lib = prompting::PromptLibrary::builtin();
  prompting::LlmChannel llm(*set.chat, lib, nullptr, nullptr, cfg.llm_attempts);
  orchestrator::PipelineContext ctx{cfg, set, llm, nullptr};
  const auto out = orchestrator::run_avs_video(*truth->clip, *truth->audio, ctx);
  c.expect(out.references.size() == 2, "two references");
  if (out.references.size() != 2) return;
  const auto& a = out.references[0].masks.silence_flags;
  const auto& b = out.references[1].masks.silence_flags;
  c.expect(a.size() == 10 && b.size() == 10, "flags per frame");
  std::size_t silent_a = 0;
  for (std::size_t f = 0; f < a.size() && f < b.size(); ++f) {
    c.expect(a[f] != b[f], "frame " + std::to_string(f) + " complementary");
    silent_a += a[f];
  }
  c.expect(silent_a > 0 && silent_a < a.size(), "both states occur");
  for (const auto& r : out.references) {
    auto again = r.masks;
    audio_seg::apply_silence(again, r.masks.silence_flags);
    c.expect(again.masks == r.masks.masks && again.silence_flags == r.masks.silence_flags, "idempotent");
    for (std::size_t f = 0; f < r.masks.masks.size(); ++f)
      if (r.masks.silence_flags[f]) c.expect(!r.masks.masks[f].any(), "silent frame masked out");
  }
  c.note = "silent frames " + std::to_string(silent_a) + "/" + std::to_string(b.size() - silent_a) +
           ", complementary and idempotent";
}

// ---------------------------------------------------------------------------

std::vector<json> events(const std::vector<json>& log, const std::string& kind) {
  std::vector<json> out;
  for (const auto& e : log)
    if (e.value("event", "") == kind) out.push_back(e);
  return out;
}

void ablations(Check& c) {
  const auto dir = testkit::fresh_dir("acc_ablate");
  auto set = testkit::oracle_video_set();
  set.resize(1);  // walk: 100 frames, two clips
  testkit::write_rvos_dataset(dir / "data", set);
  io::write_text(dir / "s.json", R"({"ground": [{"boxes": [
      {"x_min": 2, "y_min": 2, "x_max": 20, "y_max": 16, "score": 0.5},
      {"x_min": 28, "y_min": 10, "x_max": 46, "y_max": 30, "score": 0.7},
      {"x_min": 10, "y_min": 22, "x_max": 26, "y_max": 38, "score": 0.7}]}],
      "chat": [{"reply": "{\"frame\": 1, \"box\": 1}"}]})");
  const auto be = backends::parse_backend_config(
      json{{"chat_vision", "mock:s.json"}, {"grounding", "mock:s.json"}, {"video_segmenter", "mock:boxfill"}}, dir);
  int checked = 0;
  for (const std::string frame : {"first", "middle", "last"}) {
    auto cfg = orchestrator::preset("ref_youtube_vos");
    cfg.dataset_root = dir / "data";
    cfg.apply_ablation("frame=" + frame);
    cfg.apply_ablation("box=topscore");
    app::Engine engine(cfg, be);
    const auto out = dir / ("out_" + frame);
    const auto summary = engine.run(out);
    c.expect(summary.failed == 0, frame + ": run ok");
    if (summary.failed) continue;
    c.expect(summary.samples[0].report["calls"]["chat"] == 0, frame + ": no chat calls");
    for (const auto& vid_expr : {std::string("0"), std::string("1")}) {
      const auto log = prompting::read_audit_log(out / "audit" / app::audit_file_name("walk", vid_expr));
      const auto clips = events(log, "clip");
      const auto frames = events(log, "pivot_frame");
      const auto cands = events(log, "candidates");
      const auto boxes = events(log, "pivot_box");
      c.expect(events(log, "llm_call").empty(), frame + ": no llm_call events");
      c.expect(frames.size() == clips.size() && boxes.size() == clips.size(), frame + ": one decision per clip");
      for (std::size_t k = 0; k < clips.size() && k < frames.size() && k < boxes.size() && k < cands.size(); ++k) {
        const auto sampled = clips[k]["sampled"].get<std::vector<std::int64_t>>();
        const std::size_t m = sampled.size();
        const std::size_t pos = frame == "first" ? 0 : frame == "last" ? m - 1 : (m + 1) / 2 - 1;
        c.expect(frames[k]["strategy"] == frame && frames[k]["llm"] == false, frame + ": rule-based frame");
        c.expect(frames[k]["frame_index"] == sampled[pos], frame + ": frame index");
        const auto& listed = cands[k]["boxes"];
        std::size_t best = 0;
        for (std::size_t i = 1; i < listed.size(); ++i)
          if (listed[i]["score"].get<double>() > listed[best]["score"].get<double>()) best = i;
        c.expect(boxes[k]["strategy"] == "topscore" && boxes[k]["llm"] == false, frame + ": rule-based box");
        c.expect(boxes[k]["box_id"] == best + 1 && boxes[k]["box"] == listed[best], frame + ": top-score box");
        ++checked;
      }
    }
  }
  c.expect(checked == 12, "decisions checked: " + std::to_string(checked));
  c.note = std::to_string(checked) + " clip decisions checked in audit logs";
  fs::remove_all(dir);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"oracle end-to-end", oracle_end_to_end},
      {"metric oracle equivalence", metric_oracles},
      {"clip-plan determinism", clip_plan},
      {"label assignment equivalence", label_assignment},
      {"LBRU contract", lbru_contract},
      {"GPT-PS robustness", gpt_ps_robustness},
      {"composition determinism", composition_determinism},
      {"silent-frame filtering", silent_frames},
      {"ablation wiring", ablations},
  };
  int failed = 0;
  for (const auto& [name, body] : criteria) {
    Check c;
    try {
      body(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    if (c.failures.empty()) {
      std::printf("PASS  %-30s %s\n", name.c_str(), c.note.c_str());
    } else {
      ++failed;
      std::printf("FAIL  %-30s %s\n", name.c_str(), c.failures.front().c_str());
      for (std::size_t i = 1; i < c.failures.size(); ++i) std::printf("      %-30s %s\n", "", c.failures[i].c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
