#include "alref/eval/datasets.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include <nlohmann/json.hpp>

#include "alref/core/error.hpp"
#include "alref/io/files.hpp"
#include "alref/io/jpeg.hpp"
#include "alref/io/png.hpp"
#include "alref/io/rle.hpp"
#include "alref/io/wav.hpp"

namespace alref::eval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Numeric strings compare by value, everything else lexicographically.
bool natural_less(const std::string& a, const std::string& b) {
  if (all_digits(a) && all_digits(b)) {
    const auto ta = a.substr(std::min(a.find_first_not_of('0'), a.size()));
    const auto tb = b.substr(std::min(b.find_first_not_of('0'), b.size()));
    if (ta.size() != tb.size()) return ta.size() < tb.size();
    if (ta != tb) return ta < tb;
  }
  return a < b;
}

std::optional<fs::path> find_image(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".jpg", ".jpeg", ".png", ".JPG", ".PNG"}) {
    fs::path p = dir / (stem + ext);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

std::vector<std::string> as_string_list(const json& j) {
  std::vector<std::string> out;
  auto one = [&](const json& v) {
    if (v.is_string()) out.push_back(v.get<std::string>());
    else if (v.is_number_integer()) out.push_back(std::to_string(v.get<long long>()));
    else fail(ErrorCode::io, "expected string or integer ids");
  };
  if (j.is_array()) {
    for (const auto& v : j) one(v);
  } else if (!j.is_null()) {
    one(j);
  }
  return out;
}

json read_json(const fs::path& p) {
  try {
    return json::parse(io::read_text(p));
  } catch (const json::exception& e) {
    fail(ErrorCode::io, "cannot parse " + p.string() + ": " + e.what());
  }
}

// Decodes every referenced image; returns a problem description or empty.
std::string verify_sample(const DatasetSample& s) {
  for (const auto& p : s.frame_paths) {
    try {
      io::decode_image(io::read_bytes(p));
    } catch (const Error& e) {
      return "corrupt frame " + p.string() + ": " + e.what();
    }
  }
  for (const auto& p : s.annotation_paths) {
    if (p.empty()) continue;
    try {
      io::decode_png_labels(io::read_bytes(p));
    } catch (const Error& e) {
      return "corrupt annotation " + p.string() + ": " + e.what();
    }
  }
  return {};
}

void load_rvos(Dataset& d, const DatasetOptions& options) {
  const fs::path meta_path = d.root / "meta_expressions.json";
  if (!fs::is_regular_file(meta_path)) fail(ErrorCode::io, "missing " + meta_path.string());
  const json meta = read_json(meta_path);
  if (!meta.contains("videos") || !meta["videos"].is_object())
    fail(ErrorCode::io, meta_path.string() + " has no 'videos' object");

  std::vector<std::string> video_ids;
  for (auto it = meta["videos"].begin(); it != meta["videos"].end(); ++it) video_ids.push_back(it.key());
  std::sort(video_ids.begin(), video_ids.end(), natural_less);

  const bool mevis = d.layout == DatasetLayout::mevis;
  const bool have_mask_dict = fs::is_regular_file(d.root / "mask_dict.json");
  if (mevis && !have_mask_dict) d.warnings.push_back("mask_dict.json not found; ground truth unavailable");

  for (const auto& vid : video_ids) {
    const json& v = meta["videos"][vid];
    std::vector<std::string> frames;
    try {
      frames = as_string_list(v.at("frames"));
    } catch (const std::exception&) {
      d.warnings.push_back(vid + ": no frame list in metadata; video skipped");
      ++d.skipped;
      continue;
    }
    const json empty_expressions = json::object();
    const json& expressions = v.contains("expressions") ? v["expressions"] : empty_expressions;
    std::vector<std::string> eids;
    for (auto it = expressions.begin(); it != expressions.end(); ++it) eids.push_back(it.key());
    std::sort(eids.begin(), eids.end(), natural_less);

    // Frame files are shared by every expression of the video.
    std::vector<fs::path> frame_paths;
    std::vector<fs::path> annotation_paths;
    std::string missing;
    for (const auto& name : frames) {
      auto p = find_image(d.root / "JPEGImages" / vid, name);
      if (!p) {
        missing += (missing.empty() ? "" : ", ") + name;
        continue;
      }
      frame_paths.push_back(*p);
      const fs::path a = d.root / "Annotations" / vid / (name + ".png");
      annotation_paths.push_back(!mevis && fs::is_regular_file(a) ? a : fs::path());
    }
    if (frames.empty() || !missing.empty()) {
      const std::string why = frames.empty() ? "no frames listed" : "missing frames " + missing;
      for (const auto& eid : eids) d.warnings.push_back(vid + "/" + eid + ": " + why + "; sample skipped");
      d.skipped += eids.size();
      continue;
    }

    for (const auto& eid : eids) {
      const json& e = expressions[eid];
      DatasetSample s;
      s.video_id = vid;
      s.expression_id = eid;
      s.expression = e.value("exp", "");
      s.frame_names = frames;
      s.frame_paths = frame_paths;
      s.fps = options.default_fps;
      if (s.expression.empty()) {
        d.warnings.push_back(s.key() + ": empty expression; sample skipped");
        ++d.skipped;
        continue;
      }
      try {
        if (e.contains("anno_id")) {
          auto ids = as_string_list(e["anno_id"]);
          if (mevis) s.mask_ids = ids;
          else if (!ids.empty()) s.annotator = ids.front();
        }
        if (!mevis && e.contains("obj_id")) {
          for (const auto& id : as_string_list(e["obj_id"])) s.object_ids.push_back(static_cast<std::uint32_t>(std::stoul(id)));
          s.annotation_paths = annotation_paths;
        }
      } catch (const std::exception& ex) {
        d.warnings.push_back(s.key() + ": bad object ids (" + ex.what() + "); sample skipped");
        ++d.skipped;
        continue;
      }
      if (mevis && !have_mask_dict) s.mask_ids.clear();
      d.samples.push_back(std::move(s));
    }
  }
}

void load_avs(Dataset& d, const DatasetOptions& options) {
  const fs::path meta_path = d.root / "metadata.csv";
  if (!fs::is_regular_file(meta_path)) fail(ErrorCode::io, "missing " + meta_path.string());
  const auto rows = parse_csv(io::read_text(meta_path));
  if (rows.empty()) fail(ErrorCode::io, meta_path.string() + " is empty");
  const auto& header = rows.front();
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto uid_col = column("uid");
  if (!uid_col) fail(ErrorCode::io, meta_path.string() + " has no 'uid' column");
  const auto label_col = column("label");
  const auto fps_col = column("fps");

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() <= *uid_col) {
      d.warnings.push_back("metadata.csv row " + std::to_string(r + 1) + ": too few columns; skipped");
      ++d.skipped;
      continue;
    }
    DatasetSample s;
    s.video_id = row[*uid_col];
    s.expression_id = "0";
    s.fps = options.default_fps;
    if (label_col && *label_col < row.size() && !row[*label_col].empty()) {
      std::string labels = row[*label_col];
      std::size_t pos = 0;
      while (pos <= labels.size()) {
        auto next = labels.find(';', pos);
        std::string part = labels.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        if (!part.empty()) s.categories.push_back(part);
        if (next == std::string::npos) break;
        pos = next + 1;
      }
    }
    if (fps_col && *fps_col < row.size() && !row[*fps_col].empty()) {
      const std::string& f = row[*fps_col];
      try {
        const auto slash = f.find('/');
        s.fps = slash == std::string::npos ? Rational{std::stoll(f), 1}
                                           : Rational::reduced(std::stoll(f.substr(0, slash)), std::stoll(f.substr(slash + 1)));
      } catch (const std::exception&) {
        d.warnings.push_back(s.key() + ": bad fps '" + f + "'; sample skipped");
        ++d.skipped;
        continue;
      }
    }

    const fs::path dir = d.root / s.video_id;
    const fs::path frames_dir = dir / "frames";
    if (!fs::is_directory(frames_dir)) {
      d.warnings.push_back(s.key() + ": missing frames directory; sample skipped");
      ++d.skipped;
      continue;
    }
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(frames_dir)) {
      const auto ext = entry.path().extension().string();
      if (ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".JPG" || ext == ".PNG")
        stems.push_back(entry.path().stem().string());
    }
    std::sort(stems.begin(), stems.end(), natural_less);
    if (stems.empty()) {
      d.warnings.push_back(s.key() + ": no frames; sample skipped");
      ++d.skipped;
      continue;
    }
    const fs::path labels_dir = fs::is_directory(dir / "labels") ? dir / "labels" : dir / "labels_rgb";
    for (const auto& stem : stems) {
      s.frame_names.push_back(stem);
      s.frame_paths.push_back(*find_image(frames_dir, stem));
      const fs::path a = labels_dir / (stem + ".png");
      s.annotation_paths.push_back(fs::is_regular_file(a) ? a : fs::path());
    }
    s.audio_path = dir / "audio.wav";
    if (!fs::is_regular_file(s.audio_path)) {
      d.warnings.push_back(s.key() + ": missing audio.wav; sample skipped");
      ++d.skipped;
      continue;
    }
    d.samples.push_back(std::move(s));
  }
  std::stable_sort(d.samples.begin(), d.samples.end(),
                   [](const DatasetSample& a, const DatasetSample& b) { return natural_less(a.video_id, b.video_id); });
}

struct MaskDictCache {
  std::mutex mutex;
  std::map<fs::path, std::shared_ptr<const json>> docs;
};

MaskDictCache& mask_dict_cache() {
  static MaskDictCache cache;
  return cache;
}

std::shared_ptr<const json> mask_dict(const fs::path& p) {
  auto& cache = mask_dict_cache();
  std::lock_guard lock(cache.mutex);
  auto it = cache.docs.find(p);
  if (it != cache.docs.end()) return it->second;
  auto doc = std::make_shared<const json>(read_json(p));
  cache.docs[p] = doc;
  return doc;
}

io::LabelPlane read_plane(const fs::path& p, int height, int width) {
  auto plane = io::decode_png_labels(io::read_bytes(p));
  if (plane.width != width || plane.height != height) {
    fail(ErrorCode::io, p.string() + " is " + std::to_string(plane.width) + "x" + std::to_string(plane.height) +
                            ", video is " + std::to_string(width) + "x" + std::to_string(height));
  }
  return plane;
}

}  // namespace

const char* to_string(DatasetLayout l) {
  switch (l) {
    case DatasetLayout::ref_youtube_vos: return "ref_youtube_vos";
    case DatasetLayout::ref_davis17: return "ref_davis17";
    case DatasetLayout::mevis: return "mevis";
    case DatasetLayout::avsbench: return "avsbench";
  }
  return "ref_youtube_vos";
}

DatasetLayout parse_layout(const std::string& s) {
  for (auto l : {DatasetLayout::ref_youtube_vos, DatasetLayout::ref_davis17, DatasetLayout::mevis,
                 DatasetLayout::avsbench}) {
    if (s == to_string(l)) return l;
  }
  fail(ErrorCode::config, "unknown dataset layout '" + s + "'");
}

bool DatasetSample::has_ground_truth() const {
  if (!mask_ids.empty()) return true;
  const bool any_annotation =
      std::any_of(annotation_paths.begin(), annotation_paths.end(), [](const fs::path& p) { return !p.empty(); });
  if (!audio_path.empty()) return any_annotation;
  return any_annotation && !object_ids.empty();
}

Dataset load_dataset(DatasetLayout layout, const fs::path& root, const DatasetOptions& options) {
  if (!fs::is_directory(root)) fail(ErrorCode::io, "dataset root " + root.string() + " is not a directory");
  Dataset d;
  d.layout = layout;
  d.root = root;
  if (layout == DatasetLayout::avsbench) load_avs(d, options);
  else load_rvos(d, options);

  if (options.verify_images) {
    std::vector<DatasetSample> kept;
    for (auto& s : d.samples) {
      auto problem = verify_sample(s);
      if (problem.empty()) {
        kept.push_back(std::move(s));
      } else {
        d.warnings.push_back(s.key() + ": " + problem + "; sample skipped");
        ++d.skipped;
      }
    }
    d.samples = std::move(kept);
  }
  return d;
}

VideoClip load_video(const DatasetSample& sample) {
  std::vector<FrameImage> frames;
  frames.reserve(sample.frame_paths.size());
  for (std::size_t i = 0; i < sample.frame_paths.size(); ++i) {
    try {
      frames.push_back({static_cast<std::int64_t>(i), io::decode_image(io::read_bytes(sample.frame_paths[i]))});
    } catch (const Error& e) {
      fail(ErrorCode::io, sample.key() + ": " + e.what());
    }
  }
  try {
    return VideoClip(sample.video_id, sample.fps, std::move(frames));
  } catch (const Error& e) {
    fail(ErrorCode::io, sample.key() + ": " + e.what());
  }
}

AudioClip load_audio(const DatasetSample& sample) {
  if (sample.audio_path.empty()) fail(ErrorCode::io, sample.key() + ": no audio track");
  try {
    return io::decode_wav(io::read_bytes(sample.audio_path));
  } catch (const Error& e) {
    fail(ErrorCode::io, sample.key() + ": " + e.what());
  }
}

GroundTruth load_ground_truth(const Dataset& dataset, const DatasetSample& sample, int height, int width) {
  if (!sample.has_ground_truth()) fail(ErrorCode::io, sample.key() + ": no ground truth available");
  const std::size_t T = sample.frame_names.size();
  GroundTruth gt;
  gt.masks.assign(T, BinaryMask(height, width));
  gt.annotated.assign(T, false);

  if (dataset.layout == DatasetLayout::mevis) {
    const auto doc = mask_dict(dataset.root / "mask_dict.json");
    for (const auto& id : sample.mask_ids) {
      if (!doc->contains(id)) fail(ErrorCode::io, sample.key() + ": anno_id " + id + " missing from mask_dict.json");
      const json& per_frame = (*doc)[id];
      if (!per_frame.is_array() || per_frame.size() != T)
        fail(ErrorCode::io, sample.key() + ": anno_id " + id + " does not list one mask per frame");
      for (std::size_t f = 0; f < T; ++f) {
        const json& rle = per_frame[f];
        if (rle.is_null()) continue;
        const auto size = rle.at("size");
        if (size.at(0).get<int>() != height || size.at(1).get<int>() != width)
          fail(ErrorCode::io, sample.key() + ": RLE size disagrees with the video");
        const auto m = io::coco_rle_decode(rle.at("counts").get<std::string>(), height, width);
        for (std::size_t i = 0; i < m.bits.size(); ++i) gt.masks[f].bits[i] |= m.bits[i];
      }
    }
    gt.annotated.assign(T, true);
    gt.objects.push_back({sample.expression, gt.masks});
    return gt;
  }

  const bool avs = dataset.layout == DatasetLayout::avsbench;
  const std::size_t n_categories = sample.categories.size();
  std::vector<std::vector<BinaryMask>> per_category(avs ? n_categories : 0,
                                                    std::vector<BinaryMask>(T, BinaryMask(height, width)));
  for (std::size_t f = 0; f < T; ++f) {
    const auto& path = sample.annotation_paths[f];
    if (path.empty()) continue;
    const auto plane = read_plane(path, height, width);
    gt.annotated[f] = true;
    for (std::size_t i = 0; i < plane.labels.size(); ++i) {
      const std::uint32_t v = plane.labels[i];
      if (avs) {
        if (v == 0) continue;
        gt.masks[f].bits[i] = 1;
        if (n_categories == 1) per_category[0][f].bits[i] = 1;
        else if (plane.indexed && v <= n_categories) per_category[v - 1][f].bits[i] = 1;
      } else if (std::find(sample.object_ids.begin(), sample.object_ids.end(), v) != sample.object_ids.end()) {
        gt.masks[f].bits[i] = 1;
      }
    }
  }
  if (avs) {
    for (std::size_t c = 0; c < n_categories; ++c) gt.objects.push_back({sample.categories[c], per_category[c]});
  } else {
    gt.objects.push_back({sample.expression, gt.masks});
  }
  return gt;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    any = true;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) fail(ErrorCode::io, "unterminated quoted CSV field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace alref::eval
