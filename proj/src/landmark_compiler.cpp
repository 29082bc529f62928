#include "axs/landmark_compiler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "axs/error.hpp"
#include "axs/text.hpp"

namespace axs {

namespace {

using json = nlohmann::json;

Vec3d read_point(const json& p, const std::string& where, double* visibility = nullptr) {
  if (!p.is_array() || p.size() < 3 || p.size() > 4)
    throw Error(Errc::ParseError, where + ": landmark must be [x,y,z] or [x,y,z,visibility]");
  for (const auto& v : p)
    if (!v.is_number()) throw Error(Errc::ParseError, where + ": non-numeric landmark coordinate");
  if (visibility) *visibility = p.size() == 4 ? p[3].get<double>() : 1.0;
  return {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
}

template <std::size_t N>
std::array<Vec3d, N> read_points(const json& arr, const std::string& where, const char* what,
                                 std::array<double, N>* visibility = nullptr) {
  if (!arr.is_array()) throw Error(Errc::ParseError, where + ": '" + what + "' must be an array");
  if (arr.size() != N)
    throw Error(Errc::WrongLandmarkCount,
                where + ": '" + what + "' has " + std::to_string(arr.size()) + " landmarks, expected " + std::to_string(N));
  std::array<Vec3d, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = read_point(arr[i], where, visibility ? &(*visibility)[i] : nullptr);
  return out;
}

bool valid_gloss_id(const std::string& g) {
  return !g.empty() && std::all_of(g.begin(), g.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

Vec3d sub(const Vec3d& a, const Vec3d& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
double norm(const Vec3d& a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }
Vec3d lerp(const Vec3d& a, const Vec3d& b, double u) {
  return {a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u, a.z + (b.z - a.z) * u};
}

template <typename Points>
void transform_points(Points& pts, const Vec3d& origin, double scale) {
  for (auto& p : pts) p = {(p.x - origin.x) * scale, (p.y - origin.y) * scale, (p.z - origin.z) * scale};
}

template <std::size_t N>
std::array<Vec3d, N> lerp_points(const std::array<Vec3d, N>& a, const std::array<Vec3d, N>& b, double u) {
  std::array<Vec3d, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = lerp(a[i], b[i], u);
  return out;
}

template <std::size_t N>
double sum_distance(const std::array<Vec3d, N>& a, const std::array<Vec3d, N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += norm(sub(a[i], b[i]));
  return s;
}

template <std::size_t N>
std::array<Vec3f, N> to_float(const std::array<Vec3d, N>& a) {
  std::array<Vec3f, N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = {static_cast<float>(a[i].x), static_cast<float>(a[i].y), static_cast<float>(a[i].z)};
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// parsing

LandmarkFile parse_landmark_json(const json& doc, const std::string& source) {
  if (!doc.is_object()) throw Error(Errc::ParseError, source + ": document is not an object");
  if (!doc.contains("gloss") || !doc["gloss"].is_string()) throw Error(Errc::ParseError, source + ": missing 'gloss'");

  LandmarkFile out;
  out.source = source;
  out.gloss_id = text::to_upper(doc["gloss"].get<std::string>());
  if (!valid_gloss_id(out.gloss_id))
    throw Error(Errc::ParseError, source + ": gloss '" + out.gloss_id + "' must match [A-Z0-9_]+");
  if (!doc.contains("fps") || !doc["fps"].is_number() || !(doc["fps"].get<double>() > 0.0))
    throw Error(Errc::ParseError, source + ": missing or non-positive 'fps'");
  out.fps = doc["fps"].get<double>();

  const std::string coords = doc.value("coords", std::string("image"));
  if (coords == "image") out.coords = CoordConvention::Image;
  else if (coords == "world") out.coords = CoordConvention::World;
  else throw Error(Errc::ParseError, source + ": 'coords' must be image or world");

  double aspect = 1.0;
  if (doc.contains("image_width") && doc.contains("image_height")) {
    const double w = doc["image_width"].get<double>();
    const double h = doc["image_height"].get<double>();
    if (!(w > 0 && h > 0)) throw Error(Errc::ParseError, source + ": image size must be positive");
    aspect = w / h;
  }
  auto convert = [&](auto& pts) {
    if (out.coords != CoordConvention::Image) return;
    for (auto& p : pts) p = {p.x * aspect, -p.y, p.z * aspect};
  };

  if (!doc.contains("frames") || !doc["frames"].is_array()) throw Error(Errc::ParseError, source + ": missing 'frames'");
  const auto& frames = doc["frames"];
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string where = source + " frame " + std::to_string(i);
    const auto& jf = frames[i];
    if (!jf.is_object()) throw Error(Errc::ParseError, where + ": frame is not an object");
    if (!jf.contains("pose")) throw Error(Errc::ParseError, where + ": missing 'pose'");

    SkeletonFrame f;
    f.t = jf.contains("t") ? jf["t"].get<double>() : static_cast<double>(i) / out.fps;
    f.pose = read_points<kPoseLandmarks>(jf["pose"], where, "pose", &f.visibility);
    convert(f.pose);
    for (auto [key, slot] : {std::pair{"left_hand", &f.left_hand}, std::pair{"right_hand", &f.right_hand}}) {
      if (jf.contains(key) && !jf[key].is_null()) {
        *slot = read_points<kHandLandmarks>(jf[key], where, key);
        convert(**slot);
      }
    }
    if (jf.contains("face") && !jf["face"].is_null()) {
      const auto& jface = jf["face"];
      if (!jface.is_array()) throw Error(Errc::ParseError, where + ": 'face' must be an array");
      if (jface.size() != kRawFaceLandmarks)
        throw Error(Errc::WrongLandmarkCount, where + ": 'face' has " + std::to_string(jface.size()) + " landmarks, expected 468");
      std::vector<Vec3d> face;
      face.reserve(kRawFaceLandmarks);
      for (const auto& p : jface) face.push_back(read_point(p, where));
      convert(face);
      f.face = std::move(face);
    }
    if (!out.frames.empty() && f.t < out.frames.back().t)
      throw Error(Errc::ParseError, where + ": timestamps decrease");
    out.frames.push_back(std::move(f));
  }
  return out;
}

LandmarkFile parse_landmark_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw Error(Errc::ParseError, path.string() + ": invalid JSON");
  return parse_landmark_json(doc, path.string());
}

// ---------------------------------------------------------------------------
// normalisation

std::vector<SkeletonFrame> normalize_frames(std::span<const SkeletonFrame> frames, const NormalizeOptions& options) {
  std::vector<SkeletonFrame> out(frames.begin(), frames.end());

  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& f = out[i];
    const Vec3d& ls = f.pose[kLeftShoulder];
    const Vec3d& rs = f.pose[kRightShoulder];
    const double width = norm(sub(ls, rs));
    if (!(width >= 1e-6)) throw Error(Errc::DegeneratePose, "frame " + std::to_string(i) + ": shoulders coincide");
    const Vec3d origin{(ls.x + rs.x) / 2, (ls.y + rs.y) / 2, (ls.z + rs.z) / 2};
    const double scale = 1.0 / width;

    transform_points(f.pose, origin, scale);
    if (f.left_hand) transform_points(*f.left_hand, origin, scale);
    if (f.right_hand) transform_points(*f.right_hand, origin, scale);

    if (f.face && options.keep_face) {
      if (f.face->size() == kRawFaceLandmarks) {
        std::vector<Vec3d> reduced;
        reduced.reserve(kFaceLandmarks);
        for (auto idx : kFaceSubset) reduced.push_back((*f.face)[idx]);
        f.face = std::move(reduced);
      }
      if (f.face->size() == kFaceLandmarks) transform_points(*f.face, origin, scale);
      else f.face.reset();
    } else {
      f.face.reset();
    }
  }

  // Hold-fill hands in skeleton space: last observed pose, or the first
  // observed one for a leading gap.
  for (auto member : {&SkeletonFrame::left_hand, &SkeletonFrame::right_hand}) {
    const auto first = std::find_if(out.begin(), out.end(), [&](const SkeletonFrame& f) { return (f.*member).has_value(); });
    if (first == out.end()) continue;
    auto held = *((*first).*member);
    for (auto& f : out) {
      if ((f.*member).has_value()) held = *(f.*member);
      else f.*member = held;
    }
  }

  // Never-observed hands rest at the matching wrist.
  for (auto& f : out) {
    if (!f.left_hand) f.left_hand.emplace().fill(f.pose[kLeftWrist]);
    if (!f.right_hand) f.right_hand.emplace().fill(f.pose[kRightWrist]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// resampling

std::vector<SkeletonFrame> resample_30fps(std::span<const SkeletonFrame> frames) {
  std::vector<const SkeletonFrame*> in;
  for (const auto& f : frames)
    if (in.empty() || f.t > in.back()->t) in.push_back(&f);
  if (in.size() < 2) throw Error(Errc::TooShort, "need at least two distinct timestamps");

  const double t0 = in.front()->t;
  const double t_last = in.back()->t;
  const double span = t_last - t0;
  if (span < 1.0 / kClipFps - 1e-12) throw Error(Errc::TooShort, "span shorter than one 30 fps frame");

  const auto count = static_cast<std::size_t>(std::floor(span * kClipFps + 1e-9)) + 1;
  std::vector<SkeletonFrame> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double rel = static_cast<double>(k) / kClipFps;
    const double ta = t0 + rel;
    SkeletonFrame f;
    if (ta >= t_last || std::abs(ta - t_last) <= 1e-9) {
      f = *in.back();
    } else {
      while (seg + 1 < in.size() - 1 && in[seg + 1]->t <= ta) ++seg;
      const SkeletonFrame& a = *in[seg];
      const SkeletonFrame& b = *in[seg + 1];
      if (ta == a.t) {
        f = a;
      } else {
        const double u = (ta - a.t) / (b.t - a.t);
        f.pose = lerp_points(a.pose, b.pose, u);
        for (std::size_t i = 0; i < kPoseLandmarks; ++i)
          f.visibility[i] = a.visibility[i] + (b.visibility[i] - a.visibility[i]) * u;
        if (a.left_hand && b.left_hand) f.left_hand = lerp_points(*a.left_hand, *b.left_hand, u);
        else f.left_hand = a.left_hand ? a.left_hand : b.left_hand;
        if (a.right_hand && b.right_hand) f.right_hand = lerp_points(*a.right_hand, *b.right_hand, u);
        else f.right_hand = a.right_hand ? a.right_hand : b.right_hand;
        if (a.face && b.face && a.face->size() == b.face->size()) {
          std::vector<Vec3d> face(a.face->size());
          for (std::size_t i = 0; i < face.size(); ++i) face[i] = lerp((*a.face)[i], (*b.face)[i], u);
          f.face = std::move(face);
        }
      }
    }
    f.t = rel;
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// idle trimming

double mean_displacement(const SkeletonFrame& a, const SkeletonFrame& b) {
  double total = sum_distance(a.pose, b.pose);
  std::size_t n = kPoseLandmarks;
  if (a.left_hand && b.left_hand) {
    total += sum_distance(*a.left_hand, *b.left_hand);
    n += kHandLandmarks;
  }
  if (a.right_hand && b.right_hand) {
    total += sum_distance(*a.right_hand, *b.right_hand);
    n += kHandLandmarks;
  }
  return total / static_cast<double>(n);
}

std::vector<SkeletonFrame> trim_idle(std::span<const SkeletonFrame> frames, double threshold) {
  const std::size_t n = frames.size();
  if (threshold <= 0.0 || n <= 2) return {frames.begin(), frames.end()};

  // A lead-in frame is idle when it has not moved since the frame before it;
  // a lead-out frame is idle when it does not move before the frame after it.
  auto idle_lead = [&](std::size_t i) {
    return i == 0 ? mean_displacement(frames[0], frames[1]) < threshold
                  : mean_displacement(frames[i - 1], frames[i]) < threshold;
  };
  auto idle_trail = [&](std::size_t i) {
    return i == n - 1 ? mean_displacement(frames[n - 2], frames[n - 1]) < threshold
                      : mean_displacement(frames[i], frames[i + 1]) < threshold;
  };

  std::size_t start = 0;
  while (start < n && idle_lead(start)) ++start;
  if (start == n) return {frames.begin(), frames.begin() + 2};
  std::size_t end = n - 1;
  while (end > start && idle_trail(end)) --end;
  if (end == start) {
    if (end + 1 < n) ++end;
    else --start;
  }
  return {frames.begin() + static_cast<std::ptrdiff_t>(start), frames.begin() + static_cast<std::ptrdiff_t>(end) + 1};
}

// ---------------------------------------------------------------------------

SignClip to_sign_clip(const std::string& gloss_id, std::span<const SkeletonFrame> frames) {
  if (frames.size() < 2) throw Error(Errc::TooShort, gloss_id + ": clip needs at least two frames");
  SignClip clip;
  clip.gloss_id = gloss_id;
  clip.frames.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& f = frames[k];
    if (!f.left_hand || !f.right_hand) throw Error(Errc::InvalidParams, gloss_id + ": frames must be normalised first");
    Keyframe kf;
    kf.t = static_cast<double>(k) / kClipFps;
    kf.pose = to_float(f.pose);
    kf.left_hand = to_float(*f.left_hand);
    kf.right_hand = to_float(*f.right_hand);
    if (f.face && f.face->size() == kFaceLandmarks) {
      kf.face.emplace();
      for (std::size_t i = 0; i < kFaceLandmarks; ++i)
        (*kf.face)[i] = {static_cast<float>((*f.face)[i].x), static_cast<float>((*f.face)[i].y),
                         static_cast<float>((*f.face)[i].z)};
    }
    clip.frames.push_back(std::move(kf));
  }
  return clip;
}

SignClip build_clip(const LandmarkFile& file, const CompileOptions& options) {
  const auto normalized = normalize_frames(file.frames, {options.keep_face});
  const auto resampled = resample_30fps(normalized);
  const auto trimmed = trim_idle(resampled, options.trim_threshold);
  return to_sign_clip(file.gloss_id, trimmed);
}

// ---------------------------------------------------------------------------
// dictionary compilation

CompileReport compile_dictionary(const std::filesystem::path& input_dir, const std::filesystem::path& output_path,
                                 const CompileOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(input_dir, ec)) throw Error(Errc::IoError, input_dir.string() + " is not a directory");

  std::vector<fs::path> files;
  for (const auto& de : fs::recursive_directory_iterator(input_dir))
    if (de.is_regular_file() && de.path().extension() == ".json") files.push_back(de.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(Errc::NoInputs, "no landmark files under " + input_dir.string());

  CompileReport report;
  report.files_seen = files.size();
  report.reference_vocabulary = options.reference_vocabulary;

  std::map<std::string, DictionaryEntry> by_gloss;
  for (const auto& path : files) {
    try {
      const auto file = parse_landmark_file(path);
      auto clip = build_clip(file, options);
      const auto rel = fs::relative(path, input_dir).generic_string();
      auto it = by_gloss.find(clip.gloss_id);
      if (it != by_gloss.end()) {
        report.duplicates.push_back(clip.gloss_id);
        report.warnings.push_back("duplicate gloss " + clip.gloss_id + ": " + it->second.source_file +
                                  " replaced by " + rel);
      }
      const std::string key = clip.gloss_id;
      by_gloss[key] = DictionaryEntry{std::move(clip), rel};
    } catch (const Error& e) {
      report.failures.push_back({path.string(), e.what()});
    } catch (const std::exception& e) {
      report.failures.push_back({path.string(), std::string("PARSE_ERROR: ") + e.what()});
    }
  }

  std::vector<DictionaryEntry> entries;
  entries.reserve(by_gloss.size());
  for (auto& [gloss, entry] : by_gloss) entries.push_back(std::move(entry));

  if (options.keep_face) {
    const bool all_face = std::all_of(entries.begin(), entries.end(), [](const DictionaryEntry& e) {
      return std::all_of(e.clip.frames.begin(), e.clip.frames.end(), [](const Keyframe& k) { return k.face.has_value(); });
    });
    if (!all_face) {
      report.warnings.push_back("face data missing in some entries; faces dropped from the artifact");
      for (auto& e : entries)
        for (auto& k : e.clip.frames) k.face.reset();
    }
  }

  std::vector<SignClip> probe;
  for (const auto& e : entries) probe.push_back(SignClip{e.clip.gloss_id, {}});
  const SignDictionary dict(std::move(probe), "");
  report.missing_fingerspell = dict.missing_fingerspell();
  report.fingerspell_complete = report.missing_fingerspell.empty();
  if (!report.fingerspell_complete) {
    const std::string msg = "fingerspelling alphabet incomplete (" + std::to_string(report.missing_fingerspell.size()) + " missing)";
    if (options.strict) throw Error(Errc::IncompleteFingerspellSet, msg);
    report.warnings.push_back(msg);
  }
  if (entries.size() != options.reference_vocabulary)
    report.warnings.push_back("entry count " + std::to_string(entries.size()) + " differs from the reference vocabulary of " +
                              std::to_string(options.reference_vocabulary) + " signs");

  if (output_path.has_parent_path()) fs::create_directories(output_path.parent_path(), ec);
  report.records = write_dictionary(output_path, entries);
  report.entries_written = entries.size();
  return report;
}

std::string CompileReport::render() const {
  std::ostringstream os;
  os << "files seen:        " << files_seen << "\n"
     << "entries written:   " << entries_written << " (reference vocabulary " << reference_vocabulary << ")\n"
     << "duplicates:        " << duplicates.size() << "\n"
     << "failures:          " << failures.size() << "\n"
     << "fingerspelling:    " << (fingerspell_complete ? "complete" : "INCOMPLETE") << "\n";
  for (const auto& w : warnings) os << "warning: " << w << "\n";
  for (const auto& f : failures) os << "failed: " << f.path << ": " << f.error << "\n";
  return os.str();
}

nlohmann::json CompileReport::to_json() const {
  json records_json = json::array();
  for (const auto& r : records)
    records_json.push_back({{"gloss", r.gloss_id},
                            {"source", r.source_file},
                            {"frame_count", r.frame_count},
                            {"duration", r.duration},
                            {"checksum", r.checksum}});
  json failures_json = json::array();
  for (const auto& f : failures) failures_json.push_back({{"path", f.path}, {"error", f.error}});
  return {{"files_seen", files_seen},
          {"entries_written", entries_written},
          {"reference_vocabulary", reference_vocabulary},
          {"duplicates", duplicates},
          {"warnings", warnings},
          {"failures", failures_json},
          {"fingerspell_complete", fingerspell_complete},
          {"missing_fingerspell", missing_fingerspell},
          {"records", records_json}};
}

}  // namespace axs
