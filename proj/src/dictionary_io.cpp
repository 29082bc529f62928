#include "axs/dictionary_io.hpp"

#include <bit>
#include <boost/crc.hpp>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>

#include "axs/error.hpp"

namespace axs {

static_assert(std::endian::native == std::endian::little, "artifact I/O assumes a little-endian host");

namespace {

constexpr std::size_t kHeaderSize = 8 + 7 * 4 + 4 * 8 + 4;

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::string hex32(std::uint32_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(8, '0');
  for (int i = 7; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    const auto at = buf_.size();
    buf_.resize(at + sizeof(T));
    std::memcpy(buf_.data() + at, &v, sizeof(T));
  }
  void put_str16(const std::string& s) {
    put(static_cast<std::uint16_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void put_bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t>& bytes() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : b_(b) {}
  template <typename T>
  std::optional<T> get() {
    if (pos_ + sizeof(T) > b_.size()) return std::nullopt;
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::optional<std::string> get_str16() {
    auto n = get<std::uint16_t>();
    if (!n || pos_ + *n > b_.size()) return std::nullopt;
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), *n);
    pos_ += *n;
    return s;
  }
  std::size_t pos() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

std::size_t frame_bytes(bool face) {
  return sizeof(double) + 3 * sizeof(float) * (kPoseLandmarks + 2 * kHandLandmarks + (face ? kFaceLandmarks : 0));
}

template <std::size_t N>
void put_points(ByteWriter& w, const std::array<Vec3f, N>& pts) {
  for (const auto& p : pts) {
    w.put(p.x);
    w.put(p.y);
    w.put(p.z);
  }
}

template <std::size_t N>
void get_points(ByteReader& r, std::array<Vec3f, N>& pts) {
  for (auto& p : pts) {
    p.x = *r.get<float>();
    p.y = *r.get<float>();
    p.z = *r.get<float>();
  }
}

struct Header {
  std::uint32_t version = 0, count = 0, fps = 0, flags = 0, pose = 0, hand = 0, face = 0;
  std::uint64_t index_off = 0, index_size = 0, payload_off = 0, payload_size = 0;
};

struct Scan {
  Header header;
  std::string version;
  std::vector<DictionaryEntry> entries;
  std::vector<Violation> violations;
};

// Walks the artifact without throwing; every problem becomes a Violation.
Scan scan(std::span<const std::uint8_t> bytes) {
  Scan out;
  auto fail = [&](std::string entry, std::string kind, std::string detail) {
    out.violations.push_back({std::move(entry), std::move(kind), std::move(detail)});
  };
  if (bytes.size() < kHeaderSize) {
    fail("<header>", "checksum", "file shorter than header (" + std::to_string(bytes.size()) + " bytes)");
    return out;
  }
  if (std::memcmp(bytes.data(), kDictionaryMagic, sizeof kDictionaryMagic) != 0) {
    fail("<header>", "magic", "bad magic");
    return out;
  }
  ByteReader r(bytes.subspan(8));
  Header& h = out.header;
  h.version = *r.get<std::uint32_t>();
  h.count = *r.get<std::uint32_t>();
  h.fps = *r.get<std::uint32_t>();
  h.flags = *r.get<std::uint32_t>();
  h.pose = *r.get<std::uint32_t>();
  h.hand = *r.get<std::uint32_t>();
  h.face = *r.get<std::uint32_t>();
  h.index_off = *r.get<std::uint64_t>();
  h.index_size = *r.get<std::uint64_t>();
  h.payload_off = *r.get<std::uint64_t>();
  h.payload_size = *r.get<std::uint64_t>();
  const auto stored_crc = *r.get<std::uint32_t>();
  if (crc32(bytes.first(kHeaderSize - 4)) != stored_crc) {
    fail("<header>", "checksum", "header CRC mismatch");
    return out;
  }
  if (h.version != kDictionaryFormatVersion) {
    fail("<header>", "version", "unsupported format version " + std::to_string(h.version));
    return out;
  }
  if (h.fps != 30) fail("<header>", "fps_spacing", "header fps " + std::to_string(h.fps));
  const bool has_face = (h.flags & 1u) != 0;
  if (h.pose != kPoseLandmarks || h.hand != kHandLandmarks || h.face != (has_face ? kFaceLandmarks : 0)) {
    fail("<header>", "landmark_count", "landmark counts " + std::to_string(h.pose) + "/" + std::to_string(h.hand) +
                                           "/" + std::to_string(h.face));
    return out;
  }
  if (h.index_off + h.index_size > bytes.size()) {
    fail("<index>", "checksum", "index truncated");
    return out;
  }
  const auto body_end = std::min<std::uint64_t>(bytes.size(), h.payload_off + h.payload_size);
  if (h.payload_off <= bytes.size() && body_end >= h.index_off)
    out.version = "crc32-" + hex32(crc32(bytes.subspan(h.index_off, body_end - h.index_off)));

  ByteReader idx(bytes.subspan(h.index_off, h.index_size));
  const std::size_t fb = frame_bytes(has_face);
  for (std::uint32_t e = 0; e < h.count; ++e) {
    auto gloss = idx.get_str16();
    auto source = idx.get_str16();
    auto offset = idx.get<std::uint64_t>();
    auto frames = idx.get<std::uint32_t>();
    auto crc = idx.get<std::uint32_t>();
    if (!gloss || !source || !offset || !frames || !crc) {
      fail("<index>", "checksum", "index entry " + std::to_string(e) + " truncated");
      return out;
    }
    const std::uint64_t start = h.payload_off + *offset;
    const std::uint64_t size = static_cast<std::uint64_t>(*frames) * fb;
    if (*offset + size > h.payload_size || start + size > bytes.size()) {
      fail(*gloss, "checksum", "payload truncated");
      continue;
    }
    const auto payload = bytes.subspan(start, size);
    if (crc32(payload) != *crc) {
      fail(*gloss, "checksum", "payload CRC mismatch");
      continue;
    }
    if (*frames < 2) fail(*gloss, "frame_count", std::to_string(*frames) + " frames");

    DictionaryEntry entry;
    entry.clip.gloss_id = *gloss;
    entry.source_file = *source;
    entry.clip.frames.resize(*frames);
    ByteReader pr(payload);
    bool spacing_ok = true;
    for (std::size_t k = 0; k < *frames; ++k) {
      Keyframe& kf = entry.clip.frames[k];
      kf.t = *pr.get<double>();
      get_points(pr, kf.pose);
      get_points(pr, kf.left_hand);
      get_points(pr, kf.right_hand);
      if (has_face) {
        kf.face.emplace();
        get_points(pr, *kf.face);
      }
      spacing_ok = spacing_ok && std::abs(kf.t - static_cast<double>(k) / kClipFps) <= 1e-9;
    }
    if (!spacing_ok) fail(*gloss, "fps_spacing", "frame times are not k/30");
    out.entries.push_back(std::move(entry));
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> serialize_dictionary(std::span<const DictionaryEntry> entries) {
  bool has_face = !entries.empty();
  for (const auto& e : entries)
    for (const auto& f : e.clip.frames) has_face = has_face && f.face.has_value();

  ByteWriter payload;
  ByteWriter index;
  for (const auto& e : entries) {
    const std::size_t offset = payload.bytes().size();
    for (const auto& f : e.clip.frames) {
      payload.put(f.t);
      put_points(payload, f.pose);
      put_points(payload, f.left_hand);
      put_points(payload, f.right_hand);
      if (has_face) put_points(payload, *f.face);
    }
    const auto& pb = payload.bytes();
    const auto crc = crc32(std::span(pb).subspan(offset));
    index.put_str16(e.clip.gloss_id);
    index.put_str16(e.source_file);
    index.put(static_cast<std::uint64_t>(offset));
    index.put(static_cast<std::uint32_t>(e.clip.frames.size()));
    index.put(crc);
  }

  ByteWriter out;
  out.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(kDictionaryMagic), sizeof kDictionaryMagic));
  out.put(kDictionaryFormatVersion);
  out.put(static_cast<std::uint32_t>(entries.size()));
  out.put(static_cast<std::uint32_t>(30));
  out.put(static_cast<std::uint32_t>(has_face ? 1u : 0u));
  out.put(static_cast<std::uint32_t>(kPoseLandmarks));
  out.put(static_cast<std::uint32_t>(kHandLandmarks));
  out.put(static_cast<std::uint32_t>(has_face ? kFaceLandmarks : 0));
  out.put(static_cast<std::uint64_t>(kHeaderSize));
  out.put(static_cast<std::uint64_t>(index.bytes().size()));
  out.put(static_cast<std::uint64_t>(kHeaderSize + index.bytes().size()));
  out.put(static_cast<std::uint64_t>(payload.bytes().size()));
  out.put(crc32(out.bytes()));
  out.put_bytes(index.bytes());
  out.put_bytes(payload.bytes());
  return std::move(out.bytes());
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

std::vector<ClipRecord> write_dictionary(const std::filesystem::path& path, std::span<const DictionaryEntry> entries) {
  const auto bytes = serialize_dictionary(entries);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "short write to " + path.string());

  std::vector<ClipRecord> records;
  for (const auto& e : entries) {
    ClipRecord rec;
    rec.gloss_id = e.clip.gloss_id;
    rec.source_file = e.source_file;
    rec.frame_count = e.clip.frames.size();
    rec.duration = e.clip.duration();
    records.push_back(std::move(rec));
  }
  // Checksums come from the serialised index so they match what readers verify.
  ByteReader idx{std::span<const std::uint8_t>(bytes).subspan(kHeaderSize)};
  for (auto& rec : records) {
    idx.get_str16();
    idx.get_str16();
    idx.get<std::uint64_t>();
    idx.get<std::uint32_t>();
    rec.checksum = *idx.get<std::uint32_t>();
  }
  return records;
}

std::vector<DictionaryEntry> parse_dictionary(std::span<const std::uint8_t> bytes, std::string* version) {
  auto s = scan(bytes);
  if (!s.violations.empty()) {
    const auto& v = s.violations.front();
    throw Error(Errc::ParseError, "dictionary " + v.entry + ": " + v.kind + " (" + v.detail + ")");
  }
  if (version) *version = s.version;
  return std::move(s.entries);
}

SignDictionary load_dictionary(const std::filesystem::path& path, bool require_fingerspell) {
  const auto bytes = read_file_bytes(path);
  std::string version;
  std::vector<DictionaryEntry> entries;
  try {
    entries = parse_dictionary(bytes, &version);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
  std::vector<SignClip> clips;
  clips.reserve(entries.size());
  for (auto& e : entries) clips.push_back(std::move(e.clip));
  SignDictionary dict(std::move(clips), version);
  if (require_fingerspell && !dict.fingerspell_complete()) {
    std::string missing;
    for (const auto& g : dict.missing_fingerspell()) missing += (missing.empty() ? "" : ",") + g;
    throw Error(Errc::IncompleteFingerspellSet, path.string() + " lacks " + missing);
  }
  return dict;
}

ValidationReport validate_dictionary(const std::filesystem::path& path) {
  ValidationReport report;
  const auto bytes = read_file_bytes(path);
  auto s = scan(bytes);
  report.entries = s.entries.size();
  report.version = s.version;
  report.violations = std::move(s.violations);

  std::vector<SignClip> clips;
  for (const auto& e : s.entries) clips.push_back(e.clip);
  const SignDictionary dict(std::move(clips), s.version);
  for (const auto& g : dict.missing_fingerspell()) report.violations.push_back({g, "fingerspell", "manual-alphabet entry missing"});

  if (report.violations.empty() && serialize_dictionary(s.entries) != bytes)
    report.violations.push_back({"<file>", "round_trip", "re-serialised artifact differs from file"});
  return report;
}

nlohmann::json export_dictionary_json(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  std::string version;
  const auto entries = parse_dictionary(bytes, &version);
  auto points = [](const auto& arr) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& p : arr) j.push_back({p.x, p.y, p.z});
    return j;
  };
  nlohmann::json out = {{"format_version", kDictionaryFormatVersion},
                        {"version", version},
                        {"fps", 30},
                        {"entry_count", entries.size()},
                        {"entries", nlohmann::json::array()}};
  for (const auto& e : entries) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : e.clip.frames) {
      nlohmann::json jf = {{"t", f.t},
                           {"pose", points(f.pose)},
                           {"left_hand", points(f.left_hand)},
                           {"right_hand", points(f.right_hand)}};
      if (f.face) jf["face"] = points(*f.face);
      frames.push_back(std::move(jf));
    }
    out["entries"].push_back({{"gloss", e.clip.gloss_id},
                              {"source", e.source_file},
                              {"frame_count", e.clip.frames.size()},
                              {"duration", e.clip.duration()},
                              {"frames", std::move(frames)}});
  }
  return out;
}

}  // namespace axs
