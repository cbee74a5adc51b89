#include "fzp300/epoch_io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace fzp300 {

namespace {

constexpr char kMagic[4] = {'E', 'P', 'O', '1'};
constexpr std::uint16_t kVersion = 1;

void put_bytes(std::vector<std::uint8_t>& out, const void* src, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(src);
  out.insert(out.end(), p, p + n);
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  // Host is little-endian on every supported target; encode explicitly
  // anyway so the format does not depend on that.
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    std::uint64_t bits;
    if constexpr (sizeof(T) == 4 && std::is_floating_point_v<T>) {
      std::uint32_t b;
      std::memcpy(&b, &value, 4);
      bits = b;
    } else {
      bits = static_cast<std::uint64_t>(value);
    }
    out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
  }
}

class Cursor {
 public:
  Cursor(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return offset_; }

  void need(std::size_t n, const char* what) {
    if (offset_ + n > bytes_.size()) {
      throw ParseError(std::string("truncated ") + what + ": need " + std::to_string(n) +
                           " bytes, have " + std::to_string(bytes_.size() - offset_),
                       offset_);
    }
  }

  template <typename T>
  T take_le(const char* what) {
    need(sizeof(T), what);
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::uint64_t>(bytes_[offset_ + i]) << (8 * i);
    }
    offset_ += sizeof(T);
    if constexpr (sizeof(T) == 4 && std::is_floating_point_v<T>) {
      const auto b = static_cast<std::uint32_t>(bits);
      T value;
      std::memcpy(&value, &b, 4);
      return value;
    } else {
      return static_cast<T>(bits);
    }
  }

  const std::uint8_t* raw() const { return bytes_.data() + offset_; }
  void skip(std::size_t n) { offset_ += n; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t offset_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_epochs(const EpochSet& x) {
  x.validate();
  std::vector<std::uint8_t> out;
  out.reserve(33 + x.n_trials() + x.n_trials() * x.n_channels * x.n_samples * 4);
  put_bytes(out, kMagic, 4);
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(x.n_trials()));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(x.n_channels));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(x.n_samples));
  put_le<float>(out, static_cast<float>(x.sample_rate_hz));
  put_le<float>(out, static_cast<float>(x.t0_s));
  out.push_back(static_cast<std::uint8_t>(x.meta.cohort));
  put_le<std::uint32_t>(out, x.meta.subject);
  put_le<std::uint32_t>(out, x.meta.session);
  put_bytes(out, x.labels.data(), x.labels.size());
  for (const Matrix& trial : x.trials) {
    for (double v : trial.values()) put_le<float>(out, static_cast<float>(v));
  }
  return out;
}

EpochSet decode_epochs(const std::vector<std::uint8_t>& bytes) {
  Cursor cur(bytes);
  cur.need(4, "magic");
  if (std::memcmp(cur.raw(), kMagic, 4) != 0) {
    throw ParseError("bad magic, expected \"EPO1\"", 0);
  }
  cur.skip(4);
  const auto version = cur.take_le<std::uint16_t>("version");
  if (version != kVersion) {
    throw ParseError("unsupported EPO1 version " + std::to_string(version), 4);
  }
  const auto n_trials = cur.take_le<std::uint32_t>("trial count");
  const auto n_channels = cur.take_le<std::uint16_t>("channel count");
  const auto n_samples = cur.take_le<std::uint32_t>("sample count");

  EpochSet x;
  x.n_channels = n_channels;
  x.n_samples = n_samples;
  x.sample_rate_hz = cur.take_le<float>("sample rate");
  x.t0_s = cur.take_le<float>("t0");
  const auto cohort = cur.take_le<std::uint8_t>("cohort tag");
  if (cohort > 3) throw ParseError("cohort tag " + std::to_string(cohort) + " out of range",
                                   cur.offset() - 1);
  x.meta.cohort = static_cast<Cohort>(cohort);
  x.meta.subject = cur.take_le<std::uint32_t>("subject id");
  x.meta.session = cur.take_le<std::uint32_t>("session id");

  cur.need(n_trials, "label block");
  x.labels.assign(cur.raw(), cur.raw() + n_trials);
  cur.skip(n_trials);
  for (std::uint8_t z : x.labels) {
    if (z > 1) throw ParseError("label out of {0,1}", cur.offset());
  }

  const std::size_t per_trial = static_cast<std::size_t>(n_channels) * n_samples;
  const std::size_t payload = static_cast<std::size_t>(n_trials) * per_trial * 4;
  cur.need(payload, "sample payload");
  x.trials.reserve(n_trials);
  for (std::uint32_t t = 0; t < n_trials; ++t) {
    Matrix trial(n_channels, n_samples);
    for (std::size_t i = 0; i < per_trial; ++i) {
      trial.at(i) = cur.take_le<float>("sample payload");
    }
    x.trials.push_back(std::move(trial));
  }
  if (cur.offset() != bytes.size()) {
    throw ParseError("length mismatch: " + std::to_string(bytes.size() - cur.offset()) +
                         " unexpected trailing bytes",
                     cur.offset());
  }
  x.validate();
  return x;
}

void save_epochs(const EpochSet& x, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_epochs(x);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

EpochSet load_epochs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_epochs(bytes);
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest is not valid JSON: " + std::string(e.what()), 0);
  }
  if (!doc.contains("files") || !doc["files"].is_array()) {
    throw ConfigError("manifest " + path.string() + " has no \"files\" array");
  }
  std::vector<ManifestEntry> entries;
  const auto base = path.parent_path();
  for (const auto& item : doc["files"]) {
    ManifestEntry e;
    e.path = item.at("path").get<std::string>();
    // Relative paths resolve against the manifest location.
    const std::filesystem::path p(e.path);
    if (p.is_relative()) e.path = (base / p).string();
    e.cohort = item.value("cohort", std::string("SYN"));
    e.subject = item.value("subject", 0u);
    e.session = item.value("session", 0u);
    entries.push_back(std::move(e));
  }
  return entries;
}

void save_manifest(const std::vector<ManifestEntry>& entries,
                   const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["files"] = nlohmann::json::array();
  for (const ManifestEntry& e : entries) {
    doc["files"].push_back({{"path", e.path},
                            {"cohort", e.cohort},
                            {"subject", e.subject},
                            {"session", e.session}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open manifest " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
}

}  // namespace fzp300
