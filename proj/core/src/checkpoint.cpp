#include "fzp300/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace fzp300 {

namespace {

constexpr char kMagic[4] = {'F', 'Z', 'C', 'K'};
constexpr int kFormatVersion = 1;

void append_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
  }
}

double read_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_checkpoint(FuzzyModel& model, const CheckpointInfo& info,
                     const std::filesystem::path& path) {
  const ModelDims& d = model.dims();
  nlohmann::json header;
  header["format_version"] = kFormatVersion;
  header["seed"] = model.init_seed();
  header["dims"] = {{"n_channels", d.n_channels},
                    {"n_samples", d.n_samples},
                    {"spatial_rules", d.spatial_rules},
                    {"temporal_rules", d.temporal_rules},
                    {"latent_dim", d.latent_dim},
                    {"channels_out", d.out_channels()},
                    {"samples_out", d.out_samples()},
                    {"hidden", d.hidden}};
  header["hyper"] = {{"dropout", d.dropout}};
  header["data"] = {{"sample_rate_hz", info.sample_rate_hz},
                    {"t0_s", info.t0_s},
                    {"cohort", info.cohort},
                    {"subject", info.subject},
                    {"session", info.session}};
  const std::string header_text = header.dump();

  std::vector<std::uint8_t> bytes;
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  const auto len = static_cast<std::uint32_t>(header_text.size());
  for (int i = 0; i < 4; ++i) {
    bytes.push_back(static_cast<std::uint8_t>((len >> (8 * i)) & 0xff));
  }
  bytes.insert(bytes.end(), header_text.begin(), header_text.end());
  for (const ParamRef& p : model.params()) {
    for (double v : p.slot->value.values()) append_f64(bytes, v);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError("bad checkpoint magic, expected \"FZCK\"", 0);
  }
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(bytes[4 + i]) << (8 * i);
  if (8 + static_cast<std::size_t>(len) > bytes.size()) {
    throw ParseError("truncated checkpoint header: declares " + std::to_string(len) +
                         " bytes",
                     8);
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint header is not valid JSON: " + std::string(e.what()), 8);
  }
  if (header.value("format_version", 0) != kFormatVersion) {
    throw ParseError("unsupported checkpoint format_version", 8);
  }

  ModelDims dims;
  const auto& jd = header.at("dims");
  dims.n_channels = jd.at("n_channels").get<std::size_t>();
  dims.n_samples = jd.at("n_samples").get<std::size_t>();
  dims.spatial_rules = jd.at("spatial_rules").get<std::size_t>();
  dims.temporal_rules = jd.at("temporal_rules").get<std::size_t>();
  dims.latent_dim = jd.at("latent_dim").get<std::size_t>();
  dims.channels_out = jd.at("channels_out").get<std::size_t>();
  dims.samples_out = jd.at("samples_out").get<std::size_t>();
  dims.hidden = jd.at("hidden").get<std::size_t>();
  dims.dropout = header.at("hyper").at("dropout").get<double>();

  LoadedCheckpoint loaded{FuzzyModel(dims, header.value("seed", 0ull)), {}};
  const auto& jc = header.at("data");
  loaded.info.sample_rate_hz = jc.at("sample_rate_hz").get<double>();
  loaded.info.t0_s = jc.at("t0_s").get<double>();
  loaded.info.cohort = jc.at("cohort").get<std::string>();
  loaded.info.subject = jc.at("subject").get<std::uint32_t>();
  loaded.info.session = jc.at("session").get<std::uint32_t>();

  std::size_t offset = 8 + len;
  for (const ParamRef& p : loaded.model.params()) {
    Matrix& value = p.slot->value;
    const std::size_t need = value.size() * 8;
    if (offset + need > bytes.size()) {
      throw ParseError("truncated checkpoint payload at parameter " + p.name + ": need " +
                           std::to_string(need) + " bytes, have " +
                           std::to_string(bytes.size() - offset),
                       offset);
    }
    for (std::size_t i = 0; i < value.size(); ++i) {
      value.at(i) = read_f64(bytes.data() + offset + 8 * i);
    }
    offset += need;
  }
  if (offset != bytes.size()) {
    throw ParseError("checkpoint payload length mismatch: " +
                         std::to_string(bytes.size() - offset) + " trailing bytes",
                     offset);
  }
  return loaded;
}

}  // namespace fzp300
