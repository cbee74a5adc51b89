#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fzp300/epochs.hpp"

namespace fzp300 {

// EPO1 container, little-endian:
//   magic "EPO1" | version u16 = 1 | n_trials u32 | n_channels u16 |
//   n_samples u32 | sample_rate f32 | t0_s f32 | cohort u8 | subject u32 |
//   session u32 | labels (n_trials x u8) |
//   data (n_trials x channels x samples x f32, trial-major then channel-major)
void save_epochs(const EpochSet& x, const std::filesystem::path& path);
EpochSet load_epochs(const std::filesystem::path& path);

// In-memory encode/decode of the same byte layout.
std::vector<std::uint8_t> encode_epochs(const EpochSet& x);
EpochSet decode_epochs(const std::vector<std::uint8_t>& bytes);

// Sidecar manifest for multi-file runs: a JSON document listing data or
// checkpoint files with their cohort/subject/session tags.
struct ManifestEntry {
  std::string path;
  std::string cohort;
  std::uint32_t subject = 0;
  std::uint32_t session = 0;
};

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::vector<ManifestEntry>& entries,
                   const std::filesystem::path& path);

}  // namespace fzp300
