#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "fzp300/model.hpp"

namespace fzp300 {

// Data context carried alongside the weights so downstream analysis can
// attach a time axis and cohort tag to reconstructed patterns.
struct CheckpointInfo {
  double sample_rate_hz = 0.0;
  double t0_s = 0.0;
  std::string cohort = "SYN";
  std::uint32_t subject = 0;
  std::uint32_t session = 0;
};

// Checkpoint container:
//   magic "FZCK" | u32 header length | header JSON (dims, seed,
//   hyperparameters, data context, format_version = 1) | little-endian f64
//   payload: spatial bank, temporal bank, head; per bank the order is
//   centers, log_widths, then per rule query_proj, query_bias, value_proj;
//   the head order is w1, b1, w2, b2. All matrices row-major.
void save_checkpoint(FuzzyModel& model, const CheckpointInfo& info,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
  FuzzyModel model;
  CheckpointInfo info;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fzp300
