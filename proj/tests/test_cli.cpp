#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fzp300/epoch_io.hpp"

#ifndef FZP300_CLI_PATH
#define FZP300_CLI_PATH "fzp300"
#endif

using namespace fzp300;
namespace fs = std::filesystem;

namespace {

const std::string kCli = FZP300_CLI_PATH;

int run(const std::string& command) {
  return std::system((command + " > /dev/null 2>&1").c_str());
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "fzp300_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_small_config(const fs::path& path, std::size_t n_target = 12,
                        std::uint64_t seed = 9) {
  std::ofstream out(path);
  out << R"({
  "schema_version": 1,
  "synth": {"n_target": )"
      << n_target << R"(, "n_nontarget": 36, "seed": )" << seed
      << R"(, "n_channels": 3, "sample_rate_hz": 64.0, "duration_s": 0.5,
             "t0_s": -0.125, "active_channels": [0, 1]},
  "filter": {"band_low_hz": 0.5, "band_high_hz": 20.0, "notch_hz": 25.0},
  "model": {"latent_dim": 4, "hidden": 8, "spatial_rules": 2, "temporal_rules": 2},
  "train": {"max_epochs": 8, "warmup_epochs": 2, "batch_size": 16, "seed": 4}
})";
}

}  // namespace

TEST_CASE("synth writes a loadable file with the declared counts") {
  const fs::path dir = work_dir();
  write_small_config(dir / "config.json");
  REQUIRE(run(kCli + " synth --config " + (dir / "config.json").string() + " --out " +
              (dir / "s").string()) == 0);
  const EpochSet data = load_epochs(dir / "s" / "data.epo");
  CHECK(data.n_trials() == 48);
  CHECK(data.count_label(1) == 12);
  fs::remove_all(dir);
}

TEST_CASE("synth with a repeated seed writes identical bytes") {
  const fs::path dir = work_dir();
  write_small_config(dir / "config.json");
  REQUIRE(run(kCli + " synth --config " + (dir / "config.json").string() + " --out " +
              (dir / "a").string()) == 0);
  REQUIRE(run(kCli + " synth --config " + (dir / "config.json").string() + " --out " +
              (dir / "b").string()) == 0);
  std::ifstream fa(dir / "a" / "data.epo", std::ios::binary);
  std::ifstream fb(dir / "b" / "data.epo", std::ios::binary);
  const std::vector<char> ba((std::istreambuf_iterator<char>(fa)), {});
  const std::vector<char> bb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(ba == bb);
  fs::remove_all(dir);
}

TEST_CASE("train emits checkpoint, logs and metrics with all four scores") {
  const fs::path dir = work_dir();
  write_small_config(dir / "config.json");
  REQUIRE(run(kCli + " synth --config " + (dir / "config.json").string() + " --out " +
              (dir / "s").string()) == 0);
  REQUIRE(run(kCli + " train " + (dir / "s" / "data.epo").string() + " --config " +
              (dir / "config.json").string() + " --out " + (dir / "t").string()) == 0);
  for (const char* name :
       {"checkpoint.fzck", "epochs.jsonl", "metrics.json", "summary.json", "config.json"}) {
    CHECK(fs::exists(dir / "t" / name));
  }
  std::ifstream metrics_in(dir / "t" / "metrics.json");
  nlohmann::json metrics;
  metrics_in >> metrics;
  for (const char* key : {"accuracy", "precision", "recall", "f1"}) {
    CHECK(metrics["summary"].contains(key));
  }
  fs::remove_all(dir);
}

TEST_CASE("eval rejects a channel-count mismatch with nonzero exit") {
  const fs::path dir = work_dir();
  write_small_config(dir / "config.json");
  REQUIRE(run(kCli + " synth --config " + (dir / "config.json").string() + " --out " +
              (dir / "s").string()) == 0);
  REQUIRE(run(kCli + " train " + (dir / "s" / "data.epo").string() + " --config " +
              (dir / "config.json").string() + " --out " + (dir / "t").string()) == 0);

  // Second data set with a different channel count.
  std::ofstream cfg2(dir / "config2.json");
  cfg2 << R"({"schema_version": 1,
  "synth": {"n_target": 12, "n_nontarget": 36, "seed": 9, "n_channels": 5,
             "sample_rate_hz": 64.0, "duration_s": 0.5, "t0_s": -0.125,
             "active_channels": [0, 1]}})";
  cfg2.close();
  REQUIRE(run(kCli + " synth --config " + (dir / "config2.json").string() + " --out " +
              (dir / "s2").string()) == 0);
  CHECK(run(kCli + " eval " + (dir / "t" / "checkpoint.fzck").string() + " " +
            (dir / "s2" / "data.epo").string() + " --out " + (dir / "e").string()) != 0);
  fs::remove_all(dir);
}

TEST_CASE("train on an all-nontarget file fails with a stratification error") {
  const fs::path dir = work_dir();
  write_small_config(dir / "config.json", /*n_target=*/0);
  REQUIRE(run(kCli + " synth --config " + (dir / "config.json").string() + " --out " +
              (dir / "s").string()) == 0);
  CHECK(run(kCli + " train " + (dir / "s" / "data.epo").string() + " --config " +
            (dir / "config.json").string() + " --out " + (dir / "t").string()) != 0);
  fs::remove_all(dir);
}

TEST_CASE("analyze fails cleanly with a single cohort") {
  const fs::path dir = work_dir();
  write_small_config(dir / "config.json");
  REQUIRE(run(kCli + " synth --config " + (dir / "config.json").string() + " --out " +
              (dir / "s").string()) == 0);
  REQUIRE(run(kCli + " train " + (dir / "s" / "data.epo").string() + " --config " +
              (dir / "config.json").string() + " --out " + (dir / "t1").string()) == 0);
  REQUIRE(run(kCli + " train " + (dir / "s" / "data.epo").string() + " --config " +
              (dir / "config.json").string() + " --out " + (dir / "t2").string()) == 0);

  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["files"] = {{{"path", (dir / "t1" / "checkpoint.fzck").string()},
                        {"cohort", "SYN"}},
                       {{"path", (dir / "t2" / "checkpoint.fzck").string()},
                        {"cohort", "SYN"}}};
  std::ofstream mf(dir / "manifest.json");
  mf << manifest.dump();
  mf.close();
  CHECK(run(kCli + " analyze " + (dir / "manifest.json").string() + " --out " +
            (dir / "a").string()) != 0);
  fs::remove_all(dir);
}

TEST_CASE("import reads CSV trials back into the binary format") {
  const fs::path dir = work_dir();
  fs::create_directories(dir / "csv");
  {
    std::ofstream labels(dir / "csv" / "labels.csv");
    labels << "t0.csv,1\nt1.csv,0\nt2.csv,0\n";
    for (int t = 0; t < 3; ++t) {
      std::ofstream trial(dir / "csv" / ("t" + std::to_string(t) + ".csv"));
      trial << "1.5,2.5,3.5,4.5\n-1.0,0.0,1.0,2.0\n";
    }
  }
  REQUIRE(run(kCli + " import " + (dir / "csv").string() +
              " --fs 16 --t0 -0.125 --cohort AUT --subject 3 --out " +
              (dir / "imp").string()) == 0);
  const EpochSet data = load_epochs(dir / "imp" / "imported.epo");
  CHECK(data.n_trials() == 3);
  CHECK(data.n_channels == 2);
  CHECK(data.n_samples == 4);
  CHECK(data.labels[0] == 1);
  CHECK(data.meta.cohort == Cohort::AUT);
  CHECK(data.trials[0](0, 2) == doctest::Approx(3.5));
  fs::remove_all(dir);
}

TEST_CASE("eval on the training data of a converged run tracks validation") {
  const fs::path dir = work_dir();
  // Easy, near-noiseless data and a longer budget so training converges.
  std::ofstream cfg(dir / "config.json");
  cfg << R"({
  "schema_version": 1,
  "synth": {"n_target": 20, "n_nontarget": 60, "seed": 21, "n_channels": 3,
             "sample_rate_hz": 64.0, "duration_s": 0.5, "t0_s": -0.125,
             "active_channels": [0, 1], "noise_sigma_uv": 0.5},
  "filter": {"band_low_hz": 0.5, "band_high_hz": 20.0, "notch_hz": 25.0},
  "model": {"latent_dim": 4, "hidden": 8, "spatial_rules": 2, "temporal_rules": 2},
  "train": {"max_epochs": 40, "warmup_epochs": 5, "batch_size": 32, "seed": 4}
})";
  cfg.close();
  REQUIRE(run(kCli + " synth --config " + (dir / "config.json").string() + " --out " +
              (dir / "s").string()) == 0);
  REQUIRE(run(kCli + " train " + (dir / "s" / "data.epo").string() + " --config " +
              (dir / "config.json").string() + " --out " + (dir / "t").string()) == 0);
  REQUIRE(run(kCli + " eval " + (dir / "t" / "checkpoint.fzck").string() + " " +
              (dir / "s" / "data.epo").string() + " --config " +
              (dir / "config.json").string() + " --out " + (dir / "e").string()) == 0);

  nlohmann::json summary, metrics;
  std::ifstream(dir / "t" / "summary.json") >> summary;
  std::ifstream(dir / "e" / "metrics.json") >> metrics;
  const double valid_acc = summary["best"]["valid_acc"].get<double>();
  const double train_acc = metrics["summary"]["accuracy"]["mean"].get<double>();
  CHECK(train_acc >= valid_acc - 0.05);
  fs::remove_all(dir);
}

TEST_CASE("analyze is idempotent and report.json matches its schema") {
  const fs::path dir = work_dir();
  write_small_config(dir / "config.json");
  REQUIRE(run(kCli + " synth --config " + (dir / "config.json").string() + " --out " +
              (dir / "s").string()) == 0);
  write_small_config(dir / "config2.json", 12, /*seed=*/31);
  REQUIRE(run(kCli + " synth --config " + (dir / "config2.json").string() + " --out " +
              (dir / "s2").string()) == 0);
  REQUIRE(run(kCli + " train " + (dir / "s" / "data.epo").string() + " --config " +
              (dir / "config.json").string() + " --out " + (dir / "t1").string()) == 0);
  REQUIRE(run(kCli + " train " + (dir / "s2" / "data.epo").string() + " --config " +
              (dir / "config.json").string() + " --out " + (dir / "t2").string()) == 0);

  // Two cohorts, two replicates each (reusing the checkpoints across tags).
  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["files"] = {
      {{"path", (dir / "t1" / "checkpoint.fzck").string()}, {"cohort", "SYN_A"}},
      {{"path", (dir / "t2" / "checkpoint.fzck").string()}, {"cohort", "SYN_A"}},
      {{"path", (dir / "t2" / "checkpoint.fzck").string()}, {"cohort", "SYN_B"}},
      {{"path", (dir / "t1" / "checkpoint.fzck").string()}, {"cohort", "SYN_B"}}};
  std::ofstream mf(dir / "manifest.json");
  mf << manifest.dump();
  mf.close();
  REQUIRE(run(kCli + " analyze " + (dir / "manifest.json").string() + " --out " +
              (dir / "a1").string()) == 0);
  REQUIRE(run(kCli + " analyze " + (dir / "manifest.json").string() + " --out " +
              (dir / "a2").string()) == 0);

  // CSVs byte-identical; only report.json's meta block may vary.
  for (const char* name : {"waveforms.csv", "topography.csv", "stats.csv",
                           "embedding.csv"}) {
    std::ifstream f1(dir / "a1" / name, std::ios::binary);
    std::ifstream f2(dir / "a2" / name, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), {});
    const std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);
  }
  nlohmann::json r1, r2;
  std::ifstream(dir / "a1" / "report.json") >> r1;
  std::ifstream(dir / "a2" / "report.json") >> r2;
  for (const char* key : {"schema_version", "cohorts", "alpha", "p300_window_s",
                          "sample_rate_hz", "t0_s", "n_samples",
                          "pre_stimulus_samples", "rules", "meta"}) {
    CHECK(r1.contains(key));
  }
  r1.erase("meta");
  r2.erase("meta");
  CHECK(r1 == r2);
  fs::remove_all(dir);
}

TEST_CASE("train on a manifest runs one isolated job per subject") {
  const fs::path dir = work_dir();
  write_small_config(dir / "config.json");
  REQUIRE(run(kCli + " synth --config " + (dir / "config.json").string() + " --out " +
              (dir / "s1").string()) == 0);
  write_small_config(dir / "config2.json", 12, /*seed=*/77);
  REQUIRE(run(kCli + " synth --config " + (dir / "config2.json").string() + " --out " +
              (dir / "s2").string()) == 0);

  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["files"] = {{{"path", (dir / "s1" / "data.epo").string()},
                        {"cohort", "SYN"},
                        {"subject", 0}},
                       {{"path", (dir / "s2" / "data.epo").string()},
                        {"cohort", "SYN"},
                        {"subject", 1}}};
  std::ofstream mf(dir / "manifest.json");
  mf << manifest.dump();
  mf.close();

  REQUIRE(run(kCli + " train " + (dir / "manifest.json").string() + " --config " +
              (dir / "config.json").string() + " --jobs 2 --out " +
              (dir / "multi").string()) == 0);
  CHECK(fs::exists(dir / "multi" / "SYN_s0_r0" / "checkpoint.fzck"));
  CHECK(fs::exists(dir / "multi" / "SYN_s1_r0" / "checkpoint.fzck"));
  fs::remove_all(dir);
}

TEST_CASE("unknown input file yields a machine-parsable error line") {
  const fs::path dir = work_dir();
  const std::string cmd = kCli + " train /nonexistent.epo --out " + (dir / "t").string() +
                          " 2> " + (dir / "err.txt").string() + " > /dev/null";
  CHECK(std::system(cmd.c_str()) != 0);
  std::ifstream err(dir / "err.txt");
  std::string line;
  std::getline(err, line);
  CHECK(line.rfind("error: E_", 0) == 0);
  fs::remove_all(dir);
}
