#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fzp300/checkpoint.hpp"
#include "fzp300/epoch_io.hpp"
#include "fzp300/filters.hpp"
#include "fzp300/interpret.hpp"
#include "fzp300/metrics.hpp"
#include "fzp300/run_config.hpp"
#include "fzp300/synth.hpp"
#include "fzp300/train.hpp"

namespace fs = std::filesystem;
using namespace fzp300;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t jobs = 1;
  bool no_preprocess = false;
};

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = load_run_config(args.config_path);
  if (args.no_preprocess) cfg.preprocess = false;
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!text.empty() && text.back() != '\n') out << "\n";
}

EpochSet preprocess(const EpochSet& raw, const RunConfig& cfg) {
  EpochSet data = raw;
  if (cfg.preprocess) data = bandpass_notch(data, cfg.filter);
  if (cfg.window_start_s && cfg.window_end_s) {
    data = extract_window(data, *cfg.window_start_s, *cfg.window_end_s);
  }
  return data;
}

ModelDims dims_for(const RunConfig& cfg, const EpochSet& data) {
  ModelDims dims = cfg.model;
  dims.n_channels = data.n_channels;
  dims.n_samples = data.n_samples;
  return dims;
}

std::vector<const Matrix*> trial_ptrs(const EpochSet& data) {
  std::vector<const Matrix*> ptrs;
  ptrs.reserve(data.n_trials());
  for (const Matrix& t : data.trials) ptrs.push_back(&t);
  return ptrs;
}

std::string subject_tag(const EpochMeta& meta) {
  return cohort_name(meta.cohort) + "_s" + std::to_string(meta.subject) + "_r" +
         std::to_string(meta.session);
}

// One full training run on one epoch file; writes the output file set.
void train_one(const RunConfig& cfg, const fs::path& data_path, const fs::path& out_dir) {
  const EpochSet raw = load_epochs(data_path);
  if (raw.n_trials() == 0) {
    throw ConfigError("training data " + data_path.string() + " holds no trials");
  }
  const EpochSet data = preprocess(raw, cfg);
  const auto [train_set, valid_set] = split_train_valid(data, cfg.split_ratio,
                                                        cfg.train.seed);

  FuzzyModel model(dims_for(cfg, data), cfg.model_seed);
  const TrainRun run = fit(model, train_set, valid_set, cfg.train);

  fs::create_directories(out_dir);
  CheckpointInfo info;
  info.sample_rate_hz = data.sample_rate_hz;
  info.t0_s = data.t0_s;
  info.cohort = cohort_name(data.meta.cohort);
  info.subject = data.meta.subject;
  info.session = data.meta.session;
  save_checkpoint(model, info, out_dir / "checkpoint.fzck");

  std::ostringstream log;
  for (const EpochRecord& r : run.history) log << epoch_record_json(r) << "\n";
  write_text(out_dir / "epochs.jsonl", log.str());

  const std::vector<double> probs = model.predict_batch(trial_ptrs(valid_set));
  const ConfusionCounts counts = confusion(probs, valid_set.labels);
  write_text(out_dir / "metrics.json",
             metrics_report_json({subject_tag(data.meta)}, {counts}));
  write_text(out_dir / "summary.json", train_summary_json(run));
  save_run_config(cfg, out_dir / "config.json");

  std::cout << "trained " << subject_tag(data.meta) << ": best epoch " << run.best_epoch
            << ", valid score " << run.best_score << ", epochs run " << run.epochs_run
            << "\n";
}

int cmd_synth(const CommonArgs& args) {
  RunConfig cfg = resolve_config(args);
  if (args.seed_set) cfg.synth.seed = args.seed;

  const EpochMeta meta{cohort_from_name(cfg.synth_cohort), cfg.synth_subject,
                       cfg.synth_session};
  const EpochSet data = synth_oddball(cfg.synth, cfg.synth_channels, cfg.synth_samples(),
                                      cfg.synth_sample_rate_hz, cfg.synth_t0_s, meta);
  fs::create_directories(args.out_dir);
  const fs::path out_path = fs::path(args.out_dir) / "data.epo";
  save_epochs(data, out_path);
  save_run_config(cfg, fs::path(args.out_dir) / "config.json");
  std::cout << "wrote " << out_path.string() << ": " << data.n_trials() << " trials ("
            << data.count_label(1) << " targets, " << data.count_label(0)
            << " non-targets), " << data.n_channels << " channels x " << data.n_samples
            << " samples at " << data.sample_rate_hz << " Hz\n";
  return 0;
}

int cmd_import(const CommonArgs& args, const std::string& in_dir, double fs_hz,
               double t0_s, const std::string& cohort, std::uint32_t subject,
               std::uint32_t session) {
  const fs::path dir(in_dir);
  const fs::path labels_path = dir / "labels.csv";
  std::ifstream labels_in(labels_path);
  if (!labels_in) throw IoError("cannot open " + labels_path.string());

  EpochSet x;
  x.sample_rate_hz = fs_hz;
  x.t0_s = t0_s;
  x.meta = {cohort_from_name(cohort), subject, session};

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(labels_in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError(labels_path.string() + ":" + std::to_string(line_no) +
                           ": expected filename,label",
                       0);
    }
    const std::string file = line.substr(0, comma);
    const int label = std::stoi(line.substr(comma + 1));
    if (label != 0 && label != 1) {
      throw ConfigError(labels_path.string() + ": label must be 0 or 1");
    }

    std::ifstream trial_in(dir / file);
    if (!trial_in) throw IoError("cannot open trial file " + (dir / file).string());
    std::vector<std::vector<double>> rows;
    std::string row;
    while (std::getline(trial_in, row)) {
      if (row.empty()) continue;
      std::vector<double> values;
      std::stringstream ss(row);
      std::string cell;
      while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
      if (!rows.empty() && values.size() != rows.front().size()) {
        throw ParseError((dir / file).string() + ": ragged channel rows", 0);
      }
      rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError((dir / file).string() + ": empty trial", 0);

    if (x.trials.empty()) {
      x.n_channels = rows.size();
      x.n_samples = rows.front().size();
    } else if (rows.size() != x.n_channels || rows.front().size() != x.n_samples) {
      throw ConfigError((dir / file).string() + ": trial shape " +
                        std::to_string(rows.size()) + "x" +
                        std::to_string(rows.front().size()) + " does not match " +
                        std::to_string(x.n_channels) + "x" + std::to_string(x.n_samples));
    }
    Matrix trial(x.n_channels, x.n_samples);
    for (std::size_t c = 0; c < x.n_channels; ++c) {
      std::copy(rows[c].begin(), rows[c].end(), trial.row(c));
    }
    x.trials.push_back(std::move(trial));
    x.labels.push_back(static_cast<std::uint8_t>(label));
  }
  if (x.trials.empty()) throw ConfigError("no trials listed in " + labels_path.string());

  fs::create_directories(args.out_dir);
  const fs::path out_path = fs::path(args.out_dir) / "imported.epo";
  save_epochs(x, out_path);
  std::cout << "imported " << x.n_trials() << " trials to " << out_path.string() << "\n";
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& data_path) {
  RunConfig cfg = resolve_config(args);
  if (args.seed_set) {
    cfg.train.seed = args.seed;
    cfg.model_seed = args.seed;
  }

  const fs::path input(data_path);
  if (input.extension() == ".json") {
    // Manifest: one isolated training job per entry, --jobs workers.
    const std::vector<ManifestEntry> entries = load_manifest(input);
    if (entries.empty()) throw ConfigError("manifest lists no files");
    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    const std::size_t n_workers =
        std::max<std::size_t>(1, std::min(args.jobs, entries.size()));
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < n_workers; ++w) {
      workers.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < entries.size();
             i = next.fetch_add(1)) {
          try {
            const fs::path sub_out =
                fs::path(args.out_dir) /
                (entries[i].cohort + "_s" + std::to_string(entries[i].subject) + "_r" +
                 std::to_string(entries[i].session));
            train_one(cfg, entries[i].path, sub_out);
          } catch (const Error& e) {
            std::cerr << "error: " << e.code() << ": " << entries[i].path << ": "
                      << e.what() << "\n";
            failures.fetch_add(1);
          }
        }
      });
    }
    for (std::thread& t : workers) t.join();
    return failures.load() == 0 ? 0 : 1;
  }

  train_one(cfg, input, args.out_dir);
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& checkpoint_path,
             const std::string& data_path) {
  RunConfig cfg = resolve_config(args);
  LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);

  const EpochSet raw = load_epochs(data_path);
  if (raw.n_trials() == 0) {
    throw ConfigError("evaluation data " + data_path + " holds no trials");
  }
  const EpochSet data = preprocess(raw, cfg);

  const ModelDims& dims = loaded.model.dims();
  if (data.n_channels != dims.n_channels || data.n_samples != dims.n_samples) {
    throw DimensionError("checkpoint expects " + std::to_string(dims.n_channels) + "x" +
                         std::to_string(dims.n_samples) + " trials, data is " +
                         std::to_string(data.n_channels) + "x" +
                         std::to_string(data.n_samples));
  }

  loaded.model.set_mode(FuzzyModel::Mode::evaluation);
  const std::vector<double> probs = loaded.model.predict_batch(trial_ptrs(data));
  const ConfusionCounts counts = confusion(probs, data.labels);
  const std::string report = metrics_report_json({subject_tag(data.meta)}, {counts});

  fs::create_directories(args.out_dir);
  write_text(fs::path(args.out_dir) / "metrics.json", report);
  std::cout << report << "\n";
  return 0;
}

int cmd_analyze(const CommonArgs& args, const std::string& manifest_path) {
  RunConfig cfg = resolve_config(args);
  const std::vector<ManifestEntry> entries = load_manifest(manifest_path);
  if (entries.empty()) throw ConfigError("manifest lists no checkpoints");

  std::vector<LoadedCheckpoint> loaded;
  loaded.reserve(entries.size());
  for (const ManifestEntry& e : entries) loaded.push_back(load_checkpoint(e.path));

  // Group by the manifest cohort tag, preserving first-seen order.
  std::vector<CohortModels> cohorts;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto it = std::find_if(cohorts.begin(), cohorts.end(), [&](const CohortModels& c) {
      return c.cohort == entries[i].cohort;
    });
    if (it == cohorts.end()) {
      cohorts.push_back({entries[i].cohort, {}});
      it = cohorts.end() - 1;
    }
    it->models.push_back(&loaded[i].model);
  }

  CenterReportConfig rc = cfg.analysis;
  rc.sample_rate_hz = loaded.front().info.sample_rate_hz;
  rc.t0_s = loaded.front().info.t0_s;
  const CenterReport report = center_report(cohorts, rc);
  write_center_report(report, args.out_dir);

  std::size_t total_masked = 0, in_window = 0;
  for (const RuleReport& rr : report.rules) {
    for (std::uint8_t m : rr.stats.anova_mask) total_masked += m;
    in_window += rr.significant_in_window;
  }
  std::cout << "analyzed " << cohorts.size() << " cohorts, " << report.rules.size()
            << " rules: " << total_masked << " significant samples (" << in_window
            << " inside the P300 window); report in " << args.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fzp300: fuzzy spatiotemporal P300 decoding pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string data_path, checkpoint_path, manifest_path, import_dir;
  double import_fs = 256.0, import_t0 = -0.195;
  std::string import_cohort = "SYN";
  std::uint32_t import_subject = 0, import_session = 0;

  const auto add_common = [&](CLI::App* cmd, bool with_jobs = false) {
    cmd->add_option("--config", args.config_path, "Run configuration JSON");
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--seed", args.seed, "Seed override")->each([&](const std::string&) {
      args.seed_set = true;
    });
    cmd->add_flag("--no-preprocess", args.no_preprocess,
                  "Skip band-pass/notch filtering (pre-filtered data)");
    if (with_jobs) {
      cmd->add_option("--jobs", args.jobs, "Parallel per-subject training jobs");
    }
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic oddball epochs");
  add_common(synth);

  CLI::App* import_cmd =
      app.add_subcommand("import", "Import CSV epochs (one trial per file, channel rows)");
  add_common(import_cmd);
  import_cmd->add_option("dir", import_dir, "Directory with labels.csv and trial CSVs")
      ->required();
  import_cmd->add_option("--fs", import_fs, "Sample rate in Hz");
  import_cmd->add_option("--t0", import_t0, "Time of first sample vs stimulus onset (s)");
  import_cmd->add_option("--cohort", import_cohort, "Cohort tag (NT, ALS, AUT, SYN)");
  import_cmd->add_option("--subject", import_subject, "Subject id");
  import_cmd->add_option("--session", import_session, "Session id");

  CLI::App* train = app.add_subcommand("train", "Preprocess, split 8:2 and fit");
  add_common(train, /*with_jobs=*/true);
  train->add_option("data", data_path, "EPO1 file or manifest JSON")->required();

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a data file");
  add_common(eval);
  eval->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();
  eval->add_option("data", data_path, "EPO1 file")->required();

  CLI::App* analyze =
      app.add_subcommand("analyze", "Cohort-level reconstructed-center report");
  add_common(analyze);
  analyze->add_option("manifest", manifest_path, "Checkpoint manifest JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(args);
    if (import_cmd->parsed()) {
      return cmd_import(args, import_dir, import_fs, import_t0, import_cohort,
                        import_subject, import_session);
    }
    if (train->parsed()) return cmd_train(args, data_path);
    if (eval->parsed()) return cmd_eval(args, checkpoint_path, data_path);
    if (analyze->parsed()) return cmd_analyze(args, manifest_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: E_INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
