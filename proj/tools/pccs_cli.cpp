#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "pccs/ablation.hpp"
#include "pccs/checkpoint.hpp"
#include "pccs/metrics.hpp"
#include "pccs/pipeline.hpp"
#include "pccs/plot.hpp"
#include "pccs/scene_io.hpp"
#include "pccs/synthetic.hpp"

namespace fs = std::filesystem;
using namespace pccs;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags shared by train / eval / ablate. Stored as text and layered over the
// config file through the same key=value path.
struct ModelFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_file;

  void add(CLI::App* app) {
    app->add_option("--config", config_file, "key=value config file (flags override it)");
    for (const char* key : {"data", "holdout", "out", "k-clusters", "wh", "wf", "radius", "dv",
                            "dtheta", "topk", "seed", "epochs-stage1", "epochs-stage2",
                            "epochs-stage3", "batch-size", "lr", "patience", "cluster-space",
                            "synthesis"}) {
      options[key] = app->add_option(std::string("--") + key, values[key]);
    }
  }

  RunConfig resolve() const {
    KeyValues kv;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw UsageError("cannot read config file: " + config_file);
      std::stringstream ss;
      ss << in.rdbuf();
      kv = parse_key_values(ss.str());
    }
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) kv[key] = values.at(key);
    RunConfig run = apply_run_key_values(RunConfig{}, kv);
    run.validate();
    return run;
  }
};

void log_line(const std::string& s) { std::cerr << s << '\n'; }

std::string write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  return path.string();
}

struct LoadedData {
  DatasetScenes scenes;
  DatasetWindows windows;
};

LoadedData load_data(const RunConfig& run, bool require_holdout) {
  if (run.data_dir.empty()) throw UsageError("--data is required");
  if (!fs::is_directory(run.data_dir)) throw UsageError("not a directory: " + run.data_dir.string());
  if (require_holdout && run.holdout.empty()) throw UsageError("--holdout is required");
  LoadedData d;
  d.scenes = load_dataset_dir(run.data_dir);
  if (d.scenes.empty()) throw UsageError("no datasets under " + run.data_dir.string());
  if (require_holdout && d.scenes.count(run.holdout) == 0)
    throw UsageError("unknown holdout dataset: " + run.holdout);
  const fs::path cache = run.out_dir / "windows.cache";
  std::optional<DatasetWindows> cached;
  try {
    cached = load_window_cache(cache, dataset_fingerprint(run.data_dir));
  } catch (const FormatError& e) {
    log_line("warning: ignoring window cache: " + std::string(e.what()));
  }
  d.windows = cached ? std::move(*cached) : window_datasets(d.scenes);
  return d;
}

int cmd_prepare(const RunConfig& run) {
  if (run.data_dir.empty()) throw UsageError("--data is required");
  if (!fs::is_directory(run.data_dir)) throw UsageError("not a directory: " + run.data_dir.string());
  std::vector<std::string> errors;
  const DatasetScenes scenes = load_dataset_dir(run.data_dir, &errors);
  for (const auto& e : errors) std::cerr << "error: " << e << '\n';
  if (!errors.empty()) return 1;
  if (scenes.empty()) throw UsageError("no scene files under " + run.data_dir.string());

  const std::uint64_t fp = dataset_fingerprint(run.data_dir);
  const fs::path cache = run.out_dir / "windows.cache";
  std::optional<DatasetWindows> windows;
  try {
    windows = load_window_cache(cache, fp);
  } catch (const FormatError& e) {
    log_line("warning: rebuilding window cache: " + std::string(e.what()));
  }
  if (!windows) {
    windows = window_datasets(scenes);
    fs::create_directories(run.out_dir);
    save_window_cache(cache, fp, *windows);
  }
  std::size_t total = 0;
  std::cout << "dataset,scenes,windows\n";
  for (const auto& [name, list] : *windows) {
    std::cout << name << ',' << scenes.at(name).size() << ',' << list.size() << '\n';
    total += list.size();
  }
  std::cout << "total," << windows->size() << ',' << total << '\n';
  return 0;
}

int cmd_train(const RunConfig& run) {
  LoadedData d = load_data(run, true);
  const Split split = leave_one_out_split(d.windows, run.holdout);
  log_line("training on " + std::to_string(split.train.size()) + " windows (holdout " +
           run.holdout + ": " + std::to_string(split.test.size()) + ")");
  TrainingLog log;
  const ModelBundle model = train_full(run.train, split.train, index_scenes(d.scenes), &log, log_line);
  fs::create_directories(run.out_dir);
  save_checkpoint(model, run.out_dir / "model.pccs");
  std::ostringstream csv;
  log.write_csv(csv);
  write_text(run.out_dir / "train_log.csv", csv.str());
  write_text(run.out_dir / "config.txt", format_key_values(to_key_values(model.config)));
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(model_hash(model)));
  std::cout << "checkpoint " << (run.out_dir / "model.pccs").string() << " hash " << hash << '\n';
  return 0;
}

int cmd_eval(const RunConfig& run, const std::string& checkpoint, bool topk_given) {
  const ModelBundle model = load_checkpoint(checkpoint);
  const int k = topk_given ? run.train.top_k : model.config.top_k;
  if (k > model.modalities.k()) throw UsageError("topk exceeds the model's K");
  LoadedData d = load_data(run, true);
  const MetricsReport report = evaluate(model, d.windows.at(run.holdout), k, run.holdout);
  std::ostringstream csv;
  report.write_csv(csv);
  write_text(run.out_dir / "metrics.csv", csv.str());
  std::cout << report.summary() << '\n';
  return 0;
}

struct PredictOptions {
  std::string checkpoint;
  std::string input;
  std::string output = "predictions.csv";
  int topk = 0;
  bool from_start = false;
};

int cmd_predict(const PredictOptions& o) {
  const ModelBundle model = load_checkpoint(o.checkpoint);
  const int k = o.topk > 0 ? o.topk : model.config.top_k;
  if (k > model.modalities.k()) throw UsageError("topk exceeds the model's K");
  const TrajectoryScene scene = load_scene(o.input);
  std::vector<PredictionRow> rows;
  for (const auto& [ped, track] : scene.tracks) {
    if (track.size() < static_cast<std::size_t>(kObsLen)) {
      log_line("warning: track " + std::to_string(ped) + " has fewer than 8 frames, skipped");
      continue;
    }
    const std::size_t begin = o.from_start ? 0 : track.size() - kObsLen;
    if (track[begin + kObsLen - 1].frame - track[begin].frame != (kObsLen - 1) * scene.frame_step) {
      log_line("warning: track " + std::to_string(ped) + " has gaps in its observation, skipped");
      continue;
    }
    ObsPath obs;
    for (int t = 0; t < kObsLen; ++t) obs[t] = track[begin + t].pos;
    const PredictionSet ps = predict_topk(obs, k, model);
    int rank = 1;
    for (const auto& e : ps.entries)
      rows.push_back({scene.scene_id, ped, track[begin + kObsLen - 1].frame, rank++, e.probability,
                      e.trajectory});
  }
  std::ostringstream csv;
  write_predictions_csv(csv, rows);
  write_text(o.output, csv.str());
  std::cout << rows.size() << " predictions written to " << o.output << '\n';
  return 0;
}

struct PlotOptions {
  std::string predictions;
  std::string scene;
  std::string out = "plots";
};

int cmd_plot(const PlotOptions& o) {
  std::ifstream in(o.predictions);
  if (!in) throw UsageError("cannot read " + o.predictions);
  const std::vector<PredictionRow> rows = read_predictions_csv(in);
  const TrajectoryScene scene = load_scene(o.scene);
  if (rows.empty()) {
    log_line("warning: no predictions, nothing to plot");
    return 0;
  }
  std::map<std::pair<std::string, std::int64_t>, std::vector<PredictionRow>> groups;
  for (const auto& r : rows) groups[{r.scene_id, r.ped_id}].push_back(r);
  int written = 0;
  for (const auto& [key, preds] : groups) {
    auto it = scene.tracks.find(key.second);
    if (it == scene.tracks.end()) {
      log_line("warning: pedestrian " + std::to_string(key.second) + " not in scene, skipped");
      continue;
    }
    const std::int64_t end = preds.front().obs_end_frame;
    std::vector<Vec2> observed, truth;
    for (const auto& p : it->second) {
      if (p.frame <= end && p.frame > end - kObsLen * scene.frame_step) observed.push_back(p.pos);
      else if (p.frame > end && p.frame <= end + kPredLen * scene.frame_step) truth.push_back(p.pos);
    }
    std::string name = key.first + "_" + std::to_string(key.second) + ".svg";
    for (char& c : name)
      if (c == '/' || c == '\\') c = '_';
    write_text(fs::path(o.out) / name, render_svg(observed, truth, preds));
    ++written;
  }
  std::cout << written << " plots written to " << o.out << '\n';
  return 0;
}

int cmd_ablate(const RunConfig& run, const std::string& axis, const std::string& grid) {
  const auto points = ablation_grid(axis, grid, run.train);
  LoadedData d = load_data(run, true);
  const Split split = leave_one_out_split(d.windows, run.holdout);
  const auto results =
      run_ablation(axis, points, split.train, split.test, index_scenes(d.scenes), log_line);
  std::ostringstream csv;
  write_ablation_csv(csv, axis, results);
  const fs::path path = run.out_dir / ("ablate_" + axis + ".csv");
  write_text(path, csv.str());
  std::cout << csv.str();
  return 0;
}

struct GenerateOptions {
  std::string out;
  std::string kind = "junction3";
  int datasets = 5;
  int scenes = 20;
  std::uint64_t seed = 1;
};

int cmd_generate(const GenerateOptions& o) {
  if (o.datasets < 1 || o.scenes < 1) throw UsageError("--datasets and --scenes must be >= 1");
  JunctionOptions opts = three_branch_junction();
  if (o.kind == "junction5") {
    opts = five_branch_junction();
  } else if (o.kind == "straight") {
    opts.branches = {{0.0, 1.0, 1.0}};
  } else if (o.kind != "junction3") {
    throw UsageError("unknown --kind " + o.kind + " (junction3, junction5, straight)");
  }
  opts.scenes = o.datasets * o.scenes;
  opts.seed = o.seed;
  const SyntheticData data = generate_junction(opts);
  for (int s = 0; s < opts.scenes; ++s) {
    const TrajectoryScene& scene = data.scenes[static_cast<std::size_t>(s)];
    const std::string dataset = "set" + std::to_string(s / o.scenes + 1);
    std::ostringstream text;
    write_scene(scene, text);
    write_text(fs::path(o.out) / dataset / (scene.scene_id + ".txt"), text.str());
  }
  std::cout << opts.scenes << " scenes in " << o.datasets << " datasets written to " << o.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal pedestrian trajectory prediction"};
  app.require_subcommand(1);

  auto* prepare = app.add_subcommand("prepare", "window a dataset directory and cache the result");
  ModelFlags prepare_flags;
  prepare_flags.add(prepare);

  auto* train = app.add_subcommand("train", "train a model with leave-one-out holdout");
  ModelFlags train_flags;
  train_flags.add(train);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the holdout dataset");
  ModelFlags eval_flags;
  eval_flags.add(eval);
  std::string eval_checkpoint;
  eval->add_option("--checkpoint", eval_checkpoint)->required();

  auto* ablate = app.add_subcommand("ablate", "train and evaluate a configuration sweep");
  ModelFlags ablate_flags;
  ablate_flags.add(ablate);
  std::string axis, grid;
  ablate->add_option("--axis", axis, "deep, K, weights, loss or synthesis")->required();
  ablate->add_option("--grid", grid, "comma separated grid values");

  auto* predict = app.add_subcommand("predict", "top-k predictions for every track of a scene file");
  PredictOptions predict_opts;
  predict->add_option("--checkpoint", predict_opts.checkpoint)->required();
  predict->add_option("--input", predict_opts.input)->required();
  predict->add_option("--output", predict_opts.output);
  predict->add_option("--topk", predict_opts.topk);
  predict->add_flag("--from-start", predict_opts.from_start,
                    "observe the first 8 frames instead of the last 8");

  auto* plot = app.add_subcommand("plot", "render predictions as SVG");
  PlotOptions plot_opts;
  plot->add_option("--predictions", plot_opts.predictions)->required();
  plot->add_option("--scene", plot_opts.scene)->required();
  plot->add_option("--out", plot_opts.out);

  auto* generate = app.add_subcommand("generate", "write a synthetic junction dataset");
  GenerateOptions gen_opts;
  generate->add_option("--out", gen_opts.out)->required();
  generate->add_option("--kind", gen_opts.kind, "junction3, junction5 or straight");
  generate->add_option("--datasets", gen_opts.datasets);
  generate->add_option("--scenes", gen_opts.scenes, "scenes per dataset");
  generate->add_option("--seed", gen_opts.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*prepare) return cmd_prepare(prepare_flags.resolve());
    if (*train) return cmd_train(train_flags.resolve());
    if (*eval) return cmd_eval(eval_flags.resolve(), eval_checkpoint,
                               eval_flags.options.at("topk")->count() > 0);
    if (*ablate) return cmd_ablate(ablate_flags.resolve(), axis, grid);
    if (*predict) return cmd_predict(predict_opts);
    if (*plot) return cmd_plot(plot_opts);
    if (*generate) return cmd_generate(gen_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
