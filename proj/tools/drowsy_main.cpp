// drowsy: command-line front end for the clip anomaly-detection pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "drowsy/checkpoint.hpp"
#include "drowsy/clahe.hpp"
#include "drowsy/config.hpp"
#include "drowsy/error.hpp"
#include "drowsy/feature_file.hpp"
#include "drowsy/pipeline.hpp"
#include "drowsy/report.hpp"
#include "drowsy/rng.hpp"
#include "drowsy/synthetic.hpp"
#include "drowsy/training.hpp"

namespace fs = std::filesystem;
using namespace drowsy;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDiverged = 4;

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::ConfigError:
      return kExitConfig;
    case ErrorKind::DivergenceDetected:
      return kExitDiverged;
    default:
      return kExitData;
  }
}

// `--clahe off` disables enhancement; otherwise limit and grid apply.
struct ClaheFlags {
  std::string mode = "on";
  double limit = ClaheConfig{}.clip_limit;
  int grid = ClaheConfig{}.grid;

  void add(CLI::App* cmd, bool default_on) {
    mode = default_on ? "on" : "off";
    cmd->add_option("--clahe", mode, "Enable or disable CLAHE")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    cmd->add_option("--clahe-limit", limit, "Clip limit in multiples of the uniform bin height")
        ->capture_default_str();
    cmd->add_option("--clahe-grid", grid, "Tiles per axis")->capture_default_str();
  }
  std::optional<ClaheConfig> config() const {
    if (mode == "off") return std::nullopt;
    return ClaheConfig{limit, grid};
  }
};

void add_window_flags(CLI::App* cmd, WindowSpec& w) {
  cmd->add_option("--clip-len", w.clip_len, "Sampled frames per clip")->capture_default_str();
  cmd->add_option("--sample-rate", w.sample_rate, "Take every k-th raw frame")->capture_default_str();
  cmd->add_option("--stride", w.stride, "Raw frames between window starts")->capture_default_str();
}

void add_train_flags(CLI::App* cmd, TrainConfig& t, std::uint64_t& seed) {
  cmd->add_option("--hidden", t.hidden_size, "LSTM hidden size")->capture_default_str();
  cmd->add_option("--lr", t.learning_rate, "SGD learning rate")->capture_default_str();
  cmd->add_option("--batch-size", t.batch_size, "Clips per batch")->capture_default_str();
  cmd->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
  cmd->add_option("--grad-clip", t.grad_clip, "Global gradient-norm clip, 0 = off")
      ->capture_default_str();
  cmd->add_option("--patience", t.patience, "Early-stopping patience on validation loss, 0 = off")
      ->capture_default_str();
}

std::vector<Rate> parse_rates(const std::vector<std::string>& texts) {
  std::vector<Rate> out;
  for (const auto& t : texts) out.push_back(Rate::parse(t));
  return out;
}

std::vector<Clip> load_clips(const fs::path& manifest, const WindowSpec& window) {
  const auto entries = read_manifest(manifest);
  if (entries.empty()) throw Error(ErrorKind::ParseError, "dataset", "manifest lists no videos");
  return window_videos(load_videos(entries), window);
}

std::vector<Clip> select_split(std::vector<Clip> clips, const fs::path& split_file,
                               const std::string& which) {
  if (which == "all") return clips;
  return clips_in_split(clips, read_split_file(split_file), parse_split(which));
}

// --- subcommands ---------------------------------------------------------

struct SynthArgs {
  SyntheticSpec spec;
  std::uint64_t seed = 0;
  fs::path out;
};

void cmd_synth(const SynthArgs& a) {
  generate_synthetic(a.spec, a.seed, a.out);
  std::cout << "wrote synthetic dataset to " << a.out.string() << '\n';
}

struct EnhanceArgs {
  fs::path in;
  fs::path out;
  ClaheFlags clahe;
};

GrayImage enhance_one(const GrayImage& img, const std::optional<ClaheConfig>& cfg) {
  return cfg ? clahe_enhance(img, *cfg) : img;
}

void cmd_enhance(const EnhanceArgs& a) {
  const auto cfg = a.clahe.config();
  if (!fs::is_directory(a.in)) {
    write_pgm(a.out, enhance_one(read_pgm(a.in), cfg));
    return;
  }
  fs::create_directories(a.out);
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(a.in)) {
    const fs::path p = entry.path();
    if (p.extension() == ".pgm") {
      write_pgm(a.out / p.filename(), enhance_one(read_pgm(p), cfg));
      ++n;
    } else if (p.filename() == "labels.txt") {
      fs::copy_file(p, a.out / p.filename(), fs::copy_options::overwrite_existing);
    }
  }
  std::cout << "enhanced " << n << " frames into " << a.out.string() << '\n';
}

struct FeaturizeArgs {
  fs::path frames_manifest;
  fs::path out;
  int grid = 4;
  ClaheFlags clahe;
};

void cmd_featurize(const FeaturizeArgs& a) {
  fs::create_directories(a.out);
  std::vector<ManifestEntry> entries;
  for (const auto& e : read_frames_manifest(a.frames_manifest)) {
    const FrameFolder folder = read_frame_folder(e.frames_dir);
    write_feature_file(a.out / (e.video_id + ".feat"),
                       {featurize_frames(e.video_id, folder.frames, folder.labels, a.clahe.config(),
                                         a.grid)});
    entries.push_back({e.video_id, e.subject_id, fs::path(e.video_id + ".feat")});
  }
  write_manifest(a.out / "manifest.txt", entries);
  std::cout << "featurized " << entries.size() << " videos into " << a.out.string() << '\n';
}

struct WindowArgs {
  fs::path manifest;
  fs::path out;
  WindowSpec window;
};

void cmd_window(const WindowArgs& a) {
  a.window.validate();
  const auto clips = load_clips(a.manifest, a.window);
  write_clip_index(a.out, clips);
  std::cout << clips.size() << " clips\n";
}

struct SplitArgs {
  fs::path manifest;
  fs::path out;
  std::uint64_t seed = 0;
  std::vector<double> fractions{0.5, 0.25, 0.25};
};

void cmd_split(const SplitArgs& a) {
  const auto entries = read_manifest(a.manifest);
  const SplitFractions f{a.fractions[0], a.fractions[1], a.fractions[2]};
  const auto splits = build_splits(entries, f, derive_seed(a.seed, "split"));
  write_split_file(a.out, splits);
  for (Split s : {Split::Train, Split::Val, Split::Test}) {
    std::cout << to_string(s) << ": " << splits.videos(s).size() << " videos\n";
  }
}

struct TrainArgs {
  fs::path manifest;
  fs::path split_file;
  fs::path out;
  fs::path train_clips;
  std::string normal_rate = "1/2";
  WindowSpec window;
  TrainConfig train;
  std::uint64_t seed = 0;
};

void cmd_train(TrainArgs a) {
  a.window.validate();
  const Rate nr = Rate::parse(a.normal_rate);
  const RateConfig rates{nr, Rate{1, 2}};
  const auto clips = select_split(load_clips(a.manifest, a.window), a.split_file, "train");
  if (clips.empty()) throw Error(ErrorKind::NoNormalClips, "train", "the train split has no clips");

  const fs::path manifest_out =
      a.train_clips.empty() ? fs::path(a.out.string() + ".train_clips.txt") : a.train_clips;
  std::ofstream ids(manifest_out);
  for (const auto& c : clips) {
    if (assign_clip_label(c.frame_labels, rates) == ClipLabel::Normal) ids << c.clip_id << '\n';
  }

  const std::uint64_t shuffle_seed = derive_seed(a.seed, "shuffle");
  a.train.seed = derive_seed(a.seed, "train");
  const BatchSource source = [&](std::size_t epoch) {
    return training_batches(clips, rates, a.train.batch_size, derive_seed(shuffle_seed, epoch));
  };
  const TrainResult r = train(source, clips.front().features.cols(), a.train, {});
  save_checkpoint(a.out, r.params);
  for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) {
    std::cout << "epoch " << e + 1 << " loss " << r.epoch_loss[e] << '\n';
  }
  std::cout << "saved " << a.out.string() << '\n';
}

struct ScoreArgs {
  fs::path manifest;
  fs::path split_file;
  std::string split = "test";
  fs::path checkpoint;
  fs::path out;
  WindowSpec window;
};

void cmd_score(const ScoreArgs& a) {
  a.window.validate();
  const auto clips = select_split(load_clips(a.manifest, a.window), a.split_file, a.split);
  const auto params = load_checkpoint(a.checkpoint);
  const auto scored = majority_labeled(score_clips(clips, params));
  write_scores(a.out, scored);
  std::cout << "scored " << scored.size() << " clips\n";
}

struct EvaluateArgs {
  fs::path clip_index;
  std::vector<std::string> columns;  // RATE:TEST_SCORES[:VAL_SCORES]
  std::vector<std::string> anomaly_rates{"1/2", "2/3", "1"};
  bool threshold_on_test = false;
  std::size_t bins = 20;
  fs::path out_dir;
};

std::vector<LabeledScore> attach_labels(const fs::path& scores,
                                        const std::map<std::string, FrameLabels>& index) {
  std::vector<LabeledScore> out;
  for (const auto& s : read_scores(scores)) {
    const auto it = index.find(s.clip_id);
    if (it == index.end()) {
      throw Error(ErrorKind::ParseError, "clip '" + s.clip_id + "' is missing from the clip index");
    }
    out.push_back({s.clip_id, s.score, it->second});
  }
  return out;
}

void cmd_evaluate(const EvaluateArgs& a) {
  const auto index = read_clip_index(a.clip_index);
  const ThresholdMode mode = a.threshold_on_test ? ThresholdMode::Test : ThresholdMode::Validation;
  std::vector<ScoreColumn> columns;
  for (const auto& spec : a.columns) {
    const auto p1 = spec.find(':');
    if (p1 == std::string::npos) {
      throw Error(ErrorKind::ConfigError, "--column expects RATE:TEST_SCORES[:VAL_SCORES]");
    }
    const auto p2 = spec.find(':', p1 + 1);
    ScoreColumn col;
    col.normal_rate = Rate::parse(spec.substr(0, p1));
    col.test = attach_labels(spec.substr(p1 + 1, p2 == std::string::npos ? p2 : p2 - p1 - 1), index);
    if (p2 != std::string::npos) col.validation = attach_labels(spec.substr(p2 + 1), index);
    if (mode == ThresholdMode::Validation && col.validation.empty()) {
      throw Error(ErrorKind::ConfigError,
                  "validation scores are required unless --threshold-on-test is given");
    }
    columns.push_back(std::move(col));
  }
  const auto anomaly = parse_rates(a.anomaly_rates);
  const RateGrid grid = rate_grid_report(columns, anomaly, mode, a.bins);
  const std::string table = format_grid_table(grid);
  std::cout << table;
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    std::ofstream(a.out_dir / "report.txt") << table;
    std::ofstream(a.out_dir / "report.csv") << format_grid_csv(grid);
    std::ofstream(a.out_dir / "histogram.csv") << format_histogram_csv(grid);
  }
}

struct ReportArgs {
  std::vector<std::string> reports;  // LABEL=report.csv
  std::string normal_rate = "1/2";
  std::string anomaly_rate = "1/2";
  int precision = 4;
};

void cmd_report(const ReportArgs& a) {
  const Rate nr = Rate::parse(a.normal_rate);
  const Rate ar = Rate::parse(a.anomaly_rate);
  std::vector<MetricColumn> columns;
  for (const auto& r : a.reports) {
    const auto eq = r.find('=');
    const std::string label = eq == std::string::npos ? r : r.substr(0, eq);
    const fs::path path = eq == std::string::npos ? fs::path(r) : fs::path(r.substr(eq + 1));
    columns.push_back(grid_cell_column(path, label, nr, ar));
  }
  std::cout << compare_table(columns, a.precision);
}

struct RunArgs {
  fs::path config;
  std::optional<fs::path> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  bool threshold_on_test = false;
  bool quiet = false;
};

void cmd_run(const RunArgs& a) {
  ExperimentConfig cfg = load_config(a.config);
  if (a.output_dir) cfg.output_dir = *a.output_dir;
  if (a.seed) cfg.seed = *a.seed;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.threshold_on_test) cfg.threshold_mode = ThresholdMode::Test;
  const PipelineResult r = run_pipeline(cfg, a.quiet ? nullptr : &std::cerr);
  std::ifstream table(r.report_txt);
  std::cout << table.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clip-level drowsiness anomaly detection with an LSTM autoencoder"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--seed", synth.seed)->capture_default_str();
  c_synth->add_option("--normal-videos", synth.spec.normal_videos)->capture_default_str();
  c_synth->add_option("--anomaly-videos", synth.spec.anomaly_videos)->capture_default_str();
  c_synth->add_option("--subjects", synth.spec.subjects)->capture_default_str();
  c_synth->add_option("--frames-per-video", synth.spec.frames_per_video)->capture_default_str();
  c_synth->add_option("--dim", synth.spec.feature_dim, "Feature dimension")->capture_default_str();
  c_synth->add_option("--noise", synth.spec.noise)->capture_default_str();
  c_synth->add_flag("--images", synth.spec.frames, "Write PGM frames instead of features");
  c_synth->add_option("--frame-size", synth.spec.frame_size)->capture_default_str();

  EnhanceArgs enhance;
  auto* c_enhance = app.add_subcommand("enhance", "Apply CLAHE to a PGM file or a frame folder");
  c_enhance->add_option("--in", enhance.in)->required()->check(CLI::ExistingPath);
  c_enhance->add_option("--out", enhance.out)->required();
  enhance.clahe.add(c_enhance, true);

  FeaturizeArgs featurize;
  auto* c_feat = app.add_subcommand("featurize", "Patch-statistics features for frame folders");
  c_feat->add_option("--frames-manifest", featurize.frames_manifest)
      ->required()
      ->check(CLI::ExistingFile);
  c_feat->add_option("--out", featurize.out, "Output directory")->required();
  c_feat->add_option("--grid", featurize.grid, "Patch grid per axis")->capture_default_str();
  featurize.clahe.add(c_feat, false);

  WindowArgs window;
  auto* c_window = app.add_subcommand("window", "Cut videos into clips and write the clip index");
  c_window->add_option("--manifest", window.manifest)->required()->check(CLI::ExistingFile);
  c_window->add_option("--out", window.out)->required();
  add_window_flags(c_window, window.window);

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Subject-disjoint train/val/test split");
  c_split->add_option("--manifest", split.manifest)->required()->check(CLI::ExistingFile);
  c_split->add_option("--out", split.out)->required();
  c_split->add_option("--seed", split.seed)->capture_default_str();
  c_split->add_option("--fractions", split.fractions, "train val test")->expected(3)->capture_default_str();

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train one model on Normal training clips");
  c_train->add_option("--manifest", tr.manifest)->required()->check(CLI::ExistingFile);
  c_train->add_option("--split-file", tr.split_file)->required()->check(CLI::ExistingFile);
  c_train->add_option("--out", tr.out, "Checkpoint path")->required();
  c_train->add_option("--train-clips", tr.train_clips, "Where to list the clips used");
  c_train->add_option("--normal-rate", tr.normal_rate)->capture_default_str();
  add_window_flags(c_train, tr.window);
  add_train_flags(c_train, tr.train, tr.seed);

  ScoreArgs score;
  auto* c_score = app.add_subcommand("score", "Score clips with a trained model");
  c_score->add_option("--manifest", score.manifest)->required()->check(CLI::ExistingFile);
  c_score->add_option("--split-file", score.split_file);
  c_score->add_option("--split", score.split, "train | val | test | all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}))
      ->capture_default_str();
  c_score->add_option("--checkpoint", score.checkpoint)->required()->check(CLI::ExistingFile);
  c_score->add_option("--out", score.out)->required();
  add_window_flags(c_score, score.window);

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Rate-grid report from score files");
  c_eval->add_option("--clips", ev.clip_index, "Clip index from `window`")
      ->required()
      ->check(CLI::ExistingFile);
  c_eval->add_option("--column", ev.columns, "NORMAL_RATE:TEST_SCORES[:VAL_SCORES]")->required();
  c_eval->add_option("--anomaly-rates", ev.anomaly_rates)->capture_default_str();
  c_eval->add_flag("--threshold-on-test", ev.threshold_on_test, "Select thresholds on test scores");
  c_eval->add_option("--bins", ev.bins, "Histogram bins")->capture_default_str();
  c_eval->add_option("--out-dir", ev.out_dir, "Write report.txt, report.csv, histogram.csv");

  ReportArgs rep;
  auto* c_report = app.add_subcommand("report", "Side-by-side metrics of several report.csv files");
  c_report->add_option("reports", rep.reports, "LABEL=report.csv")->required();
  c_report->add_option("--normal-rate", rep.normal_rate)->capture_default_str();
  c_report->add_option("--anomaly-rate", rep.anomaly_rate)->capture_default_str();
  c_report->add_option("--precision", rep.precision)->capture_default_str();

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Run the whole pipeline from a YAML config");
  c_run->add_option("--config", run.config)->required()->check(CLI::ExistingFile);
  c_run->add_option("--output-dir", run.output_dir, "Override output_dir");
  c_run->add_option("--seed", run.seed, "Override seed");
  c_run->add_option("--epochs", run.epochs, "Override train.epochs");
  c_run->add_flag("--threshold-on-test", run.threshold_on_test);
  c_run->add_flag("--quiet", run.quiet, "No progress log on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*c_synth) cmd_synth(synth);
    if (*c_enhance) cmd_enhance(enhance);
    if (*c_feat) cmd_featurize(featurize);
    if (*c_window) cmd_window(window);
    if (*c_split) cmd_split(split);
    if (*c_train) cmd_train(tr);
    if (*c_score) cmd_score(score);
    if (*c_eval) cmd_evaluate(ev);
    if (*c_report) cmd_report(rep);
    if (*c_run) cmd_run(run);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
