#include "drowsy/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "drowsy/checkpoint.hpp"
#include "drowsy/error.hpp"
#include "drowsy/feature_file.hpp"
#include "drowsy/report.hpp"
#include "drowsy/rng.hpp"
#include "drowsy/synthetic.hpp"
#include "drowsy/training.hpp"

namespace drowsy {

namespace fs = std::filesystem;

std::vector<VideoFeatures> load_videos(std::span<const ManifestEntry> entries) {
  std::vector<VideoFeatures> videos;
  for (const auto& e : entries) {
    auto records = load_feature_file(e.feature_path);
    auto it = std::find_if(records.begin(), records.end(),
                           [&](const VideoFeatures& v) { return v.video_id == e.video_id; });
    if (it == records.end()) {
      throw Error(ErrorKind::ParseError, e.feature_path.string() + " has no record for video '" +
                                             e.video_id + "'");
    }
    if (!videos.empty() && it->features.cols() != videos.front().features.cols()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "video '" + e.video_id + "' feature dim differs from the first video's");
    }
    videos.push_back(std::move(*it));
  }
  return videos;
}

VideoFeatures featurize_frames(const std::string& video_id, std::span<const GrayImage> frames,
                               const FrameLabels& labels, const std::optional<ClaheConfig>& clahe,
                               int patch_grid) {
  if (labels.size() != frames.size()) {
    throw Error(ErrorKind::LabelLengthMismatch, "video '" + video_id + "' label count != frame count");
  }
  std::vector<GrayImage> enhanced;
  std::span<const GrayImage> input = frames;
  if (clahe) {
    enhanced.reserve(frames.size());
    for (const auto& f : frames) enhanced.push_back(clahe_enhance(f, *clahe));
    input = enhanced;
  }
  VideoFeatures out;
  out.video_id = video_id;
  out.features = featurize_sequence(input, PatchStatsFeaturizer(patch_grid));
  out.labels = labels;
  return out;
}

std::vector<Clip> window_videos(std::span<const VideoFeatures> videos, const WindowSpec& spec) {
  std::vector<Clip> clips;
  for (const auto& v : videos) {
    auto vc = make_clips(v, spec);
    std::move(vc.begin(), vc.end(), std::back_inserter(clips));
  }
  return clips;
}

std::vector<Clip> clips_in_split(std::span<const Clip> clips, const SplitAssignment& splits,
                                 Split split) {
  std::vector<Clip> out;
  for (const auto& c : clips) {
    if (splits.of(c.video_id) == split) out.push_back(c);
  }
  return out;
}

std::vector<LabeledScore> score_clips(std::span<const Clip> clips, const AutoencoderParams& params) {
  std::vector<LabeledScore> out;
  out.reserve(clips.size());
  for (const auto& c : clips) out.push_back({c.clip_id, anomaly_score(c.features, params), c.frame_labels});
  return out;
}

std::vector<ScoredClip> majority_labeled(std::span<const LabeledScore> scores) {
  std::vector<ScoredClip> out;
  const RateConfig majority{Rate{1, 2}, Rate{1, 2}};
  for (const auto& s : scores) {
    out.push_back({s.clip_id, s.score,
                   assign_clip_label(s.frame_labels, majority) == ClipLabel::Anomalous});
  }
  return out;
}

void write_clip_index(const fs::path& path, std::span<const Clip> clips) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write clip index " + path.string());
  for (const auto& c : clips) {
    out << c.clip_id << ' ' << c.video_id << ' ' << c.start << ' ' << labels_to_string(c.frame_labels)
        << '\n';
  }
}

std::map<std::string, FrameLabels> read_clip_index(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open clip index " + path.string());
  std::map<std::string, FrameLabels> out;
  std::string id, video, start, labels;
  while (in >> id >> video >> start >> labels) out[id] = labels_from_string(labels);
  return out;
}

std::string rate_tag(const Rate& rate) {
  std::string s = rate.to_string();
  std::replace(s.begin(), s.end(), '/', '-');
  return s;
}

namespace {

std::string hex_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

fs::path key_file(const fs::path& artifact) {
  return artifact.parent_path() / (artifact.filename().string() + ".key");
}

bool cached(const fs::path& artifact, const std::string& key) {
  return fs::exists(artifact) && fs::exists(key_file(artifact)) && read_text(key_file(artifact)) == key;
}

template <class F>
auto staged(const char* stage, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw e.with_stage(stage);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::IoError, stage, e.what());
  }
}

std::string describe(const WindowSpec& w) {
  return "window " + std::to_string(w.clip_len) + " " + std::to_string(w.sample_rate) + " " +
         std::to_string(w.stride);
}

std::string describe(const TrainConfig& t) {
  return "train " + std::to_string(t.hidden_size) + " " + format_real(t.learning_rate) + " " +
         std::to_string(t.batch_size) + " " + std::to_string(t.epochs) + " " +
         format_real(t.grad_clip) + " " + std::to_string(t.patience);
}

void say(std::ostream* log, const std::string& line) {
  if (log) *log << line << '\n';
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg, std::ostream* log) {
  staged("config", [&] {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + cfg.output_dir.string());
    return 0;
  });
  const fs::path out = cfg.output_dir;
  PipelineResult result;

  // enhance + featurize
  fs::path manifest_path = cfg.manifest;
  if (cfg.featurizer == FeaturizerKind::PatchStats) {
    manifest_path = staged("featurize", [&] {
      std::string clahe_desc = "clahe off";
      if (cfg.clahe) {
        clahe_desc = "clahe " + format_real(cfg.clahe->clip_limit) + " " + std::to_string(cfg.clahe->grid);
      }
      const std::string key = hex_hash("featurize v1\n" + read_text(cfg.frames_manifest) + clahe_desc +
                                       "\npatch " + std::to_string(cfg.patch_grid));
      const fs::path dir = out / ("features-" + key);
      const fs::path manifest = dir / "manifest.txt";
      if (cached(manifest, key)) {
        say(log, "featurize: reusing " + dir.string());
        result.reused.push_back("featurize");
        return manifest;
      }
      fs::create_directories(dir);
      std::vector<ManifestEntry> entries;
      for (const auto& e : read_frames_manifest(cfg.frames_manifest)) {
        const FrameFolder folder = read_frame_folder(e.frames_dir);
        const VideoFeatures vf =
            featurize_frames(e.video_id, folder.frames, folder.labels, cfg.clahe, cfg.patch_grid);
        write_feature_file(dir / (e.video_id + ".feat"), {vf});
        entries.push_back({e.video_id, e.subject_id, fs::path(e.video_id + ".feat")});
      }
      write_manifest(manifest, entries);
      write_text(key_file(manifest), key);
      say(log, "featurize: wrote " + std::to_string(entries.size()) + " feature files to " + dir.string());
      return manifest;
    });
  }

  std::vector<ManifestEntry> entries;
  std::vector<VideoFeatures> videos;
  std::string data_key;
  staged("dataset", [&] {
    entries = read_manifest(manifest_path);
    if (entries.empty()) {
      throw Error(ErrorKind::ParseError, "manifest " + manifest_path.string() + " lists no videos");
    }
    videos = load_videos(entries);
    std::string fingerprint;
    for (const auto& e : entries) {
      fingerprint += e.video_id + " " + e.subject_id + " " + hex_hash(read_text(e.feature_path)) + "\n";
    }
    data_key = hex_hash(fingerprint);
    say(log, "dataset: " + std::to_string(videos.size()) + " videos");
    return 0;
  });

  const std::vector<Clip> clips = staged("window", [&] {
    auto c = window_videos(videos, cfg.window);
    if (c.empty()) throw Error(ErrorKind::ParseError, "no video is long enough for one clip");
    write_clip_index(out / "clips.txt", c);
    say(log, "window: " + std::to_string(c.size()) + " clips");
    return c;
  });

  const SplitAssignment splits = staged("split", [&] {
    auto s = build_splits(entries, cfg.split, derive_seed(cfg.seed, "split"));
    write_split_file(out / "split.txt", s);
    return s;
  });
  const std::vector<Clip> train_clips = clips_in_split(clips, splits, Split::Train);
  const std::vector<Clip> val_clips = clips_in_split(clips, splits, Split::Val);
  const std::vector<Clip> test_clips = clips_in_split(clips, splits, Split::Test);

  std::vector<ScoreColumn> columns;
  for (const Rate& nr : cfg.normal_rates) {
    const std::string tag = rate_tag(nr);
    const RateConfig train_rates{nr, Rate{1, 2}};

    const AutoencoderParams params = staged("train", [&] {
      std::string ids;
      std::vector<const FeatureSequence*> val_normal;
      for (const auto& c : train_clips) {
        if (assign_clip_label(c.frame_labels, train_rates) == ClipLabel::Normal) ids += c.clip_id + "\n";
      }
      write_text(out / ("train_clips_" + tag + ".txt"), ids);
      for (const auto& c : val_clips) {
        if (assign_clip_label(c.frame_labels, train_rates) == ClipLabel::Normal) val_normal.push_back(&c.features);
      }

      const std::string key =
          hex_hash("model v1\n" + data_key + "\n" + describe(cfg.window) + "\nsplit " +
                   format_real(cfg.split.train) + " " + format_real(cfg.split.val) + " " +
                   format_real(cfg.split.test) + "\nseed " + std::to_string(cfg.seed) + "\n" +
                   describe(cfg.train) + "\nnormal_rate " + nr.to_string());
      const fs::path ckpt = out / ("model_" + tag + ".ckpt");
      if (cached(ckpt, key)) {
        say(log, "train[" + nr.to_string() + "]: reusing " + ckpt.string());
        result.reused.push_back("train " + nr.to_string());
        return load_checkpoint(ckpt);
      }

      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cfg.seed, "train");
      const std::uint64_t shuffle_seed = derive_seed(cfg.seed, "shuffle");
      const std::size_t batch_size = tc.batch_size;
      const BatchSource source = [&](std::size_t epoch) {
        return training_batches(train_clips, train_rates, batch_size,
                                derive_seed(shuffle_seed, static_cast<std::uint64_t>(epoch)));
      };
      const TrainResult trained = train(source, videos.front().features.cols(), tc, val_normal);

      std::string trace = "epoch train_loss val_loss\n";
      for (std::size_t e = 0; e < trained.epoch_loss.size(); ++e) {
        trace += std::to_string(e + 1) + " " + format_real(trained.epoch_loss[e]) + " " +
                 (e < trained.val_loss.size() ? format_real(trained.val_loss[e]) : "-") + "\n";
      }
      write_text(out / ("loss_" + tag + ".txt"), trace);
      save_checkpoint(ckpt, trained.params);
      write_text(key_file(ckpt), key);
      say(log, "train[" + nr.to_string() + "]: " + std::to_string(trained.epoch_loss.size()) +
                   " epochs, loss " + format_real(trained.epoch_loss.front()) + " -> " +
                   format_real(trained.epoch_loss.back()));
      return trained.params;
    });

    columns.push_back(staged("score", [&] {
      ScoreColumn col;
      col.normal_rate = nr;
      col.test = score_clips(test_clips, params);
      col.validation = score_clips(val_clips, params);
      write_scores(out / ("scores_" + tag + "_test.txt"), majority_labeled(col.test));
      write_scores(out / ("scores_" + tag + "_val.txt"), majority_labeled(col.validation));
      return col;
    }));
  }

  staged("evaluate", [&] {
    result.grid = rate_grid_report(columns, cfg.anomaly_rates, cfg.threshold_mode, cfg.histogram_bins);
    result.report_txt = out / "report.txt";
    result.report_csv = out / "report.csv";
    result.histogram_csv = out / "histogram.csv";
    write_text(result.report_txt, format_grid_table(result.grid));
    write_text(result.report_csv, format_grid_csv(result.grid));
    write_text(result.histogram_csv, format_histogram_csv(result.grid));
    say(log, "evaluate: wrote " + result.report_txt.string());
    return 0;
  });
  return result;
}

}  // namespace drowsy
