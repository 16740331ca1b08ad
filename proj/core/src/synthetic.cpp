#include "drowsy/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "drowsy/error.hpp"
#include "drowsy/rng.hpp"

namespace drowsy {

void SyntheticSpec::validate() const {
  if (normal_videos < 0 || anomaly_videos < 0 || normal_videos + anomaly_videos < 1) {
    throw Error(ErrorKind::ConfigError, "synthetic spec needs at least one video");
  }
  if (subjects < 1) throw Error(ErrorKind::ConfigError, "synthetic spec needs subjects >= 1");
  if (frames_per_video < 2) throw Error(ErrorKind::ConfigError, "frames_per_video must be >= 2");
  if (feature_dim < 1) throw Error(ErrorKind::ConfigError, "feature_dim must be >= 1");
  if (segments_per_video < 0 || min_segment < 1 || max_segment < min_segment) {
    throw Error(ErrorKind::ConfigError, "bad anomaly segment settings");
  }
  if (anomaly_videos > 0 && segments_per_video > 0 &&
      frames_per_video / segments_per_video < min_segment + 2) {
    throw Error(ErrorKind::ConfigError, "videos too short for the requested anomaly segments");
  }
  if (frames && frame_size < 8) throw Error(ErrorKind::ConfigError, "frame_size must be >= 8");
}

namespace {

constexpr int kLatentDim = 4;  // latent state driving image-mode frames

struct Manifold {
  Eigen::VectorXd baseline;
  Eigen::VectorXd frequency;  // radians per frame
};

Manifold make_manifold(int dim, Rng& rng) {
  Manifold m;
  m.baseline.resize(dim);
  m.frequency.resize(dim);
  for (int k = 0; k < dim; ++k) {
    m.baseline[k] = rng.uniform(0.4, 1.0);
    m.frequency[k] = rng.uniform(0.01, 0.04);
  }
  return m;
}

struct Segment {
  int begin;
  int end;
};

std::vector<Segment> place_segments(const SyntheticSpec& spec, Rng& rng) {
  std::vector<Segment> segments;
  const int slot = spec.frames_per_video / spec.segments_per_video;
  for (int s = 0; s < spec.segments_per_video; ++s) {
    const int max_len = std::min(spec.max_segment, slot - 2);
    const int len = spec.min_segment +
                    static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len - spec.min_segment + 1)));
    const int slack = slot - len;
    const int begin = s * slot + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(slack - 1)));
    segments.push_back({begin, begin + len});
  }
  return segments;
}

// Smooth trajectory with anomaly segments; rows are frames.
Eigen::MatrixXd trajectory(const SyntheticSpec& spec, const Manifold& m,
                           const std::vector<Segment>& segments, FrameLabels& labels, Rng& rng) {
  const int n = spec.frames_per_video;
  const auto dim = m.baseline.size();
  Eigen::VectorXd phase(dim);
  for (Eigen::Index k = 0; k < dim; ++k) phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);

  Eigen::MatrixXd x(n, dim);
  for (int t = 0; t < n; ++t) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      x(t, k) = m.baseline[k] + spec.drift_amplitude * std::sin(m.frequency[k] * t + phase[k]) +
                spec.noise * rng.normal();
    }
  }
  labels.assign(static_cast<std::size_t>(n), 0);

  const auto random_offset = [&]() {
    Eigen::VectorXd v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) v[k] = spec.anomaly_amplitude * rng.normal();
    return v;
  };
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Segment seg = segments[s];
    const bool freeze = s % 2 == 1;
    const int hold = freeze ? 8 : 3;
    Eigen::VectorXd state;
    for (int t = seg.begin; t < seg.end; ++t) {
      if ((t - seg.begin) % hold == 0) {
        state = freeze ? Eigen::VectorXd(m.baseline + random_offset()) : random_offset();
      }
      if (freeze) {
        for (Eigen::Index k = 0; k < dim; ++k) x(t, k) = state[k] + 0.1 * spec.noise * rng.normal();
      } else {
        x.row(t) += state.transpose();
      }
      labels[static_cast<std::size_t>(t)] = 1;
    }
  }
  return x;
}

GrayImage render_frame(const Eigen::RowVectorXd& z, int size, Rng& rng) {
  // Dark, low-contrast scene: one soft blob over a faint gradient.
  GrayImage img(size, size);
  const double cx = size * (0.5 + 0.3 * std::tanh(z[0] - 0.7));
  const double cy = size * (0.5 + 0.3 * std::tanh(z[1] - 0.7));
  const double radius = size * (0.12 + 0.08 * std::tanh(z[2]));
  const double brightness = 30.0 + 25.0 * std::tanh(z[3]);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      const double blob = brightness * std::exp(-(dx * dx + dy * dy) / (2.0 * radius * radius));
      const double v = 18.0 + 10.0 * x / size + blob + 1.5 * rng.normal();
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return img;
}

std::string video_name(int subject, char kind, int index) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "s%02d_%c%02d", subject, kind, index);
  return buf;
}

}  // namespace

std::vector<SyntheticVideo> synthesize(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng manifold_rng(derive_seed(seed, "manifold"));
  const int dim = spec.frames ? kLatentDim : spec.feature_dim;
  const Manifold manifold = make_manifold(dim, manifold_rng);

  std::vector<SyntheticVideo> out;
  const int total = spec.normal_videos + spec.anomaly_videos;
  for (int v = 0; v < total; ++v) {
    const bool anomalous = v >= spec.normal_videos;
    const int index = anomalous ? v - spec.normal_videos : v;
    const int subject = index % spec.subjects;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(v)));

    SyntheticVideo sv;
    sv.subject_id = "subject" + std::to_string(subject);
    sv.video.video_id = video_name(subject, anomalous ? 'a' : 'n', index);
    std::vector<Segment> segments;
    if (anomalous && spec.segments_per_video > 0) segments = place_segments(spec, rng);
    const Eigen::MatrixXd x = trajectory(spec, manifold, segments, sv.video.labels, rng);

    if (spec.frames) {
      for (Eigen::Index t = 0; t < x.rows(); ++t) {
        sv.frames.push_back(render_frame(x.row(t), spec.frame_size, rng));
      }
    } else {
      sv.video.features.resize(x.rows(), x.cols());
      for (Eigen::Index t = 0; t < x.rows(); ++t) {
        sv.video.features.row(t) = l2_normalize(x.row(t).transpose()).transpose();
      }
    }
    out.push_back(std::move(sv));
  }
  return out;
}

void generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed,
                        const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const auto videos = synthesize(spec, seed);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  if (!spec.frames) {
    fs::create_directories(out_dir / "features", ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create feature directory: " + ec.message());
    std::vector<ManifestEntry> entries;
    for (const auto& v : videos) {
      const fs::path rel = fs::path("features") / (v.video.video_id + ".feat");
      write_feature_file(out_dir / rel, {v.video});
      entries.push_back({v.video.video_id, v.subject_id, rel});
    }
    write_manifest(out_dir / "manifest.txt", entries);
    return;
  }

  std::ofstream manifest(out_dir / "frames_manifest.txt");
  if (!manifest) throw Error(ErrorKind::IoError, "cannot write frames manifest in " + out_dir.string());
  for (const auto& v : videos) {
    const fs::path rel = fs::path("frames") / v.video.video_id;
    fs::create_directories(out_dir / rel, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + (out_dir / rel).string());
    for (std::size_t t = 0; t < v.frames.size(); ++t) {
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%05zu.pgm", t);
      write_pgm(out_dir / rel / name, v.frames[t]);
    }
    std::ofstream labels(out_dir / rel / "labels.txt");
    labels << labels_to_string(v.video.labels) << '\n';
    if (!labels) throw Error(ErrorKind::IoError, "cannot write labels for " + v.video.video_id);
    manifest << v.video.video_id << ' ' << v.subject_id << ' ' << rel.generic_string() << '\n';
  }
}

std::vector<FramesManifestEntry> read_frames_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open frames manifest " + path.string());
  std::vector<FramesManifestEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    FramesManifestEntry e;
    std::string dir;
    if (!(fields >> e.video_id)) continue;
    if (!(fields >> e.subject_id >> dir)) {
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) +
                                             ": expected 'video_id subject_id frames_dir'");
    }
    e.frames_dir = dir;
    if (e.frames_dir.is_relative()) e.frames_dir = path.parent_path() / e.frames_dir;
    out.push_back(std::move(e));
  }
  return out;
}

FrameFolder read_frame_folder(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::IoError, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  FrameFolder folder;
  for (const auto& f : files) folder.frames.push_back(read_pgm(f));
  std::ifstream labels(dir / "labels.txt");
  if (!labels) throw Error(ErrorKind::IoError, "missing labels.txt in " + dir.string());
  std::string text;
  labels >> text;
  folder.labels = labels_from_string(text);
  if (folder.labels.size() != folder.frames.size()) {
    throw Error(ErrorKind::LabelLengthMismatch,
                dir.string() + ": " + std::to_string(folder.labels.size()) + " labels for " +
                    std::to_string(folder.frames.size()) + " frames");
  }
  return folder;
}

}  // namespace drowsy
