#include "drowsy/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "drowsy/error.hpp"
#include "drowsy/rng.hpp"

namespace drowsy {

std::size_t WindowSpec::span() const {
  return static_cast<std::size_t>(clip_len - 1) * static_cast<std::size_t>(sample_rate) + 1;
}

void WindowSpec::validate() const {
  if (clip_len < 1 || sample_rate < 1 || stride < 1) {
    throw Error(ErrorKind::ConfigError,
                "window spec needs clip_len, sample_rate, stride >= 1");
  }
}

std::vector<std::size_t> window_video(std::size_t n_frames, const WindowSpec& spec) {
  spec.validate();
  std::vector<std::size_t> starts;
  const std::size_t span = spec.span();
  if (n_frames < span) return starts;
  for (std::size_t s = 0; s + span <= n_frames; s += static_cast<std::size_t>(spec.stride)) {
    starts.push_back(s);
  }
  return starts;
}

// ---------------------------------------------------------------------------

Rate::Rate(std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0 || numerator <= 0 || numerator > denominator) {
    throw Error(ErrorKind::ConfigError,
                "rate must lie in (0, 1], got " + std::to_string(numerator) + "/" +
                    std::to_string(denominator));
  }
  const std::int64_t g = std::gcd(numerator, denominator);
  num_ = numerator / g;
  den_ = denominator / g;
}

namespace {

std::int64_t parse_int(std::string_view text) {
  std::int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::ConfigError, "bad integer in rate: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

Rate Rate::parse(std::string_view text) {
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    return Rate(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 9) throw Error(ErrorKind::ConfigError, "too many decimals in rate");
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::int64_t whole = dot == 0 ? 0 : parse_int(text.substr(0, dot));
    const std::int64_t part = frac.empty() ? 0 : parse_int(frac);
    return Rate(whole * den + part, den);
  }
  return Rate(parse_int(text), 1);
}

std::string Rate::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string_view to_string(ClipLabel label) noexcept {
  switch (label) {
    case ClipLabel::Normal: return "normal";
    case ClipLabel::Anomalous: return "anomalous";
    case ClipLabel::Unassigned: return "unassigned";
  }
  return "unknown";
}

ClipLabel assign_clip_label(std::span<const std::uint8_t> frame_labels, const RateConfig& rates) {
  const auto total = static_cast<std::int64_t>(frame_labels.size());
  if (total == 0) return ClipLabel::Unassigned;
  const auto ones = static_cast<std::int64_t>(
      std::count_if(frame_labels.begin(), frame_labels.end(), [](auto l) { return l != 0; }));
  if (rates.anomaly_rate.met_by(ones, total)) return ClipLabel::Anomalous;
  if (rates.normal_rate.met_by(total - ones, total)) return ClipLabel::Normal;
  return ClipLabel::Unassigned;
}

// ---------------------------------------------------------------------------

std::string make_clip_id(std::string_view video_id, std::size_t start) {
  return std::string(video_id) + "@" + std::to_string(start);
}

std::vector<Clip> make_clips(const VideoFeatures& video, const WindowSpec& spec) {
  const auto n_frames = static_cast<std::size_t>(video.features.rows());
  if (video.labels.size() != n_frames) {
    throw Error(ErrorKind::LabelLengthMismatch,
                "video '" + video.video_id + "' label count does not match frame count");
  }
  std::vector<Clip> clips;
  for (const std::size_t start : window_video(n_frames, spec)) {
    Clip clip;
    clip.clip_id = make_clip_id(video.video_id, start);
    clip.video_id = video.video_id;
    clip.start = start;
    clip.features.resize(spec.clip_len, video.features.cols());
    for (int k = 0; k < spec.clip_len; ++k) {
      const std::size_t raw = start + static_cast<std::size_t>(k) * static_cast<std::size_t>(spec.sample_rate);
      clip.frame_indices.push_back(raw);
      clip.frame_labels.push_back(video.labels[raw]);
      clip.features.row(k) = video.features.row(static_cast<Eigen::Index>(raw));
    }
    clips.push_back(std::move(clip));
  }
  return clips;
}

// ---------------------------------------------------------------------------

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open manifest " + path.string());
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    ManifestEntry e;
    std::string feature_path;
    if (!(fields >> e.video_id)) continue;
    std::string extra;
    if (!(fields >> e.subject_id >> feature_path) || (fields >> extra)) {
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) +
                                             ": expected 'video_id subject_id feature_file_path'");
    }
    if (!seen.insert(e.video_id).second) {
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) +
                                             ": duplicate video id '" + e.video_id + "'");
    }
    e.feature_path = feature_path;
    if (e.feature_path.is_relative()) e.feature_path = path.parent_path() / e.feature_path;
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write manifest " + path.string());
  for (const auto& e : entries) {
    out << e.video_id << ' ' << e.subject_id << ' ' << e.feature_path.generic_string() << '\n';
  }
}

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  throw Error(ErrorKind::ParseError, "unknown split '" + std::string(text) + "'");
}

Split SplitAssignment::of(const std::string& video_id) const {
  const auto it = by_video.find(video_id);
  if (it == by_video.end()) {
    throw Error(ErrorKind::ParseError, "video '" + video_id + "' has no split assignment");
  }
  return it->second;
}

std::vector<std::string> SplitAssignment::videos(Split split) const {
  std::vector<std::string> out;
  for (const auto& [id, s] : by_video) {
    if (s == split) out.push_back(id);
  }
  return out;
}

SplitAssignment build_splits(std::span<const ManifestEntry> videos,
                             const SplitFractions& fractions, std::uint64_t seed) {
  const std::array<double, 3> frac{fractions.train, fractions.val, fractions.test};
  double total_frac = 0.0;
  for (double f : frac) {
    if (!(f >= 0.0) || !std::isfinite(f)) {
      throw Error(ErrorKind::ConfigError, "split fractions must be finite and >= 0");
    }
    total_frac += f;
  }
  if (total_frac <= 0.0) throw Error(ErrorKind::ConfigError, "split fractions sum to zero");

  std::set<std::string> subject_set;
  for (const auto& v : videos) {
    if (v.subject_id.empty()) {
      throw Error(ErrorKind::ConfigError, "video '" + v.video_id + "' has no subject");
    }
    subject_set.insert(v.subject_id);
  }
  std::vector<std::string> subjects(subject_set.begin(), subject_set.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(subjects));

  // Largest-remainder apportionment of subjects to splits.
  const auto n_subjects = static_cast<double>(subjects.size());
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = frac[i] / total_frac * n_subjects;
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    remainder[i] = quota - std::floor(quota);
    assigned += counts[i];
  }
  while (assigned < subjects.size()) {
    std::size_t best = 3;
    for (std::size_t i = 0; i < 3; ++i) {
      if (frac[i] <= 0.0) continue;
      if (best == 3 || remainder[i] > remainder[best]) best = i;
    }
    ++counts[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (frac[i] > 0.0 && counts[i] == 0) {
      throw Error(ErrorKind::InsufficientSubjects,
                  std::to_string(subjects.size()) + " subjects cannot fill the " +
                      std::string(to_string(static_cast<Split>(i))) + " split");
    }
  }

  std::map<std::string, Split> subject_split;
  std::size_t k = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t c = 0; c < counts[i]; ++c) subject_split[subjects[k++]] = static_cast<Split>(i);
  }
  SplitAssignment out;
  for (const auto& v : videos) out.by_video[v.video_id] = subject_split.at(v.subject_id);
  return out;
}

void write_split_file(const std::filesystem::path& path, const SplitAssignment& splits) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write split file " + path.string());
  for (const auto& [id, s] : splits.by_video) out << id << ' ' << to_string(s) << '\n';
}

SplitAssignment read_split_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open split file " + path.string());
  SplitAssignment out;
  std::string id;
  std::string split;
  while (in >> id >> split) out.by_video[id] = parse_split(split);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<ClipBatch> training_batches(std::span<const Clip> clips, const RateConfig& rates,
                                        std::size_t batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw Error(ErrorKind::ConfigError, "batch size must be >= 1");
  std::vector<const FeatureSequence*> normal;
  for (const auto& clip : clips) {
    if (assign_clip_label(clip.frame_labels, rates) == ClipLabel::Normal) {
      normal.push_back(&clip.features);
    }
  }
  if (normal.empty()) {
    throw Error(ErrorKind::NoNormalClips, "no clip is Normal under normal rate " +
                                              rates.normal_rate.to_string());
  }
  Rng rng(seed);
  rng.shuffle(std::span<const FeatureSequence*>(normal));
  std::vector<ClipBatch> batches;
  for (std::size_t i = 0; i < normal.size(); i += batch_size) {
    const std::size_t end = std::min(normal.size(), i + batch_size);
    batches.emplace_back(normal.begin() + static_cast<std::ptrdiff_t>(i),
                         normal.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace drowsy
