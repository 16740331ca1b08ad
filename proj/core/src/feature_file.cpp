#include "drowsy/feature_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "drowsy/error.hpp"

namespace drowsy {

std::string format_real(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token.front() == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last || token.empty()) {
    throw Error(ErrorKind::ParseError, "not a real number: '" + std::string(token) + "'");
  }
  return value;
}

std::string labels_to_string(const FrameLabels& labels) {
  std::string s;
  s.reserve(labels.size());
  for (auto l : labels) s.push_back(l ? '1' : '0');
  return s;
}

FrameLabels labels_from_string(std::string_view text) {
  FrameLabels labels;
  labels.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw Error(ErrorKind::ParseError, "label string contains '" + std::string(1, c) + "'");
    }
    labels.push_back(c == '1' ? 1 : 0);
  }
  return labels;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

class LineReader {
 public:
  LineReader(std::string_view text, std::string source)
      : text_(text), source_(std::move(source)) {}

  // Next non-blank line, or false at end of input.
  bool next(std::string_view& line) {
    while (pos_ < text_.size()) {
      const std::size_t end = text_.find('\n', pos_);
      const std::size_t stop = end == std::string_view::npos ? text_.size() : end;
      line = text_.substr(pos_, stop - pos_);
      pos_ = stop + 1;
      ++line_no_;
      if (!split_ws(line).empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::ParseError,
                source_ + ":" + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

long parse_count(std::string_view token, const LineReader& reader) {
  long value = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size() || value < 1) {
    reader.fail("expected positive integer, got '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

std::vector<VideoFeatures> parse_feature_text(std::string_view text, const std::string& source) {
  std::vector<VideoFeatures> videos;
  LineReader reader(text, source);
  std::string_view line;
  while (reader.next(line)) {
    const auto header = split_ws(line);
    if (header.size() != 3) reader.fail("expected header 'video_id N D'");
    VideoFeatures video;
    video.video_id = std::string(header[0]);
    const long n = parse_count(header[1], reader);
    const long d = parse_count(header[2], reader);
    video.features.resize(n, d);
    for (long t = 0; t < n; ++t) {
      if (!reader.next(line)) reader.fail("unexpected end of file in feature rows");
      const auto tokens = split_ws(line);
      if (static_cast<long>(tokens.size()) != d) {
        reader.fail("expected " + std::to_string(d) + " values, got " +
                    std::to_string(tokens.size()));
      }
      for (long k = 0; k < d; ++k) {
        try {
          video.features(t, k) = parse_real(tokens[static_cast<std::size_t>(k)]);
        } catch (const Error& e) {
          reader.fail(e.what());
        }
      }
    }
    if (!reader.next(line)) reader.fail("missing label line");
    const auto label_tokens = split_ws(line);
    if (label_tokens.size() != 1) reader.fail("label line must be a single 0/1 string");
    try {
      video.labels = labels_from_string(label_tokens[0]);
    } catch (const Error& e) {
      reader.fail(e.what());
    }
    if (static_cast<long>(video.labels.size()) != n) {
      throw Error(ErrorKind::LabelLengthMismatch,
                  source + ": video '" + video.video_id + "' has " +
                      std::to_string(video.labels.size()) + " labels for " +
                      std::to_string(n) + " frames");
    }
    for (long t = 0; t < n; ++t) {
      const double norm = video.features.row(t).norm();
      if (std::abs(norm - 1.0) > 1e-6) {
        video.features.row(t) = l2_normalize(video.features.row(t).transpose()).transpose();
        ++video.renormalized_rows;
      }
    }
    videos.push_back(std::move(video));
  }
  return videos;
}

std::vector<VideoFeatures> load_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open feature file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto videos = parse_feature_text(buf.str(), path.string());
  for (const auto& v : videos) {
    if (v.renormalized_rows > 0) {
      std::cerr << "warning: " << path.string() << ": re-normalized " << v.renormalized_rows
                << " non-unit rows of video '" << v.video_id << "'\n";
    }
  }
  return videos;
}

std::string format_feature_text(const std::vector<VideoFeatures>& videos) {
  std::string out;
  for (const auto& v : videos) {
    const auto n = v.features.rows();
    const auto d = v.features.cols();
    if (static_cast<Eigen::Index>(v.labels.size()) != n) {
      throw Error(ErrorKind::LabelLengthMismatch,
                  "video '" + v.video_id + "' label count does not match frame count");
    }
    out += v.video_id + ' ' + std::to_string(n) + ' ' + std::to_string(d) + '\n';
    for (Eigen::Index t = 0; t < n; ++t) {
      for (Eigen::Index k = 0; k < d; ++k) {
        if (k) out += ' ';
        out += format_real(v.features(t, k));
      }
      out += '\n';
    }
    out += labels_to_string(v.labels);
    out += '\n';
  }
  return out;
}

void write_feature_file(const std::filesystem::path& path,
                        const std::vector<VideoFeatures>& videos) {
  const std::string text = format_feature_text(videos);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write feature file " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace drowsy
