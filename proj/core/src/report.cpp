#include "drowsy/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "drowsy/error.hpp"
#include "drowsy/feature_file.hpp"

namespace drowsy {

namespace {

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, value);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

constexpr const char* kGridHeader =
    "normal_rate,anomaly_rate,n_clips,n_excluded,n_normal,n_anomalous,auc,threshold,accuracy,"
    "recall,precision,f1,status";

}  // namespace

void write_scores(const std::filesystem::path& path, std::span<const ScoredClip> scores) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write scores file " + path.string());
  for (const auto& s : scores) {
    out << s.clip_id << ' ' << format_real(s.score) << ' ' << (s.anomalous ? 1 : 0) << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

std::vector<ScoredClip> read_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open scores file " + path.string());
  std::vector<ScoredClip> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    ScoredClip s;
    std::string score;
    std::string label;
    if (!(fields >> s.clip_id)) continue;
    if (!(fields >> score >> label) || (label != "0" && label != "1")) {
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) +
                                             ": expected 'clip_id score true_label'");
    }
    s.score = parse_real(score);
    s.anomalous = label == "1";
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_grid_table(const RateGrid& grid) {
  struct Block {
    const char* title;
    bool percent;
    double (*get)(const EvalReport&);
  };
  const Block blocks[] = {
      {"AUC", false, [](const EvalReport& r) { return r.auc; }},
      {"Accuracy (%)", true, [](const EvalReport& r) { return r.metrics.accuracy; }},
      {"Recall (%)", true, [](const EvalReport& r) { return r.metrics.recall; }},
      {"Precision (%)", true, [](const EvalReport& r) { return r.metrics.precision; }},
      {"F1 (%)", true, [](const EvalReport& r) { return r.metrics.f1; }},
  };
  constexpr std::size_t kLabelWidth = 16;
  constexpr std::size_t kCellWidth = 10;

  std::string out;
  for (const Block& block : blocks) {
    out += block.title;
    out += '\n';
    out += pad_right("anomaly\\normal", kLabelWidth);
    for (const Rate& nr : grid.normal_rates) out += pad_left(nr.to_string(), kCellWidth);
    out += '\n';
    for (const Rate& ar : grid.anomaly_rates) {
      out += pad_right(ar.to_string(), kLabelWidth);
      for (const Rate& nr : grid.normal_rates) {
        const GridCell& cell = grid.at(nr, ar);
        std::string text = "n/a";
        if (cell.report) {
          const double v = block.get(*cell.report);
          text = block.percent ? fmt("%.2f", 100.0 * v) : fmt("%.4f", v);
        }
        out += pad_left(text, kCellWidth);
      }
      out += '\n';
    }
    out += '\n';
  }
  out += "Clips evaluated / excluded\n";
  out += pad_right("anomaly\\normal", kLabelWidth);
  for (const Rate& nr : grid.normal_rates) out += pad_left(nr.to_string(), kCellWidth);
  out += '\n';
  for (const Rate& ar : grid.anomaly_rates) {
    out += pad_right(ar.to_string(), kLabelWidth);
    for (const Rate& nr : grid.normal_rates) {
      const GridCell& cell = grid.at(nr, ar);
      out += pad_left(std::to_string(cell.n_clips) + "/" + std::to_string(cell.n_excluded), kCellWidth);
    }
    out += '\n';
  }
  for (const auto& cell : grid.cells) {
    if (!cell.error.empty()) {
      out += "cell (" + cell.normal_rate.to_string() + ", " + cell.anomaly_rate.to_string() +
             "): " + cell.error + '\n';
    }
  }
  return out;
}

std::string format_grid_csv(const RateGrid& grid) {
  std::string out = kGridHeader;
  out += '\n';
  for (const auto& cell : grid.cells) {
    out += cell.normal_rate.to_string() + ',' + cell.anomaly_rate.to_string() + ',' +
           std::to_string(cell.n_clips) + ',' + std::to_string(cell.n_excluded) + ',';
    if (cell.report) {
      const auto& r = *cell.report;
      out += std::to_string(r.n_normal) + ',' + std::to_string(r.n_anomalous) + ',' +
             fmt("%.10g", r.auc) + ',' + fmt("%.10g", r.threshold) + ',' +
             fmt("%.10g", r.metrics.accuracy) + ',' + fmt("%.10g", r.metrics.recall) + ',' +
             fmt("%.10g", r.metrics.precision) + ',' + fmt("%.10g", r.metrics.f1) + ",ok";
    } else {
      std::string err = cell.error;
      std::replace(err.begin(), err.end(), ',', ';');
      out += ",,,,,,,,error: " + err;
    }
    out += '\n';
  }
  return out;
}

std::string format_histogram_csv(const RateGrid& grid) {
  std::string out = "normal_rate,anomaly_rate,bin,bin_lo,bin_hi,normal_count,anomalous_count\n";
  for (const auto& cell : grid.cells) {
    if (!cell.report) continue;
    const ScoreHistogram& h = cell.report->histogram;
    for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
      out += cell.normal_rate.to_string() + ',' + cell.anomaly_rate.to_string() + ',' +
             std::to_string(b) + ',' + fmt("%.10g", h.edges[b]) + ',' +
             fmt("%.10g", h.edges[b + 1]) + ',' + std::to_string(h.counts[0][b]) + ',' +
             std::to_string(h.counts[1][b]) + '\n';
    }
  }
  return out;
}

MetricColumn grid_cell_column(const std::filesystem::path& path, const std::string& label,
                              const Rate& normal_rate, const Rate& anomaly_rate) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open grid report " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kGridHeader) {
    throw Error(ErrorKind::ParseError, path.string() + " is not a grid report CSV");
  }
  while (std::getline(in, line)) {
    const auto f = split_csv(line);
    if (f.size() != 13) throw Error(ErrorKind::ParseError, path.string() + ": malformed row");
    if (!(Rate::parse(f[0]) == normal_rate) || !(Rate::parse(f[1]) == anomaly_rate)) continue;
    if (f[12] != "ok") {
      throw Error(ErrorKind::ParseError, path.string() + ": requested cell was not evaluated");
    }
    MetricColumn col;
    col.label = label;
    col.metrics = {{"AUC", parse_real(f[6])},
                   {"Accuracy", parse_real(f[8])},
                   {"Recall", parse_real(f[9])},
                   {"Precision", parse_real(f[10])},
                   {"F1", parse_real(f[11])}};
    return col;
  }
  throw Error(ErrorKind::ParseError, path.string() + ": no cell at rates (" +
                                         normal_rate.to_string() + ", " + anomaly_rate.to_string() + ")");
}

std::string compare_table(std::span<const MetricColumn> columns, int precision) {
  std::vector<std::string> names;
  for (const auto& col : columns) {
    for (const auto& [name, value] : col.metrics) {
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    }
  }
  std::size_t label_width = 6;
  for (const auto& n : names) label_width = std::max(label_width, n.size());
  label_width += 2;
  std::size_t cell_width = static_cast<std::size_t>(precision) + 4;
  for (const auto& col : columns) cell_width = std::max(cell_width, col.label.size() + 2);

  const std::string pattern = "%." + std::to_string(precision) + "f";
  std::string out = pad_right("", label_width);
  for (const auto& col : columns) out += pad_left(col.label, cell_width);
  out += '\n';
  for (const auto& name : names) {
    out += pad_right(name, label_width);
    for (const auto& col : columns) {
      const auto it = std::find_if(col.metrics.begin(), col.metrics.end(),
                                   [&](const auto& kv) { return kv.first == name; });
      out += pad_left(it == col.metrics.end() ? "-" : fmt(pattern.c_str(), it->second), cell_width);
    }
    out += '\n';
  }
  return out;
}

}  // namespace drowsy
