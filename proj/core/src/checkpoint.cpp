#include "drowsy/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "drowsy/error.hpp"
#include "drowsy/feature_file.hpp"

namespace drowsy {

namespace {

constexpr std::string_view kMagic = "drowsy-lstm-autoencoder";
constexpr int kVersion = 1;

}  // namespace

std::string format_checkpoint(const AutoencoderParams& params) {
  params.check_shape();
  std::string out;
  out += std::string(kMagic) + ' ' + std::to_string(kVersion) + '\n';
  out += "feature_dim " + std::to_string(params.feature_dim()) + '\n';
  out += "hidden_size " + std::to_string(params.hidden_size()) + '\n';
  params.for_each_tensor([&out](std::string_view name, Eigen::Map<const Eigen::MatrixXd> m) {
    out += "tensor " + std::string(name) + ' ' + std::to_string(m.rows()) + ' ' +
           std::to_string(m.cols()) + '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) out += ' ';
        out += format_real(m(r, c));
      }
      out += '\n';
    }
  });
  return out;
}

AutoencoderParams parse_checkpoint(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  const auto fail = [&source](const std::string& what) -> Error {
    return Error(ErrorKind::ParseError, source + ": " + what);
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) throw fail("not a checkpoint file");
  if (version != kVersion) throw fail("unsupported checkpoint version " + std::to_string(version));
  std::string key;
  Eigen::Index dim = 0;
  Eigen::Index hidden = 0;
  if (!(in >> key >> dim) || key != "feature_dim" || dim < 1) throw fail("bad feature_dim");
  if (!(in >> key >> hidden) || key != "hidden_size" || hidden < 1) throw fail("bad hidden_size");

  AutoencoderParams params = AutoencoderParams::zeros(dim, hidden);
  params.for_each_tensor([&](std::string_view name, Eigen::Map<Eigen::MatrixXd> m) {
    std::string tag;
    std::string got_name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(in >> tag >> got_name >> rows >> cols) || tag != "tensor") {
      throw fail("expected tensor header for " + std::string(name));
    }
    if (got_name != name || rows != m.rows() || cols != m.cols()) {
      throw fail("tensor " + got_name + " " + std::to_string(rows) + "x" + std::to_string(cols) +
                 " does not match expected " + std::string(name) + " " +
                 std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    std::string token;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(in >> token)) throw fail("truncated tensor " + got_name);
        m(r, c) = parse_real(token);
      }
    }
  });
  std::string trailing;
  if (in >> trailing) throw fail("unexpected trailing content '" + trailing + "'");
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const AutoencoderParams& params) {
  const std::string text = format_checkpoint(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write checkpoint " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

AutoencoderParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str(), path.string());
}

}  // namespace drowsy
