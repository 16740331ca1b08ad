#include "drowsy/image.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <string>

#include "drowsy/error.hpp"

namespace drowsy {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : GrayImage(width, height,
                std::vector<std::uint8_t>(
                    static_cast<std::size_t>(width < 0 ? 0 : width) *
                        static_cast<std::size_t>(height < 0 ? 0 : height),
                    fill)) {}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::DimensionMismatch, "image dimensions must be >= 1");
  }
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorKind::DimensionMismatch, "pixel buffer length != width * height");
  }
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  char ch = 0;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skipped;
      std::getline(in, skipped);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(ch);
  }
  return token;
}

int parse_header_int(std::istream& in, const std::filesystem::path& path) {
  const std::string token = next_token(in);
  try {
    std::size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "bad PGM header in " + path.string());
  }
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());

  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") {
    throw Error(ErrorKind::ParseError, path.string() + " is not a PGM file");
  }
  const int width = parse_header_int(in, path);
  const int height = parse_header_int(in, path);
  const int maxval = parse_header_int(in, path);
  if (width < 1 || height < 1 || maxval != 255) {
    throw Error(ErrorKind::ParseError,
                "unsupported PGM geometry/maxval in " + path.string());
  }

  std::vector<std::uint8_t> data(static_cast<std::size_t>(width) *
                                 static_cast<std::size_t>(height));
  if (magic == "P5") {
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
    if (in.gcount() != static_cast<std::streamsize>(data.size())) {
      throw Error(ErrorKind::ParseError, "truncated PGM data in " + path.string());
    }
  } else {
    for (auto& px : data) {
      const int v = parse_header_int(in, path);
      if (v < 0 || v > 255) {
        throw Error(ErrorKind::ParseError, "PGM sample out of range in " + path.string());
      }
      px = static_cast<std::uint8_t>(v);
    }
  }
  return GrayImage(width, height, std::move(data));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  const auto px = img.pixels();
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace drowsy
