#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace drowsy {

/// Row-major 8-bit grayscale frame.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return data_[index(x, y)]; }

  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  std::span<std::uint8_t> pixels() noexcept { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Half-open pixel range [begin, end) of tile `index` when `extent` pixels are
/// split into `tiles` equal tiles; the remainder goes to the last tile.
struct TileSpan {
  int begin;
  int end;
  int size() const noexcept { return end - begin; }
};

constexpr TileSpan tile_span(int extent, int tiles, int index) noexcept {
  const int base = extent / tiles;
  const int begin = index * base;
  const int end = (index == tiles - 1) ? extent : begin + base;
  return {begin, end};
}

// Binary PGM (P5, maxval 255). Plain P2 is accepted on read.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

}  // namespace drowsy
