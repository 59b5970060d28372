#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace matsplat {

/// Interleaved 8-bit image.
struct Image8 {
  int width = 0, height = 0, channels = 1;
  std::vector<std::uint8_t> data;

  Image8() = default;
  Image8(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::uint8_t& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

namespace io {

/// PNG (8-bit gray, gray+alpha, RGB, RGBA, palette indices) or PGM/PPM (P2/P3/P5/P6).
Image8 read_image(const std::filesystem::path& path);
/// All images of a multi-image PGM/PPM file, in file order.
std::vector<Image8> read_pnm_pages(const std::filesystem::path& path);
/// Format chosen by extension: .png, .pgm/.ppm (binary).
void write_image(const Image8& image, const std::filesystem::path& path);
void write_pnm_pages(const std::vector<Image8>& pages, const std::filesystem::path& path);

}  // namespace io
}  // namespace matsplat
