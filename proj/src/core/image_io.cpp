#include <png.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <memory>

#include "matsplat/error.hpp"
#include "matsplat/image.hpp"

namespace matsplat::io {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

Image8 read_png(const fs::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    fail(ErrorKind::Format, path.string() + ": " + img.message);
  struct Guard {
    png_image* p;
    ~Guard() { png_image_free(p); }
  } guard{&img};

  if (img.format & PNG_FORMAT_FLAG_LINEAR)
    fail(ErrorKind::Format, path.string() + ": only 8-bit PNG images are supported");

  Image8 out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  if (img.format & PNG_FORMAT_FLAG_COLORMAP) {
    // Indexed PNG: keep the raw indices as a single channel.
    img.format = PNG_FORMAT_RGBA_COLORMAP;
    out.channels = 1;
    out.data.resize(PNG_IMAGE_SIZE(img));
    std::vector<png_byte> colormap(PNG_IMAGE_COLORMAP_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, out.data.data(), 0, colormap.data()))
      fail(ErrorKind::Format, path.string() + ": " + img.message);
    return out;
  }
  const bool color = img.format & PNG_FORMAT_FLAG_COLOR;
  const bool alpha = img.format & PNG_FORMAT_FLAG_ALPHA;
  if (color) img.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  else img.format = alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY;
  out.channels = static_cast<int>(PNG_IMAGE_PIXEL_CHANNELS(img.format));
  out.data.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.data.data(), 0, nullptr))
    fail(ErrorKind::Format, path.string() + ": " + img.message);
  return out;
}

void write_png(const Image8& image, const fs::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  switch (image.channels) {
    case 1: img.format = PNG_FORMAT_GRAY; break;
    case 2: img.format = PNG_FORMAT_GA; break;
    case 3: img.format = PNG_FORMAT_RGB; break;
    case 4: img.format = PNG_FORMAT_RGBA; break;
    default: fail(ErrorKind::Format, "cannot write a " + std::to_string(image.channels) + "-channel PNG");
  }
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.data.data(), 0, nullptr))
    fail(ErrorKind::Io, path.string() + ": " + img.message);
}

class PnmReader {
 public:
  PnmReader(const fs::path& path, std::string bytes) : path_(path), bytes_(std::move(bytes)) {}

  bool at_end() {
    skip_space();
    return pos_ >= bytes_.size();
  }

  Image8 next() {
    skip_space();
    if (pos_ + 2 > bytes_.size() || bytes_[pos_] != 'P') bad("missing netpbm magic");
    const char kind = bytes_[pos_ + 1];
    pos_ += 2;
    int channels = 0;
    bool binary = false;
    switch (kind) {
      case '2': channels = 1; break;
      case '3': channels = 3; break;
      case '5': channels = 1; binary = true; break;
      case '6': channels = 3; binary = true; break;
      default: bad(std::string("unsupported netpbm variant P") + kind);
    }
    const long w = number(), h = number(), maxval = number();
    if (w <= 0 || h <= 0) bad("non-positive image size");
    if (maxval <= 0 || maxval > 255) bad("only 8-bit netpbm images are supported");
    Image8 img(static_cast<int>(w), static_cast<int>(h), channels);
    if (binary) {
      ++pos_;  // single whitespace after maxval
      if (pos_ + img.data.size() > bytes_.size()) bad("truncated pixel data");
      std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_), img.data.size(), img.data.begin());
      pos_ += img.data.size();
    } else {
      for (auto& v : img.data) {
        const long x = number();
        if (x < 0 || x > maxval) bad("pixel value out of range");
        v = static_cast<std::uint8_t>(x);
      }
    }
    return img;
  }

 private:
  [[noreturn]] void bad(const std::string& what) const { fail(ErrorKind::Format, path_.string() + ": " + what); }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number() {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) bad("expected a number");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (1L << 30)) bad("number too large");
      ++pos_;
    }
    return v;
  }

  fs::path path_;
  std::string bytes_;
  std::size_t pos_ = 0;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string encode_pnm(const Image8& image) {
  if (image.channels != 1 && image.channels != 3)
    fail(ErrorKind::Format, "netpbm output supports 1 or 3 channels, got " + std::to_string(image.channels));
  std::string out = (image.channels == 1 ? "P5\n" : "P6\n") + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.data.data()), image.data.size());
  return out;
}

void write_bytes(const std::string& bytes, const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

Image8 read_image(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorKind::Io, "no such file: " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    PnmReader reader(path, slurp(path));
    return reader.next();
  }
  return read_png(path);
}

std::vector<Image8> read_pnm_pages(const fs::path& path) {
  PnmReader reader(path, slurp(path));
  std::vector<Image8> pages;
  while (!reader.at_end()) pages.push_back(reader.next());
  return pages;
}

void write_image(const Image8& image, const fs::path& path) {
  if (image.data.size() != static_cast<std::size_t>(image.width) * image.height * image.channels)
    fail(ErrorKind::Internal, "image buffer does not match its dimensions");
  const std::string ext = lower_extension(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") write_bytes(encode_pnm(image), path);
  else write_png(image, path);
}

void write_pnm_pages(const std::vector<Image8>& pages, const fs::path& path) {
  std::string bytes;
  for (const auto& p : pages) bytes += encode_pnm(p);
  write_bytes(bytes, path);
}

}  // namespace matsplat::io
