#include "proxpnp/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace proxpnp {

namespace {

std::string lower_ext(const std::string& path) {
  const auto pos = path.find_last_of('.');
  if (pos == std::string::npos) return "";
  std::string ext = path.substr(pos + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

unsigned char to_byte(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(c * 255.0));
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Signal read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("read_png: cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("read_png: libpng init failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("read_png: libpng init failure");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("read_png: failed to decode " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  png_byte color = png_get_color_type(png, info);
  png_byte depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("read_png: unsupported channel count in " + path);
  }

  std::vector<png_byte> rowbuf(static_cast<std::size_t>(w) * channels);
  Signal img(Shape{static_cast<int>(h), static_cast<int>(w), channels});
  for (png_uint_32 r = 0; r < h; ++r) {
    png_read_row(png, rowbuf.data(), nullptr);
    for (png_uint_32 c = 0; c < w; ++c)
      for (int ch = 0; ch < channels; ++ch)
        img.channel(ch)[static_cast<std::size_t>(r) * w + c] =
            rowbuf[static_cast<std::size_t>(c) * channels + ch] / 255.0;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png(const std::string& path, const Signal& img) {
  const int channels = img.shape.channels;
  if (channels != 1 && channels != 3)
    throw std::invalid_argument("write_png: only 1 or 3 channels supported");

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("write_png: cannot open " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("write_png: libpng init failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("write_png: libpng init failure");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png: failed to encode " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.shape.width),
               static_cast<png_uint_32>(img.shape.height), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> rowbuf(static_cast<std::size_t>(img.shape.width) * channels);
  for (int r = 0; r < img.shape.height; ++r) {
    for (int c = 0; c < img.shape.width; ++c)
      for (int ch = 0; ch < channels; ++ch)
        rowbuf[static_cast<std::size_t>(c) * channels + ch] =
            to_byte(img.channel(ch)[static_cast<std::size_t>(r) * img.shape.width + c]);
    png_write_row(png, rowbuf.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Signal read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pnm: cannot open " + path);
  std::string magic;
  in >> magic;
  const bool gray = magic == "P2" || magic == "P5";
  const bool color = magic == "P3" || magic == "P6";
  if (!gray && !color) throw std::runtime_error("read_pnm: unsupported magic in " + path);
  const bool binary = magic == "P5" || magic == "P6";

  auto next_token = [&in, &path]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw std::runtime_error("read_pnm: truncated header in " + path);
  };
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw std::runtime_error("read_pnm: unsupported geometry/depth in " + path);

  const int channels = color ? 3 : 1;
  Signal img(Shape{h, w, channels});
  const std::size_t count = static_cast<std::size_t>(h) * w * channels;
  std::vector<int> raw(count);
  if (binary) {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
      throw std::runtime_error("read_pnm: truncated pixel data in " + path);
    for (std::size_t i = 0; i < count; ++i) raw[i] = buf[i];
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      if (!(in >> raw[i])) throw std::runtime_error("read_pnm: truncated pixel data in " + path);
    }
  }
  // interleaved file order -> planar storage
  std::size_t idx = 0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < channels; ++ch)
        img.channel(ch)[static_cast<std::size_t>(r) * w + c] =
            raw[idx++] / static_cast<double>(maxval);
  return img;
}

void write_pnm(const std::string& path, const Signal& img) {
  const int channels = img.shape.channels;
  if (channels != 1 && channels != 3)
    throw std::invalid_argument("write_pnm: only 1 or 3 channels supported");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pnm: cannot open " + path);
  out << (channels == 1 ? "P5" : "P6") << "\n"
      << img.shape.width << " " << img.shape.height << "\n255\n";
  for (int r = 0; r < img.shape.height; ++r)
    for (int c = 0; c < img.shape.width; ++c)
      for (int ch = 0; ch < channels; ++ch)
        out.put(static_cast<char>(
            to_byte(img.channel(ch)[static_cast<std::size_t>(r) * img.shape.width + c])));
  if (!out) throw std::runtime_error("write_pnm: write failure on " + path);
}

Signal read_image(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "png") return read_png(path);
  if (ext == "pgm" || ext == "ppm" || ext == "pnm") return read_pnm(path);
  throw std::runtime_error("read_image: unsupported format for " + path);
}

void write_image(const std::string& path, const Signal& img) {
  const std::string ext = lower_ext(path);
  if (ext == "png") return write_png(path, img);
  if (ext == "pgm" || ext == "ppm" || ext == "pnm") return write_pnm(path, img);
  throw std::runtime_error("write_image: unsupported format for " + path);
}

}  // namespace proxpnp
