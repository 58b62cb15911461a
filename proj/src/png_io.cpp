#include "facedepth/png_io.hpp"

#include <png.h>

#include <bit>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include "facedepth/error.hpp"

namespace facedepth {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

// libpng reports errors by longjmp; the message is parked here and rethrown
// as an exception once control is back in C++ frames.
struct ErrorSlot {
  char message[256] = {};
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* slot = static_cast<ErrorSlot*>(png_get_error_ptr(png));
  std::snprintf(slot->message, sizeof(slot->message), "%s", msg);
  png_longjmp(png, 1);
}
void on_png_warning(png_structp, png_const_charp) {}

// Only libpng calls happen between setjmp and the return, so no C++ object
// with a destructor is skipped by the longjmp.
bool write_rows(png_structp png, png_infop info, std::FILE* file, int width, int height, int bit_depth,
                int color_type, png_bytepp rows, bool swap16) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, file);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (swap16) png_set_swap(png);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

void write_png(const std::filesystem::path& path, int width, int height, int bit_depth, int color_type,
               std::vector<png_bytep>& rows, bool swap16) {
  FilePtr file = open_file(path, "wb");
  ErrorSlot slot;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &slot, on_png_error, on_png_warning);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  const bool ok = info && write_rows(png, info, file.get(), width, height, bit_depth, color_type,
                                     rows.data(), swap16);
  png_destroy_write_struct(&png, info ? &info : nullptr);
  if (!ok) throw IoError("writing '" + path.string() + "': " + slot.message);
  if (std::fflush(file.get()) != 0 || std::ferror(file.get())) {
    throw IoError("short write to '" + path.string() + "'");
  }
}

struct Header {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
};

enum class Target { kRgb8, kGray16 };

bool read_header(png_structp png, png_infop info, std::FILE* file, Header* h) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, file);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  h->width = png_get_image_width(png, info);
  h->height = png_get_image_height(png, info);
  h->bit_depth = png_get_bit_depth(png, info);
  h->color_type = png_get_color_type(png, info);
  return true;
}

bool setup_transforms(png_structp png, png_infop info, Target target, png_size_t* rowbytes) {
  if (setjmp(png_jmpbuf(png))) return false;
  if (target == Target::kRgb8) {
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
  } else if (std::endian::native == std::endian::little) {
    png_set_swap(png);
  }
  png_read_update_info(png, info);
  *rowbytes = png_get_rowbytes(png, info);
  return true;
}

bool read_rows(png_structp png, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  return true;
}

// `accept` may reject the header by throwing before any pixel data is read.
template <typename Image, typename Accept>
Image read_png(const std::filesystem::path& path, Target target, std::size_t bytes_per_pixel, Accept accept) {
  FilePtr file = open_file(path, "rb");
  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("'" + path.string() + "' is not a PNG file");
  }
  ErrorSlot slot;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &slot, on_png_error, on_png_warning);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Cleanup {
    png_structp* png;
    png_infop* info;
    ~Cleanup() { png_destroy_read_struct(png, *info ? info : nullptr, nullptr); }
  } cleanup{&png, &info};
  if (!info) throw IoError("png_create_info_struct failed");

  Header h;
  if (!read_header(png, info, file.get(), &h)) {
    throw FormatError("'" + path.string() + "': " + slot.message);
  }
  accept(h);
  png_size_t rowbytes = 0;
  if (!setup_transforms(png, info, target, &rowbytes)) {
    throw FormatError("'" + path.string() + "': " + slot.message);
  }
  if (rowbytes != static_cast<png_size_t>(h.width) * bytes_per_pixel) {
    throw FormatError("'" + path.string() + "': unsupported PNG layout");
  }
  Image out(static_cast<int>(h.width), static_cast<int>(h.height));
  std::vector<png_bytep> rows(h.height);
  auto* base = reinterpret_cast<png_bytep>(out.pixels().data());
  for (png_uint_32 y = 0; y < h.height; ++y) rows[y] = base + static_cast<std::size_t>(y) * rowbytes;
  if (!read_rows(png, rows.data())) {
    throw FormatError("'" + path.string() + "': " + slot.message);
  }
  return out;
}

}  // namespace

void write_png_rgb8(const std::filesystem::path& path, const RgbImage& image) {
  static_assert(sizeof(Rgb8) == 3);
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  auto* base = reinterpret_cast<png_bytep>(const_cast<Rgb8*>(image.pixels().data()));
  for (int y = 0; y < image.height(); ++y) rows[y] = base + static_cast<std::size_t>(y) * image.width() * 3;
  write_png(path, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, rows, false);
}

RgbImage read_png_rgb8(const std::filesystem::path& path) {
  return read_png<RgbImage>(path, Target::kRgb8, 3, [](const Header&) {});
}

void write_png_gray16(const std::filesystem::path& path, const Depth16Image& image) {
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  auto* base = reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(image.pixels().data()));
  for (int y = 0; y < image.height(); ++y) rows[y] = base + static_cast<std::size_t>(y) * image.width() * 2;
  // PNG stores 16-bit samples big-endian.
  write_png(path, image.width(), image.height(), 16, PNG_COLOR_TYPE_GRAY, rows,
            std::endian::native == std::endian::little);
}

Depth16Image read_png_gray16(const std::filesystem::path& path) {
  return read_png<Depth16Image>(path, Target::kGray16, 2, [&](const Header& h) {
    if (h.bit_depth != 16 || h.color_type != PNG_COLOR_TYPE_GRAY) {
      throw FormatError("'" + path.string() + "' is not a 16-bit single-channel PNG (bit depth " +
                        std::to_string(h.bit_depth) + ", color type " + std::to_string(h.color_type) + ")");
    }
  });
}

}  // namespace facedepth
