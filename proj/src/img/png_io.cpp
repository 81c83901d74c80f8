#include "veil/img/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace veil::img {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& what, const std::string& path) {
    throw IoError(what + ": " + path);
}

}  // namespace

Image load_png(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail("cannot open PNG for reading", path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail("libpng read init failed", path);
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail("libpng info init failed", path);
    }
    std::vector<png_bytep> rows;
    std::vector<unsigned char> buf;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("malformed PNG", path);
    }
    png_init_io(png, f.get());
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);

    if (depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("16-bit PNG unsupported (8-bit only)", path);
    }
    if (depth != 8 || (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_RGB)) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("unsupported PNG format (need 8-bit gray or RGB)", path);
    }
    const int channels = color == PNG_COLOR_TYPE_GRAY ? 1 : 3;

    buf.resize(static_cast<size_t>(h) * w * channels);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = buf.data() + static_cast<size_t>(y) * w * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image out = Image::create(static_cast<int>(h), static_cast<int>(w), channels);
    const size_t plane = out.plane();
    for (size_t y = 0; y < h; ++y)
        for (size_t x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                out.data[static_cast<size_t>(c) * plane + y * w + x] =
                    buf[(y * w + x) * channels + c] / 255.0;
    return out;
}

void save_png(const std::string& path, const Image& image) {
    check(!image.empty(), "save_png: empty image");
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail("cannot open PNG for writing", path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail("libpng write init failed", path);
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail("libpng info init failed", path);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail("PNG write failed", path);
    }
    png_init_io(png, f.get());
    const int color =
        image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, image.width, image.height, 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const size_t plane = image.plane();
    std::vector<unsigned char> row(static_cast<size_t>(image.width) * image.channels);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x)
            for (int c = 0; c < image.channels; ++c) {
                const double v =
                    image.data[static_cast<size_t>(c) * plane + static_cast<size_t>(y) * image.width + x];
                const double q = std::clamp(v, 0.0, 1.0) * 255.0;
                row[static_cast<size_t>(x) * image.channels + c] =
                    static_cast<unsigned char>(std::lround(q));
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image map_to_image(const Map2D& m) {
    Image out = Image::create(m.height, m.width, 1);
    out.data = m.v;
    return out;
}

void save_png(const std::string& path, const Map2D& m) { save_png(path, map_to_image(m)); }

}  // namespace veil::img
