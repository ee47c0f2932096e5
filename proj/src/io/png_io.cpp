#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

#include <png.h>

#include "crossview/io/formats.hpp"

namespace crossview::io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) throw IoError("libpng writer allocation failed");
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) throw IoError("libpng reader allocation failed");
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError("cannot open: " + path);
    return f;
}

}  // namespace

void write_png_rgb(const std::string& path, const RgbImage& image) {
    if (image.empty()) throw ValidationError("cannot write an empty PNG");
    FilePtr f = open_file(path, "wb");
    PngWriter w;
    if (setjmp(png_jmpbuf(w.png))) throw IoError("libpng write failure: " + path);
    png_init_io(w.png, f.get());
    png_set_IHDR(w.png, w.info, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    std::vector<png_bytep> rows(image.height());
    for (int p = 0; p < image.height(); ++p) {
        rows[p] = reinterpret_cast<png_bytep>(const_cast<Rgb8*>(&image.at(p, 0)));
    }
    png_write_image(w.png, rows.data());
    png_write_end(w.png, nullptr);
}

RgbImage read_png_rgb(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    PngReader r;
    if (setjmp(png_jmpbuf(r.png))) throw IoError("libpng read failure: " + path);
    png_init_io(r.png, f.get());
    png_read_info(r.png, r.info);
    png_uint_32 width = png_get_image_width(r.png, r.info);
    png_uint_32 height = png_get_image_height(r.png, r.info);
    int color = png_get_color_type(r.png, r.info);
    int depth = png_get_bit_depth(r.png, r.info);
    if (depth == 16) png_set_strip_16(r.png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(r.png);
    }
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    png_read_update_info(r.png, r.info);
    if (png_get_rowbytes(r.png, r.info) != width * 3) {
        throw IoError("unexpected PNG layout after conversion: " + path);
    }
    RgbImage image(static_cast<int>(height), static_cast<int>(width));
    std::vector<png_bytep> rows(height);
    for (png_uint_32 p = 0; p < height; ++p) {
        rows[p] = reinterpret_cast<png_bytep>(&image.at(static_cast<int>(p), 0));
    }
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return image;
}

void write_png_palette(const std::string& path, const ClassImage& classes,
                       const std::vector<Rgb8>& palette) {
    if (classes.empty()) throw ValidationError("cannot write an empty PNG");
    if (palette.empty() || palette.size() > 256) {
        throw ValidationError("palette PNG needs 1..256 colors");
    }
    std::vector<png_byte> bytes(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i) {
        std::uint16_t v = classes.data()[i];
        if (v >= palette.size()) {
            throw ValidationError("class id " + std::to_string(v) + " outside the palette");
        }
        bytes[i] = static_cast<png_byte>(v);
    }
    FilePtr f = open_file(path, "wb");
    PngWriter w;
    if (setjmp(png_jmpbuf(w.png))) throw IoError("libpng write failure: " + path);
    png_init_io(w.png, f.get());
    png_set_IHDR(w.png, w.info, classes.width(), classes.height(), 8, PNG_COLOR_TYPE_PALETTE,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    std::vector<png_color> colors(palette.size());
    for (std::size_t i = 0; i < palette.size(); ++i) {
        colors[i] = {palette[i].r, palette[i].g, palette[i].b};
    }
    png_set_PLTE(w.png, w.info, colors.data(), static_cast<int>(colors.size()));
    png_write_info(w.png, w.info);
    std::vector<png_bytep> rows(classes.height());
    for (int p = 0; p < classes.height(); ++p) {
        rows[p] = bytes.data() + static_cast<std::size_t>(p) * classes.width();
    }
    png_write_image(w.png, rows.data());
    png_write_end(w.png, nullptr);
}

PalettePng read_png_palette(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    PngReader r;
    if (setjmp(png_jmpbuf(r.png))) throw IoError("libpng read failure: " + path);
    png_init_io(r.png, f.get());
    png_read_info(r.png, r.info);
    if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_PALETTE) {
        throw IoError("not a palette PNG: " + path);
    }
    if (png_get_bit_depth(r.png, r.info) < 8) png_set_packing(r.png);
    png_read_update_info(r.png, r.info);
    png_uint_32 width = png_get_image_width(r.png, r.info);
    png_uint_32 height = png_get_image_height(r.png, r.info);

    png_colorp colors = nullptr;
    int ncolors = 0;
    if (!png_get_PLTE(r.png, r.info, &colors, &ncolors)) {
        throw IoError("palette PNG without PLTE chunk: " + path);
    }
    PalettePng out;
    out.palette.reserve(ncolors);
    for (int i = 0; i < ncolors; ++i) {
        out.palette.push_back({colors[i].red, colors[i].green, colors[i].blue});
    }

    std::vector<png_byte> bytes(static_cast<std::size_t>(width) * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 p = 0; p < height; ++p) {
        rows[p] = bytes.data() + static_cast<std::size_t>(p) * width;
    }
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    out.classes = ClassImage(static_cast<int>(height), static_cast<int>(width));
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (bytes[i] >= out.palette.size()) {
            throw IoError("palette index outside PLTE in " + path);
        }
        out.classes.data()[i] = bytes[i];
    }
    return out;
}

void write_png_mask(const std::string& path, const MaskImage& mask) {
    if (mask.empty()) throw ValidationError("cannot write an empty PNG");
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask.data()[i] > 1) throw ValidationError("mask values must be 0 or 1");
    }
    FilePtr f = open_file(path, "wb");
    PngWriter w;
    if (setjmp(png_jmpbuf(w.png))) throw IoError("libpng write failure: " + path);
    png_init_io(w.png, f.get());
    png_set_IHDR(w.png, w.info, mask.width(), mask.height(), 1, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    png_set_packing(w.png);  // pack one-byte samples into 1-bit rows
    std::vector<png_bytep> rows(mask.height());
    for (int p = 0; p < mask.height(); ++p) {
        rows[p] = const_cast<png_bytep>(&mask.at(p, 0));
    }
    png_write_image(w.png, rows.data());
    png_write_end(w.png, nullptr);
}

MaskImage read_png_mask(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    PngReader r;
    if (setjmp(png_jmpbuf(r.png))) throw IoError("libpng read failure: " + path);
    png_init_io(r.png, f.get());
    png_read_info(r.png, r.info);
    if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_GRAY ||
        png_get_bit_depth(r.png, r.info) != 1) {
        throw IoError("not a 1-bit mask PNG: " + path);
    }
    png_set_packing(r.png);
    png_read_update_info(r.png, r.info);
    png_uint_32 width = png_get_image_width(r.png, r.info);
    png_uint_32 height = png_get_image_height(r.png, r.info);
    MaskImage mask(static_cast<int>(height), static_cast<int>(width));
    std::vector<png_bytep> rows(height);
    for (png_uint_32 p = 0; p < height; ++p) {
        rows[p] = &mask.at(static_cast<int>(p), 0);
    }
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return mask;
}

}  // namespace crossview::io
