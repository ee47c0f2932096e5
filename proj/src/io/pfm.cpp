#include <fstream>
#include <sstream>

#include "crossview/io/binary.hpp"
#include "crossview/io/formats.hpp"

namespace crossview::io {

void write_pfm(const std::string& path, const Image<float>& image) {
    if (image.empty()) throw ValidationError("cannot write an empty PFM");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "Pf\n" << image.width() << " " << image.height() << "\n-1.0\n";
    // PFM stores rows bottom-up.
    for (int p = image.height() - 1; p >= 0; --p) {
        for (int q = 0; q < image.width(); ++q) put_f32(out, image.at(p, q));
    }
    if (!out) throw IoError("write failure: " + path);
}

Image<float> read_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string magic;
    int width = 0, height = 0;
    double scale = 0.0;
    in >> magic >> width >> height >> scale;
    if (magic != "Pf") throw IoError("not a grayscale PFM: " + path);
    if (width < 1 || height < 1) throw IoError("bad PFM dimensions in " + path);
    if (scale == 0.0) throw IoError("bad PFM scale in " + path);
    in.get();  // single whitespace separating header from data
    bool little = scale < 0.0;

    Image<float> image(height, width);
    for (int p = height - 1; p >= 0; --p) {
        for (int q = 0; q < width; ++q) {
            std::uint32_t bits = get_le<std::uint32_t>(in, "PFM samples");
            if (!little) {
                bits = ((bits & 0xFF000000u) >> 24) | ((bits & 0x00FF0000u) >> 8) |
                       ((bits & 0x0000FF00u) << 8) | ((bits & 0x000000FFu) << 24);
            }
            float value;
            std::memcpy(&value, &bits, 4);
            image.at(p, q) = value;
        }
    }
    return image;
}

void write_pfm_depth(const std::string& path, const DepthImage& depth) {
    Image<float> narrow(depth.height(), depth.width());
    for (int p = 0; p < depth.height(); ++p)
        for (int q = 0; q < depth.width(); ++q)
            narrow.at(p, q) = static_cast<float>(depth.at(p, q));
    write_pfm(path, narrow);
}

DepthImage read_pfm_depth(const std::string& path) {
    Image<float> narrow = read_pfm(path);
    DepthImage depth(narrow.height(), narrow.width());
    for (int p = 0; p < narrow.height(); ++p)
        for (int q = 0; q < narrow.width(); ++q)
            depth.at(p, q) = narrow.at(p, q);
    return depth;
}

}  // namespace crossview::io
