#include <fstream>
#include <sstream>
#include <vector>

#include "crossview/io/binary.hpp"
#include "crossview/io/formats.hpp"

namespace crossview::io {

void write_ply(const std::string& path, const PointCloud& cloud) {
    cloud.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);

    bool with_class = cloud.has_semantics();
    bool with_rgb = cloud.has_rgb();
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << cloud.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (with_class) out << "property ushort class\n";
    out << "property uchar sky\n";
    if (with_rgb) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        put_f64(out, cloud.positions[i].x);
        put_f64(out, cloud.positions[i].y);
        put_f64(out, cloud.positions[i].z);
        if (with_class) put_le<std::uint16_t>(out, cloud.semantics[i]);
        put_le<std::uint8_t>(out, cloud.sky[i]);
        if (with_rgb) {
            put_le<std::uint8_t>(out, cloud.rgb[i].r);
            put_le<std::uint8_t>(out, cloud.rgb[i].g);
            put_le<std::uint8_t>(out, cloud.rgb[i].b);
        }
    }
    if (!out) throw IoError("write failure: " + path);
}

namespace {

struct PlyProperty {
    std::string type;
    std::string name;
};

std::size_t type_size(const std::string& t) {
    if (t == "double" || t == "float64") return 8;
    if (t == "float" || t == "float32") return 4;
    if (t == "ushort" || t == "uint16") return 2;
    if (t == "uchar" || t == "uint8") return 1;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32") return 4;
    throw IoError("unsupported PLY property type: " + t);
}

}  // namespace

PointCloud read_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);

    std::string line;
    if (!std::getline(in, line) || line != "ply") throw IoError("not a PLY file: " + path);

    std::size_t count = 0;
    std::vector<PlyProperty> props;
    bool header_done = false, format_ok = false, in_vertex = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "format") {
            std::string kind;
            ls >> kind;
            format_ok = kind == "binary_little_endian";
        } else if (tok == "comment") {
            continue;
        } else if (tok == "element") {
            std::string name;
            ls >> name >> count;
            if (name != "vertex") throw IoError("unsupported PLY element '" + name + "' in " + path);
            in_vertex = true;
        } else if (tok == "property") {
            if (!in_vertex) throw IoError("PLY property outside vertex element in " + path);
            PlyProperty p;
            ls >> p.type >> p.name;
            if (p.type == "list") throw IoError("PLY list properties unsupported in " + path);
            props.push_back(p);
        } else if (tok == "end_header") {
            header_done = true;
            break;
        }
    }
    if (!header_done) throw IoError("PLY header never ends in " + path);
    if (!format_ok) throw IoError("PLY must be binary little-endian: " + path);

    int ix = -1, iy = -1, iz = -1, icls = -1, isky = -1, ir = -1, ig = -1, ib = -1;
    for (std::size_t i = 0; i < props.size(); ++i) {
        const std::string& n = props[i].name;
        int idx = static_cast<int>(i);
        if (n == "x") ix = idx;
        else if (n == "y") iy = idx;
        else if (n == "z") iz = idx;
        else if (n == "class") icls = idx;
        else if (n == "sky") isky = idx;
        else if (n == "red") ir = idx;
        else if (n == "green") ig = idx;
        else if (n == "blue") ib = idx;
    }
    if (ix < 0 || iy < 0 || iz < 0) throw IoError("PLY lacks x/y/z properties: " + path);
    if (isky < 0) throw IoError("PLY lacks the sky property: " + path);
    bool with_rgb = ir >= 0 && ig >= 0 && ib >= 0;

    PointCloud cloud;
    cloud.positions.reserve(count);
    cloud.sky.reserve(count);
    if (icls >= 0) cloud.semantics.reserve(count);
    if (with_rgb) cloud.rgb.reserve(count);

    std::vector<double> record(props.size());
    for (std::size_t v = 0; v < count; ++v) {
        for (std::size_t i = 0; i < props.size(); ++i) {
            const std::string& t = props[i].type;
            switch (type_size(t)) {
                case 8: record[i] = get_f64(in, "PLY vertex"); break;
                case 4:
                    record[i] = (t == "float" || t == "float32")
                                    ? static_cast<double>(get_f32(in, "PLY vertex"))
                                    : static_cast<double>(get_le<std::uint32_t>(in, "PLY vertex"));
                    break;
                case 2: record[i] = get_le<std::uint16_t>(in, "PLY vertex"); break;
                default: record[i] = get_le<std::uint8_t>(in, "PLY vertex"); break;
            }
        }
        cloud.positions.push_back({record[ix], record[iy], record[iz]});
        cloud.sky.push_back(static_cast<std::uint8_t>(record[isky]) ? 1 : 0);
        if (icls >= 0) cloud.semantics.push_back(static_cast<ClassId>(record[icls]));
        if (with_rgb) {
            cloud.rgb.push_back({static_cast<std::uint8_t>(record[ir]),
                                 static_cast<std::uint8_t>(record[ig]),
                                 static_cast<std::uint8_t>(record[ib])});
        }
    }
    cloud.validate();
    return cloud;
}

}  // namespace crossview::io
