#include "semicp/ply_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace semicp {

namespace {

enum class PlyType { kChar, kUChar, kShort, kUShort, kInt, kUInt, kFloat, kDouble };

std::size_t type_size(PlyType t) {
    switch (t) {
        case PlyType::kChar:
        case PlyType::kUChar: return 1;
        case PlyType::kShort:
        case PlyType::kUShort: return 2;
        case PlyType::kInt:
        case PlyType::kUInt:
        case PlyType::kFloat: return 4;
        case PlyType::kDouble: return 8;
    }
    return 0;
}

PlyType parse_type(const std::string& s) {
    if (s == "char" || s == "int8") return PlyType::kChar;
    if (s == "uchar" || s == "uint8") return PlyType::kUChar;
    if (s == "short" || s == "int16") return PlyType::kShort;
    if (s == "ushort" || s == "uint16") return PlyType::kUShort;
    if (s == "int" || s == "int32") return PlyType::kInt;
    if (s == "uint" || s == "uint32") return PlyType::kUInt;
    if (s == "float" || s == "float32") return PlyType::kFloat;
    if (s == "double" || s == "float64") return PlyType::kDouble;
    throw PlyError("unsupported PLY property type: " + s);
}

bool integer_type(PlyType t) { return t != PlyType::kFloat && t != PlyType::kDouble; }

struct Property {
    std::string name;
    PlyType type = PlyType::kFloat;
    bool is_list = false;
    PlyType count_type = PlyType::kUChar;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
};

double read_binary_scalar(std::istream& in, PlyType t) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(type_size(t)));
    if (!in) throw PlyError("unexpected end of binary PLY data");
    switch (t) {
        case PlyType::kChar: return static_cast<double>(static_cast<std::int8_t>(buf[0]));
        case PlyType::kUChar: return static_cast<double>(buf[0]);
        case PlyType::kShort: {
            std::int16_t v;
            std::memcpy(&v, buf, 2);
            return v;
        }
        case PlyType::kUShort: {
            std::uint16_t v;
            std::memcpy(&v, buf, 2);
            return v;
        }
        case PlyType::kInt: {
            std::int32_t v;
            std::memcpy(&v, buf, 4);
            return v;
        }
        case PlyType::kUInt: {
            std::uint32_t v;
            std::memcpy(&v, buf, 4);
            return v;
        }
        case PlyType::kFloat: {
            float v;
            std::memcpy(&v, buf, 4);
            return v;
        }
        case PlyType::kDouble: {
            double v;
            std::memcpy(&v, buf, 8);
            return v;
        }
    }
    return 0.0;
}

double read_ascii_scalar(std::istream& in) {
    double v;
    if (!(in >> v)) throw PlyError("unexpected end of ASCII PLY data");
    return v;
}

}  // namespace

PointCloud read_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PlyError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw PlyError("empty file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "ply") throw PlyError(path.string() + " is not a PLY file");

    bool binary = false;
    std::vector<Element> elements;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
        if (keyword == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii") binary = false;
            else if (fmt == "binary_little_endian") binary = true;
            else throw PlyError("unsupported PLY format: " + fmt);
        } else if (keyword == "element") {
            Element e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (keyword == "property") {
            if (elements.empty()) throw PlyError("property before any element");
            Property p;
            std::string t;
            ls >> t;
            if (t == "list") {
                std::string ct, it;
                ls >> ct >> it >> p.name;
                p.is_list = true;
                p.count_type = parse_type(ct);
                p.type = parse_type(it);
            } else {
                ls >> p.name;
                p.type = parse_type(t);
            }
            elements.back().properties.push_back(p);
        } else if (keyword == "end_header") {
            break;
        } else {
            throw PlyError("unknown PLY header keyword: " + keyword);
        }
    }

    const Element* vertex = nullptr;
    for (const auto& e : elements) {
        if (e.name == "vertex") vertex = &e;
    }
    if (!vertex) throw PlyError("PLY file has no vertex element");

    auto find_prop = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < vertex->properties.size(); ++i) {
            if (vertex->properties[i].name == name) return static_cast<int>(i);
        }
        return -1;
    };
    const int ix = find_prop("x"), iy = find_prop("y"), iz = find_prop("z");
    if (ix < 0 || iy < 0 || iz < 0) throw PlyError("vertex element lacks x/y/z properties");
    const int inx = find_prop("nx"), iny = find_prop("ny"), inz = find_prop("nz");
    const bool with_normals = inx >= 0 && iny >= 0 && inz >= 0;
    const int il = find_prop("label");
    if (il < 0) throw PlyError("vertex element lacks the required \"label\" property");
    if (!integer_type(vertex->properties[static_cast<std::size_t>(il)].type))
        throw PlyError("\"label\" property must have an integer type");

    PointCloud cloud;
    cloud.points.reserve(vertex->count);
    cloud.labels.reserve(vertex->count);
    if (with_normals) cloud.normals.emplace();

    for (const auto& e : elements) {
        if (&e == vertex) {
            std::vector<double> row(e.properties.size());
            for (std::size_t v = 0; v < e.count; ++v) {
                for (std::size_t p = 0; p < e.properties.size(); ++p) {
                    const Property& prop = e.properties[p];
                    if (prop.is_list) {
                        const double n = binary ? read_binary_scalar(in, prop.count_type)
                                                : read_ascii_scalar(in);
                        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
                            binary ? read_binary_scalar(in, prop.type) : read_ascii_scalar(in);
                        }
                        row[p] = 0.0;
                    } else {
                        row[p] = binary ? read_binary_scalar(in, prop.type) : read_ascii_scalar(in);
                    }
                }
                cloud.points.emplace_back(row[static_cast<std::size_t>(ix)],
                                          row[static_cast<std::size_t>(iy)],
                                          row[static_cast<std::size_t>(iz)]);
                cloud.labels.push_back(static_cast<int>(row[static_cast<std::size_t>(il)]));
                if (with_normals) {
                    Eigen::Vector3d n(row[static_cast<std::size_t>(inx)],
                                      row[static_cast<std::size_t>(iny)],
                                      row[static_cast<std::size_t>(inz)]);
                    const double len = n.norm();
                    cloud.normals->push_back(len > 0.0 ? Eigen::Vector3d(n / len)
                                                       : Eigen::Vector3d(0, 0, 1));
                }
            }
        } else {
            // Skip the data of elements we do not use.
            for (std::size_t v = 0; v < e.count; ++v) {
                for (const auto& prop : e.properties) {
                    if (prop.is_list) {
                        const double n = binary ? read_binary_scalar(in, prop.count_type)
                                                : read_ascii_scalar(in);
                        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
                            binary ? read_binary_scalar(in, prop.type) : read_ascii_scalar(in);
                        }
                    } else {
                        binary ? read_binary_scalar(in, prop.type) : read_ascii_scalar(in);
                    }
                }
            }
        }
    }
    if (cloud.points.empty()) throw PlyError("PLY file has no vertices: " + path.string());
    return cloud;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud, bool ascii) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PlyError("cannot write " + path.string());

    int max_label = 0;
    for (int l : cloud.labels) max_label = std::max(max_label, l);
    const bool uchar_labels = max_label <= 255;

    out << "ply\n";
    out << (ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n");
    out << "element vertex " << cloud.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    if (cloud.has_normals()) out << "property float nx\nproperty float ny\nproperty float nz\n";
    out << "property " << (uchar_labels ? "uchar" : "int") << " label\n";
    out << "end_header\n";

    auto put_float = [&](double v) {
        const float f = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f), 4);
    };
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        if (ascii) {
            out << static_cast<float>(p.x()) << " " << static_cast<float>(p.y()) << " "
                << static_cast<float>(p.z());
            if (cloud.has_normals()) {
                const auto& n = (*cloud.normals)[i];
                out << " " << static_cast<float>(n.x()) << " " << static_cast<float>(n.y()) << " "
                    << static_cast<float>(n.z());
            }
            out << " " << cloud.labels[i] << "\n";
        } else {
            put_float(p.x());
            put_float(p.y());
            put_float(p.z());
            if (cloud.has_normals()) {
                const auto& n = (*cloud.normals)[i];
                put_float(n.x());
                put_float(n.y());
                put_float(n.z());
            }
            if (uchar_labels) {
                const auto l = static_cast<unsigned char>(cloud.labels[i]);
                out.write(reinterpret_cast<const char*>(&l), 1);
            } else {
                const auto l = static_cast<std::int32_t>(cloud.labels[i]);
                out.write(reinterpret_cast<const char*>(&l), 4);
            }
        }
    }
    if (!out) throw PlyError("write failed: " + path.string());
}

}  // namespace semicp
