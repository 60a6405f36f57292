#include "semicp/grid_io.hpp"

#include <cstring>
#include <fstream>

#include "semicp/rigid.hpp"

namespace semicp {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'M', 'I', 'C', 'P', 'G', 'R'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

void put_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
}

std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

double get_f64(std::istream& in) {
    double v = 0.0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

}  // namespace

void save_grid(const std::filesystem::path& path, const ControlGrid& grid,
               const GridFileMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw GridFormatError("cannot write " + path.string());

    out.write(kMagic, 8);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(grid.resolution()));
    out.write(kEulerConventionTag, 16);
    put_f64(out, meta.young_pa);
    put_f64(out, meta.poisson);
    put_f64(out, meta.alpha);
    put_f64(out, meta.beta);
    put_f64(out, meta.gamma);
    const auto& map = grid.normalization();
    for (int a = 0; a < 3; ++a) put_f64(out, map.offset()[a]);
    for (int a = 0; a < 3; ++a) put_f64(out, map.scale()[a]);
    out.write(reinterpret_cast<const char*>(grid.data().data()),
              static_cast<std::streamsize>(grid.data().size() * 8));
    if (!out) throw GridFormatError("write failed: " + path.string());
}

std::pair<ControlGrid, GridFileMeta> load_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GridFormatError("cannot open " + path.string());

    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw GridFormatError(path.string() + " is not a control-grid file");
    const std::uint32_t version = get_u32(in);
    if (version != kVersion)
        throw GridFormatError("unsupported grid file version " + std::to_string(version));
    const std::uint32_t resolution = get_u32(in);
    if (resolution < 2 || resolution > 1024)
        throw GridFormatError("implausible grid resolution " + std::to_string(resolution));
    char euler[17] = {0};
    in.read(euler, 16);
    if (std::string(euler) != kEulerConventionTag)
        throw GridFormatError("unexpected Euler convention tag \"" + std::string(euler) + "\"");

    GridFileMeta meta;
    meta.young_pa = get_f64(in);
    meta.poisson = get_f64(in);
    meta.alpha = get_f64(in);
    meta.beta = get_f64(in);
    meta.gamma = get_f64(in);
    Eigen::Vector3d offset, scale;
    for (int a = 0; a < 3; ++a) offset[a] = get_f64(in);
    for (int a = 0; a < 3; ++a) scale[a] = get_f64(in);

    ControlGrid grid(static_cast<int>(resolution), NormalizationMap(offset, scale));
    in.read(reinterpret_cast<char*>(grid.data().data()),
            static_cast<std::streamsize>(grid.data().size() * 8));
    if (!in) throw GridFormatError("truncated grid file: " + path.string());
    return {std::move(grid), meta};
}

}  // namespace semicp
