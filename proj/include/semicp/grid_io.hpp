#pragma once

#include <filesystem>

#include "semicp/deform.hpp"

namespace semicp {

/// Binary control-grid file, little-endian:
///   magic   8 bytes  "SEMICPGR"
///   version u32      1
///   G       u32
///   euler   16 bytes "euler_xyz_RzRyRx"
///   E_pa, nu, alpha, beta, gamma        f64 x5
///   normalization offset, scale         f64 x3 each
///   displacements                       f64 x 3*G^3, node-major (i*G+j)*G+k,
///                                       components x,y,z
struct GridFileMeta {
    double young_pa = 1000.0;
    double poisson = 0.499;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
};

void save_grid(const std::filesystem::path& path, const ControlGrid& grid, const GridFileMeta& meta);

std::pair<ControlGrid, GridFileMeta> load_grid(const std::filesystem::path& path);

}  // namespace semicp
