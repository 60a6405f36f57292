#pragma once

#include <filesystem>

#include "semicp/cloud.hpp"

namespace semicp {

/// Reads an ASCII or binary little-endian PLY vertex cloud. Requires float or
/// double x/y/z and an integer-typed property named "label"; nx/ny/nz are
/// picked up when all three are present. Other properties and elements are
/// skipped. Throws PlyError.
PointCloud read_ply(const std::filesystem::path& path);

/// Writes binary little-endian (default) or ASCII PLY with float x/y/z,
/// optional float nx/ny/nz, and a uchar label (int32 when a label exceeds
/// the uchar range).
void write_ply(const std::filesystem::path& path, const PointCloud& cloud, bool ascii = false);

}  // namespace semicp
