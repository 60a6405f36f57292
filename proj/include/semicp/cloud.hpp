#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semicp/error.hpp"

namespace semicp {

/// Labeled point cloud. Positions are in millimetres unless a function is
/// documented to work in normalized coordinates. One integer semantic label
/// per point; normals, when present, are unit vectors.
struct PointCloud {
    std::vector<Eigen::Vector3d> points;
    std::vector<int> labels;
    std::optional<std::vector<Eigen::Vector3d>> normals;

    std::size_t size() const { return points.size(); }
    bool has_normals() const { return normals.has_value(); }
    std::set<int> label_set() const;

    /// Throws Error if the structural invariants do not hold.
    void check() const;
};

/// Per-axis affine map taking a bounding box onto [-1,1]^3:
/// y = (x - offset) .* scale, componentwise.
class NormalizationMap {
public:
    NormalizationMap()
        : offset_(Eigen::Vector3d::Zero()), scale_(Eigen::Vector3d::Ones()) {}
    NormalizationMap(const Eigen::Vector3d& offset, const Eigen::Vector3d& scale)
        : offset_(offset), scale_(scale) {}

    Eigen::Vector3d to_normalized(const Eigen::Vector3d& x_mm) const {
        return (x_mm - offset_).cwiseProduct(scale_);
    }
    Eigen::Vector3d to_mm(const Eigen::Vector3d& y) const {
        return y.cwiseQuotient(scale_) + offset_;
    }

    /// Millimetre vector equivalent of a normalized-space displacement.
    Eigen::Vector3d displacement_to_mm(const Eigen::Vector3d& d) const {
        return d.cwiseQuotient(scale_);
    }

    /// Unit normal mapped into normalized space (inverse-transpose rule for
    /// the anisotropic scaling), renormalized.
    Eigen::Vector3d normal_to_normalized(const Eigen::Vector3d& n) const {
        const Eigen::Vector3d m = n.cwiseQuotient(scale_);
        return m / m.norm();
    }

    /// Positions, and normals when present, mapped into normalized space.
    PointCloud cloud_to_normalized(const PointCloud& cloud) const;

    const Eigen::Vector3d& offset() const { return offset_; }
    const Eigen::Vector3d& scale() const { return scale_; }

    Eigen::Matrix4d forward_matrix() const;
    Eigen::Matrix4d inverse_matrix() const;

private:
    Eigen::Vector3d offset_;
    Eigen::Vector3d scale_;
};

struct ValidationReport {
    std::set<int> source_labels;
    std::set<int> target_labels;
    std::vector<int> missing_in_target;
    bool ok = false;
    std::string message;  // empty when ok
};

/// Checks that a cloud pair can enter the pipeline: both non-empty, every
/// source label present in the target (unless fallback is allowed), and at
/// least two distinct labels per cloud when semantic matching is on.
ValidationReport validate_pair(const PointCloud& source, const PointCloud& target,
                               bool semantic, bool allow_label_fallback);

/// k-NN PCA normals: the normal at p is the least-variance principal axis of
/// p and its k nearest neighbours, oriented away from the cloud centroid.
PointCloud estimate_normals(const PointCloud& cloud, int k);

/// Label-stratified random downsampling to at most n points. Per-label counts
/// follow largest-remainder proportional allocation with a floor of one point
/// per present label. Returns the cloud unchanged when it has <= n points.
PointCloud downsample_stratified(const PointCloud& cloud, std::size_t n, std::uint64_t seed);

/// Fits the map sending the union bounding box of a and b, expanded by
/// `margin` (a fraction of each axis extent, per side), onto [-1,1]^3.
/// An axis with zero extent falls back to a unit extent centred on the value.
NormalizationMap fit_normalization(const PointCloud& a, const PointCloud& b, double margin);

}  // namespace semicp
