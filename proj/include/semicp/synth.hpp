#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "semicp/cloud.hpp"
#include "semicp/deform.hpp"
#include "semicp/rigid.hpp"

namespace semicp {

struct EllipsoidSpec {
    Eigen::Vector3d center_mm = Eigen::Vector3d::Zero();
    Eigen::Vector3d radii_mm = Eigen::Vector3d::Ones();
    int label = 0;
    int count = 0;
};

struct TubeSpec {
    Eigen::Vector3d a_mm = Eigen::Vector3d::Zero();
    Eigen::Vector3d b_mm = Eigen::Vector3d::Zero();
    double radius_mm = 1.0;
    int label = 0;
    int count = 0;
};

struct PhantomSpec {
    std::vector<EllipsoidSpec> ellipsoids;
    std::vector<TubeSpec> tubes;
    double noise_mm = 0.0;
    std::uint64_t seed = 0;

    /// Three interleaved ellipsoids plus a diagonal vessel, 4 labels,
    /// ~8400 points, near-cubic extents of roughly 200 mm.
    static PhantomSpec default_multi_organ(std::uint64_t seed);

    void check() const;  // >= 2 labels, counts >= 50, radii > 0
};

/// Deterministic surface sampling with analytic normals.
PointCloud make_phantom(const PhantomSpec& spec);

struct PerturbationSpec {
    double visible_ratio = 1.0;       // fraction kept by the slab crop
    double max_rotation_deg = 0.0;    // per Euler angle
    double max_translation_mm = 10.0; // per axis
    double noise_mm = 1.0;
    int replicas = 1;
    std::uint64_t seed = 0;
};

struct Perturbed {
    PointCloud cloud;             // cropped, noised, rigidly misaligned
    PointCloud cropped_truth;     // cropped subset before noise and transform
    RigidTransform ground_truth_mm;  // exact inverse of the applied transform
};

/// Crops to the visible_ratio fraction of points nearest the boundary plane
/// of a random half-space through the centroid (a contiguous slab, modeling
/// a limited field of view), adds isotropic Gaussian noise, and applies a
/// random rigid misalignment about the slab centroid.
Perturbed perturb(const PointCloud& cloud, const PerturbationSpec& spec);

struct WarpFieldSpec {
    int grid_resolution = 25;
    double max_displacement_mm = 5.0;
    double smoothness = 0.5;  // wavenumber scale of the random field, lower = smoother
};

struct WarpedPair {
    PointCloud source;
    PointCloud target;
    ControlGrid grid;  // ground truth: target == warp(grid, I, source)
};

/// Smooth, fold-free random ground-truth deformation of a cloud. The field is
/// the curl of a random band-limited potential, so it is divergence-free in
/// the continuum limit. Throws FoldedGroundTruthError after 10 attempts.
WarpedPair make_warped_pair(const PointCloud& cloud, const WarpFieldSpec& spec, std::uint64_t seed);

}  // namespace semicp
