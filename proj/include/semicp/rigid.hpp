#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "semicp/cloud.hpp"
#include "semicp/matching.hpp"
#include "semicp/optim.hpp"

namespace semicp {

/// Euler convention tag written into every persisted artifact.
inline constexpr const char* kEulerConventionTag = "euler_xyz_RzRyRx";

/// Rigid transform parameterized by XYZ Euler angles (radians) and a
/// translation: R = Rz(euler.z) * Ry(euler.y) * Rx(euler.x).
struct RigidTransform {
    Eigen::Vector3d euler_xyz = Eigen::Vector3d::Zero();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Matrix3d rotation() const;
    Eigen::Matrix4d matrix() const;
    Eigen::Vector3d apply(const Eigen::Vector3d& p) const;

    static RigidTransform identity() { return {}; }

    /// Euler extraction from an orthonormal rotation matrix plus translation.
    static RigidTransform from_rotation(const Eigen::Matrix3d& R, const Eigen::Vector3d& t);

    /// outer( inner(x) ): R = Ro*Ri, t = Ro*ti + to, re-extracted to Euler
    /// angles so the rotation stays exactly orthonormal.
    static RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner);

    /// dR/d(euler.x), dR/d(euler.y), dR/d(euler.z) at the given angles.
    static std::array<Eigen::Matrix3d, 3> rotation_derivatives(const Eigen::Vector3d& euler);
};

/// Point-to-plane loss sum_j |(R p_j + t - q_j) . m_j| with m_j the normal of
/// the matched target point, plus its gradient w.r.t. (euler_xyz, translation).
/// The residual-zero subgradient is taken as 0. Throws MissingNormalsError.
std::pair<double, Eigen::Matrix<double, 6, 1>> rigid_loss(const RigidTransform& transform,
                                                          const PointCloud& source,
                                                          const Correspondences& correspondences,
                                                          const PointCloud& target);

struct RigidConfig {
    double lr = 1e-3;
    int max_iterations = 500;
    std::size_t downsample = 1000;
    int inner_steps = 1;   // Adam steps per correspondence refresh
    int normal_k = 15;
    bool semantic = true;
    bool fallback_global = false;
    double rel_improvement = 1e-5;
    int patience = 20;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct RigidResult {
    RigidTransform transform;            // normalized coordinates
    Eigen::Matrix4d matrix_mm;           // conjugated through the normalization
    std::vector<double> trace;           // loss at the start of each iteration
    int iterations = 0;
    bool converged = false;
};

/// Stage 1: iterated semantic matching and point-to-plane minimization in
/// normalized coordinates, composing the per-iteration update onto the
/// running transform. Clouds are given in mm; `map` must have been fitted on
/// the pair.
RigidResult register_rigid(const PointCloud& source_mm, const PointCloud& target_mm,
                           const NormalizationMap& map, const RigidConfig& config);

}  // namespace semicp
