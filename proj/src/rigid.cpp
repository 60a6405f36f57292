#include "semicp/rigid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semicp/rng.hpp"

namespace semicp {

namespace {

Eigen::Matrix3d rot_x(double a) {
    Eigen::Matrix3d m;
    m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
    return m;
}

Eigen::Matrix3d rot_y(double b) {
    Eigen::Matrix3d m;
    m << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
    return m;
}

Eigen::Matrix3d rot_z(double c) {
    Eigen::Matrix3d m;
    m << std::cos(c), -std::sin(c), 0, std::sin(c), std::cos(c), 0, 0, 0, 1;
    return m;
}

Eigen::Matrix3d drot_x(double a) {
    Eigen::Matrix3d m;
    m << 0, 0, 0, 0, -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a);
    return m;
}

Eigen::Matrix3d drot_y(double b) {
    Eigen::Matrix3d m;
    m << -std::sin(b), 0, std::cos(b), 0, 0, 0, -std::cos(b), 0, -std::sin(b);
    return m;
}

Eigen::Matrix3d drot_z(double c) {
    Eigen::Matrix3d m;
    m << -std::sin(c), -std::cos(c), 0, std::cos(c), -std::sin(c), 0, 0, 0, 0;
    return m;
}

double sign_of(double r) { return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0); }

}  // namespace

Eigen::Matrix3d RigidTransform::rotation() const {
    return rot_z(euler_xyz.z()) * rot_y(euler_xyz.y()) * rot_x(euler_xyz.x());
}

Eigen::Matrix4d RigidTransform::matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.block<3, 3>(0, 0) = rotation();
    m.block<3, 1>(0, 3) = translation;
    return m;
}

Eigen::Vector3d RigidTransform::apply(const Eigen::Vector3d& p) const {
    return rotation() * p + translation;
}

RigidTransform RigidTransform::from_rotation(const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
    RigidTransform out;
    out.translation = t;
    // R = Rz(c) Ry(b) Rx(a): R(2,0) = -sin b.
    const double sb = -R(2, 0);
    const double b = std::asin(std::clamp(sb, -1.0, 1.0));
    double a, c;
    if (std::abs(sb) < 1.0 - 1e-12) {
        a = std::atan2(R(2, 1), R(2, 2));
        c = std::atan2(R(1, 0), R(0, 0));
    } else {
        // Gimbal lock: only a +/- c is determined; put everything into c.
        a = 0.0;
        c = std::atan2(-R(0, 1), R(1, 1));
    }
    out.euler_xyz = Eigen::Vector3d(a, b, c);
    return out;
}

RigidTransform RigidTransform::compose(const RigidTransform& outer, const RigidTransform& inner) {
    const Eigen::Matrix3d R = outer.rotation() * inner.rotation();
    const Eigen::Vector3d t = outer.rotation() * inner.translation + outer.translation;
    return from_rotation(R, t);
}

std::array<Eigen::Matrix3d, 3> RigidTransform::rotation_derivatives(const Eigen::Vector3d& e) {
    const Eigen::Matrix3d Rx = rot_x(e.x());
    const Eigen::Matrix3d Ry = rot_y(e.y());
    const Eigen::Matrix3d Rz = rot_z(e.z());
    return {Rz * Ry * drot_x(e.x()), Rz * drot_y(e.y()) * Rx, drot_z(e.z()) * Ry * Rx};
}

std::pair<double, Eigen::Matrix<double, 6, 1>> rigid_loss(const RigidTransform& transform,
                                                          const PointCloud& source,
                                                          const Correspondences& correspondences,
                                                          const PointCloud& target) {
    if (!target.has_normals()) throw MissingNormalsError();
    if (correspondences.size() != source.size())
        throw Error("correspondences do not cover the source cloud");

    const Eigen::Matrix3d R = transform.rotation();
    const auto dR = RigidTransform::rotation_derivatives(transform.euler_xyz);
    const auto& normals = *target.normals;

    double loss = 0.0;
    Eigen::Matrix<double, 6, 1> grad = Eigen::Matrix<double, 6, 1>::Zero();
    for (std::size_t j = 0; j < source.size(); ++j) {
        const Eigen::Vector3d& p = source.points[j];
        const std::size_t qi = correspondences[j].target_index;
        const Eigen::Vector3d& q = target.points[qi];
        const Eigen::Vector3d& m = normals[qi];
        const double r = (R * p + transform.translation - q).dot(m);
        loss += std::abs(r);
        const double s = sign_of(r);
        if (s != 0.0) {
            for (int a = 0; a < 3; ++a) grad[a] += s * m.dot(dR[a] * p);
            grad.tail<3>() += s * m;
        }
    }
    return {loss, grad};
}

RigidResult register_rigid(const PointCloud& source_mm, const PointCloud& target_mm,
                           const NormalizationMap& map, const RigidConfig& config) {
    const PointCloud src = map.cloud_to_normalized(
        downsample_stratified(source_mm, config.downsample, sub_seed(config.seed, 0)));
    PointCloud tgt = map.cloud_to_normalized(
        downsample_stratified(target_mm, config.downsample, sub_seed(config.seed, 1)));
    if (!tgt.has_normals()) tgt = estimate_normals(tgt, config.normal_k);

    const SemanticIndex index = SemanticIndex::build(tgt, config.semantic);

    RigidResult result;
    RigidTransform current;
    AdamState adam = AdamState::init(Eigen::VectorXd::Zero(6), config.lr);
    double best = std::numeric_limits<double>::infinity();
    int bad = 0;

    PointCloud moved = src;
    for (int it = 0; it < config.max_iterations; ++it) {
        const Eigen::Matrix3d R = current.rotation();
        for (std::size_t j = 0; j < src.size(); ++j)
            moved.points[j] = R * src.points[j] + current.translation;

        const Correspondences corr = match(index, moved, config.fallback_global, config.threads);

        // Inner solve for the per-iteration update, correspondences frozen.
        // The optimizer state persists across refreshes; its parameter view is
        // the update from the current transform, re-anchored at zero.
        adam.x.setZero();
        double loss0 = 0.0;
        for (int s = 0; s < config.inner_steps; ++s) {
            RigidTransform delta;
            delta.euler_xyz = adam.x.head<3>();
            delta.translation = adam.x.tail<3>();
            const auto [loss, grad6] = rigid_loss(delta, moved, corr, tgt);
            if (s == 0) loss0 = loss;
            Eigen::VectorXd g(6);
            g = grad6;
            adam_step_inplace(adam, g);
        }

        result.trace.push_back(loss0);
        result.iterations = it + 1;
        const bool significant = !std::isfinite(best) ||
                                 (best - loss0) > config.rel_improvement * std::max(std::abs(best), 1e-30);
        if (loss0 < best) {
            best = loss0;
            result.transform = current;
        }
        if (significant) {
            bad = 0;
        } else if (++bad >= config.patience) {
            result.converged = true;
            break;
        }

        RigidTransform delta;
        delta.euler_xyz = adam.x.head<3>();
        delta.translation = adam.x.tail<3>();
        current = RigidTransform::compose(delta, current);
    }

    result.matrix_mm = map.inverse_matrix() * result.transform.matrix() * map.forward_matrix();
    return result;
}

}  // namespace semicp
