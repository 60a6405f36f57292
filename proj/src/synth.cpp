#include "semicp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "semicp/metrics.hpp"
#include "semicp/rng.hpp"

namespace semicp {

PhantomSpec PhantomSpec::default_multi_organ(std::uint64_t seed) {
    // Interleaved organs straddling the origin: near-cubic overall extents
    // (~200 mm) and every label crosses any central plane, so slab cropping
    // keeps all labels even at 5% visibility.
    PhantomSpec spec;
    spec.ellipsoids = {
        {{0.0, 0.0, 0.0}, {95.0, 72.0, 62.0}, 1, 3200},
        {{8.0, -5.0, 4.0}, {60.0, 90.0, 68.0}, 2, 2200},
        {{-6.0, 4.0, -8.0}, {66.0, 58.0, 92.0}, 3, 2000},
    };
    spec.tubes = {
        {{-75.0, -62.0, -55.0}, {75.0, 62.0, 55.0}, 9.0, 4, 1000},
    };
    spec.seed = seed;
    return spec;
}

void PhantomSpec::check() const {
    std::set<int> labels;
    for (const auto& e : ellipsoids) {
        if (e.count < 50) throw ConfigError("ellipsoid point count must be >= 50");
        if (!(e.radii_mm.minCoeff() > 0.0)) throw ConfigError("ellipsoid radii must be positive");
        labels.insert(e.label);
    }
    for (const auto& t : tubes) {
        if (t.count < 50) throw ConfigError("tube point count must be >= 50");
        if (!(t.radius_mm > 0.0)) throw ConfigError("tube radius must be positive");
        if ((t.b_mm - t.a_mm).norm() <= 0.0) throw ConfigError("tube endpoints coincide");
        labels.insert(t.label);
    }
    if (labels.size() < 2) throw ConfigError("phantom needs at least 2 distinct labels");
    if (noise_mm < 0.0) throw ConfigError("phantom noise must be non-negative");
}

PointCloud make_phantom(const PhantomSpec& spec) {
    spec.check();
    Rng rng(spec.seed);

    PointCloud cloud;
    cloud.normals.emplace();
    auto push = [&](const Eigen::Vector3d& p, const Eigen::Vector3d& n, int label) {
        cloud.points.push_back(p);
        cloud.normals->push_back(n);
        cloud.labels.push_back(label);
    };

    for (const auto& e : spec.ellipsoids) {
        for (int i = 0; i < e.count; ++i) {
            const Eigen::Vector3d u = rng.unit_vector();
            const Eigen::Vector3d p = e.center_mm + e.radii_mm.cwiseProduct(u);
            Eigen::Vector3d n = u.cwiseQuotient(e.radii_mm);  // gradient direction
            n /= n.norm();
            push(p, n, e.label);
        }
    }
    for (const auto& t : spec.tubes) {
        const Eigen::Vector3d axis = (t.b_mm - t.a_mm).normalized();
        Eigen::Vector3d helper = std::abs(axis.x()) < 0.9 ? Eigen::Vector3d::UnitX()
                                                          : Eigen::Vector3d::UnitY();
        const Eigen::Vector3d e1 = axis.cross(helper).normalized();
        const Eigen::Vector3d e2 = axis.cross(e1).normalized();
        for (int i = 0; i < t.count; ++i) {
            const double s = rng.uniform01();
            const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            const Eigen::Vector3d radial = std::cos(theta) * e1 + std::sin(theta) * e2;
            push(t.a_mm + s * (t.b_mm - t.a_mm) + t.radius_mm * radial, radial, t.label);
        }
    }

    if (spec.noise_mm > 0.0) {
        for (auto& p : cloud.points) p += spec.noise_mm * rng.gaussian3();
    }
    return cloud;
}

Perturbed perturb(const PointCloud& cloud, const PerturbationSpec& spec) {
    if (cloud.points.empty()) throw EmptyCloudError();
    if (!(spec.visible_ratio > 0.0 && spec.visible_ratio <= 1.0))
        throw ConfigError("visible_ratio must lie in (0, 1]");

    Rng rng(spec.seed);
    Perturbed out;

    // Contiguous slab: the points nearest the boundary plane of a random
    // half-space through the centroid.
    const Eigen::Vector3d direction = rng.unit_vector();
    std::vector<std::size_t> keep;
    if (spec.visible_ratio < 1.0) {
        Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
        for (const auto& p : cloud.points) centroid += p;
        centroid /= static_cast<double>(cloud.size());

        std::vector<std::size_t> order(cloud.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> key(cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i)
            key[i] = std::abs(direction.dot(cloud.points[i] - centroid));
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return key[a] < key[b] || (key[a] == key[b] && a < b);
        });
        const auto m = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::llround(spec.visible_ratio * static_cast<double>(cloud.size()))));
        keep.assign(order.begin(), order.begin() + std::min(m, cloud.size()));
        std::sort(keep.begin(), keep.end());
    } else {
        keep.resize(cloud.size());
        std::iota(keep.begin(), keep.end(), 0);
    }

    PointCloud cropped;
    if (cloud.normals) cropped.normals.emplace();
    for (std::size_t i : keep) {
        cropped.points.push_back(cloud.points[i]);
        cropped.labels.push_back(cloud.labels[i]);
        if (cloud.normals) cropped.normals->push_back((*cloud.normals)[i]);
    }
    out.cropped_truth = cropped;

    PointCloud moved = cropped;
    if (spec.noise_mm > 0.0) {
        for (auto& p : moved.points) p += spec.noise_mm * rng.gaussian3();
    }

    const double rad = spec.max_rotation_deg * 3.14159265358979323846 / 180.0;
    RigidTransform misalign;
    misalign.euler_xyz = Eigen::Vector3d(rng.uniform(-rad, rad), rng.uniform(-rad, rad),
                                         rng.uniform(-rad, rad));
    const double tmax = spec.max_translation_mm;
    const Eigen::Vector3d t(rng.uniform(-tmax, tmax), rng.uniform(-tmax, tmax),
                            rng.uniform(-tmax, tmax));

    if (misalign.euler_xyz.isZero(0.0) && t.isZero(0.0)) {
        out.cloud = std::move(moved);
        out.ground_truth_mm = RigidTransform::identity();
        return out;
    }

    Eigen::Vector3d pivot = Eigen::Vector3d::Zero();
    for (const auto& p : moved.points) pivot += p;
    pivot /= static_cast<double>(moved.size());

    const Eigen::Matrix3d R = misalign.rotation();
    for (auto& p : moved.points) p = R * (p - pivot) + pivot + t;
    if (moved.normals) {
        for (auto& n : *moved.normals) n = R * n;
    }
    out.cloud = std::move(moved);

    // Exact inverse: x -> R^T (x - pivot - t) + pivot.
    out.ground_truth_mm =
        RigidTransform::from_rotation(R.transpose(), pivot - R.transpose() * (pivot + t));
    return out;
}

WarpedPair make_warped_pair(const PointCloud& cloud, const WarpFieldSpec& spec, std::uint64_t seed) {
    if (cloud.points.empty()) throw EmptyCloudError();
    const NormalizationMap map = fit_normalization(cloud, cloud, 0.05);
    constexpr int kModes = 6;
    constexpr double kPi = 3.14159265358979323846;

    for (int attempt = 0; attempt < 10; ++attempt) {
        Rng rng(sub_seed(seed, static_cast<std::uint64_t>(attempt)));
        ControlGrid grid(spec.grid_resolution, map);

        // Band-limited potential A, one sinusoid set per component; the
        // displacement is its curl, divergence-free in the continuum.
        Eigen::Matrix<double, kModes, 3> wave;
        Eigen::Matrix<double, kModes, 3> amp;
        Eigen::Matrix<double, kModes, 3> phase;
        for (int m = 0; m < kModes; ++m) {
            for (int c = 0; c < 3; ++c) wave(m, c) = spec.smoothness * kPi * rng.uniform(-1.0, 1.0);
            for (int c = 0; c < 3; ++c) amp(m, c) = rng.gaussian();
            for (int c = 0; c < 3; ++c) phase(m, c) = rng.uniform(0.0, 2.0 * kPi);
        }
        auto potential_grad = [&](const Eigen::Vector3d& y) {
            Eigen::Matrix3d g = Eigen::Matrix3d::Zero();  // g(c, a) = dA_c/dy_a
            for (int m = 0; m < kModes; ++m) {
                const Eigen::Vector3d k = wave.row(m).transpose();
                const double ky = k.dot(y);
                for (int c = 0; c < 3; ++c) {
                    const double cosv = amp(m, c) * std::cos(ky + phase(m, c));
                    for (int a = 0; a < 3; ++a) g(c, a) += cosv * k[a];
                }
            }
            return g;
        };

        const int G = grid.resolution();
        double max_mm = 0.0;
        for (int i = 0; i < G; ++i) {
            for (int j = 0; j < G; ++j) {
                for (int k = 0; k < G; ++k) {
                    const Eigen::Matrix3d g = potential_grad(grid.node_position(i, j, k));
                    const Eigen::Vector3d curl(g(2, 1) - g(1, 2), g(0, 2) - g(2, 0),
                                               g(1, 0) - g(0, 1));
                    grid.set_displacement(grid.node_index(i, j, k), curl);
                    max_mm = std::max(max_mm, map.displacement_to_mm(curl).norm());
                }
            }
        }

        if (spec.max_displacement_mm <= 0.0 || max_mm == 0.0) {
            grid.data().setZero();
        } else {
            grid.data() *= spec.max_displacement_mm / max_mm;
        }

        const auto [sd, folded] = sdlogj(grid);
        (void)sd;
        if (folded == 0.0) {
            WarpedPair pair{cloud, warp(grid, Eigen::Matrix4d::Identity(), cloud), std::move(grid)};
            return pair;
        }
    }
    throw FoldedGroundTruthError();
}

}  // namespace semicp
