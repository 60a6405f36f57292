#include "semicp/deform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semicp {

ElasticForm elastic_form_from_string(const std::string& s) {
    if (s == "squared") return ElasticForm::kSquared;
    if (s == "as_printed") return ElasticForm::kAsPrinted;
    throw ConfigError("unknown elastic form \"" + s + "\" (expected squared|as_printed)");
}

std::string to_string(ElasticForm form) {
    return form == ElasticForm::kSquared ? "squared" : "as_printed";
}

ElasticParams::ElasticParams(double young_pa, double poisson)
    : young_pa_(young_pa), poisson_(poisson) {
    if (!(young_pa > 0.0)) throw ConfigError("Young's modulus must be positive");
    if (!(poisson > 0.0 && poisson < 0.5))
        throw ConfigError("Poisson's ratio must lie in (0, 0.5)");
    lambda_ = young_pa * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    mu_ = young_pa / (2.0 * (1.0 + poisson));
}

ControlGrid::ControlGrid(int resolution, NormalizationMap map)
    : resolution_(resolution), step_(2.0 / (resolution - 1)), map_(std::move(map)) {
    if (resolution < 2) throw ConfigError("grid resolution must be at least 2");
    data_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(node_count()) * 3);
}

CellWeights cell_weights(const ControlGrid& grid, const Eigen::Vector3d& query, bool clamp,
                         std::size_t point_index) {
    Eigen::Vector3d q = query;
    for (int axis = 0; axis < 3; ++axis) {
        if (q[axis] < -1.0 || q[axis] > 1.0) {
            if (!clamp) throw OutOfGridError(point_index);
            q[axis] = std::clamp(q[axis], -1.0, 1.0);
        }
    }

    CellWeights cw;
    double frac[3];
    const int last_cell = grid.resolution() - 2;
    for (int axis = 0; axis < 3; ++axis) {
        const double t = (q[axis] + 1.0) / grid.step();
        int cell = static_cast<int>(std::floor(t));
        cell = std::clamp(cell, 0, last_cell);
        cw.base[axis] = cell;
        frac[axis] = t - cell;
    }
    for (int di = 0; di < 2; ++di) {
        const double wx = di ? frac[0] : 1.0 - frac[0];
        for (int dj = 0; dj < 2; ++dj) {
            const double wy = dj ? frac[1] : 1.0 - frac[1];
            for (int dk = 0; dk < 2; ++dk) {
                const double wz = dk ? frac[2] : 1.0 - frac[2];
                cw.w[di << 2 | dj << 1 | dk] = wx * wy * wz;
            }
        }
    }
    return cw;
}

Eigen::Vector3d apply_cell_weights(const ControlGrid& grid, const CellWeights& cw) {
    Eigen::Vector3d d = Eigen::Vector3d::Zero();
    for (int c = 0; c < 8; ++c) {
        const std::size_t node =
            grid.node_index(cw.base[0] + (c >> 2 & 1), cw.base[1] + (c >> 1 & 1), cw.base[2] + (c & 1));
        d += cw.w[c] * grid.displacement(node);
    }
    return d;
}

std::vector<Eigen::Vector3d> interpolate(const ControlGrid& grid,
                                         const std::vector<Eigen::Vector3d>& queries, bool clamp) {
    std::vector<Eigen::Vector3d> out;
    out.reserve(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i)
        out.push_back(apply_cell_weights(grid, cell_weights(grid, queries[i], clamp, i)));
    return out;
}

std::pair<double, Eigen::VectorXd> reg_elastic(const ControlGrid& grid, const ElasticParams& params,
                                               ElasticForm form) {
    const int G = grid.resolution();
    const double step = grid.step();
    const double mu = params.mu();
    const double lambda = params.lambda();
    const double scale = step / static_cast<double>(grid.node_count());

    double value = 0.0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(grid.data().size());

    // Forward differences f[j][k] = dD_j/dx_k at each node; the max face of an
    // axis has no forward neighbour, so that axis's terms are omitted there.
    for (int i = 0; i < G; ++i) {
        for (int j = 0; j < G; ++j) {
            for (int k = 0; k < G; ++k) {
                const std::size_t node = grid.node_index(i, j, k);
                const bool avail[3] = {i + 1 < G, j + 1 < G, k + 1 < G};
                std::size_t fwd[3] = {0, 0, 0};
                if (avail[0]) fwd[0] = grid.node_index(i + 1, j, k);
                if (avail[1]) fwd[1] = grid.node_index(i, j + 1, k);
                if (avail[2]) fwd[2] = grid.node_index(i, j, k + 1);

                Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
                for (int axis = 0; axis < 3; ++axis) {
                    if (!avail[axis]) continue;
                    const Eigen::Vector3d diff =
                        (grid.displacement(fwd[axis]) - grid.displacement(node)) / step;
                    for (int comp = 0; comp < 3; ++comp) f(comp, axis) = diff[comp];
                }

                Eigen::Matrix3d df = Eigen::Matrix3d::Zero();  // d(value)/d(f), without `scale`
                if (form == ElasticForm::kSquared) {
                    for (int a = 0; a < 3; ++a) {
                        for (int b = 0; b < 3; ++b) {
                            const double s = f(a, b) + f(b, a);
                            value += scale * 0.25 * mu * s * s;
                            df(a, b) += 0.5 * mu * s;
                            df(b, a) += 0.5 * mu * s;
                        }
                    }
                } else {
                    for (int a = 0; a < 3; ++a) {
                        for (int b = 0; b < 3; ++b) {
                            const double s = f(a, b) + f(b, a);
                            value += scale * 0.25 * mu * s;
                            df(a, b) += 0.25 * mu;
                            df(b, a) += 0.25 * mu;
                        }
                    }
                }
                const double divergence = f(0, 0) + f(1, 1) + f(2, 2);
                value += scale * 0.5 * lambda * divergence * divergence;
                for (int a = 0; a < 3; ++a) df(a, a) += lambda * divergence;

                // f(comp, axis) = (D_comp(fwd) - D_comp(node)) / step
                for (int axis = 0; axis < 3; ++axis) {
                    if (!avail[axis]) continue;
                    for (int comp = 0; comp < 3; ++comp) {
                        const double g = scale * df(comp, axis) / step;
                        grad[static_cast<Eigen::Index>(fwd[axis]) * 3 + comp] += g;
                        grad[static_cast<Eigen::Index>(node) * 3 + comp] -= g;
                    }
                }
            }
        }
    }
    return {value, std::move(grad)};
}

std::pair<double, Eigen::VectorXd> reg_magnitude(const ControlGrid& grid) {
    const double inv_n = 1.0 / static_cast<double>(grid.node_count());
    double value = 0.0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(grid.data().size());
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        const Eigen::Vector3d d = grid.displacement(node);
        const double norm = d.norm();
        value += inv_n * norm;
        if (norm > 0.0)
            grad.segment<3>(static_cast<Eigen::Index>(node) * 3) = inv_n * d / norm;
    }
    return {value, std::move(grad)};
}

std::pair<double, Eigen::VectorXd> reg_gradient(const ControlGrid& grid) {
    const int G = grid.resolution();
    const double step = grid.step();
    const double scale = step / static_cast<double>(grid.node_count());
    double value = 0.0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(grid.data().size());

    for (int i = 0; i < G; ++i) {
        for (int j = 0; j < G; ++j) {
            for (int k = 0; k < G; ++k) {
                const std::size_t node = grid.node_index(i, j, k);
                for (int axis = 0; axis < 3; ++axis) {
                    std::size_t fwd;
                    if (axis == 0 && i + 1 < G) fwd = grid.node_index(i + 1, j, k);
                    else if (axis == 1 && j + 1 < G) fwd = grid.node_index(i, j + 1, k);
                    else if (axis == 2 && k + 1 < G) fwd = grid.node_index(i, j, k + 1);
                    else continue;

                    const Eigen::Vector3d diff =
                        (grid.displacement(fwd) - grid.displacement(node)) / step;
                    const double norm = diff.norm();
                    value += scale * norm;
                    if (norm > 0.0) {
                        const Eigen::Vector3d g = scale * diff / (norm * step);
                        grad.segment<3>(static_cast<Eigen::Index>(fwd) * 3) += g;
                        grad.segment<3>(static_cast<Eigen::Index>(node) * 3) -= g;
                    }
                }
            }
        }
    }
    return {value, std::move(grad)};
}

std::pair<double, Eigen::VectorXd> nonrigid_loss(const ControlGrid& grid, const PointCloud& source,
                                                 const Correspondences& correspondences,
                                                 const PointCloud& target, const RegWeights& weights,
                                                 const ElasticParams& params, ElasticForm form) {
    if (correspondences.size() != source.size())
        throw Error("correspondences do not cover the source cloud");

    double loss = 0.0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(grid.data().size());

    for (std::size_t j = 0; j < source.size(); ++j) {
        const CellWeights cw = cell_weights(grid, source.points[j], false, j);
        const Eigen::Vector3d d = apply_cell_weights(grid, cw);
        const Eigen::Vector3d residual =
            source.points[j] + d - target.points[correspondences[j].target_index];
        const double norm = residual.norm();
        loss += norm;
        if (norm > 0.0) {
            const Eigen::Vector3d dir = residual / norm;
            for (int c = 0; c < 8; ++c) {
                const std::size_t node = grid.node_index(
                    cw.base[0] + (c >> 2 & 1), cw.base[1] + (c >> 1 & 1), cw.base[2] + (c & 1));
                grad.segment<3>(static_cast<Eigen::Index>(node) * 3) += cw.w[c] * dir;
            }
        }
    }

    if (weights.alpha != 0.0) {
        const auto [v, g] = reg_elastic(grid, params, form);
        loss += weights.alpha * v;
        grad += weights.alpha * g;
    }
    if (weights.beta != 0.0) {
        const auto [v, g] = reg_magnitude(grid);
        loss += weights.beta * v;
        grad += weights.beta * g;
    }
    if (weights.gamma != 0.0) {
        const auto [v, g] = reg_gradient(grid);
        loss += weights.gamma * v;
        grad += weights.gamma * g;
    }
    return {loss, std::move(grad)};
}

namespace {

PointCloud apply_affine(const Eigen::Matrix4d& m, const PointCloud& cloud) {
    const Eigen::Matrix3d L = m.block<3, 3>(0, 0);
    const Eigen::Vector3d t = m.block<3, 1>(0, 3);
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) out.points.push_back(L * p + t);
    out.labels = cloud.labels;
    if (cloud.normals) {
        if (L.isIdentity(0.0)) {
            out.normals = cloud.normals;
        } else {
            const Eigen::Matrix3d nt = L.inverse().transpose();
            std::vector<Eigen::Vector3d> normals;
            normals.reserve(cloud.normals->size());
            for (const auto& n : *cloud.normals) {
                const Eigen::Vector3d v = nt * n;
                const double len = v.norm();
                normals.push_back(len > 0.0 ? Eigen::Vector3d(v / len) : n);
            }
            out.normals = std::move(normals);
        }
    }
    return out;
}

}  // namespace

NonRigidResult register_nonrigid(const PointCloud& source_mm, const PointCloud& target_mm,
                                 const Eigen::Matrix4d& init_mm, const NormalizationMap& map,
                                 const NonRigidConfig& config) {
    // Anchor points: rigid-initialized source in normalized coordinates. The
    // deformation field is always evaluated at these positions, so the
    // trilinear weights are fixed for the whole optimization.
    const PointCloud anchors = map.cloud_to_normalized(apply_affine(init_mm, source_mm));
    const PointCloud target = map.cloud_to_normalized(target_mm);
    const SemanticIndex index = SemanticIndex::build(target, config.semantic);
    const ElasticParams params(config.young_pa, config.poisson);

    NonRigidResult result{ControlGrid(config.grid_resolution, map), {}, 0, false};
    ControlGrid& grid = result.grid;

    std::vector<CellWeights> weights;
    weights.reserve(anchors.size());
    for (std::size_t j = 0; j < anchors.size(); ++j)
        weights.push_back(cell_weights(grid, anchors.points[j], false, j));

    AdamState adam = AdamState::init(Eigen::VectorXd::Zero(grid.data().size()), config.lr);
    Eigen::VectorXd best_data = grid.data();
    double best = std::numeric_limits<double>::infinity();
    int bad = 0;

    PointCloud deformed = anchors;
    for (int it = 0; it < config.max_iterations; ++it) {
        grid.data() = adam.x;  // field at the start of this iteration
        const Eigen::VectorXd iter_data = adam.x;
        for (std::size_t j = 0; j < anchors.size(); ++j)
            deformed.points[j] = anchors.points[j] + apply_cell_weights(grid, weights[j]);

        const Correspondences corr = match(index, deformed, config.fallback_global, config.threads);

        double loss0 = 0.0;
        for (int s = 0; s < config.inner_steps; ++s) {
            if (s > 0) grid.data() = adam.x;
            const auto [loss, g] =
                nonrigid_loss(grid, anchors, corr, target, config.weights, params, config.form);
            if (s == 0) loss0 = loss;
            adam_step_inplace(adam, g);
        }

        result.trace.push_back(loss0);
        result.iterations = it + 1;
        const bool significant = !std::isfinite(best) ||
                                 (best - loss0) > config.rel_improvement * std::max(std::abs(best), 1e-30);
        if (loss0 < best) {
            best = loss0;
            best_data = iter_data;
        }
        if (significant) {
            bad = 0;
        } else if (++bad >= config.patience) {
            result.converged = true;
            break;
        }
    }

    grid.data() = best_data;
    return result;
}

PointCloud warp(const ControlGrid& grid, const Eigen::Matrix4d& rigid_mm, const PointCloud& cloud_mm,
                bool clamp) {
    const NormalizationMap& map = grid.normalization();
    PointCloud out = apply_affine(rigid_mm, cloud_mm);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Eigen::Vector3d y = map.to_normalized(out.points[i]);
        const Eigen::Vector3d d = apply_cell_weights(grid, cell_weights(grid, y, clamp, i));
        // Displacement is added in mm so a zero grid leaves points untouched.
        out.points[i] += map.displacement_to_mm(d);
    }
    return out;
}

}  // namespace semicp
