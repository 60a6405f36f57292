#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "semicp/cloud.hpp"
#include "semicp/matching.hpp"
#include "semicp/optim.hpp"

namespace semicp {

/// Discretization of the printed elastic energy: `kSquared` squares the
/// symmetrized strain term (non-negative energy, the default); `kAsPrinted`
/// keeps the unsquared sum for auditing.
enum class ElasticForm { kSquared, kAsPrinted };

ElasticForm elastic_form_from_string(const std::string& s);
std::string to_string(ElasticForm form);

/// Isotropic linear elasticity constants. lambda and mu are always derived
/// from (E, nu) and never set independently.
class ElasticParams {
public:
    ElasticParams(double young_pa, double poisson);

    double young_pa() const { return young_pa_; }
    double poisson() const { return poisson_; }
    double lambda() const { return lambda_; }
    double mu() const { return mu_; }

private:
    double young_pa_;
    double poisson_;
    double lambda_;
    double mu_;
};

struct RegWeights {
    double alpha = 1.0;  // elastic energy
    double beta = 1.0;   // displacement magnitude
    double gamma = 1.0;  // grid gradient
};

/// Uniform G x G x G lattice of displacement vectors over [-1,1]^3 in
/// normalized space. Node (i,j,k) sits at (-1 + i*step, -1 + j*step,
/// -1 + k*step) with step = 2/(G-1). Displacements are stored flat as
/// data[node_index(i,j,k)*3 + component].
class ControlGrid {
public:
    ControlGrid(int resolution, NormalizationMap map);

    int resolution() const { return resolution_; }
    double step() const { return step_; }
    std::size_t node_count() const { return static_cast<std::size_t>(resolution_) * resolution_ * resolution_; }
    std::size_t node_index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * resolution_ + j) * resolution_ + k;
    }
    Eigen::Vector3d node_position(int i, int j, int k) const {
        return {-1.0 + i * step_, -1.0 + j * step_, -1.0 + k * step_};
    }
    Eigen::Vector3d displacement(std::size_t node) const {
        return data_.segment<3>(static_cast<Eigen::Index>(node) * 3);
    }
    void set_displacement(std::size_t node, const Eigen::Vector3d& d) {
        data_.segment<3>(static_cast<Eigen::Index>(node) * 3) = d;
    }

    Eigen::VectorXd& data() { return data_; }
    const Eigen::VectorXd& data() const { return data_; }

    const NormalizationMap& normalization() const { return map_; }

private:
    int resolution_;
    double step_;
    NormalizationMap map_;
    Eigen::VectorXd data_;
};

/// Enclosing cell and trilinear corner weights of one normalized-space query
/// point. Corner c = (di,dj,dk) in bit order di<<2|dj<<1|dk relative to base.
struct CellWeights {
    int base[3];
    double w[8];
};

/// Throws OutOfGridError(point_index) for queries outside [-1,1]^3 unless
/// `clamp` is set, in which case the query is clamped onto the boundary.
CellWeights cell_weights(const ControlGrid& grid, const Eigen::Vector3d& query, bool clamp,
                         std::size_t point_index);

Eigen::Vector3d apply_cell_weights(const ControlGrid& grid, const CellWeights& cw);

/// Trilinear interpolation of the node displacements at each query point.
std::vector<Eigen::Vector3d> interpolate(const ControlGrid& grid,
                                         const std::vector<Eigen::Vector3d>& queries,
                                         bool clamp = false);

/// Linear elastic (Navier-Lame) energy of the grid with forward two-point
/// differences; nodes on the max face of an axis omit that axis's difference
/// terms. Returns the value and its gradient w.r.t. every node displacement.
std::pair<double, Eigen::VectorXd> reg_elastic(const ControlGrid& grid, const ElasticParams& params,
                                               ElasticForm form = ElasticForm::kSquared);

/// Mean Euclidean norm of the node displacements.
std::pair<double, Eigen::VectorXd> reg_magnitude(const ControlGrid& grid);

/// Mean forward-difference smoothness sum over axes.
std::pair<double, Eigen::VectorXd> reg_gradient(const ControlGrid& grid);

/// Data term sum_j ||p_j + d_j - q_j||_2 (d_j interpolated at the source
/// point) plus the weighted regularizers; gradient w.r.t. the grid data.
std::pair<double, Eigen::VectorXd> nonrigid_loss(const ControlGrid& grid, const PointCloud& source,
                                                 const Correspondences& correspondences,
                                                 const PointCloud& target, const RegWeights& weights,
                                                 const ElasticParams& params,
                                                 ElasticForm form = ElasticForm::kSquared);

struct NonRigidConfig {
    double lr = 0.01;
    int max_iterations = 300;
    int grid_resolution = 25;
    int inner_steps = 1;
    RegWeights weights;
    double young_pa = 1000.0;
    double poisson = 0.499;
    ElasticForm form = ElasticForm::kSquared;
    bool semantic = true;
    bool fallback_global = false;
    double rel_improvement = 1e-5;
    int patience = 20;
    int threads = 1;
};

struct NonRigidResult {
    ControlGrid grid;
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
};

/// Stage 2: control-grid refinement. The rigid initialization (a mm-space
/// homogeneous matrix, identity when skipping stage 1) is applied to the
/// source, both clouds are normalized through `map`, and the grid is fitted
/// by iterated semantic matching and Adam steps; the update adds onto the
/// running displacement field. Returns the best grid by loss.
NonRigidResult register_nonrigid(const PointCloud& source_mm, const PointCloud& target_mm,
                                 const Eigen::Matrix4d& init_mm, const NormalizationMap& map,
                                 const NonRigidConfig& config);

/// Applies the rigid transform and then the grid deformation to a mm-space
/// cloud: x -> M x + S^-1 d(N(M x)). Labels pass through; normals are mapped
/// by the rigid linear part only (not deformation-corrected).
PointCloud warp(const ControlGrid& grid, const Eigen::Matrix4d& rigid_mm, const PointCloud& cloud_mm,
                bool clamp = false);

}  // namespace semicp
