#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "semicp/deform.hpp"
#include "semicp/rigid.hpp"

namespace semicp {

/// Full pipeline configuration. JSON parsing is strict: unknown keys are
/// rejected so sweeps stay attributable.
struct RunConfig {
    bool semantic = true;
    struct Rigid {
        double lr = 0.001;
        int max_iter = 500;
        int downsample = 1000;
    } rigid;
    struct NonRigid {
        double lr = 0.01;
        int max_iter = 300;
        int grid = 25;
        int inner_steps = 1;
    } nonrigid;
    RegWeights weights;
    struct Elasticity {
        double E_pa = 1000.0;
        double nu = 0.499;
        ElasticForm form = ElasticForm::kSquared;
    } elasticity;
    struct Convergence {
        double rel_tol = 1e-5;
        int patience = 20;
    } convergence;
    std::uint64_t seed = 0;
    int threads = 1;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    RigidConfig rigid_config() const;
    NonRigidConfig nonrigid_config() const;
};

}  // namespace semicp
