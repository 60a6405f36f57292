#include "semicp/config.hpp"

#include <fstream>
#include <set>

namespace semicp {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown config key \"" + where + key + "\"");
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void require_positive(double v, const std::string& name) {
    if (!(v > 0.0)) throw ConfigError(name + " must be positive");
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    check_keys(j, "", {"semantic", "rigid", "nonrigid", "weights", "elasticity", "convergence",
                       "seed", "threads"});
    read_field(j, "semantic", c.semantic);
    if (j.contains("rigid")) {
        const auto& r = j.at("rigid");
        check_keys(r, "rigid.", {"lr", "max_iter", "downsample"});
        read_field(r, "lr", c.rigid.lr);
        read_field(r, "max_iter", c.rigid.max_iter);
        read_field(r, "downsample", c.rigid.downsample);
    }
    if (j.contains("nonrigid")) {
        const auto& n = j.at("nonrigid");
        check_keys(n, "nonrigid.", {"lr", "max_iter", "grid", "inner_steps"});
        read_field(n, "lr", c.nonrigid.lr);
        read_field(n, "max_iter", c.nonrigid.max_iter);
        read_field(n, "grid", c.nonrigid.grid);
        read_field(n, "inner_steps", c.nonrigid.inner_steps);
    }
    if (j.contains("weights")) {
        const auto& w = j.at("weights");
        check_keys(w, "weights.", {"alpha", "beta", "gamma"});
        read_field(w, "alpha", c.weights.alpha);
        read_field(w, "beta", c.weights.beta);
        read_field(w, "gamma", c.weights.gamma);
    }
    if (j.contains("elasticity")) {
        const auto& e = j.at("elasticity");
        check_keys(e, "elasticity.", {"E_pa", "nu", "form"});
        read_field(e, "E_pa", c.elasticity.E_pa);
        read_field(e, "nu", c.elasticity.nu);
        if (e.contains("form")) c.elasticity.form = elastic_form_from_string(e.at("form").get<std::string>());
    }
    if (j.contains("convergence")) {
        const auto& v = j.at("convergence");
        check_keys(v, "convergence.", {"rel_tol", "patience"});
        read_field(v, "rel_tol", c.convergence.rel_tol);
        read_field(v, "patience", c.convergence.patience);
    }
    read_field(j, "seed", c.seed);
    read_field(j, "threads", c.threads);

    require_positive(c.rigid.lr, "rigid.lr");
    require_positive(c.nonrigid.lr, "nonrigid.lr");
    if (c.rigid.max_iter < 1) throw ConfigError("rigid.max_iter must be >= 1");
    if (c.nonrigid.max_iter < 1) throw ConfigError("nonrigid.max_iter must be >= 1");
    if (c.rigid.downsample < 2) throw ConfigError("rigid.downsample must be >= 2");
    if (c.nonrigid.grid < 2) throw ConfigError("nonrigid.grid must be >= 2");
    if (c.nonrigid.inner_steps < 1) throw ConfigError("nonrigid.inner_steps must be >= 1");
    if (c.weights.alpha < 0 || c.weights.beta < 0 || c.weights.gamma < 0)
        throw ConfigError("regularizer weights must be non-negative");
    require_positive(c.elasticity.E_pa, "elasticity.E_pa");
    if (!(c.elasticity.nu > 0.0 && c.elasticity.nu < 0.5))
        throw ConfigError("elasticity.nu must lie in (0, 0.5)");
    if (c.convergence.rel_tol < 0.0) throw ConfigError("convergence.rel_tol must be >= 0");
    if (c.convergence.patience < 1) throw ConfigError("convergence.patience must be >= 1");
    if (c.threads < 1) throw ConfigError("threads must be >= 1");
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed config JSON: " + std::string(e.what()));
    }
    return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
    return json{
        {"semantic", semantic},
        {"rigid", {{"lr", rigid.lr}, {"max_iter", rigid.max_iter}, {"downsample", rigid.downsample}}},
        {"nonrigid",
         {{"lr", nonrigid.lr},
          {"max_iter", nonrigid.max_iter},
          {"grid", nonrigid.grid},
          {"inner_steps", nonrigid.inner_steps}}},
        {"weights", {{"alpha", weights.alpha}, {"beta", weights.beta}, {"gamma", weights.gamma}}},
        {"elasticity",
         {{"E_pa", elasticity.E_pa}, {"nu", elasticity.nu}, {"form", to_string(elasticity.form)}}},
        {"convergence", {{"rel_tol", convergence.rel_tol}, {"patience", convergence.patience}}},
        {"seed", seed},
        {"threads", threads},
    };
}

RigidConfig RunConfig::rigid_config() const {
    RigidConfig r;
    r.lr = rigid.lr;
    r.max_iterations = rigid.max_iter;
    r.downsample = static_cast<std::size_t>(rigid.downsample);
    r.semantic = semantic;
    r.rel_improvement = convergence.rel_tol;
    r.patience = convergence.patience;
    r.seed = seed;
    r.threads = threads;
    return r;
}

NonRigidConfig RunConfig::nonrigid_config() const {
    NonRigidConfig n;
    n.lr = nonrigid.lr;
    n.max_iterations = nonrigid.max_iter;
    n.grid_resolution = nonrigid.grid;
    n.inner_steps = nonrigid.inner_steps;
    n.weights = weights;
    n.young_pa = elasticity.E_pa;
    n.poisson = elasticity.nu;
    n.form = elasticity.form;
    n.semantic = semantic;
    n.rel_improvement = convergence.rel_tol;
    n.patience = convergence.patience;
    n.threads = threads;
    return n;
}

}  // namespace semicp
