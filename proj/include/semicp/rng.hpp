#pragma once

// Deterministic random numbers. std::mt19937_64 output is fully specified by
// the standard, but the standard distributions are not, so the value
// transforms are spelled out here; results are identical across platforms
// and standard-library versions.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace semicp {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a stream tag.
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed + 0x9e3779b97f4a7c15ULL * (tag + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n), n > 0. Modulo bias is negligible for the
    /// index ranges used here and keeps the sequence platform-independent.
    std::uint64_t uniform_index(std::uint64_t n) { return gen_() % n; }

    /// Standard normal via Box-Muller; values are produced in pairs.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Eigen::Vector3d gaussian3() {
        const double x = gaussian();
        const double y = gaussian();
        const double z = gaussian();
        return {x, y, z};
    }

    Eigen::Vector3d unit_vector() {
        while (true) {
            const Eigen::Vector3d v = gaussian3();
            const double n = v.norm();
            if (n > 1e-12) return v / n;
        }
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace semicp
