#pragma once

// Deterministic random number helpers. All sampling in the project goes
// through Rng so that a fixed seed reproduces identical streams on every run.

#include <cmath>
#include <cstdint>
#include <random>

namespace gsmap {

class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1).
    double uniform() {
        return (engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Integer in [0, n).
    uint64_t index(uint64_t n) {
        return n ? engine_() % n : 0;
    }

    // Standard normal via Box-Muller, spare value cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double sigma) {
        return mean + sigma * normal();
    }

    // Derive an independent stream, e.g. one per traversal.
    Rng fork(uint64_t salt) {
        uint64_t s = engine_();
        return Rng(s ^ (salt * 0x9e3779b97f4a7c15ull));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace gsmap
