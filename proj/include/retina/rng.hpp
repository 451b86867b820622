#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Thin wrapper over mt19937 that avoids std::*_distribution, whose output
// sequences are implementation-defined. Everything downstream of a seed must
// be reproducible across compilers and standard libraries.

namespace retina {

class Rng {
public:
    explicit Rng(std::uint32_t seed) : gen_(seed) {}

    // uniform in [0, 1)
    double uniform() { return gen_() * (1.0 / 4294967296.0); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [lo, hi] inclusive
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform() * (static_cast<double>(hi) - lo + 1.0));
    }

    // standard normal via Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint32_t raw() { return gen_(); }

private:
    std::mt19937 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace retina
