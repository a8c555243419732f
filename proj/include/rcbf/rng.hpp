#pragma once

#include <cstdint>
#include <cmath>

#include "rcbf/linalg.hpp"

namespace rcbf {

// Counter-friendly PRNG. Every stream is a pure function of its seed, so
// sample k of a derived stream is reproducible independently of query order
// and thread count.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Marsaglia polar would need rejection state; Box-Muller keeps the
    // stream consumption fixed at two draws per call.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    Vector uniform_vector(const Vector& lo, const Vector& hi) {
        Vector v(lo.size());
        for (Eigen::Index i = 0; i < lo.size(); ++i) v[i] = uniform(lo[i], hi[i]);
        return v;
    }

    // Uniform direction on the unit sphere in R^dim.
    Vector unit_vector(int dim) {
        Vector v(dim);
        double n2 = 0.0;
        do {
            for (int i = 0; i < dim; ++i) v[i] = normal();
            n2 = v.squaredNorm();
        } while (n2 < 1e-12);
        return v / std::sqrt(n2);
    }
};

// Stateless mixing of seed material into a fresh stream seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    SplitMix64 s(seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xd1b54a32d192ed03ULL));
    s.next();
    return s.next();
}

}  // namespace rcbf
