#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fairsvi/tensor.hpp"

namespace fairsvi {

/// Deterministic random stream. All variates are derived from the raw 64-bit
/// generator output with fixed arithmetic, so a given seed reproduces the
/// same sequence bit-exactly on any platform.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : seed_(seed), gen_(seed) {}

    uint64_t seed() const { return seed_; }

    /// Uniform draw on [0, 1) with 53-bit resolution.
    double uniform();

    /// Standard normal via Box-Muller; consumes two uniforms per call.
    double normal();

    /// Uniform integer in [0, n).
    uint64_t uniform_int(uint64_t n);

    /// Poisson draw by inversion (small rates only).
    long poisson(double rate);

    Tensor uniform_tensor(Index rows, Index cols);
    Tensor normal_tensor(Index rows, Index cols);

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Derive an independent substream; mixing is deterministic in (seed, salt).
    RngStream fork(uint64_t salt) const;

private:
    uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace fairsvi
