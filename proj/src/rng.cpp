#include "fairsvi/rng.hpp"

#include <cmath>

namespace fairsvi {

namespace {
constexpr double kTwoPow53 = 9007199254740992.0;  // 2^53

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace

double RngStream::uniform() {
    return static_cast<double>(gen_() >> 11) / kTwoPow53;
}

double RngStream::normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

uint64_t RngStream::uniform_int(uint64_t n) {
    if (n == 0) return 0;
    // Rejection sampling keeps the distribution exact and the stream
    // deterministic in the accepted draws.
    const uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    uint64_t x;
    do {
        x = gen_();
    } while (x >= limit);
    return x % n;
}

long RngStream::poisson(double rate) {
    const double l = std::exp(-rate);
    long k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform();
    } while (p > l);
    return k - 1;
}

Tensor RngStream::uniform_tensor(Index rows, Index cols) {
    Tensor t = Tensor::zeros(rows, cols);
    for (Index k = 0; k < t.size(); ++k) t[k] = uniform();
    return t;
}

Tensor RngStream::normal_tensor(Index rows, Index cols) {
    Tensor t = Tensor::zeros(rows, cols);
    for (Index k = 0; k < t.size(); ++k) t[k] = normal();
    return t;
}

RngStream RngStream::fork(uint64_t salt) const {
    return RngStream(splitmix64(seed_ ^ splitmix64(salt)));
}

}  // namespace fairsvi
