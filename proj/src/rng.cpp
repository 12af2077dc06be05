#include "simrel/rng.hpp"

#include <cmath>

#include "simrel/errors.hpp"

namespace simrel {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

NoiseSource::NoiseSource(std::uint64_t seed, std::uint64_t stream_id, int dim)
    : seed_(seed), stream_id_(stream_id), dim_(dim) {
    if (dim < 0) throw DimensionError("NoiseSource: negative dimension");
    std::uint64_t sm = seed ^ rotl(stream_id, 17) ^ 0xd1b54a32d192ed03ULL;
    for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t NoiseSource::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double NoiseSource::uniform01() {
    // 53-bit mantissa in (0,1]; never returns 0 so log() below is safe.
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double NoiseSource::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

Vec NoiseSource::draw() {
    Vec v(dim_);
    for (int i = 0; i < dim_; ++i) v(i) = normal();
    return v;
}

std::uint64_t NoiseSource::derive(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
    return splitmix64(x);
}

}  // namespace simrel
