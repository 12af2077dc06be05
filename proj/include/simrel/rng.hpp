#pragma once

#include <cstdint>

#include "simrel/linalg.hpp"

namespace simrel {

/// Deterministic stream of i.i.d. standard-normal vectors.
///
/// Each (seed, stream_id) pair opens an independent stream; identical
/// (seed, stream_id, draw index) always yields identical values within one
/// build.  Parallel consumers take disjoint stream_ids (typically derived per
/// trial or per tensor row) so results do not depend on thread scheduling.
class NoiseSource {
public:
    NoiseSource(std::uint64_t seed, std::uint64_t stream_id, int dim);

    /// Next dim-vector of standard normals.
    Vec draw();

    /// Next scalar standard normal (Box-Muller; the pair partner is cached).
    double normal();

    /// Next uniform in (0,1].
    double uniform01();

    /// Raw 64-bit output of the underlying generator.
    std::uint64_t next_u64();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    int dim() const { return dim_; }

    /// Stateless mixing of a base seed and a salt (trial index, row index, ...)
    /// into a fresh stream id; splitmix64 finalizer.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt);

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    int dim_;
    std::uint64_t state_[4];
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace simrel
