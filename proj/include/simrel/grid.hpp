#pragma once

#include <vector>

#include "simrel/linalg.hpp"

namespace simrel {

/// Uniform axis-aligned partition of a compact box.  Cells are half-open
/// [lo, lo+width) except along the top face, which is closed so the box tiles
/// exactly.  Representatives are cell centers; points outside the box map to
/// the sink index (== cell_total()).
struct GridPartition {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> widths;
    std::vector<int> counts;       // cells per dimension
    double beta = 0.0;             // cell diameter = ||widths||_2
    bool extended = false;         // true if the box was grown to fit the widths

    int dim() const { return static_cast<int>(lower.size()); }
    long cell_total() const;
    long sink_index() const { return cell_total(); }

    Vec representative(long cell) const;          // center of the cell
    long cell_of(const Vec& point) const;         // sink_index() when outside
    std::vector<long> multi_index(long cell) const;
    long flat_index(const std::vector<long>& mi) const;
};

/// Builds the partition; if the widths do not divide the box extents within
/// 1e-12 (relative to the extent) the upper bounds are extended upward to the
/// next multiple and `extended` is set.  Throws on nonpositive widths or
/// inconsistent shapes.
GridPartition build_partition(const std::vector<double>& lower,
                              const std::vector<double>& upper,
                              const std::vector<double>& widths);

struct PiXResult {
    Vec representative;
    long cell = 0;   // == partition sink index when outside the box
    bool sink = false;
};

/// The representative-point map: in-box points go to their cell's center
/// (distance <= beta/2 <= beta), outside points to the sink.
PiXResult pi_x(const GridPartition& part, const Vec& point);

}  // namespace simrel
