#include "simrel/grid.hpp"

#include <cmath>

#include "simrel/errors.hpp"

namespace simrel {

long GridPartition::cell_total() const {
    long total = 1;
    for (int c : counts) total *= c;
    return total;
}

Vec GridPartition::representative(long cell) const {
    if (cell < 0 || cell >= cell_total())
        throw DimensionError("cell index out of range (sink has no representative)");
    const std::vector<long> mi = multi_index(cell);
    Vec rep(dim());
    for (int k = 0; k < dim(); ++k)
        rep[k] = lower[k] + (static_cast<double>(mi[k]) + 0.5) * widths[k];
    return rep;
}

long GridPartition::cell_of(const Vec& point) const {
    if (point.size() != dim()) throw DimensionError("point dimension does not match grid");
    std::vector<long> mi(static_cast<std::size_t>(dim()));
    for (int k = 0; k < dim(); ++k) {
        const double v = point[k];
        if (v < lower[k] || v > upper[k]) return sink_index();
        long idx = static_cast<long>(std::floor((v - lower[k]) / widths[k]));
        // Top face is closed: fold the upper boundary into the last cell.
        if (idx >= counts[k]) idx = counts[k] - 1;
        mi[static_cast<std::size_t>(k)] = idx;
    }
    return flat_index(mi);
}

std::vector<long> GridPartition::multi_index(long cell) const {
    std::vector<long> mi(static_cast<std::size_t>(dim()));
    for (int k = dim() - 1; k >= 0; --k) {
        mi[static_cast<std::size_t>(k)] = cell % counts[k];
        cell /= counts[k];
    }
    return mi;
}

long GridPartition::flat_index(const std::vector<long>& mi) const {
    long flat = 0;
    for (int k = 0; k < dim(); ++k) flat = flat * counts[k] + mi[static_cast<std::size_t>(k)];
    return flat;
}

GridPartition build_partition(const std::vector<double>& lower,
                              const std::vector<double>& upper,
                              const std::vector<double>& widths) {
    const std::size_t d = lower.size();
    if (upper.size() != d || widths.size() != d)
        throw DimensionError("lower/upper/widths must have equal length");
    if (d == 0) throw DimensionError("partition dimension must be positive");
    GridPartition part;
    part.lower = lower;
    part.upper = upper;
    part.widths = widths;
    part.counts.resize(d);
    double beta_sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        if (!(widths[k] > 0.0)) throw Error("cell widths must be positive");
        const double extent = upper[k] - lower[k];
        if (!(extent > 0.0)) throw Error("box must have positive extent per dimension");
        const double ratio = extent / widths[k];
        long count = static_cast<long>(std::floor(ratio + 0.5));
        const double fitted = static_cast<double>(count) * widths[k];
        if (count < 1 || std::abs(fitted - extent) > 1e-12 * std::max(1.0, extent)) {
            // Widths do not divide the extent: extend upward to the next multiple.
            count = static_cast<long>(std::ceil(ratio - 1e-12));
            if (count < 1) count = 1;
            part.upper[k] = lower[k] + static_cast<double>(count) * widths[k];
            part.extended = true;
        }
        part.counts[k] = static_cast<int>(count);
        beta_sq += widths[k] * widths[k];
    }
    part.beta = std::sqrt(beta_sq);
    return part;
}

PiXResult pi_x(const GridPartition& part, const Vec& point) {
    PiXResult out;
    out.cell = part.cell_of(point);
    out.sink = (out.cell == part.sink_index());
    if (!out.sink) out.representative = part.representative(out.cell);
    return out;
}

}  // namespace simrel
