#include "simrel/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "simrel/errors.hpp"

namespace simrel {

PhiTag phi_tag_from_string(const std::string& s) {
    if (s == "zero") return PhiTag::zero;
    if (s == "identity_scaled") return PhiTag::identity_scaled;
    if (s == "sine") return PhiTag::sine;
    if (s == "piecewise_linear") return PhiTag::piecewise_linear;
    throw ParseError("unknown nonlinearity tag: '" + s + "'");
}

std::string to_string(PhiTag t) {
    switch (t) {
        case PhiTag::zero: return "zero";
        case PhiTag::identity_scaled: return "identity_scaled";
        case PhiTag::sine: return "sine";
        case PhiTag::piecewise_linear: return "piecewise_linear";
    }
    return "?";
}

double NonlinearityDescriptor::eval(double s) const {
    double base = 0.0;
    switch (tag) {
        case PhiTag::zero:
            base = 0.0;
            break;
        case PhiTag::identity_scaled:
            base = scale * s;
            break;
        case PhiTag::sine:
            base = scale * std::sin(s);
            break;
        case PhiTag::piecewise_linear: {
            if (points.size() < 2) throw Error("piecewise_linear needs at least two knots");
            // Clamp-extrapolate with the boundary segment slopes.
            std::size_t k = 0;
            if (s <= points.front().first) {
                k = 0;
            } else if (s >= points.back().first) {
                k = points.size() - 2;
            } else {
                while (k + 2 < points.size() && points[k + 1].first < s) ++k;
            }
            const double x0 = points[k].first, y0 = points[k].second;
            const double x1 = points[k + 1].first, y1 = points[k + 1].second;
            if (x1 == x0) throw Error("piecewise_linear has repeated knot abscissa");
            base = y0 + (y1 - y0) * (s - x0) / (x1 - x0);
            break;
        }
    }
    return base + linear_coef * s;
}

NonlinearityDescriptor NonlinearityDescriptor::shifted_by(double a) const {
    NonlinearityDescriptor out = *this;
    out.linear_coef -= a;
    out.slope_lo -= a;
    out.slope_hi -= a;
    return out;
}

bool NonlinearityDescriptor::slopes_consistent(int samples, double slack) const {
    if (!(slope_hi > slope_lo)) return false;
    // Sample difference quotients over a window that covers the interesting
    // region of each shape (knot range for tables, a few periods for sine).
    double lo = -8.0, hi = 8.0;
    if (tag == PhiTag::piecewise_linear && points.size() >= 2) {
        lo = points.front().first - 1.0;
        hi = points.back().first + 1.0;
    }
    const double h = (hi - lo) / samples;
    double prev_s = lo, prev_v = eval(lo);
    for (int i = 1; i <= samples; ++i) {
        const double s = lo + i * h;
        const double v = eval(s);
        const double q = (v - prev_v) / (s - prev_s);
        if (q < slope_lo - slack || q > slope_hi + slack) return false;
        prev_s = s;
        prev_v = v;
    }
    return true;
}

NonlinearityDescriptor make_zero_phi() {
    NonlinearityDescriptor d;
    d.tag = PhiTag::zero;
    d.slope_lo = 0.0;
    d.slope_hi = std::numeric_limits<double>::min();  // degenerate but unused
    d.slope_hi = 1e-12;
    return d;
}

NonlinearityDescriptor make_sine_phi(double scale) {
    NonlinearityDescriptor d;
    d.tag = PhiTag::sine;
    d.scale = scale;
    d.slope_lo = std::min(0.0, scale);
    d.slope_hi = std::max(0.0, scale);
    if (d.slope_hi == d.slope_lo) d.slope_hi = d.slope_lo + 1e-12;
    return d;
}

NonlinearityDescriptor make_identity_phi(double scale) {
    NonlinearityDescriptor d;
    d.tag = PhiTag::identity_scaled;
    d.scale = scale;
    d.slope_lo = scale;
    d.slope_hi = scale;
    // Widen to a non-empty interval so (slope_lo, slope_hi] style bounds hold.
    d.slope_lo = scale - 1e-12;
    d.slope_hi = scale + 1e-12;
    return d;
}

NonlinearityDescriptor make_piecewise_phi(std::vector<std::pair<double, double>> pts) {
    if (pts.size() < 2) throw Error("piecewise_linear needs at least two knots");
    std::sort(pts.begin(), pts.end());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double dx = pts[i + 1].first - pts[i].first;
        if (dx <= 0.0) throw Error("piecewise_linear knots must have strictly increasing abscissae");
        const double m = (pts[i + 1].second - pts[i].second) / dx;
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    NonlinearityDescriptor d;
    d.tag = PhiTag::piecewise_linear;
    d.points = std::move(pts);
    d.slope_lo = lo;
    d.slope_hi = (hi > lo) ? hi : lo + 1e-12;
    return d;
}

}  // namespace simrel
