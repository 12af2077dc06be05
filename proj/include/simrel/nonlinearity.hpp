#pragma once

#include <string>
#include <utility>
#include <vector>

namespace simrel {

/// Supported scalar nonlinearity shapes.  The set is closed (no user code
/// injection) so slope bounds stay mechanically checkable; arbitrary shapes
/// go through the piecewise-linear table.
enum class PhiTag { zero, identity_scaled, sine, piecewise_linear };

PhiTag phi_tag_from_string(const std::string& s);
std::string to_string(PhiTag t);

/// Scalar nonlinearity phi with global slope bounds
///   slope_lo <= (phi(c) - phi(d)) / (c - d) <= slope_hi   for all c != d.
///
/// The evaluated function is base(s) + linear_coef * s, where base is chosen
/// by tag; the linear term carries slope shifts so a shifted function stays
/// inside the closed tag set.
struct NonlinearityDescriptor {
    PhiTag tag = PhiTag::zero;
    double scale = 1.0;       // identity_scaled: scale * s; sine: scale * sin(s)
    double linear_coef = 0.0; // added linear term
    std::vector<std::pair<double, double>> points;  // piecewise-linear knots (s, phi(s))
    double slope_lo = 0.0;
    double slope_hi = 1.0;    // > slope_lo; may be +inf only for user tables

    double eval(double s) const;

    /// Returns phi~ with phi~(s) = phi(s) - a*s and slope bounds reduced by a.
    NonlinearityDescriptor shifted_by(double a) const;

    /// Samples difference quotients on a grid and checks they respect the
    /// declared slope bounds (within slack); used as a constructor-time audit.
    bool slopes_consistent(int samples = 200, double slack = 1e-9) const;
};

NonlinearityDescriptor make_zero_phi();
NonlinearityDescriptor make_sine_phi(double scale = 1.0);
NonlinearityDescriptor make_identity_phi(double scale);
NonlinearityDescriptor make_piecewise_phi(std::vector<std::pair<double, double>> pts);

}  // namespace simrel
