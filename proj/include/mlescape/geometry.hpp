#pragma once

#include "mlescape/ml_model.hpp"

#include <cstddef>
#include <limits>

namespace mlescape {

/// Open rectangle D = (a, b) x (c, d) in scaled coordinates.
struct Region {
    double a = -5.9277;
    double b = 1.0723;
    double c = -1.7564;
    double d = 5.2436;

    void validate() const;
    bool contains(State p) const { return p.v > a && p.v < b && p.w > c && p.w < d; }
    double area() const { return (b - a) * (d - c); }
    State center() const { return {0.5 * (a + b), 0.5 * (c + d)}; }

    bool operator==(const Region&) const = default;
};

/// Target E = [a_p, b_p) x [c, d], abutting D on the right. b_p may be +inf.
struct TargetStrip {
    double a_p = 1.0723;
    double b_p = std::numeric_limits<double>::infinity();

    /// Throws GeometryError unless b <= a_p < b_p.
    void validate(const Region& region) const;

    /// Closed on the left: v == a_p counts as inside E.
    bool contains(State p, const Region& region) const
    {
        return p.v >= a_p && p.v < b_p && p.w >= region.c && p.w <= region.d;
    }

    bool operator==(const TargetStrip&) const = default;
};

/// Unit-square coordinates (s, k) of the affine map D -> (-1, 1)^2.
struct UnitPoint {
    double s = 0.0;
    double k = 0.0;
};

/// Forward affine map; throws OutOfRegion if the image leaves [-1, 1]^2.
UnitPoint to_unit(const Region& region, State p);
State from_unit(const Region& region, UnitPoint u);

/// Uniform interior grid on (-1, 1)^2: node i sits at s = -1 + (i + 1) h_s.
/// Unknowns are ordered with w as the slow index: index = k * n_v + i.
struct Grid {
    int n_v = 201;
    int n_w = 201;

    void validate() const;
    double h_s() const { return 2.0 / (n_v + 1); }
    double h_k() const { return 2.0 / (n_w + 1); }
    double s(int i) const { return -1.0 + (i + 1) * h_s(); }
    double k(int j) const { return -1.0 + (j + 1) * h_k(); }
    std::size_t size() const { return static_cast<std::size_t>(n_v) * static_cast<std::size_t>(n_w); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n_v + i; }

    bool operator==(const Grid&) const = default;
};

} // namespace mlescape
