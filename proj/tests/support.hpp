#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

#include "hstokes/hstokes.hpp"

namespace hstokes::testing {

inline constexpr double pi = std::numbers::pi;

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double relative_diff(std::span<const double> a, std::span<const double> b) {
    return max_abs_diff(a, b) / std::max(linf(b), 1e-300);
}

/// Scalar full-torus field from closure(point with signed x_n).
template <class F>
Field full_scalar(const GridSpec& g, F&& f) {
    Field out(g, Extent::full, 1);
    for (int r = 0; r < out.rows(); ++r)
        for (std::size_t s = 0; s < g.tangential_points(); ++s) {
            Point p = detail::make_point(g, s, g.x_normal_full(r));
            out.at(r, s, 0) = f(p);
        }
    return out;
}

/// Vector full-torus field from closure(point, out span).
template <class F>
Field full_vector(const GridSpec& g, int comps, F&& f) {
    Field out(g, Extent::full, comps);
    std::vector<double> v(comps);
    for (int r = 0; r < out.rows(); ++r)
        for (std::size_t s = 0; s < g.tangential_points(); ++s) {
            Point p = detail::make_point(g, s, g.x_normal_full(r));
            std::ranges::fill(v, 0.0);
            f(p, std::span<double>(v));
            for (int c = 0; c < comps; ++c) out.at(r, s, c) = v[c];
        }
    return out;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace hstokes::testing
