#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "hstokes/error.hpp"

namespace hstokes::quad {

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (nodes in decreasing order).
inline constexpr std::array<double, 8> kronrod_nodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kronrod_weights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for kronrod_nodes[1], [3], [5], [7].
inline constexpr std::array<double, 4> gauss_weights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Panel {
    std::array<double, N> value{};
    double error = 0;
};

template <std::size_t N, class F>
Panel<N> gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    std::array<double, N> k{}, g{};
    auto accumulate = [&](const std::array<double, N>& y, double wk, double wg) {
        for (std::size_t i = 0; i < N; ++i) {
            k[i] += wk * y[i];
            g[i] += wg * y[i];
        }
    };
    accumulate(f(c), kronrod_weights[7], gauss_weights[3]);
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kronrod_nodes[j];
        const double wg = (j % 2 == 1) ? gauss_weights[j / 2] : 0.0;
        accumulate(f(c - dx), kronrod_weights[j], wg);
        accumulate(f(c + dx), kronrod_weights[j], wg);
    }
    Panel<N> p;
    for (std::size_t i = 0; i < N; ++i) {
        p.value[i] = h * k[i];
        p.error = std::max(p.error, std::abs(h * (k[i] - g[i])));
    }
    return p;
}

template <std::size_t N, class F>
void adapt(F& f, double a, double b, double abs_tol, double rel_tol, double span, int depth,
           const Panel<N>& whole, std::array<double, N>& sum, double& err) {
    double mag = 0;
    for (double v : whole.value) mag = std::max(mag, std::abs(v));
    const double budget = std::max(abs_tol * (b - a) / span, rel_tol * mag);
    if (whole.error <= budget || depth >= 48) {
        if (whole.error > budget && whole.error > 1e-6 * std::max(mag, abs_tol))
            throw QuadratureError("adaptive Gauss-Kronrod: subdivision limit reached");
        for (std::size_t i = 0; i < N; ++i) sum[i] += whole.value[i];
        err += whole.error;
        return;
    }
    const double m = 0.5 * (a + b);
    const auto left = gk15<N>(f, a, m);
    const auto right = gk15<N>(f, m, b);
    adapt<N>(f, a, m, abs_tol, rel_tol, span, depth + 1, left, sum, err);
    adapt<N>(f, m, b, abs_tol, rel_tol, span, depth + 1, right, sum, err);
}

}  // namespace detail

template <std::size_t N>
struct Result {
    std::array<double, N> value{};
    double error = 0;
};

/**
 * Adaptive Gauss-Kronrod (G7/K15) integration of a vector-valued integrand
 * f: double -> std::array<double, N> over [a, b]. Bisection is depth-first and
 * deterministic; a panel is accepted when its error estimate is below
 * max(abs_tol * |panel|/|[a,b]|, rel_tol * |panel value|).
 */
template <std::size_t N, class F>
Result<N> integrate(F&& f, double a, double b, double abs_tol = 1e-13, double rel_tol = 1e-11) {
    Result<N> r;
    if (b == a) return r;
    const auto whole = detail::gk15<N>(f, a, b);
    detail::adapt<N>(f, a, b, abs_tol, rel_tol, b - a, 0, whole, r.value, r.error);
    return r;
}

/// Scalar convenience wrapper.
template <class F>
double integrate_scalar(F&& f, double a, double b, double abs_tol = 1e-13, double rel_tol = 1e-11) {
    auto g = [&](double x) { return std::array<double, 1>{f(x)}; };
    return integrate<1>(g, a, b, abs_tol, rel_tol).value[0];
}

}  // namespace hstokes::quad
