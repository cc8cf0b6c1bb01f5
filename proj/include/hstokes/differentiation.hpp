#pragma once

#include <vector>

#include "hstokes/field.hpp"
#include "hstokes/spectral.hpp"

namespace hstokes {

/// Spectral derivative along tangential axis `axis` (< dim-1) of every component, row by row.
inline Field tangential_derivative(const Field& f, int axis) {
    auto s = forward_tangential(f);
    const auto modes = tangential_modes(f.grid());
    const std::size_t nm = modes.size();
    for (int c = 0; c < s.components; ++c) {
        auto co = s.component(c);
        for (std::size_t i = 0; i < co.size(); ++i) co[i] *= cplx(0, modes[i % nm].xi[axis]);
    }
    return inverse_tangential(s);
}

/**
 * Fourth-order derivative along x_n of every component. Half-grid fields use
 * one-sided five-point stencils on the two rows next to each end; full-torus
 * fields are periodic.
 */
inline Field normal_derivative(const Field& f) {
    Field out(f.grid(), f.extent(), f.components());
    const int R = f.rows();
    const double h = f.grid().dx_normal();
    const std::size_t width = f.tangential_points() * f.components();
    auto in = f.values();
    auto o = out.values();
    auto at = [&](int r, std::size_t i) { return in[std::size_t(r) * width + i]; };
    for (int r = 0; r < R; ++r)
        for (std::size_t i = 0; i < width; ++i) {
            double d;
            if (f.extent() == Extent::full) {
                auto p = [&](int q) { return at(((r + q) % R + R) % R, i); };
                d = (p(-2) - 8 * p(-1) + 8 * p(1) - p(2)) / (12 * h);
            } else if (R < 5) {
                // Too few rows for the five-point stencils.
                d = r == 0 ? (at(1, i) - at(0, i)) / h
                           : r == R - 1 ? (at(R - 1, i) - at(R - 2, i)) / h
                                        : (at(r + 1, i) - at(r - 1, i)) / (2 * h);
            } else if (r == 0) {
                d = (-25 * at(0, i) + 48 * at(1, i) - 36 * at(2, i) + 16 * at(3, i) - 3 * at(4, i)) /
                    (12 * h);
            } else if (r == 1) {
                d = (-3 * at(0, i) - 10 * at(1, i) + 18 * at(2, i) - 6 * at(3, i) + at(4, i)) /
                    (12 * h);
            } else if (r == R - 1) {
                d = (25 * at(R - 1, i) - 48 * at(R - 2, i) + 36 * at(R - 3, i) -
                     16 * at(R - 4, i) + 3 * at(R - 5, i)) /
                    (12 * h);
            } else if (r == R - 2) {
                d = (3 * at(R - 1, i) + 10 * at(R - 2, i) - 18 * at(R - 3, i) + 6 * at(R - 4, i) -
                     at(R - 5, i)) /
                    (12 * h);
            } else {
                d = (at(r - 2, i) - 8 * at(r - 1, i) + 8 * at(r + 1, i) - at(r + 2, i)) / (12 * h);
            }
            o[std::size_t(r) * width + i] = d;
        }
    return out;
}

/// Derivative along axis a: tangential for a < dim-1, normal for a = dim-1.
inline Field derivative(const Field& f, int axis) {
    return axis == f.grid().dim() - 1 ? normal_derivative(f) : tangential_derivative(f, axis);
}

/// Gradient tensor of a vector field: component k*dim + i holds d_k u_i.
inline Field gradient(const Field& u) {
    const int d = u.grid().dim();
    Field g(u.grid(), u.extent(), u.components() * d);
    for (int k = 0; k < d; ++k) {
        const Field dk = derivative(u, k);
        for (int r = 0; r < u.rows(); ++r)
            for (std::size_t s = 0; s < u.tangential_points(); ++s)
                for (int i = 0; i < u.components(); ++i)
                    g.at(r, s, k * u.components() + i) = dk.at(r, s, i);
    }
    return g;
}

/// Discrete divergence (spectral tangential, fourth-order normal) of a vector slice.
inline Field divergence(const Field& u) {
    const int d = u.grid().dim();
    Field div(u.grid(), u.extent(), 1);
    for (int k = 0; k < d; ++k) {
        const Field dk = derivative(u, k);
        for (int r = 0; r < u.rows(); ++r)
            for (std::size_t s = 0; s < u.tangential_points(); ++s) div.at(r, s, 0) += dk.at(r, s, k);
    }
    return div;
}

}  // namespace hstokes
