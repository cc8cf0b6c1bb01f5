#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "hstokes/differentiation.hpp"
#include "hstokes/error.hpp"
#include "hstokes/field.hpp"

namespace hstokes {

struct CompatibilityReport {
    double trace_mismatch = 0;    ///< sup |g(.,0) - h(., x_n = 0)|
    double divergence_sup = 0;    ///< discrete sup |div h|
    double normal_trace_sup = 0;  ///< sup |h_n(., 0)|
    double flux_mean_sup = 0;     ///< sup_t |tangential mean of g_n|
    double tol = 0;
    bool trace_ok = true;
    bool divergence_ok = true;
    bool normal_trace_ok = true;
    bool flux_ok = true;

    bool passes() const { return trace_ok && divergence_ok && normal_trace_ok && flux_ok; }

    /// Names of the violated rules, comma separated; empty when everything passes.
    std::string violations() const {
        std::string s;
        auto add = [&](bool ok, const char* what) {
            if (ok) return;
            if (!s.empty()) s += ", ";
            s += what;
        };
        add(trace_ok, "g(.,0) = h(., x_n=0)");
        add(divergence_ok, "div h = 0");
        add(normal_trace_ok, "h_n(., x_n=0) = 0");
        add(flux_ok, "zero tangential mean of g_n");
        return s;
    }
};

/**
 * Validates (h, g) against the compatibility hypotheses; never throws on
 * failing data. The discrete divergence carries truncation error, so it may be
 * given its own tolerance (negative: use tol).
 */
inline CompatibilityReport check_compatibility(const Field& h, const BoundaryField& g, double tol,
                                               double divergence_tol = -1) {
    const GridSpec& grid = h.grid();
    const int d = grid.dim();
    if (h.extent() != Extent::half || h.components() != d)
        throw ValidationError("check_compatibility: h must be a half-grid vector field");
    if (g.components() != d || !(g.grid() == grid))
        throw ValidationError("check_compatibility: g must be a vector BoundaryField on the same grid");
    CompatibilityReport r;
    r.tol = tol;
    const std::size_t np = grid.tangential_points();
    for (std::size_t s = 0; s < np; ++s)
        for (int c = 0; c < d; ++c)
            r.trace_mismatch = std::max(r.trace_mismatch, std::abs(g.at(0, s, c) - h.at(0, s, c)));
    r.divergence_sup = linf(divergence(h).values());
    for (std::size_t s = 0; s < np; ++s)
        r.normal_trace_sup = std::max(r.normal_trace_sup, std::abs(h.at(0, s, d - 1)));
    for (int k = 0; k < g.n_slices(); ++k) {
        double mean = 0;
        for (std::size_t s = 0; s < np; ++s) mean += g.at(k, s, d - 1);
        r.flux_mean_sup = std::max(r.flux_mean_sup, std::abs(mean / double(np)));
    }
    r.trace_ok = r.trace_mismatch <= tol;
    r.divergence_ok = r.divergence_sup <= (divergence_tol < 0 ? tol : divergence_tol);
    r.normal_trace_ok = r.normal_trace_sup <= tol;
    r.flux_ok = r.flux_mean_sup <= tol;
    return r;
}

namespace detail {

/// Half-grid source row feeding full-torus row r (mirror image above the ceiling).
inline int reflected_row(const GridSpec& g, int r) {
    const int nf = g.rows(Extent::full);
    return r <= nf / 2 ? r : nf - r;
}

}  // namespace detail

/**
 * Even reflection of the tangential components and odd reflection of the
 * normal component onto the doubled torus. Throws when h_n does not vanish on
 * the wall or the ceiling, where the odd reflection would introduce a jump.
 */
inline Field extend_initial(const Field& h, double tol = 1e-10) {
    const GridSpec& g = h.grid();
    const int d = g.dim();
    if (h.extent() != Extent::half || h.components() != d)
        throw ValidationError("extend_initial: h must be a half-grid vector field");
    detail::require_finite(h.values(), "extend_initial");
    const double scale = std::max(1.0, linf(h.values()));
    double wall = 0, ceiling = 0;
    for (std::size_t s = 0; s < g.tangential_points(); ++s) {
        wall = std::max(wall, std::abs(h.at(0, s, d - 1)));
        ceiling = std::max(ceiling, std::abs(h.at(g.n_normal() - 1, s, d - 1)));
    }
    if (wall > tol * scale)
        throw ValidationError("extend_initial: h_n(., x_n=0) = " + std::to_string(wall) +
                              " is not zero; supply a divergence-free extension explicitly");
    if (ceiling > tol * scale)
        throw ValidationError("extend_initial: h_n(., x_n=H) = " + std::to_string(ceiling) +
                              " is not zero; increase H");
    Field out(g, Extent::full, d);
    const int nf = g.rows(Extent::full);
    for (int r = 0; r < nf; ++r) {
        const int src = detail::reflected_row(g, r);
        const bool mirrored = src != r;
        for (std::size_t s = 0; s < g.tangential_points(); ++s)
            for (int c = 0; c < d; ++c) {
                const double v = h.at(src, s, c);
                out.at(r, s, c) = (mirrored && c == d - 1) ? -v : v;
            }
    }
    return out;
}

/// Even reflection of every component of a half-grid slice.
inline Field extend_even(const Field& f) {
    const GridSpec& g = f.grid();
    if (f.extent() != Extent::half) throw ValidationError("extend_even: expects a half-grid field");
    Field out(g, Extent::full, f.components());
    const std::size_t width = g.tangential_points() * f.components();
    for (int r = 0; r < g.rows(Extent::full); ++r) {
        const int src = detail::reflected_row(g, r);
        std::copy_n(f.values().begin() + std::size_t(src) * width, width,
                    out.values().begin() + std::size_t(r) * width);
    }
    return out;
}

/// Component-wise even reflection of a tensor (or any) half-grid SpaceTimeField.
inline SpaceTimeField extend_tensor(const SpaceTimeField& F) {
    const GridSpec& g = F.grid();
    if (F.extent() != Extent::half) throw ValidationError("extend_tensor: expects a half-grid field");
    SpaceTimeField out(g, Extent::full, F.components());
    const std::size_t width = g.tangential_points() * F.components();
    for (int k = 0; k < F.n_slices(); ++k) {
        auto in = F.slice(k);
        auto o = out.slice(k);
        for (int r = 0; r < g.rows(Extent::full); ++r) {
            const int src = detail::reflected_row(g, r);
            std::copy_n(in.begin() + std::size_t(src) * width, width,
                        o.begin() + std::size_t(r) * width);
        }
    }
    return out;
}

/// Rows 0..n_normal-1 of a full-torus field.
inline SpaceTimeField restrict_to_half(const SpaceTimeField& f) {
    if (f.extent() != Extent::full) throw ValidationError("restrict_to_half: expects a full-torus field");
    SpaceTimeField out(f.grid(), Extent::half, f.components());
    for (int k = 0; k < f.n_slices(); ++k)
        std::copy_n(f.slice(k).begin(), out.slice_size(), out.slice(k).begin());
    return out;
}

inline Field restrict_to_half(const Field& f) {
    if (f.extent() != Extent::full) throw ValidationError("restrict_to_half: expects a full-torus field");
    Field out(f.grid(), Extent::half, f.components());
    std::copy_n(f.values().begin(), out.values().size(), out.values().begin());
    return out;
}

}  // namespace hstokes
