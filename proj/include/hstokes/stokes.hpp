#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "hstokes/analysis.hpp"
#include "hstokes/error.hpp"
#include "hstokes/extension.hpp"
#include "hstokes/field.hpp"
#include "hstokes/kernels.hpp"
#include "hstokes/spectral.hpp"

namespace hstokes {

/// Initial velocity h, wall data g and force potential F (f = div F; empty means F = 0).
struct StokesData {
    Field h;
    BoundaryField g;
    SpaceTimeField F;
    double alpha = 0.5;

    const GridSpec& grid() const { return h.grid(); }
    bool has_force() const { return F.values().size() > 0; }
};

struct StokesDiagnostics {
    double initial_err = 0;
    double boundary_err = 0;
    double boundary_err_row1 = 0;
    double divergence_sup = 0;
    double divergence_relative = 0;
    double weak_residual = -1;  ///< negative until computed
};

struct StokesSolution {
    SpaceTimeField u, v, V, grad_phi, w;
    BoundaryField G;
    StokesDiagnostics diagnostics;
};

/**
 * grad(phi) for wall data d_n: per tangential mode, tangential components
 * (-i xi'_j/|xi'|) e^{-|xi'| x_n} d^ and normal component e^{-|xi'| x_n} d^.
 * The zero mode contributes a constant normal component only.
 */
inline SpaceTimeField grad_phi(const BoundaryField& data_n, double tol = 1e-9) {
    const GridSpec& g = data_n.grid();
    const int d = g.dim();
    if (data_n.components() != 1) throw ValidationError("grad_phi: expects scalar wall data");
    const double scale = std::max(1.0, linf(data_n.values()));
    for (std::size_t s = 0; s < g.tangential_points(); ++s)
        if (std::abs(data_n.at(0, s, 0)) > tol * scale)
            throw ValidationError("grad_phi: normal data must vanish at t = 0");
    SpaceTimeField out(g, Extent::half, d);
    if (linf(data_n.values()) == 0) return out;
    const auto modes = tangential_modes(g);
    const std::size_t nm = modes.size();
    const int nn = g.n_normal();
    parallel_for(g.n_time(), [&](long k) {
        std::span<const double> wall(data_n.values().data() + k * data_n.slice_size(),
                                     data_n.slice_size());
        const auto hat = forward_wall(g, wall, 1)[0];
        SpectralSlice s{g, Extent::half, d, nm * nn, {}};
        s.coeffs.assign(s.modes_per_component * d, cplx(0));
        for (int j = 0; j < nn; ++j) {
            const double xn = g.x_normal(j);
            for (std::size_t m = 0; m < nm; ++m) {
                const double kappa = modes[m].norm;
                const cplx e = std::exp(-kappa * xn) * hat[m];
                s.component(d - 1)[j * nm + m] = e;
                if (kappa > 0)
                    for (int a = 0; a < d - 1; ++a)
                        s.component(a)[j * nm + m] = cplx(0, -modes[m].xi[a] / kappa) * e;
            }
        }
        out.set_slice(int(k), inverse_tangential(s));
    });
    return out;
}

/// G' = g' - V' - v' - R'(g_n - v_n - V_n) on the wall, G_n = 0. Traces are row 0 of v and V.
inline BoundaryField build_G(const BoundaryField& g, const SpaceTimeField& v, const SpaceTimeField& V) {
    const GridSpec& grid = g.grid();
    const int d = grid.dim();
    if (g.components() != d || !v.same_shape(V) || v.extent() != Extent::half || v.components() != d)
        throw ValidationError("build_G: shape mismatch");
    const BoundaryField vt = boundary_trace(v), Vt = boundary_trace(V);
    BoundaryField dn(grid, 1);
    for (int k = 0; k < grid.n_time(); ++k)
        for (std::size_t s = 0; s < grid.tangential_points(); ++s)
            dn.at(k, s, 0) = g.at(k, s, d - 1) - vt.at(k, s, d - 1) - Vt.at(k, s, d - 1);
    BoundaryField G(grid, d);
    for (int a = 0; a < d - 1; ++a) {
        const BoundaryField r = riesz_tangential(dn, a);
        for (int k = 0; k < grid.n_time(); ++k)
            for (std::size_t s = 0; s < grid.tangential_points(); ++s)
                G.at(k, s, a) = g.at(k, s, a) - Vt.at(k, s, a) - vt.at(k, s, a) - r.at(k, s, 0);
    }
    return G;
}

/// g_n - v_n - V_n on the wall.
inline BoundaryField normal_wall_data(const BoundaryField& g, const SpaceTimeField& v,
                                      const SpaceTimeField& V) {
    const GridSpec& grid = g.grid();
    const int d = grid.dim();
    BoundaryField dn(grid, 1);
    for (int k = 0; k < grid.n_time(); ++k)
        for (std::size_t s = 0; s < grid.tangential_points(); ++s)
            dn.at(k, s, 0) = g.at(k, s, d - 1) - v.at(k, 0, s, d - 1) - V.at(k, 0, s, d - 1);
    return dn;
}

struct SolveOptions {
    double compatibility_tol = 1e-8;
    /// Allowed discrete sup |div h| relative to sup |grad h|.
    double divergence_tol = 1e-2;
    bool diagnostics = true;
};

/**
 * Linear solver for the decomposition u = v + V + grad(phi) + w. Holds the
 * boundary-propagator kernel tables, so repeated solves on one grid (Picard
 * iterations) build them once. Concurrent solve() calls are safe.
 */
class StokesSolver {
public:
    explicit StokesSolver(const GridSpec& grid) : grid_(grid), cache_(std::make_shared<KernelCache>(grid)) {}

    const GridSpec& grid() const { return grid_; }
    KernelCache& cache() { return *cache_; }

    /// Throws ValidationError naming the first violated rule.
    void validate(const StokesData& data, const SolveOptions& opt) const {
        const double tol = opt.compatibility_tol;
        const int d = grid_.dim();
        if (!(data.alpha > 0 && data.alpha < 1)) throw ValidationError("stokes: alpha must lie in (0,1)");
        if (!(data.h.grid() == grid_) || data.h.extent() != Extent::half || data.h.components() != d)
            throw ValidationError("stokes: h must be a half-grid vector field on the solver grid");
        if (!(data.g.grid() == grid_) || data.g.components() != d)
            throw ValidationError("stokes: g must be a vector BoundaryField on the solver grid");
        if (data.has_force() && (!(data.F.grid() == grid_) || data.F.extent() != Extent::half ||
                                 data.F.components() != d * d))
            throw ValidationError("stokes: F must be a half-grid tensor SpaceTimeField on the solver grid");
        detail::require_finite(data.h.values(), "stokes: h");
        detail::require_finite(data.g.values(), "stokes: g");
        if (data.has_force()) detail::require_finite(data.F.values(), "stokes: F");
        const double scale = std::max({1.0, linf(data.h.values()), linf(data.g.values())});
        const double grad_scale = std::max(1.0, linf(gradient(data.h).values()));
        const auto rep = check_compatibility(data.h, data.g, tol * scale, opt.divergence_tol * grad_scale);
        if (!rep.passes())
            throw ValidationError("stokes: compatibility violated: " + rep.violations());
    }

    StokesSolution solve(const StokesData& data, const SolveOptions& opt = {}) {
        validate(data, opt);
        const int d = grid_.dim();
        const double scale = std::max({1.0, linf(data.h.values()), linf(data.g.values())});
        StokesSolution sol;

        const Field h_full = extend_initial(data.h, opt.compatibility_tol * scale);
        sol.v = restrict_to_half(heat_evolve(h_full));
        if (data.has_force())
            sol.V = restrict_to_half(duhamel_force(extend_tensor(data.F)));
        else
            sol.V = SpaceTimeField(grid_, Extent::half, d);

        const BoundaryField dn = normal_wall_data(data.g, sol.v, sol.V);
        sol.grad_phi = grad_phi(dn, opt.compatibility_tol);
        sol.G = build_G(data.g, sol.v, sol.V);
        zero_initial_slice(sol.G, opt.compatibility_tol * scale);
        sol.w = solonnikov_w(sol.G, *cache_);

        sol.u = sol.v;
        sol.u += sol.V;
        sol.u += sol.grad_phi;
        sol.u += sol.w;

        if (opt.diagnostics) {
            const auto tr = trace_error(sol.u, data.h, data.g);
            sol.diagnostics.initial_err = tr.initial_err;
            sol.diagnostics.boundary_err = tr.boundary_err;
            sol.diagnostics.boundary_err_row1 = tr.boundary_err_row1;
            const auto dv = divergence_report(sol.u);
            sol.diagnostics.divergence_sup = dv.sup;
            sol.diagnostics.divergence_relative = dv.relative();
        }
        return sol;
    }

private:
    /// G(., 0) is a compatibility residual; clear it once it is known to be within tolerance.
    static void zero_initial_slice(BoundaryField& G, double tol) {
        for (std::size_t s = 0; s < G.slice_size(); ++s) {
            if (std::abs(G.values()[s]) > tol)
                throw ValidationError("stokes: G(., 0) does not vanish; g(., 0) and h(., 0) disagree");
            G.values()[s] = 0;
        }
    }

    GridSpec grid_;
    std::shared_ptr<KernelCache> cache_;
};

inline StokesSolution solve_stokes(const StokesData& data, const GridSpec& grid,
                                   const SolveOptions& opt = {}) {
    StokesSolver solver(grid);
    return solver.solve(data, opt);
}

}  // namespace hstokes
