#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "hstokes/error.hpp"
#include "hstokes/field.hpp"
#include "hstokes/parallel.hpp"
#include "hstokes/quadrature.hpp"
#include "hstokes/spectral.hpp"

namespace hstokes {

// ---------------------------------------------------------------------------
// Heat extension v and Duhamel force integral V (full torus)

/// v(t) = Gamma(t) * h~ for one time; t = 0 returns the input.
inline Field heat_evolve(const Field& h_full, double t) {
    if (t < 0) throw ValidationError("heat_evolve: negative time");
    return inverse_full(heat_propagate(forward_full(h_full), t));
}

/// v on every time slice of the grid.
inline SpaceTimeField heat_evolve(const Field& h_full) {
    const GridSpec& g = h_full.grid();
    SpaceTimeField v(g, Extent::full, h_full.components());
    if (linf(h_full.values()) == 0) return v;
    const auto hat = forward_full(h_full);
    v.set_slice(0, h_full);
    for (int k = 1; k < g.n_time(); ++k) v.set_slice(k, inverse_full(heat_propagate(hat, g.time(k))));
    return v;
}

namespace detail {

/// Exponential-integrator coefficients for piecewise-linear forcing over one step.
struct EtdCoefficients {
    double decay, c0, c1;
};

inline EtdCoefficients etd_coefficients(double lambda, double dt) {
    const double z = lambda * dt;
    EtdCoefficients e;
    e.decay = std::exp(-z);
    if (z < 1e-3) {
        e.c0 = dt * (1 - z / 2 + z * z / 6 - z * z * z / 24);
        e.c1 = dt * (0.5 - z / 6 + z * z / 24 - z * z * z / 120);
    } else {
        e.c0 = -std::expm1(-z) / lambda;
        e.c1 = dt * (z + std::expm1(-z)) / (z * z);
    }
    return e;
}

}  // namespace detail

/**
 * V_j(t) = int_0^t exp((t-s) Lap) [P div F~]_j ds on the doubled torus, with F~
 * interpolated linearly in time and integrated exactly per mode. V(0) = 0.
 */
inline SpaceTimeField duhamel_force(const SpaceTimeField& F_full) {
    const GridSpec& g = F_full.grid();
    const int d = g.dim();
    if (F_full.extent() != Extent::full || F_full.components() != d * d)
        throw ValidationError("duhamel_force: expects a full-torus tensor field");
    SpaceTimeField V(g, Extent::full, d);
    if (linf(F_full.values()) == 0) return V;

    const auto modes = full_modes(g);
    const std::size_t nm = modes.size();
    // Projected divergence P (i xi_k F_ki) per mode for one slice.
    auto forcing = [&](int k) {
        const auto s = forward_full(F_full.slice_field(k));
        SpectralSlice q{g, Extent::full, d, nm, std::vector<cplx>(nm * d)};
        for (std::size_t m = 0; m < nm; ++m)
            for (int i = 0; i < d; ++i) {
                cplx acc = 0;
                for (int kk = 0; kk < d; ++kk)
                    acc += cplx(0, modes[m].xi[kk]) * s.component(kk * d + i)[m];
                q.component(i)[m] = acc;
            }
        leray_multiply(modes, q);
        return q;
    };

    std::vector<detail::EtdCoefficients> etd(nm);
    for (std::size_t m = 0; m < nm; ++m)
        etd[m] = detail::etd_coefficients(modes[m].norm * modes[m].norm, g.dt());

    SpectralSlice vhat{g, Extent::full, d, nm, std::vector<cplx>(nm * d)};
    SpectralSlice q_prev = forcing(0);
    for (int k = 1; k < g.n_time(); ++k) {
        SpectralSlice q_next = forcing(k);
        for (int i = 0; i < d; ++i) {
            auto v = vhat.component(i);
            const auto a = q_prev.component(i);
            const auto b = q_next.component(i);
            for (std::size_t m = 0; m < nm; ++m)
                v[m] = etd[m].decay * v[m] + etd[m].c0 * a[m] + etd[m].c1 * (b[m] - a[m]);
        }
        V.set_slice(k, inverse_full(vhat));
        q_prev = std::move(q_next);
    }
    return V;
}

// ---------------------------------------------------------------------------
// Boundary propagator kernel

/// Unit-mass 1-D heat kernel.
inline double heat_kernel_1d(double x, double tau) {
    return std::exp(-x * x / (4 * tau)) / std::sqrt(4 * std::numbers::pi * tau);
}

/**
 * Scalar building blocks of the tangential-Fourier boundary kernel at |xi'| = kappa:
 *   diagonal(kappa, x, tau)  = -2 d/dx [exp(-kappa^2 tau) k(x, tau)]
 *   composite(kappa, x, tau) = 2 exp(-kappa^2 tau) int_0^x d_z k(z, tau) exp(-kappa (x - z)) dz
 * so that K_ij = delta_ij diagonal + (xi_i xi_j / kappa) composite for i < n and
 * K_nj = i xi_j composite.
 */
inline double kernel_diagonal(double kappa, double x, double tau) {
    return std::exp(-kappa * kappa * tau) * (x / tau) * heat_kernel_1d(x, tau);
}

/// Closed form of the composite term through the error function.
inline double kernel_composite(double kappa, double x, double tau) {
    const double decay = std::exp(-kappa * kappa * tau);
    const double ex = std::exp(-kappa * x);
    const double st = std::sqrt(tau);
    const double A = (x - 2 * kappa * tau) / (2 * st);
    const double B = kappa * st;
    // erf(A) + erf(B) without cancellation when both tails are small.
    const double erf_sum = A < 0 ? std::erfc(-A) - std::erfc(B) : std::erf(A) + std::erf(B);
    return 2 * decay * (heat_kernel_1d(x, tau) - heat_kernel_1d(0, tau) * ex) -
           kappa * ex * erf_sum;
}

/// Composite term by adaptive quadrature of the z-integral.
inline double kernel_composite_quadrature(double kappa, double x, double tau,
                                          double rel_tol = 1e-12) {
    if (x == 0) return 0;
    auto integrand = [&](double z) {
        const double dk = -z / (2 * tau) * heat_kernel_1d(z, tau);
        return dk * std::exp(-kappa * (x - z));
    };
    // Split at the heat-kernel bump so the adaptive rule sees it.
    const double peak = std::min(x, 6 * std::sqrt(tau));
    double I = quad::integrate_scalar(integrand, 0, peak, 1e-16, rel_tol);
    if (peak < x) I += quad::integrate_scalar(integrand, peak, x, 1e-16, rel_tol);
    return 2 * std::exp(-kappa * kappa * tau) * I;
}

/// K^_ij(xi', x_n, tau) for i < dim and j < dim-1.
struct KernelMatrix {
    int dim = 2;
    std::array<std::array<cplx, 2>, 3> k{};
    cplx operator()(int i, int j) const { return k[i][j]; }
};

/**
 * Tangential-Fourier symbol of the boundary propagator kernel; the composite
 * z-integral is evaluated by adaptive quadrature.
 */
inline KernelMatrix solonnikov_kernel_hat(std::span<const double> xi_tangential, double xn,
                                          double tau) {
    if (!(tau > 0)) throw ValidationError("solonnikov_kernel_hat: tau must be positive");
    if (xn < 0) throw ValidationError("solonnikov_kernel_hat: x_n must be nonnegative");
    KernelMatrix K;
    K.dim = int(xi_tangential.size()) + 1;
    double kappa2 = 0;
    for (double x : xi_tangential) kappa2 += x * x;
    const double kappa = std::sqrt(kappa2);
    const double diag = kernel_diagonal(kappa, xn, tau);
    const double comp = kappa > 0 ? kernel_composite_quadrature(kappa, xn, tau) : 0.0;
    for (int j = 0; j < K.dim - 1; ++j) {
        for (int i = 0; i < K.dim - 1; ++i) {
            K.k[i][j] = (i == j ? diag : 0.0);
            if (kappa > 0) K.k[i][j] += xi_tangential[i] * xi_tangential[j] / kappa * comp;
        }
        K.k[K.dim - 1][j] = cplx(0, xi_tangential[j]) * comp;
    }
    return K;
}

/**
 * Product-integration weights of the two scalar kernels for one |xi'| on a grid.
 *
 * For row x_j and time interval [t_i, t_{i+1}] the table holds
 * M0 = int K dtau and M1 = int K (tau - t_i)/dt dtau, computed in the variable
 * sigma = sqrt(tau), which removes the tau^{-1/2} endpoint behaviour.
 */
struct KernelTable {
    double kappa = 0;
    int n_normal = 0;
    int n_intervals = 0;
    // index: (row * n_intervals + interval) * 4 + {M0 diag, M1 diag, M0 comp, M1 comp}
    std::vector<double> moments;

    double m(int row, int interval, int which) const {
        return moments[(std::size_t(row) * n_intervals + interval) * 4 + which];
    }
};

inline KernelTable build_kernel_table(const GridSpec& g, double kappa) {
    KernelTable t;
    t.kappa = kappa;
    t.n_normal = g.n_normal();
    t.n_intervals = g.n_time() - 1;
    t.moments.assign(std::size_t(t.n_normal) * t.n_intervals * 4, 0.0);
    const double dt = g.dt();
    for (int j = 1; j < g.n_normal(); ++j) {
        const double x = g.x_normal(j);
        for (int i = 0; i < t.n_intervals; ++i) {
            const double t0 = i * dt;
            auto f = [&](double s) {
                const double tau = s * s;
                if (tau <= 0) return std::array<double, 4>{0, 0, 0, 0};
                const double jac = 2 * s;
                const double w = (tau - t0) / dt;
                const double a = kernel_diagonal(kappa, x, tau) * jac;
                const double b = kappa > 0 ? kernel_composite(kappa, x, tau) * jac : 0.0;
                return std::array<double, 4>{a, a * w, b, b * w};
            };
            const auto r = quad::integrate<4>(f, std::sqrt(t0), std::sqrt(t0 + dt), 1e-13, 1e-11);
            std::copy(r.value.begin(), r.value.end(),
                      t.moments.begin() + (std::size_t(j) * t.n_intervals + i) * 4);
        }
    }
    return t;
}

/// Kernel tables keyed by |xi'|, reused across time steps, solves and Picard iterations.
class KernelCache {
public:
    explicit KernelCache(const GridSpec& grid) : grid_(grid) {}

    const GridSpec& grid() const { return grid_; }

    /// Returns tables for all requested |xi'|, building missing ones in parallel.
    std::vector<std::shared_ptr<const KernelTable>> get(const std::vector<double>& kappas) {
        std::vector<double> missing;
        {
            std::lock_guard lock(m_);
            for (double k : kappas)
                if (!tables_.contains(k) &&
                    std::find(missing.begin(), missing.end(), k) == missing.end())
                    missing.push_back(k);
        }
        std::vector<std::shared_ptr<const KernelTable>> built(missing.size());
        parallel_for(long(missing.size()), [&](long i) {
            built[i] = std::make_shared<const KernelTable>(build_kernel_table(grid_, missing[i]));
        });
        std::lock_guard lock(m_);
        for (std::size_t i = 0; i < missing.size(); ++i) tables_.emplace(missing[i], built[i]);
        std::vector<std::shared_ptr<const KernelTable>> out;
        out.reserve(kappas.size());
        for (double k : kappas) out.push_back(tables_.at(k));
        return out;
    }

    std::size_t size() const {
        std::lock_guard lock(m_);
        return tables_.size();
    }

private:
    GridSpec grid_;
    mutable std::mutex m_;
    std::map<double, std::shared_ptr<const KernelTable>> tables_;
};

/**
 * Boundary propagator w for tangential wall data G = (G', 0) with G(., 0) = 0.
 *
 * Per tangential mode w^(x_n, t) = int_0^t K^(x_n, t - s) G^(s) ds with G^
 * piecewise linear in time. The wall row is assigned G; w(., ., 0) = 0.
 */
inline SpaceTimeField solonnikov_w(const BoundaryField& G, KernelCache& cache) {
    const GridSpec& g = G.grid();
    const int d = g.dim();
    if (G.components() != d) throw ValidationError("solonnikov_w: G must have dim components");
    if (!(cache.grid() == g)) throw ValidationError("solonnikov_w: kernel cache grid mismatch");
    const double scale = linf(G.values());
    const double tol = 1e-9 * std::max(1.0, scale);
    for (int k = 0; k < g.n_time(); ++k)
        for (std::size_t s = 0; s < g.tangential_points(); ++s) {
            if (std::abs(G.at(k, s, d - 1)) > tol)
                throw ValidationError("solonnikov_w: normal component of G must vanish");
            for (int c = 0; c < d; ++c)
                if (k == 0 && std::abs(G.at(0, s, c)) > tol)
                    throw ValidationError("solonnikov_w: G must vanish at t = 0");
        }

    SpaceTimeField w(g, Extent::half, d);
    if (scale == 0) return w;

    const auto modes = tangential_modes(g);
    const std::size_t nm = modes.size();
    const int nt = g.n_time();
    const int nn = g.n_normal();

    // ghat[(k * (d-1) + c) * nm + m]
    std::vector<cplx> ghat(std::size_t(nt) * (d - 1) * nm);
    for (int k = 0; k < nt; ++k) {
        std::span<const double> in(G.values().data() + k * G.slice_size(), G.slice_size());
        const auto hat = forward_wall(g, in, d);
        for (int c = 0; c < d - 1; ++c)
            std::copy(hat[c].begin(), hat[c].end(), ghat.begin() + (std::size_t(k) * (d - 1) + c) * nm);
    }
    auto gh = [&](int k, int c, std::size_t m) { return ghat[(std::size_t(k) * (d - 1) + c) * nm + m]; };

    double peak = 0;
    std::vector<double> mode_peak(nm, 0.0);
    for (std::size_t m = 0; m < nm; ++m) {
        for (int k = 0; k < nt; ++k)
            for (int c = 0; c < d - 1; ++c) mode_peak[m] = std::max(mode_peak[m], std::abs(gh(k, c, m)));
        peak = std::max(peak, mode_peak[m]);
    }
    std::vector<std::size_t> active;
    std::vector<double> kappas;
    for (std::size_t m = 0; m < nm; ++m)
        if (mode_peak[m] > 1e-13 * peak) {
            active.push_back(m);
            if (std::find(kappas.begin(), kappas.end(), modes[m].norm) == kappas.end())
                kappas.push_back(modes[m].norm);
        }
    const auto tables = cache.get(kappas);
    auto table_for = [&](double kappa) -> const KernelTable& {
        for (std::size_t i = 0; i < kappas.size(); ++i)
            if (kappas[i] == kappa) return *tables[i];
        throw std::logic_error("solonnikov_w: missing kernel table");
    };

    // what[((k * nn + j) * d + c) * nm + m]
    std::vector<cplx> what(std::size_t(nt) * nn * d * nm, cplx(0));
    parallel_for(long(active.size()), [&](long ai) {
        const std::size_t m = active[ai];
        const Mode& md = modes[m];
        const KernelTable& T = table_for(md.norm);
        const double kappa = md.norm;
        std::vector<cplx> sdot(nt);
        for (int k = 0; k < nt; ++k) {
            cplx acc = 0;
            for (int c = 0; c < d - 1; ++c) acc += md.xi[c] * gh(k, c, m);
            sdot[k] = acc;
        }
        std::vector<double> wa(nt), wb(nt), la(nt), lb(nt);
        for (int j = 1; j < nn; ++j) {
            // Two-sided hat weights per lag, and the left-only weight for the s = 0 node.
            for (int l = 0; l < nt; ++l) {
                const double left_a = l >= 1 ? T.m(j, l - 1, 1) : 0.0;
                const double left_b = l >= 1 ? T.m(j, l - 1, 3) : 0.0;
                const double right_a = l < nt - 1 ? T.m(j, l, 0) - T.m(j, l, 1) : 0.0;
                const double right_b = l < nt - 1 ? T.m(j, l, 2) - T.m(j, l, 3) : 0.0;
                wa[l] = left_a + right_a;
                wb[l] = left_b + right_b;
                la[l] = left_a;
                lb[l] = left_b;
            }
            for (int n = 1; n < nt; ++n) {
                std::array<cplx, 2> acc_a{};
                cplx acc_b = 0;
                for (int c = 0; c < d - 1; ++c) acc_a[c] = la[n] * gh(0, c, m);
                acc_b = lb[n] * sdot[0];
                for (int q = 1; q <= n; ++q) {
                    const int l = n - q;
                    for (int c = 0; c < d - 1; ++c) acc_a[c] += wa[l] * gh(q, c, m);
                    acc_b += wb[l] * sdot[q];
                }
                const std::size_t base = (std::size_t(n) * nn + j) * d;
                for (int c = 0; c < d - 1; ++c) {
                    cplx v = acc_a[c];
                    if (kappa > 0) v += md.xi[c] / kappa * acc_b;
                    what[(base + c) * nm + m] = v;
                }
                what[(base + d - 1) * nm + m] = cplx(0, 1) * acc_b;
            }
        }
    });

    fft::RealFft plan(detail::tangential_dims(g), 1);
    std::vector<double> row(g.tangential_points());
    for (int k = 1; k < nt; ++k)
        for (int j = 1; j < nn; ++j)
            for (int c = 0; c < d; ++c) {
                std::span<const cplx> co(what.data() + ((std::size_t(k) * nn + j) * d + c) * nm, nm);
                plan.inverse(co, row);
                for (std::size_t s = 0; s < row.size(); ++s) w.at(k, j, s, c) = row[s];
            }
    for (int k = 0; k < nt; ++k)
        for (std::size_t s = 0; s < g.tangential_points(); ++s)
            for (int c = 0; c < d; ++c) w.at(k, 0, s, c) = G.at(k, s, c);
    return w;
}

inline SpaceTimeField solonnikov_w(const BoundaryField& G) {
    KernelCache cache(G.grid());
    return solonnikov_w(G, cache);
}

}  // namespace hstokes
