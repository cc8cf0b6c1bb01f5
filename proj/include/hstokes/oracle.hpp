#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hstokes/error.hpp"
#include "hstokes/field.hpp"
#include "hstokes/parallel.hpp"
#include "hstokes/spectral.hpp"
#include "hstokes/stokes.hpp"

namespace hstokes {

/// Reference-solver resolution relative to the main grid (normal rows and time steps).
struct OracleConfig {
    int space_refine = 2;
    int time_refine = 2;

    void validate() const {
        if (space_refine < 1 || time_refine < 1)
            throw ValidationError("oracle: resolution multipliers must be >= 1");
    }
};

/// Finer grid with the same extents: (n-1)*r + 1 normal nodes and time slices.
inline GridSpec oracle_grid(const GridSpec& g, const OracleConfig& cfg) {
    cfg.validate();
    return make_grid(g.dim(), g.period_l(), g.height_h(), g.n_tangential(),
                     (g.n_normal() - 1) * cfg.space_refine + 1, g.t_final(),
                     (g.n_time() - 1) * cfg.time_refine + 1);
}

/// Samples a fine-grid field at the nodes shared with the coarse grid.
inline SpaceTimeField coarsen(const SpaceTimeField& fine, const GridSpec& coarse, const OracleConfig& cfg) {
    SpaceTimeField out(coarse, Extent::half, fine.components());
    for (int k = 0; k < coarse.n_time(); ++k)
        for (int j = 0; j < coarse.n_normal(); ++j)
            for (std::size_t s = 0; s < coarse.tangential_points(); ++s)
                for (int c = 0; c < fine.components(); ++c)
                    out.at(k, j, s, c) = fine.at(k * cfg.time_refine, j * cfg.space_refine, s, c);
    return out;
}

// ---------------------------------------------------------------------------
// 1-D half-line heat problem

/// Values on (time, x_n) nodes of [0,T] x [0,H].
struct Profile1D {
    double H = 0, T = 0;
    int n_normal = 0, n_time = 0;
    std::vector<double> values;

    double x(int j) const { return H * j / (n_normal - 1); }
    double t(int k) const { return T * k / (n_time - 1); }
    double at(int k, int j) const { return values[std::size_t(k) * n_normal + j]; }
};

/**
 * u_t = u_xx on (0, H) with u(0,t) = a(t), u(H,t) = 0 and u(.,0) = 0, by
 * Crank-Nicolson in time and centered differences in space.
 */
inline Profile1D rayleigh_1d(const std::function<double(double)>& a, double H, int n_normal, double T,
                             int n_time) {
    if (n_normal < 3 || n_time < 2 || !(H > 0) || !(T > 0))
        throw ValidationError("rayleigh_1d: need n_normal >= 3, n_time >= 2 and positive extents");
    if (std::abs(a(0.0)) > 1e-12) throw ValidationError("rayleigh_1d: boundary value must vanish at t = 0");
    Profile1D p{H, T, n_normal, n_time, std::vector<double>(std::size_t(n_normal) * n_time, 0.0)};
    const int M = n_normal - 2;
    const double dx = H / (n_normal - 1), dt = T / (n_time - 1);
    const double lam = 0.5 * dt / (dx * dx);
    std::vector<double> u(M, 0.0), rhs(M), cp(M), dp(M);
    for (int k = 1; k < n_time; ++k) {
        const double a0 = a(p.t(k - 1)), a1 = a(p.t(k));
        for (int i = 0; i < M; ++i) {
            const double left = i == 0 ? a0 : u[i - 1];
            const double right = i == M - 1 ? 0.0 : u[i + 1];
            rhs[i] = u[i] + lam * (left - 2 * u[i] + right);
        }
        rhs[0] += lam * a1;
        // Thomas algorithm for the constant tridiagonal (-lam, 1 + 2 lam, -lam).
        const double diag = 1 + 2 * lam;
        cp[0] = -lam / diag;
        dp[0] = rhs[0] / diag;
        for (int i = 1; i < M; ++i) {
            const double den = diag + lam * cp[i - 1];
            cp[i] = -lam / den;
            dp[i] = (rhs[i] + lam * dp[i - 1]) / den;
        }
        u[M - 1] = dp[M - 1];
        for (int i = M - 2; i >= 0; --i) u[i] = dp[i] - cp[i] * u[i + 1];
        p.values[std::size_t(k) * n_normal] = a1;
        for (int i = 0; i < M; ++i) p.values[std::size_t(k) * n_normal + i + 1] = u[i];
    }
    return p;
}

// ---------------------------------------------------------------------------
// Finite-difference Stokes / Navier-Stokes on the truncated box

namespace detail {

using SparseLU = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

inline std::vector<cplx> solve_complex(SparseLU& lu, const std::vector<cplx>& rhs) {
    const int n = int(rhs.size());
    Eigen::VectorXd re(n), im(n);
    for (int i = 0; i < n; ++i) {
        re[i] = rhs[i].real();
        im[i] = rhs[i].imag();
    }
    const Eigen::VectorXd xr = lu.solve(re), xi = lu.solve(im);
    if (lu.info() != Eigen::Success) throw OracleError("oracle: sparse solve failed");
    std::vector<cplx> x(n);
    for (int i = 0; i < n; ++i) x[i] = cplx(xr[i], xi[i]);
    return x;
}

/**
 * Pressure-free stepping of one tangential mode with |xi'| = kappa > 0:
 * streamfunction psi with u_par = D psi, u_n = -i kappa psi satisfies
 * (d_t - L) L psi = D f_par - i kappa f_n, L = D^2 - kappa^2, with
 * psi(0) = i g_n/kappa, D psi(0) = g_par and psi = D psi = 0 at the ceiling.
 * Second-order differences, trapezoidal rule in time.
 */
class StreamStepper {
public:
    StreamStepper(double kappa, int n_normal, double dx, double dt)
        : kappa_(kappa), N_(n_normal - 1), dx_(dx), dt_(dt) {
        const int M = N_ - 1;
        // Operator on interior psi: (1/dt) omega_int - 0.5 B omega, with omega = A psi.
        std::vector<Eigen::Triplet<double>> ta, tb;
        const double i2 = 1 / (dx * dx), k2 = kappa * kappa;
        auto A = [&](int row, int col, double v) {  // row in 0..N, col interior 1..N-1
            if (col >= 1 && col <= N_ - 1) ta.emplace_back(row, col - 1, v);
        };
        for (int j = 0; j <= N_; ++j) {
            if (j == 0) {
                A(0, 1, 2 * i2);
            } else if (j == N_) {
                A(N_, N_ - 1, 2 * i2);
            } else {
                A(j, j - 1, i2);
                A(j, j, -2 * i2 - k2);
                A(j, j + 1, i2);
            }
        }
        for (int j = 1; j <= N_ - 1; ++j) {
            tb.emplace_back(j - 1, j - 1, i2);
            tb.emplace_back(j - 1, j, -2 * i2 - k2);
            tb.emplace_back(j - 1, j + 1, i2);
        }
        Eigen::SparseMatrix<double> Am(N_ + 1, M), Bm(M, N_ + 1);
        Am.setFromTriplets(ta.begin(), ta.end());
        Bm.setFromTriplets(tb.begin(), tb.end());
        Eigen::SparseMatrix<double> Aint = Am.middleRows(1, M);
        Eigen::SparseMatrix<double> lhs = Aint / dt - 0.5 * (Bm * Am);
        lhs.makeCompressed();
        lu_ = std::make_shared<SparseLU>();
        lu_->compute(lhs);
        if (lu_->info() != Eigen::Success) throw OracleError("oracle: factorization failed");
    }

    /// omega = L psi at every node for full psi (0..N) and wall data (p0 = psi(0), q0 = D psi(0)).
    std::vector<cplx> omega(const std::vector<cplx>& psi, cplx q0) const {
        const double i2 = 1 / (dx_ * dx_), k2 = kappa_ * kappa_;
        std::vector<cplx> w(N_ + 1);
        const cplx ghost_lo = psi[1] - 2 * dx_ * q0;
        const cplx ghost_hi = psi[N_ - 1];
        for (int j = 0; j <= N_; ++j) {
            const cplx lo = j == 0 ? ghost_lo : psi[j - 1];
            const cplx hi = j == N_ ? ghost_hi : psi[j + 1];
            w[j] = (lo - 2.0 * psi[j] + hi) * i2 - k2 * psi[j];
        }
        return w;
    }

    /// (L omega)_j on interior nodes.
    std::vector<cplx> apply_L(const std::vector<cplx>& w) const {
        const double i2 = 1 / (dx_ * dx_), k2 = kappa_ * kappa_;
        std::vector<cplx> out(N_ - 1);
        for (int j = 1; j <= N_ - 1; ++j) out[j - 1] = (w[j - 1] - 2.0 * w[j] + w[j + 1]) * i2 - k2 * w[j];
        return out;
    }

    /// Advances full psi one step; `forcing` holds the time-centred right-hand side on interior nodes.
    void step(std::vector<cplx>& psi, cplx p0_old, cplx q0_old, cplx p0_new, cplx q0_new,
              const std::vector<cplx>& forcing) const {
        psi[0] = p0_old;
        const auto w_old = omega(psi, q0_old);
        const auto Lw_old = apply_L(w_old);
        std::vector<cplx> zero(N_ + 1, cplx(0));
        zero[0] = p0_new;
        const auto b_new = omega(zero, q0_new);
        const auto Lb_new = apply_L(b_new);
        std::vector<cplx> rhs(N_ - 1);
        for (int j = 1; j <= N_ - 1; ++j)
            rhs[j - 1] = w_old[j] / dt_ + 0.5 * Lw_old[j - 1] - (b_new[j] / dt_ - 0.5 * Lb_new[j - 1]) +
                         forcing[j - 1];
        const auto x = solve_complex(*lu_, rhs);
        psi[0] = p0_new;
        for (int j = 1; j <= N_ - 1; ++j) psi[j] = x[j - 1];
        psi[N_] = 0;
    }

private:
    double kappa_;
    int N_;
    double dx_, dt_;
    std::shared_ptr<SparseLU> lu_;
};

/// Trapezoidal stepping of (d_t - D^2 + kappa^2) u = f with u(0) = b(t), u(H) = 0.
class HeatStepper {
public:
    HeatStepper(double kappa, int n_normal, double dx, double dt)
        : kappa_(kappa), N_(n_normal - 1), dx_(dx), dt_(dt) {
        const int M = N_ - 1;
        const double i2 = 1 / (dx * dx), k2 = kappa * kappa;
        std::vector<Eigen::Triplet<double>> t;
        for (int j = 0; j < M; ++j) {
            t.emplace_back(j, j, 1 / dt + 0.5 * (2 * i2 + k2));
            if (j > 0) t.emplace_back(j, j - 1, -0.5 * i2);
            if (j < M - 1) t.emplace_back(j, j + 1, -0.5 * i2);
        }
        Eigen::SparseMatrix<double> lhs(M, M);
        lhs.setFromTriplets(t.begin(), t.end());
        lhs.makeCompressed();
        lu_ = std::make_shared<SparseLU>();
        lu_->compute(lhs);
        if (lu_->info() != Eigen::Success) throw OracleError("oracle: factorization failed");
    }

    void step(std::vector<cplx>& u, cplx b_old, cplx b_new, const std::vector<cplx>& forcing) const {
        const double i2 = 1 / (dx_ * dx_), k2 = kappa_ * kappa_;
        u[0] = b_old;
        std::vector<cplx> rhs(N_ - 1);
        for (int j = 1; j <= N_ - 1; ++j)
            rhs[j - 1] = u[j] / dt_ + 0.5 * ((u[j - 1] - 2.0 * u[j] + u[j + 1]) * i2 - k2 * u[j]) +
                         forcing[j - 1];
        rhs[0] += 0.5 * i2 * b_new;
        const auto x = solve_complex(*lu_, rhs);
        u[0] = b_new;
        for (int j = 1; j <= N_ - 1; ++j) u[j] = x[j - 1];
        u[N_] = 0;
    }

private:
    double kappa_;
    int N_;
    double dx_, dt_;
    std::shared_ptr<SparseLU> lu_;
};

/// Per-mode geometry: unit tangential direction e, its rotation e_perp (3-D), |xi'|.
struct ModeFrame {
    double kappa = 0;
    std::array<double, 2> e{0, 0}, e_perp{0, 0};
    bool nyquist = false;
};

inline std::vector<ModeFrame> mode_frames(const GridSpec& g) {
    const auto modes = tangential_modes(g);
    std::vector<ModeFrame> out(modes.size());
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const auto& xi = modes[m].xi;
        const double k = std::hypot(xi[0], g.dim() == 3 ? xi[1] : 0.0);
        ModeFrame& f = out[m];
        f.kappa = k;
        f.nyquist = k == 0 && modes[m].norm > 0;
        if (k > 0) {
            f.e = {xi[0] / k, g.dim() == 3 ? xi[1] / k : 0.0};
            f.e_perp = {-f.e[1], f.e[0]};
        }
    }
    return out;
}

/// Spectral state of all tangential modes: coefficient (j, c, m) for node j and velocity component c.
struct ModalField {
    int nn = 0, d = 0;
    std::size_t nm = 0;
    std::vector<cplx> c;
    cplx& at(int j, int comp, std::size_t m) { return c[(std::size_t(j) * d + comp) * nm + m]; }
    cplx at(int j, int comp, std::size_t m) const { return c[(std::size_t(j) * d + comp) * nm + m]; }
};

inline ModalField to_modal(const Field& f) {
    const auto s = forward_tangential(f);
    const std::size_t nm = f.grid().tangential_modes();
    ModalField out{f.rows(), f.components(), nm, std::vector<cplx>(std::size_t(f.rows()) * f.components() * nm)};
    for (int c = 0; c < f.components(); ++c)
        for (int j = 0; j < f.rows(); ++j)
            for (std::size_t m = 0; m < nm; ++m) out.at(j, c, m) = s.component(c)[j * nm + m];
    return out;
}

inline Field from_modal(const GridSpec& g, const ModalField& mf) {
    SpectralSlice s{g, Extent::half, mf.d, mf.nm * mf.nn, std::vector<cplx>(mf.nm * mf.nn * mf.d)};
    for (int c = 0; c < mf.d; ++c)
        for (int j = 0; j < mf.nn; ++j)
            for (std::size_t m = 0; m < mf.nm; ++m) s.component(c)[j * mf.nm + m] = mf.at(j, c, m);
    return inverse_tangential(s);
}

/// f_i = sum_k d_k F_ki per mode and node (second-order one-sided differences at the ends).
inline ModalField modal_divergence(const GridSpec& g, const ModalField& F) {
    const int d = g.dim();
    const auto modes = tangential_modes(g);
    const double h = g.dx_normal();
    const int N = F.nn - 1;
    ModalField f{F.nn, d, F.nm, std::vector<cplx>(std::size_t(F.nn) * d * F.nm)};
    for (std::size_t m = 0; m < F.nm; ++m)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j <= N; ++j) {
                cplx acc = 0;
                for (int k = 0; k < d - 1; ++k) acc += cplx(0, modes[m].xi[k]) * F.at(j, k * d + i, m);
                const int c = (d - 1) * d + i;
                cplx dn;
                if (j == 0)
                    dn = (-3.0 * F.at(0, c, m) + 4.0 * F.at(1, c, m) - F.at(2, c, m)) / (2 * h);
                else if (j == N)
                    dn = (3.0 * F.at(N, c, m) - 4.0 * F.at(N - 1, c, m) + F.at(N - 2, c, m)) / (2 * h);
                else
                    dn = (F.at(j + 1, c, m) - F.at(j - 1, c, m)) / (2 * h);
                f.at(j, i, m) = acc + dn;
            }
    return f;
}

/// Interior right-hand sides of every mode for a force f (velocity components per node).
struct ModeForcing {
    std::vector<cplx> stream;                  ///< D f_par - i kappa f_n
    std::vector<std::vector<cplx>> heat;       ///< f_perp (3-D) or f' (zero mode) per heat component
};

inline ModeForcing mode_forcing(const ModalField& f, std::size_t m, const ModeFrame& fr, int d, double h) {
    const int N = f.nn - 1;
    ModeForcing out;
    if (fr.kappa > 0) {
        std::vector<cplx> par(N + 1);
        for (int j = 0; j <= N; ++j) {
            cplx p = 0;
            for (int a = 0; a < d - 1; ++a) p += fr.e[a] * f.at(j, a, m);
            par[j] = p;
        }
        out.stream.resize(N - 1);
        for (int j = 1; j <= N - 1; ++j)
            out.stream[j - 1] = (par[j + 1] - par[j - 1]) / (2 * h) - cplx(0, fr.kappa) * f.at(j, d - 1, m);
        if (d == 3) {
            std::vector<cplx> perp(N - 1);
            for (int j = 1; j <= N - 1; ++j) perp[j - 1] = fr.e_perp[0] * f.at(j, 0, m) + fr.e_perp[1] * f.at(j, 1, m);
            out.heat.push_back(std::move(perp));
        }
    } else {
        for (int a = 0; a < d - 1; ++a) {
            std::vector<cplx> comp(N - 1);
            for (int j = 1; j <= N - 1; ++j) comp[j - 1] = f.at(j, a, m);
            out.heat.push_back(std::move(comp));
        }
    }
    return out;
}

/// Per-mode unknowns: full psi for kappa > 0, plus heat components.
struct ModeState {
    std::vector<cplx> psi;
    std::vector<std::vector<cplx>> heat;
};

/// Wall data of one mode: (p0, q0) for the stream function and heat boundary values.
struct ModeWall {
    cplx p0 = 0, q0 = 0;
    std::vector<cplx> heat;
};

inline ModeWall mode_wall(const std::vector<std::vector<cplx>>& ghat, std::size_t m, const ModeFrame& fr, int d) {
    ModeWall w;
    if (fr.kappa > 0) {
        w.p0 = cplx(0, 1) * ghat[d - 1][m] / fr.kappa;
        for (int a = 0; a < d - 1; ++a) w.q0 += fr.e[a] * ghat[a][m];
        if (d == 3) w.heat.push_back(fr.e_perp[0] * ghat[0][m] + fr.e_perp[1] * ghat[1][m]);
    } else {
        for (int a = 0; a < d - 1; ++a) w.heat.push_back(ghat[a][m]);
    }
    return w;
}

/// Velocity coefficients of one mode from its state.
inline void mode_velocity(const ModeState& st, const ModeWall& wall, const ModeFrame& fr, int d, double h,
                          std::size_t m, cplx gn_mean, ModalField& out) {
    const int N = out.nn - 1;
    for (int j = 0; j <= N; ++j) {
        std::array<cplx, 3> u{};
        if (fr.nyquist) {
            // The odd-convention frame is undefined at the Nyquist index; the mode is kept at zero.
        } else if (fr.kappa > 0) {
            const cplx par = j == 0 ? wall.q0 : j == N ? cplx(0) : (st.psi[j + 1] - st.psi[j - 1]) / (2 * h);
            for (int a = 0; a < d - 1; ++a) u[a] = fr.e[a] * par;
            if (d == 3)
                for (int a = 0; a < 2; ++a) u[a] += fr.e_perp[a] * st.heat[0][j];
            u[d - 1] = cplx(0, -fr.kappa) * st.psi[j];
        } else {
            for (int a = 0; a < d - 1; ++a) u[a] = st.heat[a][j];
            u[d - 1] = gn_mean;
        }
        for (int c = 0; c < d; ++c) out.at(j, c, m) = u[c];
    }
}

inline std::vector<std::vector<cplx>> wall_modes(const BoundaryField& g, int k) {
    std::span<const double> in(g.values().data() + k * g.slice_size(), g.slice_size());
    return forward_wall(g.grid(), in, g.components());
}

/// Shared driver for the linear (trapezoidal force) and nonlinear (AB2 force) oracles.
inline SpaceTimeField fd_solve(const StokesData& data, bool nonlinear) {
    const GridSpec& g = data.grid();
    const int d = g.dim();
    const int N = g.n_normal() - 1;
    if (N < 3) throw ValidationError("oracle: need at least 4 normal nodes");
    const double h = g.dx_normal(), dt = g.dt();
    const auto frames = mode_frames(g);
    const std::size_t nm = frames.size();

    std::vector<std::unique_ptr<StreamStepper>> streams(nm);
    std::vector<std::unique_ptr<HeatStepper>> heats(nm);
    parallel_for(long(nm), [&](long m) {
        if (frames[m].nyquist) return;
        if (frames[m].kappa > 0) streams[m] = std::make_unique<StreamStepper>(frames[m].kappa, N + 1, h, dt);
        heats[m] = std::make_unique<HeatStepper>(frames[m].kappa, N + 1, h, dt);
    });

    SpaceTimeField u(g, Extent::half, d);
    u.set_slice(0, data.h);
    const ModalField h0 = to_modal(data.h);
    std::vector<ModeState> state(nm);
    for (std::size_t m = 0; m < nm; ++m) {
        const ModeFrame& fr = frames[m];
        ModeState& st = state[m];
        if (fr.kappa > 0) {
            st.psi.resize(N + 1);
            for (int j = 0; j <= N; ++j) st.psi[j] = cplx(0, 1) * h0.at(j, d - 1, m) / fr.kappa;
            if (d == 3) {
                std::vector<cplx> perp(N + 1);
                for (int j = 0; j <= N; ++j)
                    perp[j] = fr.e_perp[0] * h0.at(j, 0, m) + fr.e_perp[1] * h0.at(j, 1, m);
                st.heat.push_back(std::move(perp));
            }
        } else {
            for (int a = 0; a < d - 1; ++a) {
                std::vector<cplx> comp(N + 1);
                for (int j = 0; j <= N; ++j) comp[j] = h0.at(j, a, m);
                st.heat.push_back(std::move(comp));
            }
        }
    }

    auto force_at = [&](int k, const SpaceTimeField& current) {
        Field F(g, Extent::half, d * d);
        if (data.has_force()) F = data.F.slice_field(k);
        if (nonlinear) {
            const Field uk = current.slice_field(k);
            for (int j = 0; j <= N; ++j)
                for (std::size_t s = 0; s < g.tangential_points(); ++s)
                    for (int a = 0; a < d; ++a)
                        for (int b = 0; b < d; ++b) F.at(j, s, a * d + b) -= uk.at(j, s, a) * uk.at(j, s, b);
        }
        return modal_divergence(g, to_modal(F));
    };
    const bool forced = nonlinear || data.has_force();
    const double dx_min = std::min(g.dx_tangential(), h);

    ModalField f_prev, f_cur = forced ? force_at(0, u) : ModalField{};
    for (int k = 1; k < g.n_time(); ++k) {
        if (nonlinear) {
            const double umax = linf(u.slice(k - 1));
            if (umax * dt / dx_min > 1.0)
                throw OracleError("ns_fd: CFL violated (max|u| dt/dx = " + std::to_string(umax * dt / dx_min) + ")");
        }
        ModalField f_next;
        if (forced && !nonlinear) f_next = force_at(k, u);
        const auto g_old = wall_modes(data.g, k - 1), g_new = wall_modes(data.g, k);
        ModalField out{N + 1, d, nm, std::vector<cplx>(std::size_t(N + 1) * d * nm)};
        parallel_for(long(nm), [&](long mi) {
            const std::size_t m = std::size_t(mi);
            const ModeFrame& fr = frames[m];
            const ModeWall w_old = mode_wall(g_old, m, fr, d), w_new = mode_wall(g_new, m, fr, d);
            ModeState& st = state[m];
            if (!fr.nyquist) {
                ModeForcing rhs;
                if (forced) {
                    const ModeForcing a = mode_forcing(f_cur, m, fr, d, h);
                    if (nonlinear) {
                        // Second-order Adams-Bashforth extrapolation; forward Euler on the first step.
                        rhs = a;
                        if (k >= 2) {
                            const ModeForcing p = mode_forcing(f_prev, m, fr, d, h);
                            for (std::size_t i = 0; i < rhs.stream.size(); ++i)
                                rhs.stream[i] = 1.5 * a.stream[i] - 0.5 * p.stream[i];
                            for (std::size_t c = 0; c < rhs.heat.size(); ++c)
                                for (std::size_t i = 0; i < rhs.heat[c].size(); ++i)
                                    rhs.heat[c][i] = 1.5 * a.heat[c][i] - 0.5 * p.heat[c][i];
                        }
                    } else {
                        const ModeForcing b = mode_forcing(f_next, m, fr, d, h);
                        rhs = a;
                        for (std::size_t i = 0; i < rhs.stream.size(); ++i)
                            rhs.stream[i] = 0.5 * (a.stream[i] + b.stream[i]);
                        for (std::size_t c = 0; c < rhs.heat.size(); ++c)
                            for (std::size_t i = 0; i < rhs.heat[c].size(); ++i)
                                rhs.heat[c][i] = 0.5 * (a.heat[c][i] + b.heat[c][i]);
                    }
                } else {
                    rhs.stream.assign(fr.kappa > 0 ? N - 1 : 0, cplx(0));
                    rhs.heat.assign(fr.kappa > 0 ? (d == 3 ? 1 : 0) : d - 1, std::vector<cplx>(N - 1, cplx(0)));
                }
                if (fr.kappa > 0) streams[m]->step(st.psi, w_old.p0, w_old.q0, w_new.p0, w_new.q0, rhs.stream);
                for (std::size_t c = 0; c < st.heat.size(); ++c)
                    heats[m]->step(st.heat[c], w_old.heat[c], w_new.heat[c], rhs.heat[c]);
            }
            const cplx gn_mean = fr.kappa == 0 && !fr.nyquist ? g_new[d - 1][m] : cplx(0);
            mode_velocity(st, w_new, fr, d, h, m, gn_mean, out);
        });
        u.set_slice(k, from_modal(g, out));
        if (forced) {
            if (nonlinear) {
                f_prev = std::move(f_cur);
                f_cur = force_at(k, u);
            } else {
                f_cur = std::move(f_next);
            }
        }
    }
    detail::require_finite(u.values(), "oracle");
    return u;
}

}  // namespace detail

/// Finite-difference Stokes reference on data.grid(): trapezoidal in time, forcing from F.
inline SpaceTimeField stokes_fd(const StokesData& data) { return detail::fd_solve(data, false); }

/// Finite-difference Navier-Stokes reference; the advective force is explicit (AB2) and CFL-checked.
inline SpaceTimeField ns_fd(const StokesData& data) { return detail::fd_solve(data, true); }

}  // namespace hstokes
