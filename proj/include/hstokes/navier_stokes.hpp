#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hstokes/analysis.hpp"
#include "hstokes/error.hpp"
#include "hstokes/stokes.hpp"

namespace hstokes {

struct IterationConfig {
    int m_max = 30;
    double contraction_threshold = 0.9;
    double stop_tol = 1e-6;
    double t_shrink = 0.5;
    double alpha = 0.5;
    int max_halvings = 6;
    /// Seminorm sampling used for every norm in the trace.
    SeminormOptions norms{SeminormMode::sampled, 200'000, 20240917, 100'000};

    void validate() const {
        if (m_max < 1) throw ValidationError("iteration: m_max must be >= 1");
        if (!(contraction_threshold > 0 && contraction_threshold < 1))
            throw ValidationError("iteration: contraction_threshold must lie in (0,1)");
        if (!(stop_tol > 0)) throw ValidationError("iteration: stop_tol must be positive");
        if (t_shrink != 0.5) throw ValidationError("iteration: only t_shrink = 0.5 is supported");
        if (!(alpha > 0 && alpha < 1)) throw ValidationError("iteration: alpha must lie in (0,1)");
        if (max_halvings < 0) throw ValidationError("iteration: max_halvings must be >= 0");
    }
};

/// One Picard step: U^m = u^{m+1} - u^m; ratio = |U^m| / |U^{m-1}| from m = 2 on.
struct IterationRecord {
    int m = 0;
    HoelderReport u_next;  ///< norm report of u^{m+1}
    HoelderReport U;       ///< norm report of U^m
    double ratio = std::numeric_limits<double>::quiet_NaN();
};

struct IterationTrace {
    std::vector<IterationRecord> records;
    double M0 = 0;  ///< |h| + |g| (+ |F|)
    double M = 0;   ///< max over m of |u^m|
    double T_star = 0;
    bool converged = false;
    bool monotone = true;  ///< |U^m| nonincreasing from m = 2 on
    std::string stop_reason;
};

/// F^m = -u^m (x) u^m (plus the data force, if any).
inline SpaceTimeField nonlinear_force(const SpaceTimeField& u, const StokesData& data) {
    SpaceTimeField F = outer(u);
    F *= -1.0;
    if (data.has_force()) F += data.F;
    return F;
}

/// u^{m+1} = Stokes solve with force potential -u^m (x) u^m. A zero iterate reproduces the linear solve.
inline SpaceTimeField picard_step(const SpaceTimeField& u_m, const StokesData& data, StokesSolver& solver,
                                  const SolveOptions& opt = {.diagnostics = false}) {
    if (linf(u_m.values()) == 0) return solver.solve(data, opt).u;
    StokesData next = data;
    next.F = nonlinear_force(u_m, data);
    return solver.solve(next, opt).u;
}

inline SpaceTimeField picard_step(const SpaceTimeField& u_m, const StokesData& data) {
    StokesSolver solver(data.grid());
    return picard_step(u_m, data, solver);
}

/// |h| + |g| (+ |F|) in the norm used by the iteration.
inline double data_norm(const StokesData& data, const SeminormOptions& opt, double alpha) {
    double m0 = anisotropic_seminorm(data.h, alpha, opt).norm() + anisotropic_seminorm(data.g, alpha, opt).norm();
    if (data.has_force()) m0 += anisotropic_seminorm(data.F, alpha, opt).norm();
    return m0;
}

struct PicardResult {
    SpaceTimeField u;
    IterationTrace trace;
};

/**
 * Picard iteration u^{m+1} = S(h, g, -u^m (x) u^m) from u^1 = S(h, g, F).
 * Stops when |U^m| <= stop_tol |u^{m+1}| or at m_max. Throws NonContraction
 * when two consecutive ratios exceed the threshold, or when the iterates
 * stop being finite; `partial`, when given, then receives the trace so far.
 */
inline PicardResult picard_solve(const StokesData& data, StokesSolver& solver, const IterationConfig& cfg,
                                 IterationTrace* partial = nullptr) {
    cfg.validate();
    const double alpha = cfg.alpha;
    PicardResult res;
    IterationTrace& tr = res.trace;
    auto fail = [&](const std::string& msg) {
        if (partial) *partial = tr;
        throw NonContraction(msg);
    };
    tr.M0 = data_norm(data, cfg.norms, alpha);
    tr.T_star = solver.grid().t_final();

    SpaceTimeField u = picard_step(SpaceTimeField(solver.grid(), Extent::half, solver.grid().dim()), data, solver);
    tr.M = anisotropic_seminorm(u, alpha, cfg.norms).norm();
    int above = 0;
    for (int m = 1; m <= cfg.m_max; ++m) {
        SpaceTimeField next = picard_step(u, data, solver);
        SpaceTimeField U = next;
        U -= u;
        IterationRecord rec;
        rec.m = m;
        rec.u_next = anisotropic_seminorm(next, alpha, cfg.norms);
        rec.U = anisotropic_seminorm(U, alpha, cfg.norms);
        if (!std::isfinite(rec.u_next.norm()) || !std::isfinite(rec.U.norm())) {
            tr.records.push_back(rec);
            tr.stop_reason = "non-finite iterate";
            fail("picard: iterate became non-finite at m = " + std::to_string(m));
        }
        if (m >= 2) {
            const double prev = tr.records.back().U.norm();
            rec.ratio = prev > 0 ? rec.U.norm() / prev : 0.0;
            if (rec.U.norm() > prev) tr.monotone = false;
            above = rec.ratio > cfg.contraction_threshold ? above + 1 : 0;
        }
        tr.records.push_back(rec);
        tr.M = std::max(tr.M, rec.u_next.norm());
        u = std::move(next);
        const double un = rec.u_next.norm();
        if (rec.U.norm() <= cfg.stop_tol * un || un == 0) {
            tr.converged = true;
            tr.stop_reason = "increment below stop_tol";
            break;
        }
        if (above >= 2) {
            tr.stop_reason = "ratio above threshold twice";
            fail("picard: contraction ratio " + std::to_string(rec.ratio) + " > " +
                 std::to_string(cfg.contraction_threshold) + " at m = " + std::to_string(m));
        }
    }
    if (!tr.converged) tr.stop_reason = "m_max reached";
    res.u = std::move(u);
    return res;
}

inline PicardResult picard_solve(const StokesData& data, const GridSpec& grid, const IterationConfig& cfg) {
    StokesSolver solver(grid);
    return picard_solve(data, solver, cfg);
}

/// Restriction of data to the first n_time slices of its grid (same dt).
inline StokesData truncate_horizon(const StokesData& data, int n_time) {
    const GridSpec& g = data.grid();
    if (n_time < 2 || n_time > g.n_time()) throw ValidationError("truncate_horizon: bad slice count");
    const GridSpec gs = g.with_time(g.dt() * (n_time - 1), n_time);
    StokesData out;
    out.alpha = data.alpha;
    out.h = Field(gs, Extent::half, data.h.components());
    std::ranges::copy(data.h.values(), out.h.values().begin());
    out.g = BoundaryField(gs, data.g.components());
    std::copy_n(data.g.values().begin(), out.g.values().size(), out.g.values().begin());
    if (data.has_force()) {
        out.F = SpaceTimeField(gs, Extent::half, data.F.components());
        std::copy_n(data.F.values().begin(), out.F.values().size(), out.F.values().begin());
    }
    return out;
}

struct HorizonAttempt {
    double T = 0;
    int n_time = 0;
    std::string outcome;
    int iterations = 0;
};

struct AutoResult {
    double T_star = 0;
    SpaceTimeField u;
    IterationTrace trace;
    std::vector<HorizonAttempt> attempts;
};

/**
 * Runs picard_solve and, on NonContraction or when m_max passes without
 * reaching stop_tol, halves the horizon (keeping dt) and retries. Throws HorizonUnderflow when the horizon would drop below
 * 4 dt, cannot be halved on the grid, or the retry cap is exhausted.
 */
inline AutoResult auto_timestep(const StokesData& data, const IterationConfig& cfg,
                                std::vector<HorizonAttempt>* log = nullptr) {
    cfg.validate();
    AutoResult res;
    StokesData current = data;
    for (int attempt = 0;; ++attempt) {
        const GridSpec& g = current.grid();
        StokesSolver solver(g);
        HorizonAttempt rec{g.t_final(), g.n_time(), "", 0};
        IterationTrace partial;
        try {
            auto out = picard_solve(current, solver, cfg, &partial);
            rec.iterations = int(out.trace.records.size());
            if (!out.trace.converged) {
                rec.outcome = "non-contraction: m_max reached before stop_tol";
                res.attempts.push_back(rec);
                if (log) *log = res.attempts;
                throw NonContraction(rec.outcome);
            }
            rec.outcome = "converged";
            res.attempts.push_back(rec);
            res.T_star = g.t_final();
            res.u = std::move(out.u);
            res.trace = std::move(out.trace);
            res.trace.T_star = res.T_star;
            if (log) *log = res.attempts;
            return res;
        } catch (const NonContraction& e) {
            if (res.attempts.size() == std::size_t(attempt)) {
                rec.iterations = int(partial.records.size());
                rec.outcome = std::string("non-contraction: ") + e.what();
                res.attempts.push_back(rec);
                if (log) *log = res.attempts;
            }
        }
        const int n_half = (g.n_time() - 1) / 2 + 1;
        const double T_half = g.dt() * (n_half - 1);
        if (attempt + 1 > cfg.max_halvings)
            throw HorizonUnderflow("auto_timestep: no contraction after " + std::to_string(attempt + 1) +
                                   " attempts (retry cap reached at T = " + std::to_string(g.t_final()) + ")");
        if ((g.n_time() - 1) % 2 != 0)
            throw HorizonUnderflow("auto_timestep: cannot halve a horizon of " +
                                   std::to_string(g.n_time() - 1) + " steps");
        if (T_half < 4 * g.dt() * (1 - 1e-12))
            throw HorizonUnderflow("auto_timestep: horizon " + std::to_string(T_half) + " is below 4 dt");
        current = truncate_horizon(current, n_half);
    }
}

}  // namespace hstokes
