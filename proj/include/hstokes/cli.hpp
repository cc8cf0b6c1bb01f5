#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "hstokes/analysis.hpp"
#include "hstokes/cases.hpp"
#include "hstokes/config.hpp"
#include "hstokes/error.hpp"
#include "hstokes/io.hpp"
#include "hstokes/navier_stokes.hpp"
#include "hstokes/oracle.hpp"
#include "hstokes/parallel.hpp"
#include "hstokes/stokes.hpp"

namespace hstokes {

/// max |a - b| / max |b| over half-grid rows with x_n <= xn_max.
inline double relative_linf(const SpaceTimeField& a, const SpaceTimeField& b, double xn_max) {
    if (!a.same_shape(b)) throw ValidationError("relative_linf: shape mismatch");
    double num = 0, den = 0;
    const GridSpec& g = a.grid();
    for (int k = 0; k < a.n_slices(); ++k)
        for (int j = 0; j < a.rows() && g.x_normal(j) <= xn_max + 1e-12; ++j)
            for (std::size_t s = 0; s < g.tangential_points(); ++s)
                for (int c = 0; c < a.components(); ++c) {
                    num = std::max(num, std::abs(a.at(k, j, s, c) - b.at(k, j, s, c)));
                    den = std::max(den, std::abs(b.at(k, j, s, c)));
                }
    return den > 0 ? num / den : num;
}

/// Relative sup error of the first velocity component against a 1-D profile on matching nodes.
inline double relative_linf_profile(const SpaceTimeField& u, const Profile1D& p, int space_stride,
                                    int time_stride, double xn_max) {
    double num = 0, den = 0;
    const GridSpec& g = u.grid();
    for (int k = 0; k < u.n_slices(); ++k)
        for (int j = 0; j < u.rows() && g.x_normal(j) <= xn_max + 1e-12; ++j) {
            const double ref = p.at(k * time_stride, j * space_stride);
            den = std::max(den, std::abs(ref));
            for (std::size_t s = 0; s < g.tangential_points(); ++s)
                num = std::max(num, std::abs(u.at(k, j, s, 0) - ref));
        }
    return den > 0 ? num / den : num;
}

namespace cli {

enum ExitCode { success = 0, validation_failure = 2, contraction_failure = 3, check_failure = 4 };

/// Everything a pipeline needs, assembled from a RunConfig.
struct Setup {
    RunConfig cfg;
    GridSpec grid;
    Problem problem;
    StokesData data;
    bool from_files = false;
};

inline Setup prepare(const RunConfig& cfg) {
    Setup s;
    s.cfg = cfg;
    s.problem = make_case(cfg.case_name, cfg.dim, cfg.amplitude);
    const double T = std::isnan(cfg.T) ? s.problem.default_t : cfg.T;
    s.grid = make_grid(cfg.dim, cfg.L, cfg.H, cfg.n_tangential, cfg.n_normal, T, cfg.n_time);
    s.data = sample_data(s.problem, s.grid, cfg.alpha);
    auto same = [&](const GridSpec& g, const std::string& what) {
        if (!(g == s.grid)) throw ValidationError("data file " + what + " was written for a different grid");
    };
    if (!cfg.h_file.empty()) {
        s.data.h = io::read_slice(cfg.h_file);
        same(s.data.h.grid(), cfg.h_file);
        s.from_files = true;
    }
    if (!cfg.g_file.empty()) {
        s.data.g = io::read_boundary(cfg.g_file);
        same(s.data.g.grid(), cfg.g_file);
        s.from_files = true;
    }
    if (!cfg.F_file.empty()) {
        s.data.F = io::read_space_time(cfg.F_file);
        same(s.data.F.grid(), cfg.F_file);
        s.from_files = true;
    }
    if (!(cfg.alpha > 0 && cfg.alpha < 1)) throw ValidationError("config: alpha must lie in (0,1)");
    return s;
}

inline IterationConfig iteration_config(const RunConfig& c) {
    IterationConfig it;
    it.m_max = c.m_max;
    it.contraction_threshold = c.theta;
    it.stop_tol = c.stop_tol;
    it.t_shrink = c.t_shrink;
    it.alpha = c.alpha;
    it.max_halvings = c.max_halvings;
    it.norms.random_pairs = std::size_t(c.norm_pairs);
    it.norms.seed = c.seed;
    return it;
}

inline bool wants_navier_stokes(const Setup& s) {
    if (s.cfg.kind == "navier-stokes") return true;
    if (s.cfg.kind == "stokes") return false;
    return s.problem.navier_stokes;
}

inline int finish(const std::filesystem::path& out, const std::vector<io::SummaryRow>& rows, std::ostream& log,
                  int fail_code = check_failure) {
    io::write_summary(out / "summary.csv", rows);
    bool ok = true;
    for (const auto& r : rows) {
        log << "  " << r.name << " = " << r.value;
        if (r.comparison != "info") log << "  (" << r.comparison << " " << r.threshold << ") " << (r.pass ? "ok" : "FAIL");
        log << "\n";
        ok = ok && r.pass;
    }
    log << "summary: " << (out / "summary.csv").string() << "\n";
    return ok ? success : fail_code;
}

inline void stokes_rows(const StokesSolution& sol, const StokesData& data, std::vector<io::SummaryRow>& rows) {
    const double hs = std::max(1.0, linf(data.h.values()));
    const double gs = std::max(1.0, linf(data.g.values()));
    rows.push_back(io::check_le("initial_trace_error_rel", sol.diagnostics.initial_err / hs, 1e-8));
    rows.push_back(io::check_le("wall_trace_error_rel", sol.diagnostics.boundary_err / gs, 1e-10));
    rows.push_back(io::info("first_row_trace_gap_rel", sol.diagnostics.boundary_err_row1 / gs));
    rows.push_back(io::check_le("divergence_rel", sol.diagnostics.divergence_relative, 1e-3));
}

inline int run_stokes(const Setup& s, std::ostream& log) {
    const std::filesystem::path out = s.cfg.out;
    StokesSolver solver(s.grid);
    const StokesSolution sol = solver.solve(s.data);
    io::write_field(out / "u", sol.u, "u");
    io::write_field(out / "v", sol.v, "v");
    io::write_field(out / "V", sol.V, "V");
    io::write_field(out / "grad_phi", sol.grad_phi, "grad_phi");
    io::write_field(out / "w", sol.w, "w");
    io::write_field(out / "G", sol.G, "G");
    std::vector<io::SummaryRow> rows;
    stokes_rows(sol, s.data, rows);
    SeminormOptions opt;
    opt.seed = s.cfg.seed;
    const auto un = anisotropic_seminorm(sol.u, s.cfg.alpha, opt);
    const double m0 = data_norm(s.data, opt, s.cfg.alpha);
    rows.push_back(io::info("u_linf", un.linf));
    rows.push_back(io::info("u_space_seminorm", un.space_seminorm));
    rows.push_back(io::info("u_time_seminorm", un.time_seminorm));
    rows.push_back(io::info("data_norm_M0", m0));
    rows.push_back(io::info("solution_to_data_norm_ratio", m0 > 0 ? un.norm() / m0 : 0.0));
    log << "stokes solve on " << s.grid.n_normal() << " x " << s.grid.n_time() << " (x_n x t)\n";
    return finish(out, rows, log);
}

inline int run_navier_stokes(const Setup& s, std::ostream& log) {
    const std::filesystem::path out = s.cfg.out;
    const IterationConfig it = iteration_config(s.cfg);
    std::vector<HorizonAttempt> attempts;
    auto write_attempts = [&] {
        std::filesystem::create_directories(out);
        std::ofstream os(out / "attempts.csv", std::ios::trunc);
        os << "T,n_time,iterations,outcome\n";
        for (const auto& a : attempts)
            os << io::format_double(a.T) << ',' << a.n_time << ',' << a.iterations << ",\"" << a.outcome << "\"\n";
    };
    AutoResult res;
    try {
        res = auto_timestep(s.data, it, &attempts);
    } catch (...) {
        write_attempts();
        throw;
    }
    write_attempts();
    io::write_field(out / "u", res.u, "u");
    io::write_trace(out / "trace", res.trace);
    std::vector<io::SummaryRow> rows;
    rows.push_back(io::info("T_star", res.T_star));
    rows.push_back(io::info("attempts", double(res.attempts.size())));
    rows.push_back(io::info("iterations", double(res.trace.records.size())));
    rows.push_back(io::check_ge("converged", res.trace.converged ? 1.0 : 0.0, 1.0));
    double max_ratio = 0;
    for (const auto& r : res.trace.records)
        if (r.m >= 2) max_ratio = std::max(max_ratio, r.ratio);
    rows.push_back(io::check_le("max_contraction_ratio", max_ratio, it.contraction_threshold));
    rows.push_back(io::info("M0", res.trace.M0));
    rows.push_back(io::info("M", res.trace.M));
    const auto dv = divergence_report(res.u);
    rows.push_back(io::check_le("divergence_rel", dv.relative(), 1e-3));
    log << "navier-stokes: T* = " << res.T_star << " after " << res.attempts.size() << " attempt(s)\n";
    return finish(out, rows, log);
}

inline int run_verify(const Setup& s, std::ostream& log) {
    const std::filesystem::path out = s.cfg.out;
    std::vector<io::SummaryRow> rows;
    const double gs = std::max(1.0, linf(s.data.g.values()));
    const auto rep = check_compatibility(s.data.h, s.data.g, 1e-8 * gs);
    rows.push_back(io::check_le("compat_trace_mismatch", rep.trace_mismatch, 1e-8 * gs));
    rows.push_back(io::check_le("compat_normal_trace", rep.normal_trace_sup, 1e-8 * gs));
    rows.push_back(io::check_le("compat_flux_mean", rep.flux_mean_sup, 1e-8 * gs));
    rows.push_back(io::info("compat_divergence_sup", rep.divergence_sup));
    const auto family = make_test_family(s.grid, s.cfg.test_fields, s.cfg.seed);
    SpaceTimeField u;
    if (wants_navier_stokes(s)) {
        const auto res = picard_solve(s.data, s.grid, iteration_config(s.cfg));
        u = res.u;
        rows.push_back(io::check_ge("picard_converged", res.trace.converged ? 1.0 : 0.0, 1.0));
        rows.push_back(io::info("weak_residual_ns", weak_residual_ns(u, family)));
        const auto tr = trace_error(u, s.data.h, s.data.g);
        rows.push_back(io::check_le("initial_trace_error_rel", tr.initial_err / std::max(1.0, linf(s.data.h.values())), 1e-8));
        rows.push_back(io::check_le("divergence_rel", divergence_report(u).relative(), 1e-3));
    } else {
        StokesSolver solver(s.grid);
        const auto sol = solver.solve(s.data);
        u = sol.u;
        stokes_rows(sol, s.data, rows);
        rows.push_back(io::info("weak_residual_stokes",
                                weak_residual_stokes(u, s.data.has_force() ? &s.data.F : nullptr, family)));
        StokesSolver again(s.grid);
        const auto sol2 = again.solve(s.data);
        const bool same = std::equal(sol.u.values().begin(), sol.u.values().end(), sol2.u.values().begin());
        rows.push_back(io::check_ge("repeat_solve_bit_identical", same ? 1.0 : 0.0, 1.0));
    }
    io::write_field(out / "u", u, "u");
    return finish(out, rows, log);
}

inline int run_norms(const Setup& s, std::ostream& log) {
    const std::filesystem::path out = s.cfg.out;
    SpaceTimeField f;
    if (!s.cfg.norms_field.empty()) {
        f = io::read_space_time(s.cfg.norms_field);
    } else {
        StokesSolver solver(s.grid);
        f = solver.solve(s.data).u;
    }
    SeminormOptions opt;
    opt.seed = s.cfg.seed;
    opt.random_pairs = std::size_t(s.cfg.norms_pairs);
    if (s.cfg.norms_mode == "exact") opt.mode = SeminormMode::exact;
    else if (s.cfg.norms_mode != "sampled") throw ValidationError("config: norms.mode must be exact or sampled");
    const auto r = anisotropic_seminorm(f, s.cfg.alpha, opt);
    std::vector<io::SummaryRow> rows{io::info("linf", r.linf),
                                     io::info("space_seminorm", r.space_seminorm),
                                     io::info("time_seminorm", r.time_seminorm),
                                     io::info("alpha", r.alpha),
                                     io::info("confidence_margin", r.confidence_margin),
                                     io::info("pairs_evaluated", double(r.pairs_evaluated))};
    log << "pair policy: " << r.pair_budget << "\n";
    return finish(out, rows, log);
}

inline int run_oracle_compare(const Setup& s, std::ostream& log) {
    const std::filesystem::path out = s.cfg.out;
    OracleConfig oc{s.cfg.space_refine, s.cfg.time_refine};
    if (s.from_files && (oc.space_refine != 1 || oc.time_refine != 1)) {
        log << "data read from files: oracle resolution multipliers forced to 1\n";
        oc = {1, 1};
    }
    const double xn_max = s.grid.height_h() / 2;
    std::vector<io::SummaryRow> rows;
    if (s.problem.name == "rayleigh-ramp" && !s.from_files) {
        StokesSolver solver(s.grid);
        const auto sol = solver.solve(s.data);
        const double A = s.problem.amplitude;
        const auto prof = rayleigh_1d([A](double t) { return A * ramp(t); }, s.grid.height_h(),
                                      (s.grid.n_normal() - 1) * oc.space_refine + 1, s.grid.t_final(),
                                      (s.grid.n_time() - 1) * oc.time_refine + 1);
        rows.push_back(io::check_le("rayleigh_rel_linf",
                                    relative_linf_profile(sol.u, prof, oc.space_refine, oc.time_refine, xn_max), 0.02));
        io::write_field(out / "u", sol.u, "u");
        return finish(out, rows, log);
    }
    const GridSpec fine = oracle_grid(s.grid, oc);
    const StokesData fdata = s.from_files ? s.data : sample_data(s.problem, fine, s.cfg.alpha);
    SpaceTimeField u, ref;
    if (wants_navier_stokes(s)) {
        u = picard_solve(s.data, s.grid, iteration_config(s.cfg)).u;
        ref = coarsen(ns_fd(fdata), s.grid, oc);
        rows.push_back(io::check_le("ns_oracle_rel_linf", relative_linf(u, ref, xn_max), s.cfg.oracle_tol));
    } else {
        StokesSolver solver(s.grid);
        u = solver.solve(s.data).u;
        ref = coarsen(stokes_fd(fdata), s.grid, oc);
        rows.push_back(io::check_le("stokes_oracle_rel_linf", relative_linf(u, ref, xn_max), s.cfg.oracle_tol));
    }
    io::write_field(out / "u", u, "u");
    io::write_field(out / "oracle", ref, "oracle");
    return finish(out, rows, log);
}

inline int run_demo(Setup s, std::ostream& log) {
    if (s.problem.name != "rayleigh-ramp") {
        s.problem = make_case("rayleigh-ramp", s.grid.dim(), s.cfg.amplitude);
        s.data = sample_data(s.problem, s.grid, s.cfg.alpha);
        s.from_files = false;
    }
    const std::filesystem::path out = s.cfg.out;
    StokesSolver solver(s.grid);
    const auto sol = solver.solve(s.data);
    std::vector<io::SummaryRow> rows;
    stokes_rows(sol, s.data, rows);
    const double A = s.problem.amplitude;
    const OracleConfig oc{s.cfg.space_refine, s.cfg.time_refine};
    const auto prof = rayleigh_1d([A](double t) { return A * ramp(t); }, s.grid.height_h(),
                                  (s.grid.n_normal() - 1) * oc.space_refine + 1, s.grid.t_final(),
                                  (s.grid.n_time() - 1) * oc.time_refine + 1);
    rows.push_back(io::check_le("rayleigh_rel_linf",
                                relative_linf_profile(sol.u, prof, oc.space_refine, oc.time_refine,
                                                      s.grid.height_h() / 2),
                                0.02));
    io::write_field(out / "u", sol.u, "u");
    return finish(out, rows, log);
}

/// Executes one command ("solve", "verify", "norms", "oracle-compare", "demo") and maps errors to exit codes.
inline int run(const std::string& command, const RunConfig& cfg, std::ostream& log = std::cout,
               std::ostream& err = std::cerr) {
    try {
        set_threads(cfg.threads);
        const Setup s = prepare(cfg);
        std::string what = command;
        if (command == "solve" && !cfg.kind.empty() && cfg.kind != "stokes" && cfg.kind != "navier-stokes")
            what = cfg.kind == "demo-rayleigh" ? "demo" : cfg.kind;
        if (what == "solve") return wants_navier_stokes(s) ? run_navier_stokes(s, log) : run_stokes(s, log);
        if (what == "verify") return run_verify(s, log);
        if (what == "norms") return run_norms(s, log);
        if (what == "oracle-compare") return run_oracle_compare(s, log);
        if (what == "demo") return run_demo(s, log);
        throw ValidationError("unknown command or kind '" + what + "'");
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return validation_failure;
    } catch (const NonContraction& e) {
        err << "non-contraction: " << e.what() << "\n";
        return contraction_failure;
    } catch (const HorizonUnderflow& e) {
        err << "horizon underflow: " << e.what() << "\n";
        return contraction_failure;
    }
}

}  // namespace cli
}  // namespace hstokes
