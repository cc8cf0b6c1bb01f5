// Assembly of u = v + V + grad(phi) + w.

#include <gtest/gtest.h>

#include <iostream>

#include "support.hpp"

using namespace hstokes;
using namespace hstokes::testing;

namespace {

StokesData case_data(const std::string& name, const GridSpec& g) { return sample_data(make_case(name, g.dim()), g); }

}  // namespace

TEST(GradPhi, ZeroData) {
    const GridSpec g = make_grid(2, 2 * pi, 4, 8, 9, 0.5, 5);
    const auto out = grad_phi(BoundaryField(g, 1));
    EXPECT_EQ(out.components(), 2);
    EXPECT_EQ(linf(out.values()), 0.0);
}

TEST(GradPhi, SingleModeIdentity) {
    const GridSpec g = make_grid(2, 2 * pi, 6, 16, 25, 0.5, 9);
    const auto dn = sample_boundary(g, 1, [](const Point& x, double t, std::span<double> o) {
        o[0] = std::sin(x[0]) * ramp(t);
    });
    const auto out = grad_phi(dn);
    double err = 0;
    for (int k = 0; k < g.n_time(); ++k)
        for (int j = 0; j < g.n_normal(); ++j)
            for (std::size_t s = 0; s < g.tangential_points(); ++s) {
                const double x1 = g.x_tangential(s, 0), e = std::exp(-g.x_normal(j)) * ramp(g.time(k));
                err = std::max({err, std::abs(out.at(k, j, s, 1) - e * std::sin(x1)),
                                std::abs(out.at(k, j, s, 0) + e * std::cos(x1))});
            }
    EXPECT_LT(err, 1e-14);
}

TEST(GradPhi, IsAGradientModeByMode) {
    // Tangential part = R'(normal part) on every row, and the normal part is the
    // Poisson extension of its trace, so d_n(tangential) = d_1(normal) per mode.
    const GridSpec g = make_grid(3, 2 * pi, 6, 8, 25, 0.5, 5);
    const auto dn = sample_boundary(g, 1, [](const Point& x, double t, std::span<double> o) {
        o[0] = t * (std::sin(x[0] + 2 * x[1]) + 0.3 * std::cos(3 * x[1]) - 0.2 * std::sin(x[0]));
    });
    const auto out = grad_phi(dn);
    double err = 0;
    const double scale = linf(out.values());
    for (int k = 1; k < g.n_time(); ++k) {
        const Field slice = out.slice_field(k);
        std::vector<double> wall(g.tangential_points());
        for (std::size_t s = 0; s < wall.size(); ++s) wall[s] = dn.at(k, s, 0);
        const Field ext = harmonic_extension(g, wall);
        for (int j = 0; j < g.n_normal(); ++j) {
            BoundaryField normal_row(g.with_time(1, 2), 1);
            for (std::size_t s = 0; s < wall.size(); ++s) {
                normal_row.at(0, s, 0) = normal_row.at(1, s, 0) = slice.at(j, s, 2);
                err = std::max(err, std::abs(slice.at(j, s, 2) - ext.at(j, s, 0)));
            }
            for (int a = 0; a < 2; ++a) {
                const auto r = riesz_tangential(normal_row, a);
                for (std::size_t s = 0; s < wall.size(); ++s)
                    err = std::max(err, std::abs(slice.at(j, s, a) - r.at(0, s, 0)));
            }
        }
    }
    EXPECT_LT(err, 1e-10 * scale);
}

TEST(GradPhi, RequiresZeroInitialData) {
    const GridSpec g = make_grid(2, 2 * pi, 4, 8, 9, 0.5, 5);
    BoundaryField dn(g, 1);
    dn.at(0, 2, 0) = 0.1;
    EXPECT_THROW(grad_phi(dn), ValidationError);
}

TEST(BuildG, Examples) {
    const GridSpec g = make_grid(2, 2 * pi, 4, 16, 9, 0.5, 5);
    const SpaceTimeField zero(g, Extent::half, 2);
    EXPECT_EQ(linf(build_G(BoundaryField(g, 2), zero, zero).values()), 0.0);

    const auto gt = sample_boundary(g, 2, [](const Point& x, double t, std::span<double> o) {
        o[0] = ramp(t) * std::sin(x[0]);
    });
    const auto G1 = build_G(gt, zero, zero);
    EXPECT_TRUE(std::ranges::equal(G1.values(), gt.values()));

    const auto gn = sample_boundary(g, 2, [](const Point& x, double t, std::span<double> o) {
        o[1] = ramp(t) * std::sin(x[0]);
    });
    const auto G2 = build_G(gn, zero, zero);
    double err = 0;
    for (int k = 0; k < g.n_time(); ++k)
        for (std::size_t s = 0; s < g.tangential_points(); ++s) {
            err = std::max(err, std::abs(G2.at(k, s, 0) - std::cos(g.x_tangential(s, 0)) * ramp(g.time(k))));
            EXPECT_EQ(G2.at(k, s, 1), 0.0);
        }
    EXPECT_LT(err, 1e-14);
}

TEST(SolveStokes, ZeroDataGivesZero) {
    const GridSpec g = make_grid(2, 2 * pi, 8, 8, 17, 0.5, 9);
    const auto sol = solve_stokes(case_data("zero", g), g);
    EXPECT_EQ(linf(sol.u.values()), 0.0);
    EXPECT_EQ(sol.diagnostics.initial_err, 0.0);
    EXPECT_EQ(sol.diagnostics.boundary_err, 0.0);
    EXPECT_EQ(sol.diagnostics.divergence_sup, 0.0);
}

TEST(SolveStokes, RayleighRampMatchesOneDimensionalOracle) {
    const GridSpec g = make_grid(2, 2 * pi, 14, 8, 257, 0.5, 257);
    const auto data = case_data("rayleigh-ramp", g);
    const auto sol = solve_stokes(data, g);
    const Profile1D ref = rayleigh_1d([](double t) { return ramp(t); }, 14, 513, 0.5, 513);
    EXPECT_LT(relative_linf_profile(sol.u, ref, 2, 2, 7.0), 0.02);
    double normal = 0;
    for (int k = 0; k < g.n_time(); ++k)
        for (int j = 0; j < g.n_normal(); ++j)
            for (std::size_t s = 0; s < g.tangential_points(); ++s)
                normal = std::max(normal, std::abs(sol.u.at(k, j, s, 1)));
    EXPECT_LT(normal, 1e-14);
    EXPECT_LT(sol.diagnostics.divergence_sup, 1e-12);
}

TEST(SolveStokes, NormalModeMatchesFiniteDifferenceOracle) {
    const GridSpec g = make_grid(2, 2 * pi, 14, 16, 65, 0.5, 33);
    const auto data = case_data("normal-mode", g);
    const auto sol = solve_stokes(data, g);
    const OracleConfig oc{2, 2};
    const auto ref = coarsen(stokes_fd(sample_data(make_case("normal-mode", 2), oracle_grid(g, oc))), g, oc);
    EXPECT_LT(relative_linf(sol.u, ref, 7.0), 0.05);
}

TEST(SolveStokes, PartsResumExactly) {
    const GridSpec g = make_grid(2, 2 * pi, 10, 16, 81, 0.5, 17);
    const auto sol = solve_stokes(case_data("mixed", g), g);
    for (std::size_t i = 0; i < sol.u.values().size(); ++i) {
        const double sum = sol.v.values()[i] + sol.V.values()[i] + sol.grad_phi.values()[i] + sol.w.values()[i];
        ASSERT_EQ(sol.u.values()[i], sum);
    }
    EXPECT_GT(linf(sol.V.values()), 0.0);
    EXPECT_GT(linf(sol.grad_phi.values()), 0.0);
}

TEST(SolveStokes, InitialTraceReproducesH) {
    const GridSpec g = make_grid(2, 2 * pi, 10, 16, 81, 0.5, 17);
    const auto data = case_data("mixed", g);
    const auto sol = solve_stokes(data, g);
    EXPECT_LE(sol.diagnostics.initial_err, 1e-8 * linf(data.h.values()));
    EXPECT_LE(sol.diagnostics.boundary_err, 1e-10);
}

TEST(SolveStokes, SuperpositionOfData) {
    const GridSpec g = make_grid(2, 2 * pi, 10, 16, 81, 0.5, 17);
    const auto a = case_data("mixed", g), b = case_data("normal-mode", g);
    StokesData sum = a;
    for (std::size_t i = 0; i < sum.g.values().size(); ++i) sum.g.values()[i] += b.g.values()[i];
    StokesSolver solver(g);
    const auto ua = solver.solve(a).u, ub = solver.solve(b).u, us = solver.solve(sum).u;
    const auto lin = ua + ub;
    EXPECT_LT(relative_diff(us.values(), lin.values()), 1e-12);
}

TEST(SolveStokes, WallTraceConvergesWithOrderAlpha) {
    std::vector<double> gaps;
    for (int nn : {65, 129, 257}) {
        const GridSpec g = make_grid(2, 2 * pi, 8, 16, nn, 0.5, 33);
        const auto data = case_data("tangential-mode", g);
        const auto sol = solve_stokes(data, g);
        gaps.push_back(sol.diagnostics.boundary_err_row1);
    }
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        const double order = std::log2(gaps[i - 1] / gaps[i]);
        std::cout << "first-row trace gap " << gaps[i - 1] << " -> " << gaps[i] << " order " << order << "\n";
        EXPECT_GE(order, 0.5);
    }
}

TEST(SolveStokes, EstimateRatioStableUnderRefinement) {
    // |u| / (|h| + |g| + |F|) on the mixed case at two resolutions; logged and required within 2x.
    const SeminormOptions opt{SeminormMode::sampled, 20'000, 7};
    std::vector<double> ratio;
    for (auto [n, nn, nt] : {std::tuple{16, 65, 17}, std::tuple{32, 129, 33}}) {
        const GridSpec g = make_grid(2, 2 * pi, 10, n, nn, 0.5, nt);
        const auto data = case_data("mixed", g);
        const auto sol = solve_stokes(data, g);
        ratio.push_back(anisotropic_seminorm(sol.u, 0.5, opt).norm() / data_norm(data, opt, 0.5));
    }
    std::cout << "norm ratio " << ratio[0] << " -> " << ratio[1] << "\n";
    EXPECT_LT(std::max(ratio[0], ratio[1]) / std::min(ratio[0], ratio[1]), 2.0);
}

TEST(SolveStokes, RejectsNetWallFlux) {
    const GridSpec g = make_grid(2, 2 * pi, 8, 8, 17, 0.5, 9);
    auto data = case_data("normal-mode", g);
    for (int k = 0; k < g.n_time(); ++k)
        for (std::size_t s = 0; s < g.tangential_points(); ++s) data.g.at(k, s, 1) += 0.2 * g.time(k);
    try {
        solve_stokes(data, g);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("zero tangential mean of g_n"), std::string::npos);
    }
}

TEST(SolveStokes, RejectsBadAlphaAndMismatchedTrace) {
    const GridSpec g = make_grid(2, 2 * pi, 8, 8, 17, 0.5, 9);
    auto data = case_data("tangential-mode", g);
    data.alpha = 1.0;
    EXPECT_THROW(solve_stokes(data, g), ValidationError);
    data.alpha = 0.5;
    data.g.at(0, 1, 0) = 0.5;
    EXPECT_THROW(solve_stokes(data, g), ValidationError);
}
