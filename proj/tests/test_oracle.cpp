// Reference solvers: 1-D half-line heat problem and the finite-difference box solvers.

#include <gtest/gtest.h>

#include <iostream>

#include "support.hpp"

using namespace hstokes;
using namespace hstokes::testing;

namespace {

/// Boundary-driven half-line heat solution for a(t) = t: after r = x / (2 sqrt(t - s)) the
/// Duhamel integral becomes (2/sqrt(pi)) int_{r0}^inf e^{-r^2} (t - x^2/(4 r^2)) dr.
double linear_ramp_quadrature(double x, double t) {
    if (x == 0) return t;
    const double r0 = x / (2 * std::sqrt(t));
    const int n = 4000;
    const double len = 8.0, h = len / n;
    double acc = 0;
    for (int i = 0; i <= n; ++i) {
        const double r = r0 + i * h;
        const double w = i == 0 || i == n ? 1 : (i % 2 ? 4 : 2);
        acc += w * std::exp(-r * r) * (t - x * x / (4 * r * r));
    }
    return 2 / std::sqrt(pi) * acc * h / 3;
}

double profile_gap(const Profile1D& coarse, const Profile1D& fine) {
    double m = 0;
    for (int k = 0; k < coarse.n_time; ++k)
        for (int j = 0; j < coarse.n_normal; ++j)
            m = std::max(m, std::abs(coarse.at(k, j) - fine.at(2 * k, 2 * j)));
    return m;
}

StokesData case_data(const std::string& name, const GridSpec& g, double amplitude = std::nan("")) {
    return sample_data(make_case(name, g.dim(), amplitude), g);
}

}  // namespace

TEST(Rayleigh1D, ZeroBoundaryValue) {
    const auto p = rayleigh_1d([](double) { return 0.0; }, 5, 33, 1, 17);
    EXPECT_EQ(linf(p.values), 0.0);
}

TEST(Rayleigh1D, RejectsBadInput) {
    EXPECT_THROW(rayleigh_1d([](double) { return 1.0; }, 5, 33, 1, 17), ValidationError);
    EXPECT_THROW(rayleigh_1d([](double t) { return t; }, 5, 2, 1, 17), ValidationError);
    EXPECT_THROW(rayleigh_1d([](double t) { return t; }, -1, 33, 1, 17), ValidationError);
}

TEST(Rayleigh1D, LinearRampMatchesDuhamelQuadrature) {
    const double H = 10, T = 1;
    const auto p = rayleigh_1d([](double t) { return t; }, H, 401, T, 201);
    double num = 0, den = 0;
    for (int k = 1; k < p.n_time; ++k) {
        const double t = p.t(k);
        for (int j = 0; j < p.n_normal && p.x(j) <= 2 * std::sqrt(t); ++j) {
            const double ref = linear_ramp_quadrature(p.x(j), t);
            num = std::max(num, std::abs(p.at(k, j) - ref));
            den = std::max(den, std::abs(ref));
        }
    }
    std::cout << "relative gap to quadrature: " << num / den << "\n";
    EXPECT_LT(num / den, 5e-3);
}

TEST(Rayleigh1D, SecondOrderSelfConvergence) {
    // ramp^2 has a'(0) = 0, so the data are compatible at the corner (x_n, t) = (0, 0).
    auto a = [](double t) { return ramp(t) * ramp(t); };
    const auto p1 = rayleigh_1d(a, 8, 41, 1, 21);
    const auto p2 = rayleigh_1d(a, 8, 81, 1, 41);
    const auto p3 = rayleigh_1d(a, 8, 161, 1, 81);
    const double order = std::log2(profile_gap(p1, p2) / profile_gap(p2, p3));
    std::cout << "observed order " << order << "\n";
    EXPECT_GE(order, 1.9);
}

TEST(StokesFd, ZeroData) {
    const GridSpec g = make_grid(2, 2 * pi, 6, 8, 33, 0.5, 17);
    EXPECT_EQ(linf(stokes_fd(case_data("zero", g)).values()), 0.0);
}

TEST(StokesFd, RayleighRampMatchesProfile) {
    const GridSpec g = make_grid(2, 2 * pi, 14, 4, 257, 0.5, 129);
    const auto u = stokes_fd(case_data("rayleigh-ramp", g));
    const auto prof = rayleigh_1d([](double t) { return ramp(t); }, 14, 513, 0.5, 257);
    const double err = relative_linf_profile(u, prof, 2, 2, 7.0);
    std::cout << "stokes_fd vs rayleigh_1d: " << err << "\n";
    EXPECT_LT(err, 0.01);
    double normal = 0;
    for (int k = 0; k < u.n_slices(); ++k)
        for (int j = 0; j < u.rows(); ++j)
            for (std::size_t s = 0; s < g.tangential_points(); ++s) normal = std::max(normal, std::abs(u.at(k, j, s, 1)));
    EXPECT_LT(normal, 1e-14);
}

TEST(StokesFd, DiscretelyDivergenceFree) {
    // Exact for the oracle's own stencil: spectral d_1 plus centered d_n on interior rows.
    const GridSpec g = make_grid(2, 2 * pi, 8, 16, 129, 0.5, 33);
    const auto u = stokes_fd(case_data("normal-mode", g));
    const double h = g.dx_normal();
    double div = 0;
    for (int k = 1; k < g.n_time(); ++k) {
        const Field slice = u.slice_field(k);
        const Field d1 = tangential_derivative(slice, 0);
        for (int j = 1; j + 1 < g.n_normal(); ++j)
            for (std::size_t s = 0; s < g.tangential_points(); ++s)
                div = std::max(div, std::abs(d1.at(j, s, 0) + (slice.at(j + 1, s, 1) - slice.at(j - 1, s, 1)) / (2 * h)));
    }
    EXPECT_LT(div / linf(u.values()), 1e-10);
}

TEST(NsFd, ZeroData) {
    const GridSpec g = make_grid(2, 2 * pi, 6, 8, 33, 0.25, 17);
    EXPECT_EQ(linf(ns_fd(case_data("zero", g)).values()), 0.0);
}

TEST(NsFd, ShearFlowHasNoAdvection) {
    // u = (u_1(x_n, t), 0) makes div(u (x) u) vanish identically.
    const GridSpec g = make_grid(2, 2 * pi, 10, 4, 65, 0.5, 33);
    const auto data = case_data("rayleigh-ramp", g, 0.5);
    EXPECT_LT(relative_diff(ns_fd(data).values(), stokes_fd(data).values()), 1e-12);
}

TEST(NsFd, DepartsFromStokesQuadraticallyInAmplitude) {
    const GridSpec g = make_grid(2, 2 * pi, 10, 16, 65, 0.25, 33);
    std::vector<double> amps{0.05, 0.1, 0.2}, gaps;
    for (double A : amps) {
        const auto data = case_data("small-ns", g, A);
        gaps.push_back(max_abs_diff(ns_fd(data).values(), stokes_fd(data).values()));
        std::cout << "A = " << A << ": |ns - stokes| = " << gaps.back() << "\n";
    }
    const double slope = loglog_slope(amps, gaps);
    EXPECT_NEAR(slope, 2.0, 0.1);
}

TEST(NsFd, CflViolationIsReported) {
    const GridSpec g = make_grid(2, 2 * pi, 10, 32, 65, 1.0, 5);
    EXPECT_THROW(ns_fd(case_data("large-ns", g, 50)), OracleError);
}

TEST(OracleGrid, RefinesNormalRowsAndTimeSlices) {
    const GridSpec g = make_grid(2, 2 * pi, 6, 8, 33, 0.5, 17);
    const GridSpec f = oracle_grid(g, {2, 3});
    EXPECT_EQ(f.n_normal(), 65);
    EXPECT_EQ(f.n_time(), 49);
    EXPECT_EQ(f.n_tangential(), 8);
    EXPECT_THROW(oracle_grid(g, {0, 1}), ValidationError);
    const auto u = stokes_fd(case_data("tangential-mode", f));
    const auto c = coarsen(u, g, {2, 3});
    EXPECT_EQ(c.at(16, 32, 3, 0), u.at(48, 64, 3, 0));
}
