// Fourier multipliers on the doubled torus and on the wall.

#include <gtest/gtest.h>

#include <iostream>
#include <random>

#include "support.hpp"

using namespace hstokes;
using namespace hstokes::testing;

namespace {

GridSpec grid2(int n = 16, int nn = 17, double H = pi) { return make_grid(2, 2 * pi, H, n, nn, 1, 2); }
GridSpec grid3(int n = 8, int nn = 9, double H = pi) { return make_grid(3, 2 * pi, H, n, nn, 1, 2); }

/// Random real field built from a few low modes, so every multiplier acts on resolved data.
Field band_limited(const GridSpec& g, int comps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    struct W {
        int k1, k2, kn, c;
        double a, b;
    };
    std::vector<W> waves;
    for (int c = 0; c < comps; ++c)
        for (int i = 0; i < 6; ++i)
            waves.push_back({int(rng() % 4), g.dim() == 3 ? int(rng() % 5) - 2 : 0, int(rng() % 5) - 2, c,
                             nd(rng), nd(rng)});
    const double kn_scale = pi / g.height_h();
    return full_vector(g, comps, [&](const Point& x, std::span<double> o) {
        const double xn = x[g.dim() - 1];
        for (const auto& w : waves) {
            const double ph = w.k1 * x[0] + (g.dim() == 3 ? w.k2 * x[1] : 0.0) + w.kn * kn_scale * xn;
            o[w.c] += w.a * std::cos(ph) + w.b * std::sin(ph);
        }
        o[0] += 0.3;  // nonzero mean
    });
}

}  // namespace

TEST(Riesz, SineMapsToMinusCosine) {
    const GridSpec g = grid2();
    const Field f = full_scalar(g, [](const Point& x) { return std::sin(x[0]); });
    const Field r = riesz(0, f);
    const Field expect = full_scalar(g, [](const Point& x) { return -std::cos(x[0]); });
    EXPECT_LT(max_abs_diff(r.values(), expect.values()), 1e-13);
}

TEST(Riesz, ConstantIsAnnihilated) {
    const GridSpec g = grid2();
    const Field f = full_scalar(g, [](const Point&) { return 2.5; });
    EXPECT_LT(linf(riesz(0, f).values()), 1e-15);
    EXPECT_LT(linf(riesz(1, f).values()), 1e-15);
}

TEST(Riesz, TangentialPlaneOfThreeDimensionalGrid) {
    // Both modes are x_n-independent, so |xi| = |xi_1| or |xi_2| and R_1 kills the x_2 mode.
    // The symbol -i xi_1/|xi| sends cos(x_1) to +sin(x_1), consistently with sin -> -cos.
    const GridSpec g = grid3();
    const Field f = full_scalar(g, [](const Point& x) { return std::cos(x[0]) + std::cos(x[1]); });
    const Field expect = full_scalar(g, [](const Point& x) { return std::sin(x[0]); });
    EXPECT_LT(max_abs_diff(riesz(0, f).values(), expect.values()), 1e-13);
}

TEST(Riesz, RejectsBadAxis) {
    const GridSpec g = grid2();
    EXPECT_THROW(riesz(2, Field(g, Extent::full, 1)), ValidationError);
}

TEST(Riesz, SumOfSquaresIsMinusIdentityOffTheMean) {
    for (const GridSpec& g : {grid2(), grid3()}) {
        const Field f = band_limited(g, 1, 3);
        Field acc(g, Extent::full, 1);
        for (int j = 0; j < g.dim(); ++j) {
            const Field rr = riesz(j, riesz(j, f));
            for (std::size_t i = 0; i < acc.values().size(); ++i) acc.values()[i] += rr.values()[i];
        }
        double mean = 0;
        for (double v : f.values()) mean += v;
        mean /= double(f.values().size());
        std::vector<double> target(f.values().size());
        for (std::size_t i = 0; i < target.size(); ++i) target[i] = -(f.values()[i] - mean);
        EXPECT_LT(relative_diff(acc.values(), target), 1e-12) << "dim " << g.dim();
    }
}

TEST(RieszTangential, Examples) {
    const GridSpec g = make_grid(2, 2 * pi, 1, 16, 3, 1, 3);
    const auto gn = sample_boundary(g, 1, [](const Point& x, double, std::span<double> o) { o[0] = std::sin(x[0]); });
    const auto r = riesz_tangential(gn, 0);
    for (int k = 0; k < g.n_time(); ++k)
        for (std::size_t s = 0; s < g.tangential_points(); ++s)
            EXPECT_NEAR(r.at(k, s, 0), -std::cos(g.x_tangential(s, 0)), 1e-14);

    const auto c = sample_boundary(g, 1, [](const Point&, double, std::span<double> o) { o[0] = 4; });
    EXPECT_LT(linf(riesz_tangential(c, 0).values()), 1e-15);
    EXPECT_THROW(riesz_tangential(c, 1), ValidationError);
}

TEST(RieszTangential, MatchesDenseDftMatrix) {
    // Brute-force O(n^2) application of the discrete multiplier on a 2-D wall.
    const int n = 16;
    const GridSpec g = make_grid(3, 2 * pi, 1, n, 3, 1, 2);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    BoundaryField b(g, 1);
    for (int a = -3; a <= 3; ++a)
        for (int c = -3; c <= 3; ++c) {
            const double p = nd(rng), q = nd(rng);
            for (int k = 0; k < 2; ++k)
                for (std::size_t s = 0; s < g.tangential_points(); ++s) {
                    const double ph = a * g.x_tangential(s, 0) + c * g.x_tangential(s, 1);
                    b.at(k, s, 0) += p * std::cos(ph) + q * std::sin(ph);
                }
        }
    for (int axis = 0; axis < 2; ++axis) {
        const auto fast = riesz_tangential(b, axis);
        const std::size_t np = g.tangential_points();
        std::vector<cplx> hat(np);
        for (std::size_t m = 0; m < np; ++m) {
            const int k1 = int(m) / n, k2 = int(m) % n;
            for (std::size_t s = 0; s < np; ++s) {
                const int i1 = int(s) / n, i2 = int(s) % n;
                hat[m] += b.at(0, s, 0) * std::polar(1.0, -2 * pi * (k1 * i1 + k2 * i2) / n);
            }
        }
        for (std::size_t s = 0; s < np; ++s) {
            const int i1 = int(s) / n, i2 = int(s) % n;
            cplx acc = 0;
            for (std::size_t m = 0; m < np; ++m) {
                const int k1 = int(m) / n, k2 = int(m) % n;
                const int s1 = signed_index(k1, n), s2 = signed_index(k2, n);
                const double norm = std::hypot(double(s1), double(s2));
                if (norm == 0) continue;
                const int kk = axis == 0 ? k1 : k2;
                const double xi = (kk == n / 2) ? 0.0 : double(signed_index(kk, n));
                acc += cplx(0, -xi / norm) * hat[m] * std::polar(1.0, 2 * pi * (k1 * i1 + k2 * i2) / n);
            }
            EXPECT_NEAR(fast.at(0, s, 0), acc.real() / double(np), 1e-11);
        }
    }
}

TEST(Leray, AnnihilatesGradients) {
    const GridSpec g = grid3();
    const Field grad = full_vector(g, 3, [](const Point& x, std::span<double> o) {
        o[0] = std::cos(x[0]) * std::sin(x[1]);
        o[1] = std::sin(x[0]) * std::cos(x[1]);
    });
    EXPECT_LT(linf(leray_project(grad).values()), 1e-12 * linf(grad.values()));

    const GridSpec g2 = grid2();
    const Field phi = band_limited(g2, 1, 9);
    const Field gp = spectral_gradient_full(phi);
    EXPECT_LT(linf(leray_project(gp).values()), 1e-12 * linf(gp.values()));
}

TEST(Leray, FixesDivergenceFreeField) {
    const GridSpec g = grid3();
    const Field v = full_vector(g, 3, [](const Point& x, std::span<double> o) { o[0] = std::sin(x[1]); });
    EXPECT_LT(relative_diff(leray_project(v).values(), v.values()), 1e-13);
}

TEST(Leray, IdempotentAndSolenoidal) {
    for (const GridSpec& g : {grid2(), grid3()}) {
        const Field v = band_limited(g, g.dim(), 17);
        const Field p1 = leray_project(v);
        const Field p2 = leray_project(p1);
        EXPECT_LT(relative_diff(p2.values(), p1.values()), 1e-12);
        EXPECT_LT(linf(spectral_divergence_full(p1).values()), 1e-12 * linf(v.values()));
        // Mean passes through unchanged.
        double m0 = 0, m1 = 0;
        for (int r = 0; r < v.rows(); ++r)
            for (std::size_t s = 0; s < g.tangential_points(); ++s) {
                m0 += v.at(r, s, 0);
                m1 += p1.at(r, s, 0);
            }
        EXPECT_NEAR(m0, m1, 1e-10 * std::abs(m0));
    }
}

TEST(Leray, RejectsScalarField) {
    EXPECT_THROW(leray_project(Field(grid2(), Extent::full, 1)), ValidationError);
}

TEST(HarmonicExtension, SingleModeDecaysExponentially) {
    const GridSpec g = make_grid(2, 2 * pi, 4, 16, 33, 1, 2);
    std::vector<double> wall(g.tangential_points());
    for (std::size_t s = 0; s < wall.size(); ++s) wall[s] = std::sin(g.x_tangential(s, 0));
    const Field e = harmonic_extension(g, wall);
    double err = 0;
    for (int j = 0; j < g.n_normal(); ++j)
        for (std::size_t s = 0; s < wall.size(); ++s)
            err = std::max(err, std::abs(e.at(j, s, 0) - std::exp(-g.x_normal(j)) * wall[s]));
    EXPECT_LT(err, 1e-12);
}

TEST(HarmonicExtension, ConstantStaysConstant) {
    const GridSpec g = make_grid(2, 2 * pi, 4, 16, 9, 1, 2);
    const std::vector<double> wall(g.tangential_points(), 1.0);
    const Field e = harmonic_extension(g, wall);
    for (double v : e.values()) EXPECT_NEAR(v, 1.0, 1e-15);
    EXPECT_THROW(harmonic_extension(g, std::vector<double>(3)), ValidationError);
}

TEST(HarmonicExtension, SupBoundedByWallSupOnCorpus) {
    const GridSpec g = make_grid(3, 2 * pi, 4, 16, 41, 1, 2);
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<double> wall(g.tangential_points(), 0.0);
        for (int a = -4; a <= 4; ++a)
            for (int c = -4; c <= 4; ++c) {
                const double p = nd(rng) / (1 + a * a + c * c), q = nd(rng) / (1 + a * a + c * c);
                for (std::size_t s = 0; s < wall.size(); ++s) {
                    const double ph = a * g.x_tangential(s, 0) + c * g.x_tangential(s, 1);
                    wall[s] += p * std::cos(ph) + q * std::sin(ph);
                }
            }
        const Field e = harmonic_extension(g, wall);
        EXPECT_LE(linf(e.values()), linf(wall) * (1 + 1e-12)) << "trial " << trial;
    }
}

TEST(HarmonicExtension, SatisfiesModeOdeToSecondOrder) {
    // Centered second difference of e^{-k x_n} against k^2 e^{-k x_n}: error ~ k^4 dx^2 / 12.
    auto defect = [](int nn) {
        const GridSpec g = make_grid(2, 2 * pi, 2, 16, nn, 1, 2);
        std::vector<double> wall(g.tangential_points());
        for (std::size_t s = 0; s < wall.size(); ++s) wall[s] = std::cos(3 * g.x_tangential(s, 0));
        const Field e = harmonic_extension(g, wall);
        const double h = g.dx_normal();
        double worst = 0;
        for (int j = 1; j + 1 < g.n_normal(); ++j) {
            const double d2 = (e.at(j + 1, 0, 0) - 2 * e.at(j, 0, 0) + e.at(j - 1, 0, 0)) / (h * h);
            worst = std::max(worst, std::abs(d2 - 9 * e.at(j, 0, 0)));
        }
        return worst;
    };
    const double coarse = defect(65), fine = defect(129);
    std::cout << "mode ODE defect " << coarse << " -> " << fine << "\n";
    EXPECT_GT(std::log2(coarse / fine), 1.9);
}

TEST(HeatPropagate, ZeroTimeIsIdentity) {
    const GridSpec g = grid2();
    const auto s = forward_full(band_limited(g, 1, 4));
    const auto p = heat_propagate(s, 0);
    EXPECT_TRUE(std::ranges::equal(p.coeffs, s.coeffs));
    EXPECT_THROW(heat_propagate(s, -1e-3), ValidationError);
}

TEST(HeatPropagate, SingleModeDecaysByExpMinusOne) {
    const GridSpec g = grid2();
    const Field f = full_scalar(g, [](const Point& x) { return std::cos(x[0]); });
    const Field out = inverse_full(heat_propagate(forward_full(f), 1.0));
    std::vector<double> expect(f.values().begin(), f.values().end());
    for (double& v : expect) v *= std::exp(-1.0);
    EXPECT_LT(max_abs_diff(out.values(), expect), 1e-15);
}

TEST(HeatPropagate, SemigroupComposition) {
    const GridSpec g = grid3();
    const auto s = forward_full(band_limited(g, 2, 8));
    const auto a = heat_propagate(heat_propagate(s, 0.13), 0.29);
    const auto b = heat_propagate(s, 0.42);
    double err = 0, scale = 0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
        err = std::max(err, std::abs(a.coeffs[i] - b.coeffs[i]));
        scale = std::max(scale, std::abs(b.coeffs[i]));
    }
    EXPECT_LT(err, 1e-12 * scale);
}

TEST(HeatPropagate, NeverIncreasesSupNorm) {
    const GridSpec g = grid2(32, 33);
    const Field f = band_limited(g, 1, 12);
    double prev = linf(f.values());
    for (double t : {0.01, 0.05, 0.2, 1.0}) {
        const double now = linf(inverse_full(heat_propagate(forward_full(f), t)).values());
        EXPECT_LE(now, prev + 1e-12);
        prev = now;
    }
}

TEST(SpectralSlice, ParsevalIdentity) {
    for (const GridSpec& g : {grid2(), grid3()}) {
        const Field f = band_limited(g, 1, 31);
        const auto s = forward_full(f);
        double direct = 0;
        for (double v : f.values()) direct += v * v;
        EXPECT_NEAR(parseval_energy(s, 0), direct, 1e-12 * direct);
    }
}

TEST(SpectralSlice, RoundTripRecoversField) {
    const GridSpec g = grid3();
    const Field f = band_limited(g, 3, 2);
    EXPECT_LT(relative_diff(inverse_full(forward_full(f)).values(), f.values()), 1e-14);
}
