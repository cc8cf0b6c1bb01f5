// Compatibility checks and reflections onto the doubled torus.

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace hstokes;
using namespace hstokes::testing;

TEST(Compatibility, ZeroDataPasses) {
    const GridSpec g = make_grid(2, 2 * pi, 4, 8, 9, 0.5, 5);
    const auto r = check_compatibility(Field(g, Extent::half, 2), BoundaryField(g, 2), 1e-10);
    EXPECT_TRUE(r.passes());
    EXPECT_EQ(r.trace_mismatch, 0.0);
    EXPECT_EQ(r.divergence_sup, 0.0);
    EXPECT_EQ(r.normal_trace_sup, 0.0);
    EXPECT_TRUE(r.violations().empty());
}

TEST(Compatibility, TangentialShearField) {
    const GridSpec g = make_grid(3, 2 * pi, 8, 16, 65, 0.5, 5);
    const Field h = sample_slice(g, 3, [](const Point& x, std::span<double> o) {
        o[0] = std::sin(x[1]) * std::exp(-x[2]);
    });
    const auto gb = sample_boundary(g, 3, [](const Point& x, double, std::span<double> o) { o[0] = std::sin(x[1]); });
    const auto r = check_compatibility(h, gb, 1e-10);
    EXPECT_EQ(r.trace_mismatch, 0.0);
    EXPECT_LT(r.divergence_sup, 1e-12);
    EXPECT_TRUE(r.passes());
}

TEST(Compatibility, InjectedDivergenceFails) {
    // h_1 = sin(x_1) has div h = cos(x_1), sup 1.
    const GridSpec g = make_grid(2, 2 * pi, 4, 16, 33, 0.5, 5);
    const Field h = sample_slice(g, 2, [](const Point& x, std::span<double> o) { o[0] = std::sin(x[0]); });
    const auto gb = sample_boundary(g, 2, [](const Point& x, double, std::span<double> o) { o[0] = std::sin(x[0]); });
    const auto r = check_compatibility(h, gb, 1e-8);
    EXPECT_NEAR(r.divergence_sup, 1.0, 1e-12);
    EXPECT_FALSE(r.passes());
    EXPECT_NE(r.violations().find("div h = 0"), std::string::npos);
}

TEST(Compatibility, ReportsEachRule) {
    const GridSpec g = make_grid(2, 2 * pi, 4, 16, 33, 0.5, 5);
    const Field h(g, Extent::half, 2);
    auto gb = sample_boundary(g, 2, [](const Point&, double t, std::span<double> o) {
        o[0] = 0.5;
        o[1] = t;
    });
    const auto r = check_compatibility(h, gb, 1e-8);
    EXPECT_FALSE(r.trace_ok);
    EXPECT_TRUE(r.normal_trace_ok);
    EXPECT_FALSE(r.flux_ok);
    EXPECT_NEAR(r.flux_mean_sup, 0.5, 1e-15);
    EXPECT_NE(r.violations().find("zero tangential mean of g_n"), std::string::npos);
    EXPECT_THROW(check_compatibility(h, BoundaryField(g, 1), 1e-8), ValidationError);
}

TEST(ExtendInitial, ZeroStaysZero) {
    const GridSpec g = make_grid(2, 2 * pi, 4, 8, 9, 0.5, 5);
    const Field e = extend_initial(Field(g, Extent::half, 2));
    EXPECT_EQ(e.rows(), 16);
    EXPECT_EQ(linf(e.values()), 0.0);
}

TEST(ExtendInitial, EvenTangentialReflectionIsSolenoidal) {
    const GridSpec g = make_grid(3, 2 * pi, 12, 8, 49, 0.5, 5);
    const Field h = sample_slice(g, 3, [](const Point& x, std::span<double> o) {
        o[0] = std::sin(x[1]) * std::exp(-x[2]);
    });
    const Field e = extend_initial(h);
    for (int r = 1; r < g.n_normal() - 1; ++r)
        for (std::size_t s = 0; s < g.tangential_points(); ++s)
            EXPECT_EQ(e.at(e.rows() - r, s, 0), e.at(r, s, 0));
    const double scale = linf(gradient(h).values());
    EXPECT_LE(linf(spectral_divergence_full(e).values()), 1e-10 * scale);
}

TEST(ExtendInitial, RestrictionIsBitExactAndOddNormalPart) {
    const GridSpec g = make_grid(2, 2 * pi, 10, 16, 81, 0.5, 5);
    const Field h = sample_slice(g, 2, [](const Point& x, std::span<double> o) {
        const double z = x[1], e = std::exp(-z * z / 2);
        o[0] = std::sin(x[0]) * (3 * z * z - z * z * z * z) * e;
        o[1] = -std::cos(x[0]) * z * z * z * e;
    });
    const Field e = extend_initial(h);
    const Field back = restrict_to_half(e);
    EXPECT_TRUE(std::ranges::equal(back.values(), h.values()));
    for (int r = 1; r < g.n_normal() - 1; ++r)
        for (std::size_t s = 0; s < g.tangential_points(); ++s) {
            EXPECT_EQ(e.at(e.rows() - r, s, 1), -e.at(r, s, 1));
            EXPECT_EQ(e.at(e.rows() - r, s, 0), e.at(r, s, 0));
        }
    // The reflected field stays divergence-free to the accuracy of the sampled data.
    const double scale = linf(gradient(h).values());
    EXPECT_LT(linf(spectral_divergence_full(e).values()), 1e-6 * scale);
}

TEST(ExtendInitial, RejectsNonzeroNormalTrace) {
    const GridSpec g = make_grid(2, 2 * pi, 4, 16, 33, 0.5, 5);
    const Field h = sample_slice(g, 2, [](const Point& x, std::span<double> o) {
        o[1] = 0.1 * std::sin(x[0]) * std::exp(-x[1]);
    });
    try {
        extend_initial(h);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("extension explicitly"), std::string::npos);
    }
}

TEST(ExtendTensor, Examples) {
    const GridSpec g = make_grid(2, 2 * pi, 4, 8, 17, 0.5, 3);
    EXPECT_EQ(linf(extend_tensor(SpaceTimeField(g, Extent::half, 4)).values()), 0.0);

    const auto F = sample(g, 4, [](const Point& x, double, std::span<double> o) {
        for (auto& v : o) v = x[1];
    });
    const auto Fe = extend_tensor(F);
    for (int k = 0; k < g.n_time(); ++k)
        for (int r = 0; r < Fe.rows(); ++r)
            for (std::size_t s = 0; s < g.tangential_points(); ++s)
                for (int c = 0; c < 4; ++c)
                    EXPECT_DOUBLE_EQ(Fe.at(k, r, s, c), std::abs(g.x_normal_full(r)));
    EXPECT_THROW(extend_tensor(Fe), ValidationError);
}

TEST(ExtendTensor, IsometryAndSeminormControl) {
    const GridSpec g = make_grid(2, 2 * pi, 2, 8, 9, 0.5, 4);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 4; ++trial) {
        SpaceTimeField F(g, Extent::half, 4);
        for (auto& v : F.values()) v = u(rng);
        const auto Fe = extend_tensor(F);
        EXPECT_EQ(linf(Fe.values()), linf(F.values()));
        const SeminormOptions exact{SeminormMode::exact};
        const auto a = anisotropic_seminorm(F, 0.5, exact);
        const auto b = anisotropic_seminorm(Fe, 0.5, exact);
        EXPECT_LE(b.space_seminorm, a.space_seminorm * (1 + 1e-12));
        EXPECT_EQ(b.time_seminorm, a.time_seminorm);
    }
}
