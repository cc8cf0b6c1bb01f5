// Picard iteration, contraction monitoring and horizon control.

#include <gtest/gtest.h>

#include <iostream>

#include "support.hpp"

using namespace hstokes;
using namespace hstokes::testing;

namespace {

IterationConfig quick_config() {
    IterationConfig c;
    c.norms = SeminormOptions{SeminormMode::sampled, 20'000, 11};
    return c;
}

GridSpec small_ns_grid() { return make_grid(2, 2 * pi, 14, 16, 129, 0.25, 33); }

}  // namespace

TEST(PicardStep, ZeroIterateOnZeroData) {
    const GridSpec g = make_grid(2, 2 * pi, 8, 8, 17, 0.5, 9);
    const auto data = sample_data(make_case("zero", 2), g);
    EXPECT_EQ(linf(picard_step(SpaceTimeField(g, Extent::half, 2), data).values()), 0.0);
}

TEST(PicardStep, ZeroIterateIsTheStokesSolveBitExactly) {
    const GridSpec g = make_grid(2, 2 * pi, 10, 16, 65, 0.5, 17);
    const auto data = sample_data(make_case("mixed", 2), g);
    const auto step = picard_step(SpaceTimeField(g, Extent::half, 2), data);
    const auto direct = solve_stokes(data, g).u;
    EXPECT_TRUE(std::ranges::equal(step.values(), direct.values()));
}

TEST(PicardStep, RecomposesTheTwoOperations) {
    const GridSpec g = make_grid(2, 2 * pi, 14, 8, 65, 0.5, 17);
    const auto data = sample_data(make_case("rayleigh-ramp", 2, 0.3), g);
    const auto u1 = solve_stokes(data, g).u;
    const auto F = nonlinear_force(u1, data);
    for (int k = 0; k < g.n_time(); ++k)
        for (int j = 0; j < g.n_normal(); ++j)
            for (std::size_t s = 0; s < g.tangential_points(); ++s) {
                const double a = u1.at(k, j, s, 0);
                EXPECT_EQ(F.at(k, j, s, 0), -a * a);
                for (int c = 1; c < 4; ++c) EXPECT_EQ(std::abs(F.at(k, j, s, c)), 0.0);
            }
    StokesData manual = data;
    manual.F = F;
    const auto by_hand = solve_stokes(manual, g).u;
    EXPECT_TRUE(std::ranges::equal(picard_step(u1, data).values(), by_hand.values()));
}

TEST(PicardSolve, ZeroDataConvergesImmediately) {
    const GridSpec g = make_grid(2, 2 * pi, 8, 8, 17, 0.5, 9);
    const auto res = picard_solve(sample_data(make_case("zero", 2), g), g, quick_config());
    EXPECT_TRUE(res.trace.converged);
    EXPECT_EQ(res.trace.records.size(), 1u);
    EXPECT_EQ(linf(res.u.values()), 0.0);
}

TEST(PicardSolve, SmallDataContractsGeometrically) {
    const GridSpec g = small_ns_grid();
    const auto res = picard_solve(sample_data(make_case("small-ns", 2), g), g, quick_config());
    ASSERT_TRUE(res.trace.converged);
    EXPECT_TRUE(res.trace.monotone);
    for (const auto& r : res.trace.records) {
        if (r.m < 2) {
            EXPECT_TRUE(std::isnan(r.ratio));
            continue;
        }
        std::cout << "m = " << r.m << " ratio " << r.ratio << "\n";
        EXPECT_LE(r.ratio, 0.6);
    }
}

TEST(PicardSolve, IteratesStayUniformlyBounded) {
    const GridSpec g = small_ns_grid();
    const auto cfg = quick_config();
    const auto data = sample_data(make_case("small-ns", 2, 0.3), g);
    const auto res = picard_solve(data, g, cfg);
    const double u1 = anisotropic_seminorm(solve_stokes(data, g).u, cfg.alpha, cfg.norms).norm();
    const double bound = u1 / (1 - cfg.contraction_threshold) + u1;
    for (const auto& r : res.trace.records) EXPECT_LE(r.u_next.norm(), bound);
    EXPECT_LE(res.trace.M, bound);
}

TEST(PicardSolve, TraceIsDeterministic) {
    const GridSpec g = make_grid(2, 2 * pi, 14, 8, 65, 0.25, 17);
    const auto data = sample_data(make_case("small-ns", 2), g);
    const auto a = picard_solve(data, g, quick_config());
    const auto b = picard_solve(data, g, quick_config());
    ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
        EXPECT_EQ(a.trace.records[i].U.norm(), b.trace.records[i].U.norm());
        EXPECT_EQ(a.trace.records[i].u_next.norm(), b.trace.records[i].u_next.norm());
    }
    EXPECT_TRUE(std::ranges::equal(a.u.values(), b.u.values()));
}

TEST(PicardSolve, ConfigValidation) {
    IterationConfig c;
    c.contraction_threshold = 1.0;
    EXPECT_THROW(c.validate(), ValidationError);
    c = {};
    c.m_max = 0;
    EXPECT_THROW(c.validate(), ValidationError);
    c = {};
    c.t_shrink = 0.25;
    EXPECT_THROW(c.validate(), ValidationError);
}

TEST(BilinearBound, ProductSeminormControlledByFactors) {
    // [u (x) u] <= 2 |u|_inf [u] for the max-abs component norm, on exact seminorms.
    const SeminormOptions exact{SeminormMode::exact};
    for (const char* name : {"tangential-mode", "mixed", "normal-mode"}) {
        const GridSpec g = make_grid(2, 2 * pi, 10, 8, 65, 0.5, 9);
        const auto u = solve_stokes(sample_data(make_case(name, 2), g), g).u;
        const auto ru = anisotropic_seminorm(u, 0.5, exact);
        const auto rp = anisotropic_seminorm(outer(u), 0.5, exact);
        EXPECT_LE(rp.space_seminorm, 2 * ru.linf * ru.space_seminorm + 1e-8) << name;
        EXPECT_LE(rp.time_seminorm, 2 * ru.linf * ru.time_seminorm + 1e-8) << name;
    }
}

TEST(AutoTimestep, AcceptsTheFullHorizonWhenContracting) {
    const GridSpec g = make_grid(2, 2 * pi, 14, 8, 65, 0.25, 17);
    const auto res = auto_timestep(sample_data(make_case("small-ns", 2), g), quick_config());
    EXPECT_EQ(res.T_star, g.t_final());
    ASSERT_EQ(res.attempts.size(), 1u);
    EXPECT_EQ(res.attempts[0].outcome, "converged");
}

TEST(AutoTimestep, HalvesTheHorizonForLargeData) {
    // On this coarse grid amplitude 20 contracts only after one halving.
    const GridSpec g = make_grid(2, 2 * pi, 14, 8, 65, 1.0, 33);
    std::vector<HorizonAttempt> log;
    const auto res = auto_timestep(sample_data(make_case("large-ns", 2, 20.0), g), quick_config(), &log);
    ASSERT_EQ(res.attempts.size(), 2u);
    EXPECT_EQ(res.T_star, 0.5);
    EXPECT_GT(res.attempts[0].iterations, 0);
    EXPECT_EQ(res.attempts.back().outcome, "converged");
    for (std::size_t i = 0; i + 1 < res.attempts.size(); ++i)
        EXPECT_NE(res.attempts[i].outcome.find("non-contraction"), std::string::npos);
    EXPECT_EQ(log.size(), res.attempts.size());
}

TEST(AutoTimestep, PathologicalAmplitudeUnderflowsDeterministically) {
    const GridSpec g = make_grid(2, 2 * pi, 14, 8, 33, 1.0, 17);
    const auto data = sample_data(make_case("large-ns", 2, 2000.0), g);
    auto cfg = quick_config();
    cfg.m_max = 6;
    std::string first, second;
    for (std::string* msg : {&first, &second}) {
        std::vector<HorizonAttempt> log;
        try {
            auto_timestep(data, cfg, &log);
            FAIL() << "expected HorizonUnderflow";
        } catch (const HorizonUnderflow& e) {
            *msg = e.what();
        }
        EXPECT_GE(log.size(), 2u);
    }
    EXPECT_EQ(first, second);
}
