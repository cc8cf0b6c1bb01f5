#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hstokes/error.hpp"
#include "hstokes/field.hpp"
#include "hstokes/stokes.hpp"

namespace hstokes {

/// Smooth ramp with ramp(0) = 0 used by the wall-driven cases.
inline double ramp(double t) { return -std::expm1(-4 * t); }

/// Closure description of a problem; sampling it on any grid yields StokesData.
struct Problem {
    using Initial = std::function<void(const Point&, std::span<double>)>;
    using SpaceTime = std::function<void(const Point&, double, std::span<double>)>;

    std::string name;
    Initial h;    ///< empty: h = 0
    SpaceTime g;  ///< empty: g = 0
    SpaceTime F;  ///< empty: no force; tensor component k*dim + i is F_ki
    bool navier_stokes = false;
    double amplitude = 0;
    double default_t = 0.5;
};

inline StokesData sample_data(const Problem& p, const GridSpec& grid, double alpha = 0.5) {
    const int d = grid.dim();
    StokesData data;
    data.alpha = alpha;
    data.h = p.h ? sample_slice(grid, d, p.h) : Field(grid, Extent::half, d);
    data.g = p.g ? sample_boundary(grid, d, p.g) : BoundaryField(grid, d);
    if (p.F) data.F = sample(grid, d * d, p.F);
    return data;
}

inline std::vector<std::string> case_names() {
    return {"zero", "rayleigh-ramp", "tangential-mode", "normal-mode", "mixed", "small-ns", "large-ns"};
}

/**
 * Built-in cases. A NaN amplitude selects the case default. Every case has
 * h_n = 0 on the wall, g(., 0) = h(., x_n = 0) and zero tangential mean of g_n.
 */
inline Problem make_case(const std::string& name, int dim, double amplitude = std::nan("")) {
    if (dim != 2 && dim != 3) throw ValidationError("case: dim must be 2 or 3");
    auto amp_or = [&](double def) { return std::isnan(amplitude) ? def : amplitude; };
    Problem p;
    p.name = name;
    const int n = dim - 1;  // index of the normal component
    if (name == "zero") {
        p.amplitude = 0;
    } else if (name == "rayleigh-ramp") {
        const double A = p.amplitude = amp_or(1.0);
        p.g = [A](const Point&, double t, std::span<double> o) { o[0] = A * ramp(t); };
    } else if (name == "tangential-mode") {
        const double A = p.amplitude = amp_or(1.0);
        p.g = [A](const Point& x, double t, std::span<double> o) { o[0] = A * ramp(t) * std::sin(x[0]); };
    } else if (name == "normal-mode") {
        const double A = p.amplitude = amp_or(1.0);
        p.g = [A, n](const Point& x, double t, std::span<double> o) { o[n] = A * ramp(t) * std::sin(x[0]); };
    } else if (name == "mixed") {
        const double A = p.amplitude = amp_or(1.0);
        // h = curl of the stream function A sin(x_1) x_n^3 e^{-x_n^2/2}.
        p.h = [A, n](const Point& x, std::span<double> o) {
            const double z = x[n], e = std::exp(-z * z / 2);
            o[0] = A * std::sin(x[0]) * (3 * z * z - z * z * z * z) * e;
            o[n] = -A * std::cos(x[0]) * z * z * z * e;
        };
        p.g = [A](const Point& x, double t, std::span<double> o) { o[0] = A * ramp(t) * std::sin(x[0]); };
        p.F = [A, dim, n](const Point& x, double t, std::span<double> o) {
            const double v = A * ramp(t) * std::cos(x[0]) * std::exp(-x[n] * x[n]);
            o[0 * dim + n] = v;
            o[n * dim + 0] = v;
        };
    } else if (name == "small-ns" || name == "large-ns") {
        const bool small = name == "small-ns";
        const double A = p.amplitude = amp_or(small ? 0.1 : 10.0);
        p.navier_stokes = true;
        p.default_t = small ? 0.25 : 1.0;
        p.g = [A](const Point& x, double t, std::span<double> o) { o[0] = A * ramp(t) * (1 + std::sin(x[0])); };
    } else {
        std::string known;
        for (const auto& c : case_names()) known += (known.empty() ? "" : ", ") + c;
        throw ValidationError("unknown case '" + name + "' (known: " + known + ")");
    }
    return p;
}

// ---------------------------------------------------------------------------
// Fixed corpora for property checks

/**
 * Time-independent force potential F_12 = F_21 = sum_j cos(2^j x_1 + phase_j),
 * j = 0..levels-1, with fixed-seed phases. Its lacunary spectrum makes the
 * Duhamel integral scale like T^{1/2}.
 */
inline Problem lacunary_force_case(int dim, int levels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> phase(levels);
    for (auto& ph : phase) ph = 2 * std::numbers::pi * double(rng() >> 11) * 0x1.0p-53;
    Problem p;
    p.name = "lacunary-force";
    const int n = dim - 1;
    p.F = [phase, dim, n](const Point& x, double, std::span<double> o) {
        double v = 0;
        for (std::size_t j = 0; j < phase.size(); ++j) v += std::cos(double(1 << j) * x[0] + phase[j]);
        o[0 * dim + n] = v;
        o[n * dim + 0] = v;
    };
    return p;
}

/**
 * Random band-limited scalar fields on the doubled torus: modes with every
 * wavenumber index at most max_index, random Gaussian amplitudes decaying like
 * |k|^{-(1+roughness)}.
 */
inline std::vector<Field> band_limited_corpus(const GridSpec& g, int count, int max_index, double roughness,
                                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Field> out;
    const int d = g.dim();
    const double L = g.period_l(), H2 = 2 * g.height_h();
    for (int c = 0; c < count; ++c) {
        struct Wave {
            std::array<int, 3> k;
            double a, b;
        };
        std::vector<Wave> waves;
        const int kt_max = d == 3 ? max_index : 0;
        for (int k1 = 0; k1 <= max_index; ++k1)
            for (int k2 = -kt_max; k2 <= kt_max; ++k2)
                for (int kn = -max_index; kn <= max_index; ++kn) {
                    if (k1 == 0 && (k2 < 0 || (k2 == 0 && kn <= 0))) continue;
                    const double mag = std::sqrt(double(k1 * k1 + k2 * k2 + kn * kn));
                    const double s = std::pow(mag, -(1 + roughness));
                    waves.push_back({{k1, k2, kn}, s * normal(rng), s * normal(rng)});
                }
        Field f(g, Extent::full, 1);
        for (int r = 0; r < f.rows(); ++r)
            for (std::size_t s = 0; s < g.tangential_points(); ++s) {
                const double x1 = g.x_tangential(s, 0);
                const double x2 = d == 3 ? g.x_tangential(s, 1) : 0.0;
                const double xn = r * g.dx_normal();
                double v = 0;
                for (const auto& w : waves) {
                    const double ph = 2 * std::numbers::pi *
                                      (w.k[0] * x1 / L + w.k[1] * x2 / L + w.k[2] * xn / H2);
                    v += w.a * std::cos(ph) + w.b * std::sin(ph);
                }
                f.at(r, s, 0) = v;
            }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace hstokes
