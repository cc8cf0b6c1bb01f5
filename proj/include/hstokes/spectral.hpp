#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "hstokes/error.hpp"
#include "hstokes/fft.hpp"
#include "hstokes/field.hpp"
#include "hstokes/grid.hpp"

namespace hstokes {

// Wavenumber conventions. Odd multipliers (derivatives, Riesz transforms, the
// Leray projector) see the Nyquist index as 0 so that every multiplier stays
// Hermitian and real fields map to real fields. Even multipliers (heat,
// Poisson) use the true magnitude.

inline int signed_index(int i, int n) { return i <= n / 2 ? i : i - n; }

inline double odd_wavenumber(int i, int n, double length) {
    if (n % 2 == 0 && i == n / 2) return 0.0;
    return 2 * std::numbers::pi / length * signed_index(i, n);
}

inline double even_wavenumber(int i, int n, double length) {
    return 2 * std::numbers::pi / length * std::abs(signed_index(i, n));
}

/// Wavevector data for one stored r2c mode.
struct Mode {
    std::array<double, 3> xi{0, 0, 0};  ///< odd-convention components
    double norm = 0;                    ///< even-convention |xi|
};

/// Tangential r2c modes of a row; entry a < dim-1 of xi is the x_{a+1} component.
inline std::vector<Mode> tangential_modes(const GridSpec& g) {
    const int n = g.n_tangential();
    const double L = g.period_l();
    std::vector<Mode> modes(g.tangential_modes());
    if (g.dim() == 2) {
        for (int i = 0; i <= n / 2; ++i) {
            modes[i].xi[0] = odd_wavenumber(i, n, L);
            modes[i].norm = even_wavenumber(i, n, L);
        }
    } else {
        const int h = n / 2 + 1;
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < h; ++i2) {
                Mode& m = modes[i1 * h + i2];
                m.xi[0] = odd_wavenumber(i1, n, L);
                m.xi[1] = odd_wavenumber(i2, n, L);
                m.norm = std::hypot(even_wavenumber(i1, n, L), even_wavenumber(i2, n, L));
            }
    }
    return modes;
}

/// Modes of the doubled torus (normal axis first, period 2H); xi[dim-1] is the normal component.
inline std::vector<Mode> full_modes(const GridSpec& g) {
    const int nf = g.rows(Extent::full);
    const double lf = 2 * g.height_h();
    const auto tmodes = tangential_modes(g);
    std::vector<Mode> modes(std::size_t(nf) * tmodes.size());
    for (int r = 0; r < nf; ++r) {
        const double kn = odd_wavenumber(r, nf, lf);
        const double kn_even = even_wavenumber(r, nf, lf);
        for (std::size_t m = 0; m < tmodes.size(); ++m) {
            Mode& md = modes[r * tmodes.size() + m];
            md.xi = tmodes[m].xi;
            md.xi[g.dim() - 1] = kn;
            md.norm = std::hypot(tmodes[m].norm, kn_even);
        }
    }
    return modes;
}

/// Complex coefficients of a slice, one contiguous block per component.
struct SpectralSlice {
    GridSpec grid;
    Extent extent = Extent::full;  ///< full: n-D torus transform; half: per-row tangential
    int components = 1;
    std::size_t modes_per_component = 0;
    std::vector<cplx> coeffs;

    std::span<cplx> component(int c) {
        return {coeffs.data() + c * modes_per_component, modes_per_component};
    }
    std::span<const cplx> component(int c) const {
        return {coeffs.data() + c * modes_per_component, modes_per_component};
    }
};

namespace detail {

inline std::vector<int> tangential_dims(const GridSpec& g) {
    return g.dim() == 2 ? std::vector<int>{g.n_tangential()}
                        : std::vector<int>{g.n_tangential(), g.n_tangential()};
}

inline std::vector<int> full_dims(const GridSpec& g) {
    auto d = tangential_dims(g);
    d.insert(d.begin(), g.rows(Extent::full));
    return d;
}

inline std::vector<double> gather_component(std::span<const double> v, int comps, int c) {
    std::vector<double> out(v.size() / comps);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i * comps + c];
    return out;
}

inline void scatter_component(std::span<const double> in, std::span<double> v, int comps, int c) {
    for (std::size_t i = 0; i < in.size(); ++i) v[i * comps + c] = in[i];
}

}  // namespace detail

/// n-D transform of a full-torus slice (all components).
inline SpectralSlice forward_full(const Field& f) {
    if (f.extent() != Extent::full) throw ValidationError("forward_full: expects a full-torus field");
    fft::RealFft plan(detail::full_dims(f.grid()), 1);
    SpectralSlice s{f.grid(), Extent::full, f.components(), plan.complex_size(), {}};
    s.coeffs.resize(s.modes_per_component * s.components);
    for (int c = 0; c < f.components(); ++c) {
        const auto comp = detail::gather_component(f.values(), f.components(), c);
        plan.forward(comp, s.component(c));
    }
    return s;
}

inline Field inverse_full(const SpectralSlice& s) {
    fft::RealFft plan(detail::full_dims(s.grid), 1);
    Field f(s.grid, Extent::full, s.components);
    std::vector<double> comp(plan.real_size());
    for (int c = 0; c < s.components; ++c) {
        plan.inverse(s.component(c), comp);
        detail::scatter_component(comp, f.values(), s.components, c);
    }
    return f;
}

/// Row-wise tangential transform of a half or full field (rows x tangential modes).
inline SpectralSlice forward_tangential(const Field& f) {
    fft::RealFft plan(detail::tangential_dims(f.grid()), f.rows());
    SpectralSlice s{f.grid(), Extent::half, f.components(), plan.complex_size() * f.rows(), {}};
    s.extent = f.extent();
    s.coeffs.resize(s.modes_per_component * s.components);
    for (int c = 0; c < f.components(); ++c) {
        const auto comp = detail::gather_component(f.values(), f.components(), c);
        plan.forward(comp, s.component(c));
    }
    return s;
}

inline Field inverse_tangential(const SpectralSlice& s) {
    const int rows = s.grid.rows(s.extent);
    fft::RealFft plan(detail::tangential_dims(s.grid), rows);
    Field f(s.grid, s.extent, s.components);
    std::vector<double> comp(plan.real_size() * rows);
    for (int c = 0; c < s.components; ++c) {
        plan.inverse(s.component(c), comp);
        detail::scatter_component(comp, f.values(), s.components, c);
    }
    return f;
}

/// Transform of wall data (one time slice): tangential modes x components.
inline std::vector<std::vector<cplx>> forward_wall(const GridSpec& g, std::span<const double> slice,
                                                   int comps) {
    fft::RealFft plan(detail::tangential_dims(g), 1);
    std::vector<std::vector<cplx>> out(comps, std::vector<cplx>(plan.complex_size()));
    for (int c = 0; c < comps; ++c)
        plan.forward(detail::gather_component(slice, comps, c), out[c]);
    return out;
}

inline void inverse_wall(const GridSpec& g, const std::vector<std::vector<cplx>>& modes,
                         std::span<double> slice) {
    fft::RealFft plan(detail::tangential_dims(g), 1);
    const int comps = int(modes.size());
    std::vector<double> comp(plan.real_size());
    for (int c = 0; c < comps; ++c) {
        plan.inverse(modes[c], comp);
        detail::scatter_component(comp, slice, comps, c);
    }
}

/// Sum of |f|^2 over physical samples reconstructed from the half spectrum.
inline double parseval_energy(const SpectralSlice& s, int c) {
    const int n = s.grid.n_tangential();
    const int h = n / 2 + 1;
    const std::size_t nreal = std::size_t(s.grid.rows(s.extent == Extent::full ? Extent::full
                                                                                : Extent::half)) *
                              s.grid.tangential_points();
    const auto coeffs = s.component(c);
    double e = 0;
    for (std::size_t m = 0; m < coeffs.size(); ++m) {
        const int last = int(m % h);
        const double w = (last == 0 || (n % 2 == 0 && last == n / 2)) ? 1.0 : 2.0;
        e += w * std::norm(coeffs[m]);
    }
    if (s.extent == Extent::full) return e / double(nreal);
    return e / double(s.grid.tangential_points());
}

// ---------------------------------------------------------------------------
// Multipliers on the full torus

/// Riesz transform R_j, symbol -i xi_j/|xi|; mean mode maps to 0. Axis dim-1 is x_n.
inline Field riesz(int axis, const Field& f) {
    const GridSpec& g = f.grid();
    if (axis < 0 || axis >= g.dim()) throw ValidationError("riesz: axis out of range");
    auto s = forward_full(f);
    const auto modes = full_modes(g);
    for (int c = 0; c < s.components; ++c) {
        auto co = s.component(c);
        for (std::size_t m = 0; m < modes.size(); ++m) {
            const double nrm = modes[m].norm;
            co[m] = nrm == 0 ? cplx(0) : cplx(0, -modes[m].xi[axis] / nrm) * co[m];
        }
    }
    return inverse_full(s);
}

/// Leray projector delta_ij - xi_i xi_j/|xi|^2 (odd-convention xi); mean passes through.
inline void leray_multiply(const std::vector<Mode>& modes, SpectralSlice& s) {
    const int d = s.grid.dim();
    std::array<cplx, 3> v{};
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const auto& xi = modes[m].xi;
        double k2 = 0;
        for (int a = 0; a < d; ++a) k2 += xi[a] * xi[a];
        if (k2 == 0) continue;
        cplx dot = 0;
        for (int a = 0; a < d; ++a) {
            v[a] = s.component(a)[m];
            dot += xi[a] * v[a];
        }
        for (int a = 0; a < d; ++a) s.component(a)[m] = v[a] - xi[a] * dot / k2;
    }
}

inline Field leray_project(const Field& v) {
    if (v.components() != v.grid().dim())
        throw ValidationError("leray_project: expects a vector field");
    auto s = forward_full(v);
    leray_multiply(full_modes(v.grid()), s);
    return inverse_full(s);
}

/// Heat multiplier exp(-|xi|^2 t) on a full-torus spectrum.
inline SpectralSlice heat_propagate(SpectralSlice s, double t) {
    if (t < 0) throw ValidationError("heat_propagate: negative time");
    if (t == 0) return s;
    const auto modes = full_modes(s.grid);
    for (int c = 0; c < s.components; ++c) {
        auto co = s.component(c);
        for (std::size_t m = 0; m < modes.size(); ++m)
            co[m] *= std::exp(-modes[m].norm * modes[m].norm * t);
    }
    return s;
}

/// Spectral derivative along `axis` of a full-torus field (all components).
inline Field spectral_derivative_full(const Field& f, int axis) {
    auto s = forward_full(f);
    const auto modes = full_modes(f.grid());
    for (int c = 0; c < s.components; ++c) {
        auto co = s.component(c);
        for (std::size_t m = 0; m < modes.size(); ++m) co[m] *= cplx(0, modes[m].xi[axis]);
    }
    return inverse_full(s);
}

/// Spectral divergence of a full-torus vector field.
inline Field spectral_divergence_full(const Field& v) {
    const GridSpec& g = v.grid();
    auto s = forward_full(v);
    const auto modes = full_modes(g);
    SpectralSlice d{g, Extent::full, 1, s.modes_per_component,
                    std::vector<cplx>(s.modes_per_component)};
    for (std::size_t m = 0; m < modes.size(); ++m)
        for (int a = 0; a < g.dim(); ++a) d.coeffs[m] += cplx(0, modes[m].xi[a]) * s.component(a)[m];
    return inverse_full(d);
}

/// Spectral gradient of a full-torus scalar field.
inline Field spectral_gradient_full(const Field& f) {
    const GridSpec& g = f.grid();
    auto s = forward_full(f);
    const auto modes = full_modes(g);
    SpectralSlice out{g, Extent::full, g.dim(), s.modes_per_component, {}};
    out.coeffs.resize(out.modes_per_component * g.dim());
    for (int a = 0; a < g.dim(); ++a)
        for (std::size_t m = 0; m < modes.size(); ++m)
            out.component(a)[m] = cplx(0, modes[m].xi[a]) * s.coeffs[m];
    return inverse_full(out);
}

// ---------------------------------------------------------------------------
// Tangential operators on wall data

/// R'_axis applied to every component and slice of wall data.
inline BoundaryField riesz_tangential(const BoundaryField& b, int axis) {
    const GridSpec& g = b.grid();
    if (axis < 0 || axis >= g.dim() - 1) throw ValidationError("riesz_tangential: axis out of range");
    const auto modes = tangential_modes(g);
    BoundaryField out(g, b.components());
    for (int k = 0; k < b.n_slices(); ++k) {
        std::span<const double> in(b.values().data() + k * b.slice_size(), b.slice_size());
        auto hat = forward_wall(g, in, b.components());
        for (auto& co : hat)
            for (std::size_t m = 0; m < modes.size(); ++m)
                co[m] = modes[m].norm == 0 ? cplx(0)
                                           : cplx(0, -modes[m].xi[axis] / modes[m].norm) * co[m];
        inverse_wall(g, hat, std::span<double>(out.values().data() + k * b.slice_size(),
                                               b.slice_size()));
    }
    return out;
}

/// Poisson extension of one scalar wall slice: per mode exp(-|xi'| x_n); mean constant in x_n.
inline Field harmonic_extension(const GridSpec& g, std::span<const double> wall) {
    if (wall.size() != g.tangential_points())
        throw ValidationError("harmonic_extension: wall slice has wrong size");
    const auto modes = tangential_modes(g);
    const auto hat = forward_wall(g, wall, 1)[0];
    SpectralSlice s{g, Extent::half, 1, modes.size() * g.n_normal(), {}};
    s.coeffs.resize(s.modes_per_component);
    for (int j = 0; j < g.n_normal(); ++j) {
        const double xn = g.x_normal(j);
        for (std::size_t m = 0; m < modes.size(); ++m)
            s.coeffs[j * modes.size() + m] = std::exp(-modes[m].norm * xn) * hat[m];
    }
    return inverse_tangential(s);
}

/// Poisson extension of every component and slice of wall data.
inline SpaceTimeField harmonic_extension(const BoundaryField& b) {
    const GridSpec& g = b.grid();
    SpaceTimeField out(g, Extent::half, b.components());
    std::vector<double> wall(g.tangential_points());
    for (int k = 0; k < b.n_slices(); ++k)
        for (int c = 0; c < b.components(); ++c) {
            for (std::size_t s = 0; s < wall.size(); ++s) wall[s] = b.at(k, s, c);
            const Field ext = harmonic_extension(g, wall);
            for (int j = 0; j < g.n_normal(); ++j)
                for (std::size_t s = 0; s < wall.size(); ++s) out.at(k, j, s, c) = ext.at(j, s, 0);
        }
    return out;
}

}  // namespace hstokes
