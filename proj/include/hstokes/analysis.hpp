#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <map>
#include <string>
#include <vector>

#include "hstokes/differentiation.hpp"
#include "hstokes/error.hpp"
#include "hstokes/field.hpp"
#include "hstokes/parallel.hpp"

namespace hstokes {

enum class SeminormMode { exact, sampled };

struct SeminormOptions {
    SeminormMode mode = SeminormMode::sampled;
    std::size_t random_pairs = 1'000'000;
    std::uint64_t seed = 20240917;
    std::size_t exact_point_limit = 100'000;
};

struct HoelderReport {
    double linf = 0;
    double space_seminorm = 0;
    double time_seminorm = 0;
    double alpha = 0;
    SeminormMode mode = SeminormMode::sampled;
    std::size_t pairs_evaluated = 0;
    /// Sampled mode only: spread between the two estimates seeded by disjoint
    /// halves of the random pairs (both also share the ladder search).
    double confidence_margin = 0;
    std::string pair_budget;

    double norm() const { return linf + space_seminorm + time_seminorm; }
};

namespace detail {

/// Flat view of a (time, row, tangential, component) array with its metric.
struct PointCloud {
    const double* v = nullptr;
    int nt = 1, rows = 1, n = 1, tdim = 1, comps = 1;
    double dxt = 1, dxn = 1, dt = 1;
    bool periodic_normal = false;

    std::size_t np() const { return tdim == 1 ? std::size_t(n) : std::size_t(n) * n; }
    std::size_t ns() const { return std::size_t(rows) * np(); }
    const double* at(int k, std::size_t p) const { return v + (std::size_t(k) * ns() + p) * comps; }

    double diff(const double* a, const double* b) const {
        double m = 0;
        for (int c = 0; c < comps; ++c) m = std::max(m, std::abs(a[c] - b[c]));
        return m;
    }
};

inline PointCloud cloud_of(const SpaceTimeField& f) {
    const GridSpec& g = f.grid();
    return {f.values().data(), f.n_slices(), f.rows(), g.n_tangential(), g.dim() - 1, f.components(),
            g.dx_tangential(), g.dx_normal(), g.dt(), f.extent() == Extent::full};
}

inline PointCloud cloud_of(const BoundaryField& b) {
    const GridSpec& g = b.grid();
    return {b.values().data(), b.n_slices(), 1, g.n_tangential(), g.dim() - 1, b.components(),
            g.dx_tangential(), g.dx_normal(), g.dt(), false};
}

inline PointCloud cloud_of(const Field& f) {
    const GridSpec& g = f.grid();
    return {f.values().data(), 1, f.rows(), g.n_tangential(), g.dim() - 1, f.components(),
            g.dx_tangential(), g.dx_normal(), g.dt(), f.extent() == Extent::full};
}

/// |x - y|^alpha indexed by (normal offset, minimum-image tangential offsets).
class DistanceTable {
public:
    DistanceTable(const PointCloud& c, double alpha) : c_(c), half_(c.n / 2 + 1) {
        const int dr_max = c.periodic_normal ? c.rows / 2 + 1 : c.rows;
        const std::size_t nt = c.tdim == 1 ? half_ : std::size_t(half_) * half_;
        stride_ = nt;
        table_.resize(std::size_t(dr_max) * nt);
        for (int dr = 0; dr < dr_max; ++dr)
            for (std::size_t t = 0; t < nt; ++t) {
                const double x = double(c.tdim == 1 ? t : t / half_) * c.dxt;
                const double y = c.tdim == 1 ? 0.0 : double(t % half_) * c.dxt;
                const double d2 = x * x + y * y + (dr * c.dxn) * (dr * c.dxn);
                table_[dr * nt + t] = std::pow(std::sqrt(d2), alpha);
            }
    }

    double operator()(std::size_t p, std::size_t q) const {
        const std::size_t np = c_.np();
        int dr = std::abs(int(p / np) - int(q / np));
        if (c_.periodic_normal) dr = std::min(dr, c_.rows - dr);
        const std::size_t s1 = p % np, s2 = q % np;
        std::size_t t;
        if (c_.tdim == 1) {
            t = wrap(int(s1) - int(s2));
        } else {
            t = wrap(int(s1 / c_.n) - int(s2 / c_.n)) * half_ + wrap(int(s1 % c_.n) - int(s2 % c_.n));
        }
        return table_[dr * stride_ + t];
    }

private:
    std::size_t wrap(int d) const {
        d = std::abs(d);
        return std::size_t(std::min(d, c_.n - d));
    }
    PointCloud c_;
    int half_;
    std::size_t stride_ = 1;
    std::vector<double> table_;
};

struct Sup {
    double space = 0, time = 0;
};

inline Sup exact_sup(const PointCloud& c, double alpha) {
    const DistanceTable dist(c, alpha);
    const std::size_t ns = c.ns();
    std::vector<double> sp(ns, 0.0), tm(ns, 0.0);
    std::vector<double> lag(c.nt);
    for (int l = 1; l < c.nt; ++l) lag[l] = std::pow(l * c.dt, alpha / 2);
    parallel_for(long(ns), [&](long pi) {
        const std::size_t p = std::size_t(pi);
        double s = 0, t = 0;
        for (int k = 0; k < c.nt; ++k) {
            const double* a = c.at(k, p);
            for (std::size_t q = p + 1; q < ns; ++q) s = std::max(s, c.diff(a, c.at(k, q)) / dist(p, q));
            for (int k2 = k + 1; k2 < c.nt; ++k2)
                t = std::max(t, c.diff(a, c.at(k2, p)) / lag[k2 - k]);
        }
        sp[p] = s;
        tm[p] = t;
    });
    return {*std::max_element(sp.begin(), sp.end()), *std::max_element(tm.begin(), tm.end())};
}

/// Spatial displacement (d1, d2 tangential, dr normal); dr >= 0 after normalization.
struct Offset {
    int d1 = 0, d2 = 0, dr = 0;
    auto operator<=>(const Offset&) const = default;
};

inline int wrap_signed(int d, int n) {
    d = ((d % n) + n) % n;
    return d > n / 2 ? d - n : d;
}

inline Offset normalized(const PointCloud& c, Offset o) {
    o.d1 = wrap_signed(o.d1, c.n);
    o.d2 = c.tdim == 1 ? 0 : wrap_signed(o.d2, c.n);
    if (c.periodic_normal) o.dr = wrap_signed(o.dr, c.rows);
    if (o.dr < 0 || (o.dr == 0 && (o.d1 < 0 || (o.d1 == 0 && o.d2 < 0)))) o = {-o.d1, -o.d2, -o.dr};
    o.d1 = wrap_signed(o.d1, c.n);
    o.d2 = c.tdim == 1 ? 0 : wrap_signed(o.d2, c.n);
    return o;
}

inline Offset offset_between(const PointCloud& c, std::size_t p, std::size_t q) {
    const std::size_t np = c.np();
    const int rp = int(p / np), rq = int(q / np);
    const std::size_t sp = p % np, sq = q % np;
    Offset o;
    o.dr = rq - rp;
    if (c.tdim == 1) {
        o.d1 = int(sq) - int(sp);
    } else {
        o.d1 = int(sq / c.n) - int(sp / c.n);
        o.d2 = int(sq % c.n) - int(sp % c.n);
    }
    return normalized(c, o);
}

/// sup over all times and base points of |f(p + o) - f(p)| / |o|^alpha.
inline double offset_sup(const PointCloud& c, const DistanceTable& dist, Offset o, std::size_t& count) {
    if (o.d1 == 0 && o.d2 == 0 && o.dr == 0) return 0;
    if (!c.periodic_normal && o.dr >= c.rows) return 0;
    const std::size_t np = c.np();
    const std::size_t ns = c.ns();
    std::vector<double> best(ns, 0.0);
    std::vector<char> used(ns, 0);
    parallel_for(long(ns), [&](long pi) {
        const std::size_t p = std::size_t(pi);
        int r = int(p / np) + o.dr;
        if (c.periodic_normal) r %= c.rows;
        else if (r >= c.rows) return;
        const std::size_t s = p % np;
        std::size_t s2;
        if (c.tdim == 1) {
            s2 = std::size_t(((int(s) + o.d1) % c.n + c.n) % c.n);
        } else {
            const int i1 = ((int(s / c.n) + o.d1) % c.n + c.n) % c.n;
            const int i2 = ((int(s % c.n) + o.d2) % c.n + c.n) % c.n;
            s2 = std::size_t(i1) * c.n + std::size_t(i2);
        }
        const std::size_t q = std::size_t(r) * np + s2;
        const double d = dist(p, q);
        double m = 0;
        for (int k = 0; k < c.nt; ++k) m = std::max(m, c.diff(c.at(k, p), c.at(k, q)));
        best[p] = m / d;
        used[p] = 1;
    });
    for (char u : used) count += std::size_t(u) * c.nt;
    return *std::max_element(best.begin(), best.end());
}

/// sup over all base points and times of |f(t + lag) - f(t)| / (lag dt)^(alpha/2).
inline double lag_sup(const PointCloud& c, double alpha, int lag, std::size_t& count) {
    if (lag <= 0 || lag >= c.nt) return 0;
    const std::size_t ns = c.ns();
    const double d = std::pow(lag * c.dt, alpha / 2);
    std::vector<double> best(ns, 0.0);
    parallel_for(long(ns), [&](long pi) {
        double m = 0;
        for (int k = 0; k + lag < c.nt; ++k)
            m = std::max(m, c.diff(c.at(k, std::size_t(pi)), c.at(k + lag, std::size_t(pi))));
        best[pi] = m / d;
    });
    count += ns * std::size_t(c.nt - lag);
    return *std::max_element(best.begin(), best.end());
}

struct Candidate {
    double value = 0;
    Offset offset;
    int lag = 0;
};

/// Offsets of 1, 2, 4, ... along every axis and lags 1, 2, 4, ... in time, from every point.
inline std::array<Candidate, 2> ladder_sup(const PointCloud& c, const DistanceTable& dist, double alpha,
                                           std::size_t& count) {
    std::array<Candidate, 2> best{};
    for (int axis = 0; axis <= c.tdim; ++axis) {
        const int extent = axis == c.tdim ? (c.periodic_normal ? c.rows / 2 + 1 : c.rows) : c.n / 2 + 1;
        for (int step = 1; step < extent; step *= 2) {
            Offset o;
            (axis == c.tdim ? o.dr : axis == 0 ? o.d1 : o.d2) = step;
            const double v = offset_sup(c, dist, o, count);
            if (v > best[0].value) best[0] = {v, o, 0};
        }
    }
    for (int lag = 1; lag < c.nt; lag *= 2) {
        const double v = lag_sup(c, alpha, lag, count);
        if (v > best[1].value) best[1] = {v, {}, lag};
    }
    return best;
}

/// Two disjoint batches of fixed-seed random pairs; per batch the best spatial and temporal candidate.
inline std::array<std::array<Candidate, 2>, 2> random_sup(const PointCloud& c, const DistanceTable& dist,
                                                          double alpha, std::size_t budget, std::uint64_t seed) {
    const std::size_t ns = c.ns();
    std::mt19937_64 rng(seed);
    std::array<std::array<Candidate, 2>, 2> out{};
    for (std::size_t i = 0; i < budget; ++i) {
        auto& s = out[i % 2];
        if ((i / 2) % 2 == 0) {
            if (ns < 2) continue;
            const int k = int(rng() % std::uint64_t(c.nt));
            const std::size_t p = rng() % ns;
            std::size_t q = rng() % (ns - 1);
            if (q >= p) ++q;
            const double v = c.diff(c.at(k, p), c.at(k, q)) / dist(p, q);
            if (v > s[0].value) s[0] = {v, offset_between(c, p, q), 0};
        } else {
            if (c.nt < 2) continue;
            const std::size_t p = rng() % ns;
            const int k1 = int(rng() % std::uint64_t(c.nt));
            int k2 = int(rng() % std::uint64_t(c.nt - 1));
            if (k2 >= k1) ++k2;
            const double d = std::pow(std::abs(k1 - k2) * c.dt, alpha / 2);
            const double v = c.diff(c.at(k1, p), c.at(k2, p)) / d;
            if (v > s[1].value) s[1] = {v, {}, std::abs(k1 - k2)};
        }
    }
    return out;
}

/// Steepest-ascent search over neighbouring offsets from a starting candidate; `memo` is shared across searches.
inline Candidate climb_space(const PointCloud& c, const DistanceTable& dist, Candidate start,
                             std::map<Offset, double>& memo, std::size_t& count) {
    if (start.value <= 0) return start;
    const int d2_range = c.tdim == 1 ? 0 : 1;
    for (;;) {
        Candidate next = start;
        for (int a = -1; a <= 1; ++a)
            for (int b = -d2_range; b <= d2_range; ++b)
                for (int e = -1; e <= 1; ++e) {
                    const Offset o = normalized(c, {start.offset.d1 + a, start.offset.d2 + b, start.offset.dr + e});
                    auto it = memo.find(o);
                    if (it == memo.end()) it = memo.emplace(o, offset_sup(c, dist, o, count)).first;
                    if (it->second > next.value) next = {it->second, o, 0};
                }
        if (next.value <= start.value) return start;
        start = next;
    }
}

inline Candidate climb_time(const PointCloud& c, double alpha, Candidate start, std::map<int, double>& memo,
                            std::size_t& count) {
    if (start.value <= 0) return start;
    for (;;) {
        Candidate next = start;
        for (int l : {start.lag - 1, start.lag + 1}) {
            auto it = memo.find(l);
            if (it == memo.end()) it = memo.emplace(l, lag_sup(c, alpha, l, count)).first;
            if (it->second > next.value) next = {it->second, {}, l};
        }
        if (next.value <= start.value) return start;
        start = next;
    }
}

inline HoelderReport seminorm_of(const PointCloud& c, double alpha, const SeminormOptions& opt) {
    if (!(alpha > 0 && alpha < 1)) throw ValidationError("anisotropic_seminorm: alpha must lie in (0,1)");
    HoelderReport r;
    r.alpha = alpha;
    r.mode = opt.mode;
    const std::size_t total = c.ns() * c.nt;
    for (std::size_t i = 0; i < total * c.comps; ++i) r.linf = std::max(r.linf, std::abs(c.v[i]));
    if (opt.mode == SeminormMode::exact) {
        if (total > opt.exact_point_limit)
            throw ValidationError("anisotropic_seminorm: exact mode is limited to " +
                                  std::to_string(opt.exact_point_limit) + " space-time points, got " +
                                  std::to_string(total));
        const Sup s = exact_sup(c, alpha);
        r.space_seminorm = s.space;
        r.time_seminorm = s.time;
        r.pairs_evaluated = c.nt * c.ns() * (c.ns() - 1) / 2 + c.ns() * c.nt * (c.nt - 1) / 2;
        r.pair_budget = "exact: all same-time spatial pairs and all same-point time pairs";
        return r;
    }
    const DistanceTable dist(c, alpha);
    std::size_t count = 0;
    const auto ladder = ladder_sup(c, dist, alpha, count);
    const auto halves = random_sup(c, dist, alpha, opt.random_pairs, opt.seed);
    count += opt.random_pairs;
    // Each half seeds its own search; both also start from the ladder optimum.
    std::array<Sup, 2> est{};
    std::map<Offset, double> space_memo;
    std::map<int, double> time_memo;
    const Candidate climbed_ladder_space = climb_space(c, dist, ladder[0], space_memo, count);
    const Candidate climbed_ladder_time = climb_time(c, alpha, ladder[1], time_memo, count);
    for (int h = 0; h < 2; ++h) {
        const Candidate sp = climb_space(c, dist, halves[h][0], space_memo, count);
        const Candidate tm = climb_time(c, alpha, halves[h][1], time_memo, count);
        est[h].space = std::max({climbed_ladder_space.value, sp.value, halves[h][0].value});
        est[h].time = std::max({climbed_ladder_time.value, tm.value, halves[h][1].value});
    }
    r.space_seminorm = std::max(est[0].space, est[1].space);
    r.time_seminorm = std::max(est[0].time, est[1].time);
    r.confidence_margin = std::max(std::abs(est[0].space - est[1].space), std::abs(est[0].time - est[1].time));
    r.pairs_evaluated = count;
    r.pair_budget = "sampled: dyadic axis/time ladder from every point + " + std::to_string(opt.random_pairs) +
                    " random pairs (seed " + std::to_string(opt.seed) +
                    ") + steepest-ascent offset search from the best ladder and per-half random pairs";
    return r;
}

}  // namespace detail

/**
 * Discrete anisotropic Hoelder estimate: sup norm, spatial seminorm
 * sup |f(x,t) - f(y,t)| / |x-y|^alpha and temporal seminorm
 * sup |f(x,t) - f(x,s)| / |t-s|^(alpha/2). Vector and tensor values use the
 * max-abs norm over components. Tangential distances use the minimum image.
 */
inline HoelderReport anisotropic_seminorm(const SpaceTimeField& f, double alpha,
                                          const SeminormOptions& opt = {}) {
    return detail::seminorm_of(detail::cloud_of(f), alpha, opt);
}

inline HoelderReport anisotropic_seminorm(const BoundaryField& b, double alpha,
                                          const SeminormOptions& opt = {}) {
    return detail::seminorm_of(detail::cloud_of(b), alpha, opt);
}

inline HoelderReport anisotropic_seminorm(const Field& f, double alpha,
                                          const SeminormOptions& opt = {}) {
    return detail::seminorm_of(detail::cloud_of(f), alpha, opt);
}

// ---------------------------------------------------------------------------
// Divergence and traces

/// Discrete sup |div u| over all slices, plus the sup of |grad u| for scaling.
struct DivergenceReport {
    double sup = 0;
    double gradient_scale = 0;
    double relative() const { return gradient_scale > 0 ? sup / gradient_scale : sup; }
};

inline DivergenceReport divergence_report(const SpaceTimeField& u) {
    if (u.components() != u.grid().dim()) throw ValidationError("divergence: expects a vector field");
    std::vector<DivergenceReport> per(u.n_slices());
    parallel_for(u.n_slices(), [&](long k) {
        const Field s = u.slice_field(int(k));
        per[k].sup = linf(divergence(s).values());
        per[k].gradient_scale = linf(gradient(s).values());
    });
    DivergenceReport r;
    for (const auto& p : per) {
        r.sup = std::max(r.sup, p.sup);
        r.gradient_scale = std::max(r.gradient_scale, p.gradient_scale);
    }
    return r;
}

inline double divergence_sup(const SpaceTimeField& u) { return divergence_report(u).sup; }

struct TraceReport {
    double initial_err = 0;        ///< sup |u(.,0) - h|
    double boundary_err = 0;       ///< sup |u(x_n = 0) - g| on the assigned row
    double boundary_err_row1 = 0;  ///< sup |u(x_n = dx_n) - g|, the limit proxy
};

inline TraceReport trace_error(const SpaceTimeField& u, const Field& h, const BoundaryField& g) {
    if (u.extent() != Extent::half || h.values().size() != u.slice_size() ||
        g.components() != u.components())
        throw ValidationError("trace_error: shape mismatch");
    TraceReport r;
    auto u0 = u.slice(0);
    for (std::size_t i = 0; i < u0.size(); ++i)
        r.initial_err = std::max(r.initial_err, std::abs(u0[i] - h.values()[i]));
    for (int k = 0; k < u.n_slices(); ++k)
        for (std::size_t s = 0; s < u.grid().tangential_points(); ++s)
            for (int c = 0; c < u.components(); ++c) {
                r.boundary_err = std::max(r.boundary_err, std::abs(u.at(k, 0, s, c) - g.at(k, s, c)));
                if (u.rows() > 1)
                    r.boundary_err_row1 =
                        std::max(r.boundary_err_row1, std::abs(u.at(k, 1, s, c) - g.at(k, s, c)));
            }
    return r;
}

// ---------------------------------------------------------------------------
// Divergence-free test fields and weak residuals

/// Value, gradient (grad[k*3 + i] = d_k Phi_i) and time derivative of a test field.
struct TestFieldValue {
    std::array<double, 3> phi{};
    std::array<double, 9> grad{};
    std::array<double, 3> phi_t{};
};

/**
 * Compactly supported test field. `eval` may be called anywhere; `t_lo`,
 * `t_hi`, `xn_lo`, `xn_hi` bound the support used to skip quadrature nodes.
 */
struct TestField {
    std::function<TestFieldValue(const Point&, double)> eval;
    double t_lo = 0, t_hi = 0;
    double xn_lo = 0, xn_hi = 0;
};

namespace detail {

/// Smooth bump exp(-1/(1-s^2)) and its first two derivatives at s.
inline std::array<double, 3> bump(double s) {
    if (std::abs(s) >= 1) return {0, 0, 0};
    const double q = 1 - s * s;
    const double b = std::exp(-1 / q);
    const double d1 = -2 * s / (q * q) * b;
    const double d2 = (4 * s * s / (q * q * q * q) - 2 / (q * q) - 8 * s * s / (q * q * q)) * b;
    return {b, d1, d2};
}

/// Scaled bump centered at c with radius r; periodic coordinates are wrapped to the nearest image.
inline std::array<double, 3> bump_at(double x, double c, double r, double period = 0) {
    double d = x - c;
    if (period > 0) d -= period * std::round(d / period);
    const auto b = bump(d / r);
    return {b[0], b[1] / r, b[2] / (r * r)};
}

}  // namespace detail

/**
 * Fixed family of divergence-free test fields Phi = curl(c psi) with psi a
 * product of C-infinity bumps in every spatial axis and in time; in two
 * dimensions Phi = (d_n psi, -d_1 psi). Supports stay inside
 * (0, H) x (0, T); tangential supports wrap periodically.
 */
inline std::vector<TestField> make_test_family(const GridSpec& g, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&](double a, double b) {
        return a + (b - a) * double(rng() >> 11) * 0x1.0p-53;
    };
    const int d = g.dim();
    const double L = g.period_l();
    const double H = g.height_h();
    const double T = g.t_final();
    std::vector<TestField> family;
    for (int m = 0; m < count; ++m) {
        std::array<double, 3> c{}, r{};
        for (int a = 0; a < d - 1; ++a) {
            c[a] = uni(0, L);
            r[a] = uni(L / 8, L / 3);
        }
        const double top = std::min(H, 6.0);
        const double lo = uni(0.05 * top, 0.2 * top);
        const double hi = uni(lo + 0.2 * top, 0.8 * top);
        c[d - 1] = 0.5 * (lo + hi);
        r[d - 1] = 0.5 * (hi - lo);
        const double tlo = uni(0.02 * T, 0.2 * T);
        const double thi = uni(0.6 * T, 0.98 * T);
        const double ct = 0.5 * (tlo + thi), rt = 0.5 * (thi - tlo);
        std::array<double, 3> cv{0, 0, 1};
        if (d == 3)
            for (auto& v : cv) v = uni(-1, 1);
        const double amp = uni(0.5, 1.5);

        TestField tf;
        tf.t_lo = tlo;
        tf.t_hi = thi;
        tf.xn_lo = lo;
        tf.xn_hi = hi;
        tf.eval = [=](const Point& x, double t) {
            TestFieldValue out;
            const auto bt = detail::bump_at(t, ct, rt);
            if (bt[0] == 0) return out;
            std::array<std::array<double, 3>, 3> b{};
            for (int a = 0; a < d; ++a) {
                b[a] = detail::bump_at(x[a], c[a], r[a], a < d - 1 ? L : 0.0);
                if (b[a][0] == 0) return out;
            }
            // Gradient and Hessian of psi without the time factor.
            auto prod = [&](int skip1, int o1, int skip2, int o2) {
                double p = amp;
                for (int a = 0; a < d; ++a) {
                    int order = 0;
                    if (a == skip1) order += o1;
                    if (a == skip2) order += o2;
                    p *= b[a][order];
                }
                return p;
            };
            std::array<double, 3> grad{};
            std::array<std::array<double, 3>, 3> hess{};
            for (int a = 0; a < d; ++a) grad[a] = prod(a, 1, -1, 0);
            for (int a = 0; a < d; ++a)
                for (int e = a; e < d; ++e) hess[a][e] = hess[e][a] = a == e ? prod(a, 2, -1, 0)
                                                                             : prod(a, 1, e, 1);
            if (d == 2) {
                out.phi = {grad[1] * bt[0], -grad[0] * bt[0], 0};
                out.phi_t = {grad[1] * bt[1], -grad[0] * bt[1], 0};
                for (int k = 0; k < 2; ++k) {
                    out.grad[k * 3 + 0] = hess[k][1] * bt[0];
                    out.grad[k * 3 + 1] = -hess[k][0] * bt[0];
                }
            } else {
                // Phi_i = eps_ijk d_j psi c_k
                auto cross = [&](const std::array<double, 3>& v) {
                    return std::array<double, 3>{v[1] * cv[2] - v[2] * cv[1],
                                                 v[2] * cv[0] - v[0] * cv[2],
                                                 v[0] * cv[1] - v[1] * cv[0]};
                };
                const auto phi = cross(grad);
                for (int i = 0; i < 3; ++i) {
                    out.phi[i] = phi[i] * bt[0];
                    out.phi_t[i] = phi[i] * bt[1];
                }
                for (int k = 0; k < 3; ++k) {
                    const auto row = cross(hess[k]);
                    for (int i = 0; i < 3; ++i) out.grad[k * 3 + i] = row[i] * bt[0];
                }
            }
            return out;
        };
        family.push_back(std::move(tf));
    }
    return family;
}

struct WeakResidual {
    double raw = 0;    ///< signed integral of grad u : grad Phi - u . Phi_t + F : grad Phi
    double scale = 0;  ///< integral of the absolute values of the three terms
    double normalized() const { return scale > 0 ? std::abs(raw) / scale : 0.0; }
};

namespace detail {

inline void require_solenoidal(const TestField& phi, const GridSpec& g) {
    const int d = g.dim();
    const double tm = 0.5 * (phi.t_lo + phi.t_hi);
    double worst = 0, mag = 0;
    for (int j = 0; j < g.n_normal(); ++j)
        for (std::size_t s = 0; s < g.tangential_points(); ++s) {
            const auto v = phi.eval(make_point(g, s, g.x_normal(j)), tm);
            double div = 0;
            for (int a = 0; a < d; ++a) div += v.grad[a * 3 + a];
            for (double x : v.grad) mag = std::max(mag, std::abs(x));
            worst = std::max(worst, std::abs(div));
        }
    if (worst > 1e-10 * std::max(mag, 1e-300))
        throw ValidationError("weak residual: test field is not divergence-free");
}

}  // namespace detail

/**
 * Weak-form gap of a Stokes solution u with force potential F (f = div F)
 * against one divergence-free test field, by trapezoidal quadrature.
 * `grad_u` holds d_k u_i in component k*dim + i; F may be empty.
 */
inline WeakResidual weak_residual(const SpaceTimeField& u, const SpaceTimeField& grad_u,
                                  const SpaceTimeField* F, const TestField& phi) {
    const GridSpec& g = u.grid();
    const int d = g.dim();
    const double cell = std::pow(g.dx_tangential(), d - 1) * g.dx_normal();
    WeakResidual r;
    for (int k = 0; k < u.n_slices(); ++k) {
        const double t = g.time(k);
        if (t <= phi.t_lo || t >= phi.t_hi) continue;
        const double wt = (k == 0 || k == u.n_slices() - 1) ? 0.5 * g.dt() : g.dt();
        for (int j = 0; j < u.rows(); ++j) {
            const double xn = g.x_normal(j);
            if (xn <= phi.xn_lo || xn >= phi.xn_hi) continue;
            const double wx = (j == 0 || j == u.rows() - 1) ? 0.5 : 1.0;
            for (std::size_t s = 0; s < g.tangential_points(); ++s) {
                const auto v = phi.eval(detail::make_point(g, s, xn), t);
                double a = 0, b = 0, c = 0;
                for (int kk = 0; kk < d; ++kk)
                    for (int i = 0; i < d; ++i) {
                        a += grad_u.at(k, j, s, kk * d + i) * v.grad[kk * 3 + i];
                        if (F) c += F->at(k, j, s, kk * d + i) * v.grad[kk * 3 + i];
                    }
                for (int i = 0; i < d; ++i) b += u.at(k, j, s, i) * v.phi_t[i];
                const double w = wt * wx * cell;
                r.raw += w * (a - b + c);
                r.scale += w * (std::abs(a) + std::abs(b) + std::abs(c));
            }
        }
    }
    return r;
}

/// Gradient tensor of every slice of a vector field.
inline SpaceTimeField gradient_field(const SpaceTimeField& u) {
    const int d = u.grid().dim();
    SpaceTimeField out(u.grid(), u.extent(), u.components() * d);
    parallel_for(u.n_slices(), [&](long k) { out.set_slice(int(k), gradient(u.slice_field(int(k)))); });
    return out;
}

/// Pointwise u (x) u, stored as component k*dim + i = u_k u_i.
inline SpaceTimeField outer(const SpaceTimeField& u) {
    const int d = u.components();
    SpaceTimeField out(u.grid(), u.extent(), d * d);
    auto in = u.values();
    auto o = out.values();
    const std::size_t n = in.size() / d;
    for (std::size_t p = 0; p < n; ++p)
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i) o[p * d * d + k * d + i] = in[p * d + k] * in[p * d + i];
    return out;
}

/// Max over the family of the normalized weak-form gap for the Stokes system with force potential F.
inline double weak_residual_stokes(const SpaceTimeField& u, const SpaceTimeField* F,
                                   const std::vector<TestField>& family) {
    if (u.extent() != Extent::half || u.components() != u.grid().dim())
        throw ValidationError("weak_residual_stokes: expects a half-grid vector field");
    if (F && (F->components() != u.components() * u.components() || !(F->grid() == u.grid())))
        throw ValidationError("weak_residual_stokes: F shape mismatch");
    for (const auto& phi : family) detail::require_solenoidal(phi, u.grid());
    const SpaceTimeField gu = gradient_field(u);
    std::vector<double> res(family.size());
    parallel_for(long(family.size()),
                 [&](long i) { res[i] = weak_residual(u, gu, F, family[i]).normalized(); });
    return res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
}

/// Navier-Stokes weak-form gap: the Stokes form with F = -u (x) u.
inline double weak_residual_ns(const SpaceTimeField& u, const std::vector<TestField>& family) {
    SpaceTimeField F = outer(u);
    F *= -1.0;
    return weak_residual_stokes(u, &F, family);
}

}  // namespace hstokes
