#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "hstokes/error.hpp"

namespace hstokes {

/// Whether a field lives on the physical half grid x_n in [0, H] or on the
/// doubled normal torus of extent 2H used by the full-space operators.
enum class Extent { half, full };

/**
 * Discretization of the truncated half space [0,L)^{n-1} x [0,H] x [0,T].
 *
 * Tangential axes are periodic with n_tangential points each. The normal axis
 * has n_normal nodes including both the wall x_n = 0 and the ceiling x_n = H.
 * Time has n_time uniformly spaced slices including t = 0 and t = T.
 */
class GridSpec {
public:
    GridSpec() = default;

    int dim() const { return dim_; }
    double period_l() const { return period_l_; }
    double height_h() const { return height_h_; }
    int n_tangential() const { return n_tangential_; }
    int n_normal() const { return n_normal_; }
    double t_final() const { return t_final_; }
    int n_time() const { return n_time_; }

    double dx_tangential() const { return period_l_ / n_tangential_; }
    double dx_normal() const { return height_h_ / (n_normal_ - 1); }
    double dt() const { return t_final_ / (n_time_ - 1); }

    /// Number of points on the tangential torus, n_tangential^(dim-1).
    std::size_t tangential_points() const {
        return dim_ == 2 ? std::size_t(n_tangential_)
                         : std::size_t(n_tangential_) * n_tangential_;
    }
    /// Number of r2c tangential modes stored per row.
    std::size_t tangential_modes() const {
        const std::size_t half = n_tangential_ / 2 + 1;
        return dim_ == 2 ? half : std::size_t(n_tangential_) * half;
    }
    /// Rows along x_n for the given extent: n_normal, or 2(n_normal-1) on the torus.
    int rows(Extent e) const { return e == Extent::half ? n_normal_ : 2 * (n_normal_ - 1); }

    double x_normal(int row) const { return row * dx_normal(); }
    /// Signed x_n of a full-torus row; rows past the ceiling map to negative heights.
    double x_normal_full(int row) const {
        const int nf = rows(Extent::full);
        return (row <= nf / 2 ? row : row - nf) * dx_normal();
    }
    double time(int k) const { return k * dt(); }

    /// Tangential coordinate of axis a (0-based) for a flat tangential index.
    double x_tangential(std::size_t flat, int axis) const {
        if (dim_ == 2) return double(flat) * dx_tangential();
        const std::size_t i = axis == 0 ? flat / n_tangential_ : flat % n_tangential_;
        return double(i) * dx_tangential();
    }

    /// Same grid with a shortened horizon; keeps dt when (n_time-1) is even.
    GridSpec with_time(double t_final, int n_time) const {
        GridSpec g = *this;
        g.t_final_ = t_final;
        g.n_time_ = n_time;
        return g;
    }

    bool operator==(const GridSpec&) const = default;

    friend GridSpec make_grid(int dim, double L, double H, int n_tangential, int n_normal,
                              double T, int n_time);

private:
    int dim_ = 2;
    double period_l_ = 2 * std::numbers::pi;
    double height_h_ = 1;
    int n_tangential_ = 2;
    int n_normal_ = 2;
    double t_final_ = 1;
    int n_time_ = 2;
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Validated constructor; throws ValidationError on any violated precondition.
inline GridSpec make_grid(int dim, double L, double H, int n_tangential, int n_normal,
                          double T, int n_time) {
    if (dim != 2 && dim != 3)
        throw ValidationError("grid: dim must be 2 or 3, got " + std::to_string(dim));
    if (!(L > 0) || !(H > 0) || !(T > 0) || !std::isfinite(L) || !std::isfinite(H) ||
        !std::isfinite(T))
        throw ValidationError("grid: extents L, H, T must be positive and finite");
    if (n_tangential < 2 || n_normal < 2 || n_time < 2)
        throw ValidationError("grid: all point counts must be >= 2");
    if (!is_power_of_two(n_tangential))
        throw ValidationError("grid: n_tangential must be a power of two, got " +
                              std::to_string(n_tangential));
    GridSpec g;
    g.dim_ = dim;
    g.period_l_ = L;
    g.height_h_ = H;
    g.n_tangential_ = n_tangential;
    g.n_normal_ = n_normal;
    g.t_final_ = T;
    g.n_time_ = n_time;
    return g;
}

}  // namespace hstokes
