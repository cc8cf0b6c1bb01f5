#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "hstokes/error.hpp"
#include "hstokes/grid.hpp"

namespace hstokes {

/// Spatial point; entries 0..dim-2 are tangential, entry dim-1 is x_n.
using Point = std::array<double, 3>;

namespace detail {

inline void require_finite(std::span<const double> v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw ValidationError(std::string(what) + ": non-finite value");
}

inline Point make_point(const GridSpec& g, std::size_t tan, double xn) {
    Point p{0, 0, 0};
    for (int a = 0; a < g.dim() - 1; ++a) p[a] = g.x_tangential(tan, a);
    p[g.dim() - 1] = xn;
    return p;
}

}  // namespace detail

/**
 * One time slice of a scalar/vector/tensor field.
 *
 * Layout is row-major (x_n row, tangential axes, component). Tensor fields use
 * component k*dim + i for the entry F_{ki}.
 */
class Field {
public:
    Field() = default;
    Field(const GridSpec& grid, Extent extent, int components)
        : grid_(grid),
          extent_(extent),
          comps_(components),
          values_(std::size_t(grid.rows(extent)) * grid.tangential_points() * components, 0.0) {}

    const GridSpec& grid() const { return grid_; }
    Extent extent() const { return extent_; }
    int components() const { return comps_; }
    int rows() const { return grid_.rows(extent_); }
    std::size_t tangential_points() const { return grid_.tangential_points(); }

    std::size_t index(int row, std::size_t tan, int c) const {
        return (std::size_t(row) * grid_.tangential_points() + tan) * comps_ + c;
    }
    double& at(int row, std::size_t tan, int c) { return values_[index(row, tan, c)]; }
    double at(int row, std::size_t tan, int c) const { return values_[index(row, tan, c)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

private:
    GridSpec grid_;
    Extent extent_ = Extent::half;
    int comps_ = 1;
    std::vector<double> values_;
};

/// Time-indexed stack of slices; layout (time, x_n row, tangential axes, component).
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    SpaceTimeField(const GridSpec& grid, Extent extent, int components)
        : grid_(grid),
          extent_(extent),
          comps_(components),
          slice_size_(std::size_t(grid.rows(extent)) * grid.tangential_points() * components),
          values_(slice_size_ * grid.n_time(), 0.0) {}

    const GridSpec& grid() const { return grid_; }
    Extent extent() const { return extent_; }
    int components() const { return comps_; }
    int rows() const { return grid_.rows(extent_); }
    int n_slices() const { return grid_.n_time(); }
    std::size_t slice_size() const { return slice_size_; }

    std::size_t index(int k, int row, std::size_t tan, int c) const {
        return std::size_t(k) * slice_size_ +
               (std::size_t(row) * grid_.tangential_points() + tan) * comps_ + c;
    }
    double& at(int k, int row, std::size_t tan, int c) { return values_[index(k, row, tan, c)]; }
    double at(int k, int row, std::size_t tan, int c) const {
        return values_[index(k, row, tan, c)];
    }

    std::span<double> slice(int k) { return {values_.data() + k * slice_size_, slice_size_}; }
    std::span<const double> slice(int k) const {
        return {values_.data() + k * slice_size_, slice_size_};
    }
    Field slice_field(int k) const {
        Field f(grid_, extent_, comps_);
        std::ranges::copy(slice(k), f.values().begin());
        return f;
    }
    void set_slice(int k, const Field& f) {
        if (f.values().size() != slice_size_) throw ValidationError("set_slice: shape mismatch");
        std::ranges::copy(f.values(), slice(k).begin());
    }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool same_shape(const SpaceTimeField& o) const {
        return grid_ == o.grid_ && extent_ == o.extent_ && comps_ == o.comps_;
    }

    SpaceTimeField& operator+=(const SpaceTimeField& o) {
        check(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    SpaceTimeField& operator-=(const SpaceTimeField& o) {
        check(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    SpaceTimeField& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    friend SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) { return a += b; }
    friend SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) { return a -= b; }
    friend SpaceTimeField operator*(double s, SpaceTimeField a) { return a *= s; }

private:
    void check(const SpaceTimeField& o) const {
        if (!same_shape(o)) throw ValidationError("SpaceTimeField: shape mismatch");
    }

    GridSpec grid_;
    Extent extent_ = Extent::half;
    int comps_ = 1;
    std::size_t slice_size_ = 0;
    std::vector<double> values_;
};

/// Data on the wall {x_n = 0} x [0,T]; layout (time, tangential axes, component).
class BoundaryField {
public:
    BoundaryField() = default;
    BoundaryField(const GridSpec& grid, int components)
        : grid_(grid),
          comps_(components),
          values_(grid.tangential_points() * components * grid.n_time(), 0.0) {}

    const GridSpec& grid() const { return grid_; }
    int components() const { return comps_; }
    int n_slices() const { return grid_.n_time(); }
    std::size_t slice_size() const { return grid_.tangential_points() * comps_; }

    std::size_t index(int k, std::size_t tan, int c) const {
        return (std::size_t(k) * grid_.tangential_points() + tan) * comps_ + c;
    }
    double& at(int k, std::size_t tan, int c) { return values_[index(k, tan, c)]; }
    double at(int k, std::size_t tan, int c) const { return values_[index(k, tan, c)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool same_shape(const BoundaryField& o) const {
        return grid_ == o.grid_ && comps_ == o.comps_;
    }

private:
    GridSpec grid_;
    int comps_ = 1;
    std::vector<double> values_;
};

/// Pointwise evaluation of closure(point, t, out) at every half-grid node and slice.
template <class Closure>
SpaceTimeField sample(const GridSpec& grid, int components, Closure&& closure) {
    SpaceTimeField f(grid, Extent::half, components);
    std::vector<double> out(components);
    for (int k = 0; k < grid.n_time(); ++k) {
        const double t = grid.time(k);
        for (int j = 0; j < grid.n_normal(); ++j)
            for (std::size_t s = 0; s < grid.tangential_points(); ++s) {
                std::ranges::fill(out, 0.0);
                closure(detail::make_point(grid, s, grid.x_normal(j)), t, std::span<double>(out));
                for (int c = 0; c < components; ++c) f.at(k, j, s, c) = out[c];
            }
    }
    detail::require_finite(f.values(), "sample");
    return f;
}

/// Scalar convenience overload: closure(point, t) -> double.
template <class Closure>
    requires std::is_invocable_r_v<double, Closure, const Point&, double>
SpaceTimeField sample(const GridSpec& grid, Closure&& closure) {
    return sample(grid, 1, [&](const Point& p, double t, std::span<double> out) {
        out[0] = closure(p, t);
    });
}

/// Wall data sampled from closure(point with x_n = 0, t, out).
template <class Closure>
BoundaryField sample_boundary(const GridSpec& grid, int components, Closure&& closure) {
    BoundaryField b(grid, components);
    std::vector<double> out(components);
    for (int k = 0; k < grid.n_time(); ++k)
        for (std::size_t s = 0; s < grid.tangential_points(); ++s) {
            std::ranges::fill(out, 0.0);
            closure(detail::make_point(grid, s, 0.0), grid.time(k), std::span<double>(out));
            for (int c = 0; c < components; ++c) b.at(k, s, c) = out[c];
        }
    detail::require_finite(b.values(), "sample_boundary");
    return b;
}

/// Single time slice sampled from closure(point, out) on the half grid.
template <class Closure>
Field sample_slice(const GridSpec& grid, int components, Closure&& closure) {
    Field f(grid, Extent::half, components);
    std::vector<double> out(components);
    for (int j = 0; j < grid.n_normal(); ++j)
        for (std::size_t s = 0; s < grid.tangential_points(); ++s) {
            std::ranges::fill(out, 0.0);
            closure(detail::make_point(grid, s, grid.x_normal(j)), std::span<double>(out));
            for (int c = 0; c < components; ++c) f.at(j, s, c) = out[c];
        }
    detail::require_finite(f.values(), "sample_slice");
    return f;
}

/// Row `row` of a half-grid field as wall data; row 0 is the trace itself,
/// row 1 the first interior node used for limit studies.
inline BoundaryField boundary_trace(const SpaceTimeField& field, int row = 0) {
    if (field.extent() != Extent::half)
        throw ValidationError("boundary_trace: expects a half-grid field");
    if (row < 0 || row >= field.rows()) throw ValidationError("boundary_trace: row out of range");
    BoundaryField b(field.grid(), field.components());
    for (int k = 0; k < field.n_slices(); ++k)
        for (std::size_t s = 0; s < field.grid().tangential_points(); ++s)
            for (int c = 0; c < field.components(); ++c) b.at(k, s, c) = field.at(k, row, s, c);
    return b;
}

inline double linf(std::span<const double> v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace hstokes
