#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace hstokes {

using cplx = std::complex<double>;

namespace fft {

/// fftw_malloc-backed buffer; every buffer has the same SIMD alignment, which
/// keeps new-array plan execution valid and bit-reproducible.
template <class T>
class AlignedBuffer {
public:
    explicit AlignedBuffer(std::size_t n)
        : n_(n), p_(static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)))) {
        if (!p_) throw std::bad_alloc();
    }
    T* data() { return p_.get(); }
    const T* data() const { return p_.get(); }
    std::size_t size() const { return n_; }
    std::span<T> span() { return {p_.get(), n_}; }

private:
    struct Free {
        void operator()(T* p) const { fftw_free(p); }
    };
    std::size_t n_;
    std::unique_ptr<T, Free> p_;
};

namespace detail {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

inline std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

/// Plans are created once per (dims, howmany) and never destroyed.
inline PlanPair plans_for(const std::vector<int>& dims, int howmany) {
    static std::map<std::pair<std::vector<int>, int>, PlanPair> cache;
    std::lock_guard lock(plan_mutex());
    auto key = std::make_pair(dims, howmany);
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    const int rank = int(dims.size());
    const int nreal = std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
    const int ncplx = nreal / dims.back() * (dims.back() / 2 + 1);
    AlignedBuffer<double> r(std::size_t(nreal) * howmany);
    AlignedBuffer<fftw_complex> c(std::size_t(ncplx) * howmany);
    PlanPair p;
    p.forward = fftw_plan_many_dft_r2c(rank, dims.data(), howmany, r.data(), nullptr, 1, nreal,
                                       c.data(), nullptr, 1, ncplx, FFTW_ESTIMATE);
    p.inverse = fftw_plan_many_dft_c2r(rank, dims.data(), howmany, c.data(), nullptr, 1, ncplx,
                                       r.data(), nullptr, 1, nreal, FFTW_ESTIMATE);
    if (!p.forward || !p.inverse) throw std::runtime_error("fftw: plan creation failed");
    cache.emplace(key, p);
    return p;
}

}  // namespace detail

/**
 * Batched real-to-complex transform over a row-major array of shape `dims`,
 * repeated `howmany` times contiguously. The inverse is normalized.
 */
class RealFft {
public:
    RealFft(std::vector<int> dims, int howmany) : dims_(std::move(dims)), howmany_(howmany) {
        real_size_ = std::accumulate(dims_.begin(), dims_.end(), std::size_t(1),
                                     std::multiplies<>());
        complex_size_ = real_size_ / dims_.back() * (dims_.back() / 2 + 1);
        plans_ = detail::plans_for(dims_, howmany_);
    }

    std::size_t real_size() const { return real_size_; }
    std::size_t complex_size() const { return complex_size_; }
    int howmany() const { return howmany_; }

    void forward(std::span<const double> in, std::span<cplx> out) const {
        if (in.size() != real_size_ * howmany_ || out.size() != complex_size_ * howmany_)
            throw std::invalid_argument("RealFft::forward: size mismatch");
        AlignedBuffer<double> r(in.size());
        AlignedBuffer<fftw_complex> c(out.size());
        std::copy(in.begin(), in.end(), r.data());
        fftw_execute_dft_r2c(plans_.forward, r.data(), c.data());
        std::copy_n(reinterpret_cast<const cplx*>(c.data()), out.size(), out.begin());
    }

    void inverse(std::span<const cplx> in, std::span<double> out) const {
        if (in.size() != complex_size_ * howmany_ || out.size() != real_size_ * howmany_)
            throw std::invalid_argument("RealFft::inverse: size mismatch");
        AlignedBuffer<fftw_complex> c(in.size());
        AlignedBuffer<double> r(out.size());
        std::copy(in.begin(), in.end(), reinterpret_cast<cplx*>(c.data()));
        fftw_execute_dft_c2r(plans_.inverse, c.data(), r.data());
        const double scale = 1.0 / double(real_size_);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = r.data()[i] * scale;
    }

private:
    std::vector<int> dims_;
    int howmany_;
    std::size_t real_size_ = 0;
    std::size_t complex_size_ = 0;
    detail::PlanPair plans_;
};

}  // namespace fft
}  // namespace hstokes
