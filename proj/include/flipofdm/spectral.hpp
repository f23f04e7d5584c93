#pragma once

#include <atomic>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace flipofdm::spectral {

using ComplexVector = std::vector<std::complex<double>>;

inline bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

/// Running totals of transforms executed, kept so tests and benchmarks can
/// verify how many transforms a receiver actually spends.
struct TransformCounters {
    std::uint64_t forward = 0;
    std::uint64_t inverse = 0;
};

namespace detail {

inline std::atomic<std::uint64_t>& forward_count() {
    static std::atomic<std::uint64_t> c{0};
    return c;
}

inline std::atomic<std::uint64_t>& inverse_count() {
    static std::atomic<std::uint64_t> c{0};
    return c;
}

// Iterative radix-2 transform, no scaling. sign = +1 gives the exponent
// exp(+j 2 pi n k / N).
inline void fft_radix2(ComplexVector& a, int sign) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n))
        throw std::domain_error("spectral: length must be a power of two >= 2");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * 3.14159265358979323846 / static_cast<double>(len);
        const std::complex<double> wstep(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wstep;
            }
        }
    }
}

}  // namespace detail

inline TransformCounters transform_counters() {
    return {detail::forward_count().load(), detail::inverse_count().load()};
}

inline void reset_transform_counters() {
    detail::forward_count().store(0);
    detail::inverse_count().store(0);
}

/// x(k) = sum_n X_n exp(+j 2 pi n k / N); no 1/N factor.
inline ComplexVector inverse_dft(const ComplexVector& bins) {
    ComplexVector out = bins;
    detail::fft_radix2(out, +1);
    detail::inverse_count().fetch_add(1, std::memory_order_relaxed);
    return out;
}

/// X_n = (1/N) sum_k x(k) exp(-j 2 pi n k / N); inverse of inverse_dft.
inline ComplexVector forward_dft(const ComplexVector& samples) {
    ComplexVector out = samples;
    detail::fft_radix2(out, -1);
    const double scale = 1.0 / static_cast<double>(out.size());
    for (auto& v : out) v *= scale;
    detail::forward_count().fetch_add(1, std::memory_order_relaxed);
    return out;
}

/// Real-input convenience overload.
inline ComplexVector forward_dft(const std::vector<double>& samples) {
    ComplexVector tmp(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) tmp[i] = samples[i];
    return forward_dft(tmp);
}

}  // namespace flipofdm::spectral
