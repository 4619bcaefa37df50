#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <vector>

// Radix-2 FFT with a Bluestein fallback for arbitrary lengths.
// Conventions: fft_forward/fft_inverse are unnormalized (inverse carries no
// 1/N); the unitary pair used by the public signal API lives in signal_ops.

namespace sonarscat::fft {

using cvec = std::vector<std::complex<double>>;

constexpr bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct Pow2Plan {
    std::size_t n;
    std::vector<std::complex<double>> twiddle;   // e^{-2*pi*i*k/n}, k < n/2
    std::vector<std::size_t> bitrev;

    explicit Pow2Plan(std::size_t len) : n(len), twiddle(len / 2), bitrev(len) {
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double a = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
            twiddle[k] = {std::cos(a), std::sin(a)};
        }
        std::size_t bits = 0;
        while ((std::size_t{1} << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
            bitrev[i] = r;
        }
    }
};

inline const Pow2Plan& pow2_plan(std::size_t n) {
    thread_local std::unordered_map<std::size_t, std::unique_ptr<Pow2Plan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Pow2Plan>(n);
    return *slot;
}

// In-place iterative Cooley-Tukey; inverse = conjugated twiddles, no scaling.
inline void fft_pow2(cvec& a, bool inverse) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    const Pow2Plan& plan = pow2_plan(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = plan.bitrev[i];
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len >> 1;
        const std::size_t step = n / len;
        for (std::size_t blk = 0; blk < n; blk += len) {
            for (std::size_t k = 0; k < half; ++k) {
                std::complex<double> w = plan.twiddle[k * step];
                if (inverse) w = std::conj(w);
                const std::complex<double> u = a[blk + k];
                const std::complex<double> v = a[blk + k + half] * w;
                a[blk + k] = u + v;
                a[blk + k + half] = u - v;
            }
        }
    }
}

// Bluestein chirp-z transform: DFT of arbitrary length via one pow2 convolution.
inline void fft_bluestein(cvec& a, bool inverse) {
    const std::size_t n = a.size();
    std::size_t m = 1;
    while (m < 2 * n + 1) m <<= 1;

    cvec chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // angle = pi * k^2 / n, k^2 reduced mod 2n to keep the argument small
        const std::size_t k2 = (k * k) % (2 * n);
        double ang = kPi * static_cast<double>(k2) / static_cast<double>(n);
        if (!inverse) ang = -ang;
        chirp[k] = {std::cos(ang), std::sin(ang)};
    }

    cvec x(m, {0.0, 0.0});
    cvec y(m, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
    y[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) y[k] = y[m - k] = std::conj(chirp[k]);

    fft_pow2(x, false);
    fft_pow2(y, false);
    for (std::size_t k = 0; k < m; ++k) x[k] *= y[k];
    fft_pow2(x, true);

    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * scale * chirp[k];
}

}  // namespace detail

inline void fft_forward(cvec& a) {
    if (a.empty()) throw std::invalid_argument("fft: empty input");
    if (is_pow2(a.size())) detail::fft_pow2(a, false);
    else detail::fft_bluestein(a, false);
}

// Unnormalized inverse: fft_inverse(fft_forward(a)) == n * a.
inline void fft_inverse(cvec& a) {
    if (a.empty()) throw std::invalid_argument("fft: empty input");
    if (is_pow2(a.size())) detail::fft_pow2(a, true);
    else detail::fft_bluestein(a, true);
}

}  // namespace sonarscat::fft
