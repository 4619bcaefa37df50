#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sonarscat/fft.hpp"
#include "sonarscat/signal.hpp"

// Spectral transforms and the test operators (translation, warp, noise)
// acting on Signal. Everything here treats the sample grid as circular.

namespace sonarscat {

namespace detail {
inline constexpr double kPi = 3.141592653589793238462643383279502884;
}

/// Unitary DFT: X_k = N^{-1/2} sum_n f_n e^{-2 pi i k n / N}.
inline Spectrum dft(const Signal& f) {
    validate(f, "dft");
    fft::cvec a(f.samples.begin(), f.samples.end());
    fft::fft_forward(a);
    const double scale = 1.0 / std::sqrt(static_cast<double>(a.size()));
    for (auto& z : a) z *= scale;
    return Spectrum{std::move(a), f.sample_rate / static_cast<double>(f.samples.size())};
}

/// Inverse of dft; imaginary residue is discarded (inputs are real signals).
inline Signal idft(const Spectrum& s, double sample_rate) {
    if (s.bins.empty()) throw std::invalid_argument("idft: empty spectrum");
    fft::cvec a = s.bins;
    fft::fft_inverse(a);
    const double scale = 1.0 / std::sqrt(static_cast<double>(a.size()));
    Signal f;
    f.sample_rate = sample_rate;
    f.samples.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) f.samples[i] = a[i].real() * scale;
    return f;
}

inline Signal idft(const Spectrum& s) {
    return idft(s, s.bin_spacing * static_cast<double>(s.bins.size()));
}

/// Exact circular convolution, (f*g)[n] = sum_m f[m] g[(n-m) mod N].
inline Signal circular_convolve(const Signal& f, const Signal& g) {
    validate(f, "circular_convolve: f");
    validate(g, "circular_convolve: g");
    if (f.samples.size() != g.samples.size())
        throw std::invalid_argument("circular_convolve: length mismatch");
    if (f.sample_rate != g.sample_rate)
        throw std::invalid_argument("circular_convolve: sample rate mismatch");
    fft::cvec a(f.samples.begin(), f.samples.end());
    fft::cvec b(g.samples.begin(), g.samples.end());
    fft::fft_forward(a);
    fft::fft_forward(b);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
    fft::fft_inverse(a);
    const double scale = 1.0 / static_cast<double>(a.size());
    Signal out;
    out.sample_rate = f.sample_rate;
    out.t0 = f.t0;
    out.samples.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.samples[i] = a[i].real() * scale;
    return out;
}

/// Circular shift by t samples: out[n] = f[(n - t) mod N].
inline Signal translate(const Signal& f, std::int64_t t) {
    validate(f, "translate");
    const std::int64_t n = static_cast<std::int64_t>(f.samples.size());
    Signal out = f;
    const std::int64_t shift = ((t % n) + n) % n;
    for (std::int64_t i = 0; i < n; ++i)
        out.samples[static_cast<std::size_t>((i + shift) % n)] = f.samples[static_cast<std::size_t>(i)];
    return out;
}

/// Max |d tau / dx| estimated by centered circular finite differences
/// (tau in seconds, slope dimensionless).
inline double max_warp_slope(const Signal& tau) {
    const std::size_t n = tau.samples.size();
    if (n < 2) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double prev = tau.samples[(i + n - 1) % n];
        const double next = tau.samples[(i + 1) % n];
        worst = std::max(worst, std::abs((next - prev) * tau.sample_rate / 2.0));
    }
    return worst;
}

/// Warp f(x) -> f(x - tau(x)) by evaluating the trigonometric interpolant of
/// f at the displaced points. tau holds displacements in seconds.
inline Signal warp(const Signal& f, const Signal& tau) {
    validate(f, "warp: f");
    validate(tau, "warp: tau");
    const std::size_t n = f.samples.size();
    if (tau.samples.size() != n) throw std::invalid_argument("warp: tau length mismatch");
    if (max_warp_slope(tau) >= 1.0)
        throw std::domain_error("warp: |d tau/dx| must stay below 1");

    fft::cvec spec(f.samples.begin(), f.samples.end());
    fft::fft_forward(spec);

    Signal out = f;
    const auto nn = static_cast<std::int64_t>(n);
    for (std::size_t i = 0; i < n; ++i) {
        // evaluation point in samples, circular
        const double x = static_cast<double>(i) - tau.samples[i] * f.sample_rate;
        double acc = spec[0].real();
        for (std::int64_t k = 1; k < nn - nn / 2; ++k) {
            const double ang = 2.0 * detail::kPi * static_cast<double>(k) * x / static_cast<double>(n);
            const std::complex<double> e{std::cos(ang), std::sin(ang)};
            acc += 2.0 * (spec[static_cast<std::size_t>(k)] * e).real();
        }
        if (n % 2 == 0) {
            const double ang = detail::kPi * x;  // Nyquist bin, cosine only
            acc += spec[n / 2].real() * std::cos(ang);
        }
        out.samples[i] = acc / static_cast<double>(n);
    }
    return out;
}

namespace detail {
// Box-Muller keeps the noise stream identical across standard libraries.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

  private:
    double uniform() {
        // splitmix64
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};
}  // namespace detail

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// Add white Gaussian noise rescaled post-draw so that
/// 10 log10(|f|^2 / |n|^2) equals snr_db exactly. snr_db = inf disables noise.
/// reference_energy substitutes for |f|^2 when given (> 0).
inline Signal add_noise(const Signal& f, double snr_db, std::uint64_t seed,
                        double reference_energy = 0.0) {
    validate(f, "add_noise");
    if (snr_db == kNoNoise) return f;
    const double e_ref = reference_energy > 0.0 ? reference_energy : energy(f);
    if (e_ref <= 0.0) throw std::domain_error("add_noise: zero-energy input and no reference energy");

    detail::GaussianStream rng(seed);
    std::vector<double> noise(f.samples.size());
    double e_n = 0.0;
    for (double& v : noise) {
        v = rng.next();
        e_n += v * v;
    }
    if (e_n <= 0.0) throw std::runtime_error("add_noise: degenerate noise draw");
    const double target = e_ref * std::pow(10.0, -snr_db / 10.0);
    const double scale = std::sqrt(target / e_n);
    Signal out = f;
    for (std::size_t i = 0; i < noise.size(); ++i) out.samples[i] += scale * noise[i];
    return out;
}

}  // namespace sonarscat
