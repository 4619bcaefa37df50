#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sonarscat/fft.hpp"
#include "sonarscat/signal.hpp"

#include <nlohmann/json.hpp>

// Morlet-type analytic filter banks: constant-Q ladders of Gaussian bandpass
// atoms plus a Gaussian lowpass output atom, normalized for weak
// admissibility (max{b, b*gamma^2/r} <= 1).

namespace sonarscat {

struct FilterBankSpec {
    int quality = 1;             // Q: atoms per octave
    int max_scale_index = 8;     // J: octaves spanned by the ladder
    std::size_t signal_length = 1024;  // power of two
    double center_frequency = 0.85;    // mother-wavelet center, fraction of Nyquist
    double bandwidth_param = 1.0;      // multiplier on every Gaussian width

    int atom_count() const { return quality * max_scale_index; }
};

inline int default_max_scale_index(std::size_t signal_length) {
    int j = 0;
    while ((std::size_t{1} << (j + 1)) <= signal_length) ++j;
    return j > 2 ? j - 2 : 1;
}

inline void validate(const FilterBankSpec& spec) {
    if (spec.quality < 1) throw std::invalid_argument("filterbank: quality must be >= 1");
    if (spec.max_scale_index < 1) throw std::invalid_argument("filterbank: max_scale_index must be >= 1");
    if (!fft::is_pow2(spec.signal_length))
        throw std::invalid_argument("filterbank: signal_length must be a power of two");
    if (!(spec.center_frequency > 0.0) || spec.center_frequency >= 1.0)
        throw std::invalid_argument("filterbank: center_frequency must lie in (0, 1) of Nyquist");
    if (!(spec.bandwidth_param > 0.0))
        throw std::invalid_argument("filterbank: bandwidth_param must be positive");
}

namespace fbdetail {
inline constexpr double kLn2 = 0.6931471805599453;

inline double atom_center(const FilterBankSpec& spec, int j) {
    return spec.center_frequency * std::exp2(static_cast<double>(j) / spec.quality);
}

inline double atom_sigma(const FilterBankSpec& spec, double center) {
    // adjacent atoms cross at half power: the midpoint to the next center
    // sits at one half-power radius sigma*sqrt(ln 2)
    const double gap = 1.0 - std::exp2(-1.0 / spec.quality);
    return spec.bandwidth_param * center * gap / (2.0 * std::sqrt(kLn2));
}
}  // namespace fbdetail

struct FilterBankAtom {
    int scale_index = 0;                       // j, 0 = finest
    double center = 0.0;                       // fraction of Nyquist
    std::vector<std::complex<double>> spectrum;  // length signal_length, analytic
};

struct FilterBank {
    FilterBankSpec spec;
    std::vector<FilterBankAtom> atoms;           // finest first (j = 0, -1, ...)
    std::vector<std::complex<double>> lowpass;   // chi-hat, Hermitian-symmetric
    double frame_lower = 0.0;                    // a
    double frame_upper = 0.0;                    // b
    double lowpass_sup = 0.0;                    // K = max |chi-hat|

    std::size_t size() const { return atoms.size(); }
};

/// Analytic Morlet atom at ladder index j (valid -J*Q < j <= 0): Gaussian bump
/// at center_frequency * 2^{j/Q} with the correction term zeroing the DC bin.
inline std::vector<std::complex<double>> morlet_atom(const FilterBankSpec& spec, int j) {
    validate(spec);
    if (j > 0 || j <= -spec.atom_count())
        throw std::invalid_argument("morlet_atom: scale index out of range");
    const std::size_t n = spec.signal_length;
    const double center = fbdetail::atom_center(spec, j);
    const double sigma = fbdetail::atom_sigma(spec, center);
    const double corr = std::exp(-center * center / (2.0 * sigma * sigma));
    std::vector<std::complex<double>> atom(n, {0.0, 0.0});
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double x = static_cast<double>(k) / (static_cast<double>(n) / 2.0);  // Nyquist fraction
        const double d = x - center;
        const double v = std::exp(-d * d / (2.0 * sigma * sigma)) -
                         corr * std::exp(-x * x / (2.0 * sigma * sigma));
        atom[k] = {v, 0.0};
    }
    return atom;
}

/// Littlewood-Paley scan over the nonnegative-frequency bins:
/// S(k) = sum_j |g_j(k)|^2 + |chi(k)|^2, returns (min, max).
inline std::pair<double, double> littlewood_paley(const FilterBank& bank) {
    const std::size_t n = bank.spec.signal_length;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t k = 0; k <= n / 2; ++k) {
        double s = bank.lowpass.empty() ? 0.0 : std::norm(bank.lowpass[k]);
        for (const auto& atom : bank.atoms) s += std::norm(atom.spectrum[k]);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return {lo, hi};
}

namespace fbdetail {
inline double sup_abs(const std::vector<std::complex<double>>& v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

inline void refresh_bounds(FilterBank& bank) {
    const auto [a, b] = littlewood_paley(bank);
    bank.frame_lower = a;
    bank.frame_upper = b;
    bank.lowpass_sup = sup_abs(bank.lowpass);
}
}  // namespace fbdetail

/// Rescale every atom and the lowpass by one constant so that
/// max{b, b gamma^2 / r} = 1 (weak admissibility, d = 1).
inline FilterBank normalize_bank(FilterBank bank, double lipschitz = 1.0, double subsample = 1.0) {
    if (!(lipschitz > 0.0)) throw std::invalid_argument("normalize_bank: gamma must be positive");
    if (!(subsample >= 1.0)) throw std::invalid_argument("normalize_bank: subsample must be >= 1");
    const auto [a, b] = littlewood_paley(bank);
    (void)a;
    const double target = std::max(b, b * lipschitz * lipschitz / subsample);
    if (!(target > 0.0)) throw std::domain_error("normalize_bank: degenerate bank (b = 0)");
    const double c = std::sqrt(1.0 / target);
    for (auto& atom : bank.atoms)
        for (auto& z : atom.spectrum) z *= c;
    for (auto& z : bank.lowpass) z *= c;
    fbdetail::refresh_bounds(bank);
    return bank;
}

/// Build the full bank: J*Q bandpass atoms, a Gaussian lowpass covering
/// [0, smallest atom center), weak-admissibility normalization applied.
inline FilterBank build_bank(const FilterBankSpec& spec) {
    validate(spec);
    FilterBank bank;
    bank.spec = spec;
    bank.atoms.reserve(static_cast<std::size_t>(spec.atom_count()));
    for (int j = 0; j > -spec.atom_count(); --j) {
        FilterBankAtom atom;
        atom.scale_index = j;
        atom.center = fbdetail::atom_center(spec, j);
        atom.spectrum = morlet_atom(spec, j);
        bank.atoms.push_back(std::move(atom));
    }

    // lowpass crosses the coarsest atom at that atom's lower half-power point
    const double xi_min = bank.atoms.back().center;
    const double cross = xi_min * (1.0 + std::exp2(-1.0 / spec.quality)) / 2.0;
    const double sigma_chi = spec.bandwidth_param * cross / std::sqrt(fbdetail::kLn2);
    const std::size_t n = spec.signal_length;
    bank.lowpass.assign(n, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t folded = std::min(k, n - k);
        const double x = static_cast<double>(folded) / (static_cast<double>(n) / 2.0);
        bank.lowpass[k] = {std::exp(-x * x / (2.0 * sigma_chi * sigma_chi)), 0.0};
    }

    return normalize_bank(std::move(bank));
}

/// Largest decimation of the lowpass output that keeps its 3-sigma band
/// below the decimated Nyquist, rounded down to a power of two.
inline std::size_t critical_output_stride(const FilterBank& bank) {
    const std::size_t n = bank.spec.signal_length;
    double sigma_chi = 0.0;
    {
        // recover sigma from the stored profile: |chi(k)| = K exp(-x^2/(2 s^2))
        const double k1 = std::abs(bank.lowpass[1]);
        const double k0 = std::abs(bank.lowpass[0]);
        const double x1 = 1.0 / (static_cast<double>(n) / 2.0);
        sigma_chi = x1 / std::sqrt(2.0 * std::log(k0 / k1));
    }
    const double cutoff = 3.0 * sigma_chi;  // fraction of Nyquist
    std::size_t stride = 1;
    while (stride * 2 <= n / 4 && static_cast<double>(stride * 2) <= 1.0 / cutoff) stride *= 2;
    return stride;
}

inline double atom_center_hz(const FilterBank& bank, std::size_t idx, double sample_rate) {
    return bank.atoms[idx].center * sample_rate / 2.0;
}

/// Time-domain waveform of one atom (real part; the imaginary part is its
/// Hilbert pair).
inline Signal atom_impulse_response(const FilterBank& bank, std::size_t idx, double sample_rate) {
    fft::cvec a = bank.atoms.at(idx).spectrum;
    fft::fft_inverse(a);
    Signal out;
    out.sample_rate = sample_rate;
    out.samples.resize(a.size());
    const double scale = 1.0 / static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.samples[i] = a[i].real() * scale;
    return out;
}

inline nlohmann::json bank_descriptor(const FilterBank& bank) {
    nlohmann::json j;
    j["quality"] = bank.spec.quality;
    j["max_scale_index"] = bank.spec.max_scale_index;
    j["signal_length"] = bank.spec.signal_length;
    j["center_frequency"] = bank.spec.center_frequency;
    j["bandwidth_param"] = bank.spec.bandwidth_param;
    j["atom_count"] = bank.atoms.size();
    j["frame_lower"] = bank.frame_lower;
    j["frame_upper"] = bank.frame_upper;
    j["lowpass_sup"] = bank.lowpass_sup;
    return j;
}

}  // namespace sonarscat
