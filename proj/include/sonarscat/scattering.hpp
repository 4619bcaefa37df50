#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sonarscat/fft.hpp"
#include "sonarscat/filterbank.hpp"
#include "sonarscat/signal.hpp"
#include "sonarscat/signal_ops.hpp"

// Layered scattering cascade: per layer, convolve with every admissible
// bandpass atom, take the modulus, subsample at r_m, and emit the lowpass
// average of every node. Default r_m = 1 matches the Mallat variant.

namespace sonarscat {

enum class PathRule { increasing_scale, all };

struct ScatteringLayer {
    FilterBankSpec bank;
    std::size_t subsample = 1;  // r_m
};

struct ScatteringConfig {
    std::vector<ScatteringLayer> layers;
    PathRule path_rule = PathRule::increasing_scale;
    std::size_t output_stride = 0;  // 0: critical rate of the widest output lowpass
};

/// Sequence of scale indices (one per layer) labelling a cascade branch.
struct Path {
    std::vector<int> indices;

    bool operator<(const Path& o) const { return indices < o.indices; }
    bool operator==(const Path& o) const { return indices == o.indices; }
};

struct ScatteringFeatures {
    std::vector<double> layer0;                          // signed lowpass of the input
    std::vector<std::map<Path, std::vector<double>>> layers;  // [m-1]: layer m, nonnegative
    std::size_t input_length = 0;
    double sample_rate = 0.0;
    std::size_t output_stride = 0;
    std::vector<std::size_t> layer_stride;  // input-sample spacing; [0] = layer0, [m] = layer m
};

/// Config with banks built, per-layer output lowpasses resampled to the
/// subsampled grids, and the output stride resolved.
struct ScatteringPlan {
    ScatteringConfig config;
    std::vector<FilterBank> banks;
    std::vector<std::vector<std::complex<double>>> output_lowpass;  // on the post-r_m grid
    std::vector<std::size_t> grid_length;  // [m]: length entering layer m+1 (grid_length[0] = N)
    std::size_t output_stride = 1;

    std::size_t input_length() const { return grid_length.front(); }
    std::size_t depth() const { return banks.size(); }
};

namespace scdetail {

// Gaussian lowpass with the bank's normalization and physical width, laid out
// on the grid decimated by r (identical to bank.lowpass when r = 1).
inline std::vector<std::complex<double>> resampled_lowpass(const FilterBank& bank, std::size_t r) {
    const std::size_t n = bank.spec.signal_length / r;
    const double sigma = bank.lowpass_sigma * static_cast<double>(r);
    const double peak = bank.lowpass_sup;
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t folded = std::min(k, n - k);
        const double x = static_cast<double>(folded) / (static_cast<double>(n) / 2.0);
        out[k] = {peak * std::exp(-x * x / (2.0 * sigma * sigma)), 0.0};
    }
    return out;
}

inline std::size_t pow2_floor(double v) {
    std::size_t s = 1;
    while (static_cast<double>(s * 2) <= v) s *= 2;
    return s;
}

inline fft::cvec forward(const std::vector<double>& x) {
    fft::cvec a(x.begin(), x.end());
    fft::fft_forward(a);
    return a;
}

// |ifft(spec_hat .* atom_hat)| decimated by r.
inline std::vector<double> conv_modulus_decimate(const fft::cvec& spec_hat,
                                                 const fft::cvec& atom_hat, std::size_t r) {
    const std::size_t n = spec_hat.size();
    fft::cvec prod(n);
    for (std::size_t k = 0; k < n; ++k) prod[k] = spec_hat[k] * atom_hat[k];
    fft::fft_inverse(prod);
    const double scale = 1.0 / static_cast<double>(n);
    std::vector<double> out(n / r);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(prod[i * r]) * scale;
    return out;
}

// real(ifft(spec_hat .* lowpass_hat)) decimated by stride; the result is
// mathematically nonnegative for nonnegative inputs, so tiny float negatives
// are clamped.
inline std::vector<double> lowpass_decimate(const fft::cvec& spec_hat, const fft::cvec& lp_hat,
                                            std::size_t stride, bool clamp) {
    const std::size_t n = spec_hat.size();
    fft::cvec prod(n);
    for (std::size_t k = 0; k < n; ++k) prod[k] = spec_hat[k] * lp_hat[k];
    fft::fft_inverse(prod);
    const double scale = 1.0 / static_cast<double>(n);
    std::vector<double> out(n / stride);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double v = prod[i * stride].real() * scale;
        if (clamp && v < 0.0) v = 0.0;
        out[i] = v;
    }
    return out;
}

}  // namespace scdetail

inline ScatteringPlan build_plan(const ScatteringConfig& cfg) {
    if (cfg.layers.empty()) throw std::invalid_argument("scattering: at least one layer required");
    ScatteringPlan plan;
    plan.config = cfg;
    std::size_t len = cfg.layers.front().bank.signal_length;
    plan.grid_length.push_back(len);
    for (const auto& layer : cfg.layers) {
        if (layer.subsample < 1) throw std::invalid_argument("scattering: subsample rate must be >= 1");
        if (layer.bank.signal_length != len)
            throw std::invalid_argument("scattering: layer bank length must match the incoming grid");
        if (len % layer.subsample != 0)
            throw std::invalid_argument("scattering: subsample rate must divide the grid length");
        plan.banks.push_back(build_bank(layer.bank));
        plan.output_lowpass.push_back(
            scdetail::resampled_lowpass(plan.banks.back(), layer.subsample));
        len /= layer.subsample;
        plan.grid_length.push_back(len);
    }

    if (cfg.output_stride > 0) {
        plan.output_stride = cfg.output_stride;
    } else {
        std::size_t s = std::numeric_limits<std::size_t>::max();
        for (std::size_t m = 0; m < plan.banks.size(); ++m) {
            const double sigma =
                plan.banks[m].lowpass_sigma * static_cast<double>(cfg.layers[m].subsample);
            const double cutoff = 3.0 * sigma;
            std::size_t sm = scdetail::pow2_floor(std::max(1.0, 1.0 / cutoff));
            sm = std::min(sm, plan.grid_length[m + 1] / 2);
            s = std::min(s, std::max<std::size_t>(1, sm));
        }
        plan.output_stride = s;
    }
    for (std::size_t m = 0; m < plan.banks.size(); ++m)
        if (plan.grid_length[m + 1] % plan.output_stride != 0)
            throw std::invalid_argument("scattering: output stride must divide every layer grid");
    return plan;
}

/// Convenience constructor: per layer (quality, octaves, subsample), bank
/// lengths chained through the subsample rates.
inline ScatteringConfig make_scattering_config(
    std::size_t signal_length,
    const std::vector<std::array<std::size_t, 3>>& layers_qjr,
    PathRule rule = PathRule::increasing_scale, std::size_t output_stride = 0) {
    ScatteringConfig cfg;
    cfg.path_rule = rule;
    cfg.output_stride = output_stride;
    std::size_t len = signal_length;
    for (const auto& [q, j, r] : layers_qjr) {
        ScatteringLayer layer;
        layer.bank.quality = static_cast<int>(q);
        layer.bank.max_scale_index = static_cast<int>(j);
        layer.bank.signal_length = len;
        layer.subsample = r;
        cfg.layers.push_back(layer);
        len /= r;
    }
    return cfg;
}

/// The three (Q_1, ..., Q_M) presets exercised in the experiments; octaves
/// default to log2(N) - 2 capped so the deepest ladder stays above DC.
inline ScatteringConfig preset_config(const std::string& name, std::size_t signal_length,
                                      std::size_t subsample = 1, std::size_t output_stride = 0) {
    std::vector<std::size_t> qualities;
    if (name == "coarse") qualities = {1, 1, 1};
    else if (name == "fine") qualities = {8, 4, 4};
    else if (name == "real") qualities = {8, 1};
    else throw std::invalid_argument("unknown scattering preset: " + name);
    std::vector<std::array<std::size_t, 3>> layers;
    std::size_t len = signal_length;
    for (std::size_t q : qualities) {
        const auto j = static_cast<std::size_t>(default_max_scale_index(len));
        layers.push_back({q, j, subsample});
        len /= subsample;
    }
    return make_scattering_config(signal_length, layers);
}

/// One cascade step: |f * g_lambda| on the r-strided grid.
inline Signal propagate(const Signal& f, const FilterBank& bank, int lambda, std::size_t r) {
    validate(f, "propagate");
    if (f.samples.size() != bank.spec.signal_length)
        throw std::invalid_argument("propagate: signal length does not match bank");
    if (r < 1 || f.samples.size() % r != 0)
        throw std::invalid_argument("propagate: subsample rate must divide the length");
    const FilterBankAtom* atom = nullptr;
    for (const auto& a : bank.atoms)
        if (a.scale_index == lambda) { atom = &a; break; }
    if (!atom) throw std::invalid_argument("propagate: unknown scale index");
    const auto spec_hat = scdetail::forward(f.samples);
    Signal out;
    out.sample_rate = f.sample_rate / static_cast<double>(r);
    out.t0 = f.t0;
    out.samples = scdetail::conv_modulus_decimate(spec_hat, atom->spectrum, r);
    return out;
}

namespace scdetail {

struct NodeCtx {
    const ScatteringPlan& plan;
    ScatteringFeatures& out;
    double grid_rate_0;
};

inline void descend(NodeCtx& ctx, std::size_t m, const Path& path, double parent_center_hz,
                    const fft::cvec& env_hat) {
    const ScatteringPlan& plan = ctx.plan;
    const FilterBank& bank = plan.banks[m];
    const std::size_t r = plan.config.layers[m].subsample;
    const double grid_rate = ctx.grid_rate_0 * static_cast<double>(plan.grid_length[m]) /
                             static_cast<double>(plan.grid_length[0]);
    for (const auto& atom : bank.atoms) {
        const double center_hz = atom.center * grid_rate / 2.0;
        if (plan.config.path_rule == PathRule::increasing_scale && m > 0 &&
            !(center_hz < parent_center_hz))
            continue;
        auto env = conv_modulus_decimate(env_hat, atom.spectrum, r);
        auto env_hat_child = forward(env);
        Path child = path;
        child.indices.push_back(atom.scale_index);
        ctx.out.layers[m][child] =
            lowpass_decimate(env_hat_child, plan.output_lowpass[m], plan.output_stride, true);
        if (m + 1 < plan.depth()) descend(ctx, m + 1, child, center_hz, env_hat_child);
    }
}

}  // namespace scdetail

inline ScatteringFeatures scatter(const Signal& f, const ScatteringPlan& plan) {
    validate(f, "scatter");
    if (f.samples.size() != plan.input_length())
        throw std::invalid_argument("scatter: signal length does not match plan");

    ScatteringFeatures out;
    out.input_length = f.samples.size();
    out.sample_rate = f.sample_rate;
    out.output_stride = plan.output_stride;
    out.layers.resize(plan.depth());
    out.layer_stride.resize(plan.depth() + 1);
    out.layer_stride[0] = plan.output_stride;
    std::size_t rprod = 1;
    for (std::size_t m = 0; m < plan.depth(); ++m) {
        rprod *= plan.config.layers[m].subsample;
        out.layer_stride[m + 1] = rprod * plan.output_stride;
    }

    const auto f_hat = scdetail::forward(f.samples);
    out.layer0 =
        scdetail::lowpass_decimate(f_hat, plan.banks[0].lowpass, plan.output_stride, false);

    scdetail::NodeCtx ctx{plan, out, f.sample_rate};
    scdetail::descend(ctx, 0, Path{}, 0.0, f_hat);
    return out;
}

// --- feature assembly -------------------------------------------------------

struct FlatLegendEntry {
    std::size_t layer = 0;
    Path path;            // empty for layer 0
    std::size_t time = 0;
};

struct FlatFeatures {
    std::vector<double> values;
    std::vector<FlatLegendEntry> legend;
};

/// Deterministic concatenation ordered by (layer, path lexicographic, time).
inline FlatFeatures flatten(const ScatteringFeatures& sf) {
    FlatFeatures flat;
    for (std::size_t i = 0; i < sf.layer0.size(); ++i) {
        flat.values.push_back(sf.layer0[i]);
        flat.legend.push_back({0, Path{}, i});
    }
    for (std::size_t m = 0; m < sf.layers.size(); ++m) {
        for (const auto& [path, coeffs] : sf.layers[m]) {
            for (std::size_t i = 0; i < coeffs.size(); ++i) {
                flat.values.push_back(coeffs[i]);
                flat.legend.push_back({m + 1, path, i});
            }
        }
    }
    return flat;
}

inline double feature_lookup(const ScatteringFeatures& sf, const FlatLegendEntry& e) {
    if (e.layer == 0) return sf.layer0.at(e.time);
    return sf.layers.at(e.layer - 1).at(e.path).at(e.time);
}

/// Per-layer squared norms rescaled by the output grid spacing, approximating
/// continuous-time energy.
inline std::vector<double> layer_energies(const ScatteringFeatures& sf) {
    std::vector<double> energies;
    double e0 = 0.0;
    for (double v : sf.layer0) e0 += v * v;
    energies.push_back(e0 * static_cast<double>(sf.layer_stride[0]));
    for (std::size_t m = 0; m < sf.layers.size(); ++m) {
        double e = 0.0;
        for (const auto& [path, coeffs] : sf.layers[m])
            for (double v : coeffs) e += v * v;
        energies.push_back(e * static_cast<double>(sf.layer_stride[m + 1]));
    }
    return energies;
}

namespace scdetail {

inline double l2_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        e += d * d;
    }
    return e;
}

inline std::vector<double> shift_vec(const std::vector<double>& v, std::int64_t t) {
    const auto n = static_cast<std::int64_t>(v.size());
    std::vector<double> out(v.size());
    const std::int64_t s = ((t % n) + n) % n;
    for (std::int64_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>((i + s) % n)] = v[static_cast<std::size_t>(i)];
    return out;
}

}  // namespace scdetail

/// Covariance defect of Eq.-style fractional translation: shifting the input
/// by t must shift layer-m features by t / (r_1...r_m * stride); returns the
/// max over layers of the residual norm divided by |f|.
inline double translation_covariance_defect(const Signal& f, const ScatteringPlan& plan,
                                            std::int64_t t) {
    for (std::size_t m = 0; m < plan.depth() + 1; ++m) {
        std::size_t spacing = plan.output_stride;
        for (std::size_t i = 0; i < m; ++i) spacing *= plan.config.layers[i].subsample;
        if (t % static_cast<std::int64_t>(spacing) != 0)
            throw std::invalid_argument(
                "translation_covariance_defect: shift must be divisible by every layer stride");
    }
    const auto base = scatter(f, plan);
    const auto shifted = scatter(translate(f, t), plan);
    const double fnorm = std::sqrt(energy(f));
    double worst = 0.0;

    const auto layer_defect = [&](const std::vector<double>& a, const std::vector<double>& b,
                                  std::size_t spacing) {
        return scdetail::l2_diff(scdetail::shift_vec(a, t / static_cast<std::int64_t>(spacing)), b);
    };

    worst = std::max(worst, std::sqrt(layer_defect(base.layer0, shifted.layer0,
                                                   base.layer_stride[0])));
    for (std::size_t m = 0; m < base.layers.size(); ++m) {
        double acc = 0.0;
        for (const auto& [path, coeffs] : base.layers[m])
            acc += layer_defect(coeffs, shifted.layers[m].at(path), base.layer_stride[m + 1]);
        worst = std::max(worst, std::sqrt(acc));
    }
    return fnorm > 0.0 ? worst / fnorm : worst;
}

struct SensitivityResult {
    double measured = 0.0;
    double bound = 0.0;
};

/// Feature drift under a raw t-sample shift (no alignment assumed), against
/// the depth-dependent theorem bound 2 pi |t| K / (r_1...r_M) * |f|.
inline SensitivityResult translation_sensitivity(const Signal& f, const ScatteringPlan& plan,
                                                 std::int64_t t) {
    const auto base = scatter(f, plan);
    const auto shifted = scatter(translate(f, t), plan);
    double measured = 0.0;
    for (std::size_t m = 0; m < base.layers.size(); ++m) {
        double acc = 0.0;
        for (const auto& [path, coeffs] : base.layers[m])
            acc += scdetail::l2_diff(coeffs, shifted.layers[m].at(path));
        measured += std::sqrt(acc);
    }
    double k_sup = 0.0;
    double rprod = 1.0;
    for (std::size_t m = 0; m < plan.depth(); ++m) {
        k_sup = std::max(k_sup, plan.banks[m].lowpass_sup);
        rprod *= static_cast<double>(plan.config.layers[m].subsample);
    }
    SensitivityResult res;
    res.measured = measured;
    res.bound = 2.0 * detail::kPi * std::abs(static_cast<double>(t)) * k_sup / rprod *
                std::sqrt(energy(f));
    return res;
}

/// Feature drift under the nonuniform translation f(x) -> f(x - tau(x)).
/// Requires |d tau/dx| <= 1/2 (theorem hypothesis at d = 1).
inline double deformation_sensitivity(const Signal& f, const ScatteringPlan& plan,
                                      const Signal& tau) {
    if (max_warp_slope(tau) > 0.5)
        throw std::domain_error("deformation_sensitivity: |d tau/dx| must be <= 1/2");
    const auto base = scatter(f, plan);
    const auto warped = scatter(warp(f, tau), plan);
    double dist = 0.0;
    for (std::size_t m = 0; m < base.layers.size(); ++m) {
        double acc = 0.0;
        for (const auto& [path, coeffs] : base.layers[m])
            acc += scdetail::l2_diff(coeffs, warped.layers[m].at(path));
        dist += std::sqrt(acc);
    }
    return dist;
}

/// Flat norm of the full output (layer 0 included); the contraction property
/// compares this between signal pairs.
inline double feature_distance(const ScatteringFeatures& a, const ScatteringFeatures& b) {
    double acc = scdetail::l2_diff(a.layer0, b.layer0);
    for (std::size_t m = 0; m < a.layers.size(); ++m)
        for (const auto& [path, coeffs] : a.layers[m])
            acc += scdetail::l2_diff(coeffs, b.layers[m].at(path));
    return std::sqrt(acc);
}

}  // namespace sonarscat
