// observation.hpp
//
// Measurement model Y = A .* (H X) + A .* n, zero-forcing coarse estimates,
// pilot sequences, and the test-time distortions (per-pixel SNR, Laplace
// noise, clipping, a second user's pilots).
//
// SNR convention: channels have unit average power, so SNR_dB fixes
// sigma_obs^2 = 10^(-SNR/10). Noise variances are complex (E|n|^2).

#pragma once

#include "srsdi/core.hpp"
#include "srsdi/random.hpp"

#include <numbers>
#include <numeric>
#include <optional>
#include <string>

namespace srsdi {

enum class NoiseKind { gaussian, laplace };

inline std::string to_string(NoiseKind k) { return k == NoiseKind::gaussian ? "gaussian" : "laplace"; }
inline NoiseKind parse_noise_kind(const std::string& s) {
    if (s == "gaussian") return NoiseKind::gaussian;
    if (s == "laplace") return NoiseKind::laplace;
    throw ParameterError("unknown noise kind '" + s + "'");
}

struct SnrRange {
    double low_db = -10.0;
    double high_db = 20.0;
};

struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double sigma_obs_sq = 0.01;
    std::optional<SnrRange> per_pixel_snr;
    std::optional<double> clip_threshold;  // per-component standard deviations
    double signal_power = 1.0;             // reference for per-pixel SNR draws

    static NoiseSpec from_snr_db(double snr_db, NoiseKind kind = NoiseKind::gaussian) {
        NoiseSpec n;
        n.kind = kind;
        n.sigma_obs_sq = 1.0 / from_db10(snr_db);
        return n;
    }

    void validate() const {
        if (!(sigma_obs_sq >= 0.0) || !std::isfinite(sigma_obs_sq))
            throw ParameterError("NoiseSpec: sigma_obs_sq must be finite and >= 0");
        if (per_pixel_snr && per_pixel_snr->low_db > per_pixel_snr->high_db)
            throw ParameterError("NoiseSpec: per-pixel SNR range has low > high");
        if (clip_threshold && !(*clip_threshold > 0.0)) throw ParameterError("NoiseSpec: clip threshold must be > 0");
    }
};

inline std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

// x[n] = exp(-j pi root n (n+1) / length)
inline std::vector<cplx> zadoff_chu(std::size_t length, std::size_t root) {
    if (length < 1) throw ParameterError("zadoff_chu: length must be >= 1");
    if (gcd_u64(root, length) != 1) throw ParameterError("zadoff_chu: root must be coprime with length");
    std::vector<cplx> x(length);
    for (std::size_t n = 0; n < length; ++n) {
        // n(n+1) mod 2L keeps the phase argument small for long sequences.
        const std::uint64_t q = (static_cast<std::uint64_t>(n) * (n + 1) % (2 * length)) * root % (2 * length);
        x[n] = std::polar(1.0, -std::numbers::pi * static_cast<double>(q) / static_cast<double>(length));
    }
    return x;
}

// Pilot grid carrying a Zadoff-Chu sequence along subcarriers, identical on
// every receive antenna.
inline ComplexGrid zc_pilot_grid(const Shape& s, std::size_t root) {
    const auto zc = zadoff_chu(s.n_subcarriers, root);
    ComplexGrid x(s);
    for (std::size_t k = 0; k < s.n_subcarriers; ++k)
        for (std::size_t a = 0; a < s.n_antennas; ++a) x(k, a) = zc[k];
    return x;
}

// Real and imaginary parts clamped to [-tau s, tau s]; s = 1/sqrt(2) matches
// unit-power circular Gaussian channels.
inline ComplexGrid clip(const ComplexGrid& h, double tau, double component_std = 1.0 / std::numbers::sqrt2) {
    if (!(tau > 0.0)) throw ParameterError("clip: tau must be > 0");
    const double lim = tau * component_std;
    ComplexGrid out = h;
    for (auto& v : out.values()) v = {std::clamp(v.real(), -lim, lim), std::clamp(v.imag(), -lim, lim)};
    return out;
}

// Per-pixel complex noise variances implied by a NoiseSpec (constant unless a
// per-pixel SNR range is set). Deterministic in seed; observe() uses the same
// draw.
inline std::vector<double> noise_variances(const Shape& s, const NoiseSpec& noise, std::uint64_t seed) {
    noise.validate();
    std::vector<double> var(s.size(), noise.sigma_obs_sq);
    if (noise.per_pixel_snr) {
        Rng rng = make_rng(derive_seed(seed, "per_pixel_snr"));
        const auto [lo, hi] = *noise.per_pixel_snr;
        for (auto& v : var) v = noise.signal_power / from_db10(lo + (hi - lo) * uniform01(rng));
    }
    return var;
}

inline ComplexGrid draw_noise(const Shape& s, const NoiseSpec& noise, std::uint64_t seed) {
    const auto var = noise_variances(s, noise, seed);
    Rng rng = make_rng(derive_seed(seed, "noise"));
    ComplexGrid n(s);
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (noise.kind == NoiseKind::gaussian) {
            n[i] = complex_normal(rng, var[i]);
        } else {
            // Var(re) + Var(im) = 2 (2 b^2) = var
            const double b = std::sqrt(var[i] / 4.0);
            const double re = laplace(rng, b);
            const double im = laplace(rng, b);
            n[i] = {re, im};
        }
    }
    return n;
}

inline ComplexGrid observe(const ComplexGrid& h, const ComplexGrid& pilots, const Mask& mask, const NoiseSpec& noise,
                           std::uint64_t seed) {
    require_same_shape(h.shape(), pilots.shape(), "observe");
    require_same_shape(h.shape(), mask.shape(), "observe");
    const ComplexGrid h_eff = noise.clip_threshold ? clip(h, *noise.clip_threshold) : h;
    ComplexGrid y = h_eff.hadamard(pilots) + draw_noise(h.shape(), noise, seed);
    y = apply(mask, y);
    y.require_finite("observe");
    return y;
}

inline ComplexGrid observe(const ComplexGrid& h, const Mask& mask, const NoiseSpec& noise, std::uint64_t seed) {
    return observe(h, ComplexGrid(h.n_subcarriers(), h.n_antennas(), cplx{1.0, 0.0}), mask, noise, seed);
}

// Amplitude applied to the second user so that
// E||P2 .* H2||^2 = 10^(-SIR/10) E||P1 .* H1||^2 for unit-power channels.
inline double interferer_scale(const ComplexGrid& p1, const ComplexGrid& p2, double sir_db) {
    const double e1 = p1.squared_norm();
    const double e2 = p2.squared_norm();
    if (e2 == 0.0) return 0.0;
    return std::sqrt(e1 / e2 / from_db10(sir_db));
}

// Y = P1 .* H1 + P2 .* (scale H2) + n on the union of the pilot supports.
inline ComplexGrid observe_interference(const ComplexGrid& h1, const ComplexGrid& h2, const ComplexGrid& p1,
                                        const ComplexGrid& p2, const NoiseSpec& noise, double sir_db,
                                        std::uint64_t seed) {
    require_same_shape(h1.shape(), h2.shape(), "observe_interference");
    require_same_shape(h1.shape(), p1.shape(), "observe_interference");
    require_same_shape(h1.shape(), p2.shape(), "observe_interference");
    const double s = interferer_scale(p1, p2, sir_db);
    Mask support(h1.n_subcarriers(), h1.n_antennas());
    for (std::size_t i = 0; i < h1.size(); ++i) support.set_flat(i, p1[i] != cplx{} || p2[i] != cplx{});
    const ComplexGrid h1_eff = noise.clip_threshold ? clip(h1, *noise.clip_threshold) : h1;
    const ComplexGrid h2_eff = noise.clip_threshold ? clip(h2, *noise.clip_threshold) : h2;
    ComplexGrid y = p1.hadamard(h1_eff) + (p2.hadamard(h2_eff) *= s) + draw_noise(h1.shape(), noise, seed);
    y = apply(support, y);
    y.require_finite("observe_interference");
    return y;
}

inline ComplexGrid observe_interference(const ComplexGrid& h1, const ComplexGrid& h2, const Mask& p1, const Mask& p2,
                                        const NoiseSpec& noise, double sir_db, std::uint64_t seed) {
    return observe_interference(h1, h2, ComplexGrid::from_mask(p1), ComplexGrid::from_mask(p2), noise, sir_db, seed);
}

// H_hat = Y / X on active pixels, zero elsewhere.
inline ComplexGrid zero_forcing(const ComplexGrid& y, const ComplexGrid& pilots, const Mask& mask) {
    require_same_shape(y.shape(), pilots.shape(), "zero_forcing");
    require_same_shape(y.shape(), mask.shape(), "zero_forcing");
    ComplexGrid h(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!mask[i]) continue;
        if (pilots[i] == cplx{}) throw DivisionByZeroError("zero_forcing: zero pilot on an active pixel");
        h[i] = y[i] / pilots[i];
    }
    return h;
}

}  // namespace srsdi
