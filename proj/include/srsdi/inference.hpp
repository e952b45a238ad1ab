// inference.hpp
//
// Posterior sampling for masked channel inpainting: annealed Langevin over
// a VE schedule, DDPM ancestral sampling with a data-consistency step, the
// single-pass baseline, and a coupled two-user Langevin for interference.
//
// Likelihood gradients are d/dH* of the log-density and vanish outside the
// observation mask.

#pragma once

#include "srsdi/denoiser.hpp"
#include "srsdi/random.hpp"
#include "srsdi/schedules.hpp"

#include <optional>
#include <utility>

namespace srsdi {

inline constexpr double sigma_obs_floor = 1e-6;

enum class LikelihoodKind { gaussian, laplace, joint_interference };

inline std::string to_string(LikelihoodKind k) {
    switch (k) {
        case LikelihoodKind::gaussian: return "gaussian";
        case LikelihoodKind::laplace: return "laplace";
        case LikelihoodKind::joint_interference: return "joint_interference";
    }
    return "?";
}

struct LikelihoodModel {
    LikelihoodKind kind = LikelihoodKind::gaussian;
    double sigma_obs_sq = 0.01;
    // Pilot grid of a single user (Y = A .* (P H) + n). Absent means P = 1.
    std::optional<ComplexGrid> pilot;
    // (P1, P2) for the joint kind.
    std::optional<std::pair<ComplexGrid, ComplexGrid>> pilots;
    // Per-pixel observation noise variances; replaces sigma_obs_sq when set.
    std::optional<std::vector<double>> variance_map;

    void validate() const {
        if (!(sigma_obs_sq >= 0.0) || !std::isfinite(sigma_obs_sq))
            throw ParameterError("LikelihoodModel: sigma_obs_sq must be finite and >= 0");
        if (kind == LikelihoodKind::joint_interference && !pilots)
            throw ParameterError("LikelihoodModel: joint kind requires pilots (P1, P2)");
        if (variance_map)
            for (double v : *variance_map)
                if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("LikelihoodModel: bad variance map entry");
    }
    double obs_var(std::size_t i) const {
        return std::max(variance_map ? (*variance_map)[i] : sigma_obs_sq, sigma_obs_floor);
    }
};

namespace detail {

inline cplx sign_c(cplx r) {
    auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
    return {sgn(r.real()), sgn(r.imag())};
}

inline void check_lik(const LikelihoodModel& lik, const ComplexGrid& y, const Mask& mask) {
    lik.validate();
    require_same_shape(y.shape(), mask.shape(), "loglik_grad");
    if (lik.variance_map && lik.variance_map->size() != y.size())
        throw ShapeError("loglik_grad: variance map size mismatch");
    if (lik.pilot) require_same_shape(lik.pilot->shape(), y.shape(), "loglik_grad pilot");
    if (lik.pilots) {
        require_same_shape(lik.pilots->first.shape(), y.shape(), "loglik_grad P1");
        require_same_shape(lik.pilots->second.shape(), y.shape(), "loglik_grad P2");
    }
}

// Shared residual-to-gradient map for a single-user model with extra
// variance `extra` added to the observation variance.
inline ComplexGrid single_grad(const LikelihoodModel& lik, const ComplexGrid& y, const ComplexGrid& h,
                               const Mask& mask, double extra, bool laplace) {
    require_same_shape(h.shape(), y.shape(), "loglik_grad");
    ComplexGrid g(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!mask[i]) continue;
        const cplx p = lik.pilot ? (*lik.pilot)[i] : cplx{1.0};
        const cplx r = y[i] - p * h[i];
        const double v = lik.obs_var(i) + extra;
        g[i] = std::conj(p) * (laplace ? sign_c(r) / std::sqrt(v / 2.0) : r / v);
    }
    return g;
}

}  // namespace detail

// Gaussian or Laplace likelihood gradient at diffusion level sigma.
inline ComplexGrid loglik_grad(const LikelihoodModel& lik, const ComplexGrid& y, const ComplexGrid& h_est,
                               const Mask& mask, double sigma) {
    detail::check_lik(lik, y, mask);
    if (lik.kind == LikelihoodKind::joint_interference)
        throw ParameterError("loglik_grad: joint kind needs both estimates");
    return detail::single_grad(lik, y, h_est, mask, sigma * sigma, lik.kind == LikelihoodKind::laplace);
}

// Joint interference gradient for (H1, H2); each part is projected through
// the conjugate of its own pilot.
inline std::pair<ComplexGrid, ComplexGrid> loglik_grad(const LikelihoodModel& lik, const ComplexGrid& y,
                                                       const ComplexGrid& h1, const ComplexGrid& h2,
                                                       const Mask& mask, double sigma) {
    detail::check_lik(lik, y, mask);
    if (lik.kind != LikelihoodKind::joint_interference || !lik.pilots)
        throw ParameterError("loglik_grad: pair form requires the joint kind with pilots");
    require_same_shape(h1.shape(), y.shape(), "loglik_grad H1");
    require_same_shape(h2.shape(), y.shape(), "loglik_grad H2");
    const auto& [p1, p2] = *lik.pilots;
    ComplexGrid g1(y.shape()), g2(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!mask[i]) continue;
        const cplx r = (y[i] - (p1[i] * h1[i] + p2[i] * h2[i])) / (lik.obs_var(i) + sigma * sigma);
        g1[i] = std::conj(p1[i]) * r;
        g2[i] = std::conj(p2[i]) * r;
    }
    return {g1, g2};
}

struct LangevinConfig {
    double alpha_0 = 2e-4;
    double beta = 0.05;
    double zeta = 100.0;
    double r_0 = 0.99;
    double beta_0 = 0.0;  // carried for completeness, not consumed
    std::size_t M = 3;
    bool literal_step_scaling = false;  // compare L (not i) against zeta

    void validate() const {
        if (!(alpha_0 > 0.0)) throw ParameterError("LangevinConfig: alpha_0 must be > 0");
        if (!(beta >= 0.0)) throw ParameterError("LangevinConfig: beta must be >= 0");
        if (M < 1) throw ParameterError("LangevinConfig: M must be >= 1");
        if (!(r_0 > 0.0 && r_0 <= 1.0)) throw ParameterError("LangevinConfig: r_0 must lie in (0, 1]");
    }

    double step_scale(std::size_t i, std::size_t levels) const {
        const double idx = static_cast<double>(literal_step_scaling ? levels : i);
        return idx < zeta ? 1.0 : std::pow(r_0, idx - zeta);
    }
    double step_size(std::size_t i, const VeSchedule& s) const {
        return alpha_0 * step_scale(i, s.levels()) * s.sigma(i) / s.sigma_last();
    }
};

namespace detail {

inline ComplexGrid cn_init(const Shape& s, Rng& rng) { return gaussian_grid(s, rng, 0.5); }

inline void check_chain(const ComplexGrid& h, std::size_t level, const char* where) {
    if (!h.all_finite())
        throw DivergedError(std::string(where) + ": iterate diverged at level " + std::to_string(level), level);
}

// One Langevin move: H += a (s + g) + sqrt(2 a beta) z.
inline void langevin_move(ComplexGrid& h, const ComplexGrid& score, const ComplexGrid& grad, double a, double beta,
                          Rng& rng) {
    const double nz = std::sqrt(2.0 * a * beta);
    for (std::size_t k = 0; k < h.size(); ++k) {
        h[k] += a * (score[k] + grad[k]);
        if (nz > 0.0) h[k] += nz * cplx{std_normal(rng), std_normal(rng)};
    }
}

}  // namespace detail

// Annealed Langevin inpainting. `mask` is the observation mask used by the
// likelihood; the denoiser sees `prior_mask` (default: `mask`).
inline ComplexGrid langevin_inpaint(const ComplexGrid& y, const Mask& mask, const Denoiser& denoiser,
                                    const VeSchedule& schedule, const LangevinConfig& lcfg,
                                    const LikelihoodModel& lik, std::uint64_t seed,
                                    const std::optional<Mask>& prior_mask = std::nullopt) {
    lcfg.validate();
    detail::check_lik(lik, y, mask);
    const Mask& pm = prior_mask ? *prior_mask : mask;
    require_same_shape(pm.shape(), y.shape(), "langevin_inpaint prior mask");
    Rng rng = make_rng(derive_seed(seed, "langevin"));
    ComplexGrid h = detail::cn_init(y.shape(), rng);
    for (std::size_t i = 1; i <= schedule.levels(); ++i) {
        const double sigma = schedule.sigma(i);
        const double a = lcfg.step_size(i, schedule);
        for (std::size_t m = 0; m < lcfg.M; ++m) {
            const ComplexGrid score = score_from_denoiser(denoiser, h, pm, sigma);
            const ComplexGrid grad = loglik_grad(lik, y, h, mask, sigma);
            detail::langevin_move(h, score, grad, a, lcfg.beta, rng);
            detail::check_chain(h, i, "langevin_inpaint");
        }
    }
    return h;
}

enum class DdpmScoreMode { paper_literal, tweedie_consistent };

inline std::string to_string(DdpmScoreMode m) {
    return m == DdpmScoreMode::paper_literal ? "paper_literal" : "tweedie_consistent";
}
inline DdpmScoreMode parse_score_mode(const std::string& s) {
    if (s == "paper_literal") return DdpmScoreMode::paper_literal;
    if (s == "tweedie_consistent") return DdpmScoreMode::tweedie_consistent;
    throw ParameterError("unknown score mode '" + s + "'");
}

// DDPM inpainting. The data-consistency gradient treats the denoiser
// Jacobian as identity on the current iterate; only the Gaussian residual
// is used, whatever the likelihood kind.
inline ComplexGrid ddpm_inpaint(const ComplexGrid& y, const Mask& mask, const Denoiser& denoiser,
                                const VpSchedule& schedule, double zeta, const LikelihoodModel& lik,
                                DdpmScoreMode mode, std::uint64_t seed,
                                const std::optional<Mask>& prior_mask = std::nullopt) {
    if (!(zeta >= 0.0)) throw ParameterError("ddpm_inpaint: zeta must be >= 0");
    detail::check_lik(lik, y, mask);
    const Mask& pm = prior_mask ? *prior_mask : mask;
    require_same_shape(pm.shape(), y.shape(), "ddpm_inpaint prior mask");
    Rng rng = make_rng(derive_seed(seed, "ddpm"));
    ComplexGrid x = detail::cn_init(y.shape(), rng);
    ComplexGrid h0(y.shape());
    for (std::size_t i = schedule.steps(); i >= 1; --i) {
        const VpCoeffs c = schedule.coeffs(i);
        const double ab = c.alphabar;
        const double ab_prev = schedule.alphabar(i - 1);
        const double sab = std::sqrt(ab);
        const ComplexGrid f = denoiser.denoise({apply(pm, x), pm, VpLevel{i, ab}});
        for (std::size_t k = 0; k < x.size(); ++k) {
            const cplx s = mode == DdpmScoreMode::tweedie_consistent ? (sab * f[k] - x[k]) / (1.0 - ab)
                                                                     : sab / (1.0 - ab) * f[k];
            h0[k] = (x[k] + (1.0 - ab) * s) / sab;
        }
        const ComplexGrid g = detail::single_grad(lik, y, h0, mask, 0.0, false);
        const double cx = std::sqrt(c.alpha) * (1.0 - ab_prev) / (1.0 - ab);
        const double ch = std::sqrt(ab_prev) * c.beta / (1.0 - ab);
        const double cz = i > 1 ? std::sqrt(c.beta) : 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            cplx next = cx * x[k] + ch * h0[k];
            if (cz > 0.0) next += cz * cplx{std_normal(rng), std_normal(rng)} * std::numbers::sqrt2 / 2.0;
            // grad_H ||Y - A H0||^2 / s2 = -2 g, pushed back through 1/sqrt(alphabar)
            x[k] = next + zeta * 2.0 * g[k] / sab;
        }
        detail::check_chain(x, i, "ddpm_inpaint");
        detail::check_chain(h0, i, "ddpm_inpaint");
    }
    return h0;
}

// Single denoiser pass on the masked coarse estimate.
inline ComplexGrid one_step_baseline(const ComplexGrid& y_zf, const Mask& mask, const Denoiser& denoiser,
                                     const NoiseLevel& level) {
    require_same_shape(y_zf.shape(), mask.shape(), "one_step_baseline");
    return denoiser.denoise({apply(mask, y_zf), mask, level});
}

// Two coupled Langevin chains sharing the joint Gaussian likelihood.
// Chain j's denoiser sees `prior_masks[j]`, by default the support of P_j.
inline std::pair<ComplexGrid, ComplexGrid> joint_inpaint(
    const ComplexGrid& y, const Mask& mask, const ComplexGrid& p1, const ComplexGrid& p2, const Denoiser& denoiser,
    const VeSchedule& schedule, const LangevinConfig& lcfg, double sigma_obs_sq, std::uint64_t seed,
    const std::optional<std::pair<Mask, Mask>>& prior_masks = std::nullopt,
    const std::optional<ComplexGrid>& fixed_h2 = std::nullopt) {
    lcfg.validate();
    LikelihoodModel lik;
    lik.kind = LikelihoodKind::joint_interference;
    lik.sigma_obs_sq = sigma_obs_sq;
    lik.pilots = std::make_pair(p1, p2);
    detail::check_lik(lik, y, mask);
    auto support = [](const ComplexGrid& p) {
        Mask m(p.n_subcarriers(), p.n_antennas());
        for (std::size_t i = 0; i < p.size(); ++i) m.set_flat(i, p[i] != cplx{});
        return m;
    };
    const Mask m1 = prior_masks ? prior_masks->first : support(p1);
    const Mask m2 = prior_masks ? prior_masks->second : support(p2);
    Rng rng = make_rng(derive_seed(seed, "joint"));
    ComplexGrid h1 = detail::cn_init(y.shape(), rng);
    ComplexGrid h2 = detail::cn_init(y.shape(), rng);
    if (fixed_h2) h2 = *fixed_h2;
    for (std::size_t i = 1; i <= schedule.levels(); ++i) {
        const double sigma = schedule.sigma(i);
        const double a = lcfg.step_size(i, schedule);
        for (std::size_t m = 0; m < lcfg.M; ++m) {
            const ComplexGrid s1 = score_from_denoiser(denoiser, h1, m1, sigma);
            const ComplexGrid s2 = fixed_h2 ? ComplexGrid(y.shape()) : score_from_denoiser(denoiser, h2, m2, sigma);
            const auto [g1, g2] = loglik_grad(lik, y, h1, h2, mask, sigma);
            detail::langevin_move(h1, s1, g1, a, lcfg.beta, rng);
            if (!fixed_h2) detail::langevin_move(h2, s2, g2, a, lcfg.beta, rng);
            detail::check_chain(h1, i, "joint_inpaint");
            detail::check_chain(h2, i, "joint_inpaint");
        }
    }
    return {h1, h2};
}

}  // namespace srsdi
