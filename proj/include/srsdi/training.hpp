// training.hpp
//
// Training of the masked denoiser. Per example: draw a training mask, a
// level i ~ U[1, L], corrupt, and regress the full clean grid with the
// squared error summed over every pixel. Batches are averaged and applied
// with Adam.
//
// VE corruption adds z with N(0, sigma_i^2) per real component on all
// pixels; VP corruption multiplies the noisy mixture by the mask, with
// z ~ CN(0, I).

#pragma once

#include "srsdi/denoiser.hpp"
#include "srsdi/nn/patch_transformer.hpp"
#include "srsdi/parallel.hpp"
#include "srsdi/schedules.hpp"
#include "srsdi/srs_mask.hpp"

#include <chrono>
#include <functional>
#include <optional>

namespace srsdi {

enum class Objective { ve, vp };

inline std::string to_string(Objective o) { return o == Objective::ve ? "ve" : "vp"; }
inline Objective parse_objective(const std::string& s) {
    if (s == "ve") return Objective::ve;
    if (s == "vp") return Objective::vp;
    throw ParameterError("unknown objective '" + s + "' (expected ve or vp)");
}

struct TrainConfig {
    Objective objective = Objective::ve;
    VeSchedule ve{200, 2.0, 0.97};
    VpSchedule vp{200, 1e-4, 0.05};
    double mask_ratio = 0.75;
    std::size_t epochs = 30;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    std::uint64_t seed = 1;
    bool mask_ve_noise = false;  // ablation: zero VE noise outside the mask
    std::size_t workers = 1;

    void validate() const {
        if (batch_size < 1) throw ParameterError("TrainConfig: batch_size must be >= 1");
        if (!(mask_ratio >= 0.0 && mask_ratio < 1.0)) throw ParameterError("TrainConfig: mask_ratio outside [0, 1)");
        if (!(learning_rate >= 0.0)) throw ParameterError("TrainConfig: learning_rate must be >= 0");
    }
    std::size_t levels() const { return objective == Objective::ve ? ve.levels() : vp.steps(); }
};

inline ComplexGrid ve_corrupt(const ComplexGrid& h, const Mask& mask, double sigma, std::uint64_t seed,
                              bool mask_noise = false) {
    if (!(sigma >= 0.0)) throw ParameterError("ve_corrupt: sigma must be >= 0");
    Rng rng = make_rng(derive_seed(seed, "ve_corrupt"));
    ComplexGrid out = apply(mask, h);
    const ComplexGrid z = gaussian_grid(h.shape(), rng, sigma * sigma);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!mask_noise || mask[i]) out[i] += z[i];
    return out;
}

inline ComplexGrid vp_corrupt(const ComplexGrid& h, const Mask& mask, std::size_t step, const VpSchedule& s,
                              std::uint64_t seed) {
    const double ab = s.coeffs(step).alphabar;
    Rng rng = make_rng(derive_seed(seed, "vp_corrupt"));
    const ComplexGrid z = gaussian_grid(h.shape(), rng, 0.5);
    ComplexGrid mix = h * std::sqrt(ab);
    mix += z * std::sqrt(1.0 - ab);
    return apply(mask, mix);
}

// One corrupted training example.
struct TrainingExample {
    ComplexGrid input;
    Mask mask;
    NoiseLevel level;
};

inline TrainingExample make_training_example(const ComplexGrid& h, const TrainConfig& cfg,
                                             const TrainingMaskSampler& masks, std::uint64_t seed) {
    Rng rng = make_rng(derive_seed(seed, "example"));
    const Mask& m = masks.draw(rng);
    std::uniform_int_distribution<std::size_t> level(1, cfg.levels());
    const std::size_t i = level(rng);
    if (cfg.objective == Objective::ve) {
        const double sigma = cfg.ve.sigma(i);
        return {ve_corrupt(h, m, sigma, derive_seed(seed, "noise"), cfg.mask_ve_noise), m, VeLevel{sigma}};
    }
    return {vp_corrupt(h, m, i, cfg.vp, derive_seed(seed, "noise")), m, VpLevel{i, cfg.vp.coeffs(i).alphabar}};
}

inline double squared_error(const ComplexGrid& a, const ComplexGrid& b) {
    require_same_shape(a.shape(), b.shape(), "squared_error");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return s;
}

// Mean over the batch of ||H - f(H~)||^2 for any denoiser; no update.
inline double batch_loss(const Denoiser& d, const std::vector<ComplexGrid>& batch, const TrainConfig& cfg,
                         const TrainingMaskSampler& masks, std::uint64_t seed) {
    if (batch.empty()) throw ParameterError("batch_loss: empty batch");
    std::vector<double> losses(batch.size());
    parallel_for(batch.size(), cfg.workers, [&](std::size_t j) {
        const auto ex = make_training_example(batch[j], cfg, masks, derive_seed(seed, j));
        losses[j] = squared_error(batch[j], d.denoise({ex.input, ex.mask, ex.level}));
    });
    double total = 0.0;
    for (double l : losses) total += l;
    return total / static_cast<double>(batch.size());
}

class Adam {
public:
    Adam(const nn::ParamStore& ps, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(ps.zeros_like()), v_(ps.zeros_like()) {}

    void step(nn::ParamStore& ps, const nn::Grads& g) {
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < ps.size(); ++i) {
            m_[i] = b1_ * m_[i] + (1.0 - b1_) * g[i];
            v_[i] = b2_ * v_[i] + (1.0 - b2_) * g[i].cwiseProduct(g[i]);
            if (lr_ == 0.0) continue;
            ps[i].array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
        }
    }
    std::size_t steps() const { return t_; }

private:
    double lr_, b1_, b2_, eps_;
    std::size_t t_ = 0;
    nn::Grads m_, v_;
};

struct StepResult {
    double loss;
    nn::Grads grads;
};

// Loss and gradient of the batch objective without touching the weights.
inline StepResult loss_and_grad(const nn::PatchTransformer& model, const std::vector<const ComplexGrid*>& batch,
                                const TrainConfig& cfg, const TrainingMaskSampler& masks, std::uint64_t seed) {
    if (batch.empty()) throw ParameterError("training_step: empty batch");
    const auto inv_b = 1.0 / static_cast<double>(batch.size());
    std::vector<double> losses(batch.size());
    std::vector<nn::Grads> per_example(batch.size());
    parallel_for(batch.size(), cfg.workers, [&](std::size_t j) {
        const ComplexGrid& h = *batch[j];
        const auto ex = make_training_example(h, cfg, masks, derive_seed(seed, j));
        nn::PatchTransformer::Cache cache;
        const nn::Mat out = model.forward(ex.input, ex.mask, ex.level, &cache);
        const nn::Mat target = model.to_patches(h, Mask::ones(h.n_subcarriers(), h.n_antennas()));
        const nn::Mat diff = out - target;
        losses[j] = diff.squaredNorm();
        per_example[j] = model.params().zeros_like();
        model.backward(cache, (2.0 * inv_b) * diff, per_example[j]);
    });
    StepResult r{0.0, model.params().zeros_like()};
    for (std::size_t j = 0; j < batch.size(); ++j) {
        r.loss += losses[j];
        for (std::size_t t = 0; t < r.grads.size(); ++t) r.grads[t] += per_example[j][t];
    }
    r.loss *= inv_b;
    if (!std::isfinite(r.loss))
        throw NumericError("training_step: non-finite loss (batch of " + std::to_string(batch.size()) +
                           ", seed " + std::to_string(seed) + ")");
    return r;
}

inline double training_step(nn::PatchTransformer& model, Adam& opt, const std::vector<const ComplexGrid*>& batch,
                            const TrainConfig& cfg, const TrainingMaskSampler& masks, std::uint64_t seed) {
    StepResult r = loss_and_grad(model, batch, cfg, masks, seed);
    opt.step(model.params(), r.grads);
    if (!model.params().all_finite()) throw NumericError("training_step: weights became non-finite");
    return r.loss;
}

struct EpochStat {
    std::size_t epoch;
    double mean_loss;
    double wall_seconds;
};

// Full training loop. The dataset order is reshuffled each epoch from the
// seed; `on_epoch` sees every epoch's statistics as they are produced.
inline std::vector<EpochStat> train(nn::PatchTransformer& model, const std::vector<ComplexGrid>& dataset,
                                    const TrainConfig& cfg, const TrainingMaskSampler& masks,
                                    const std::function<void(const EpochStat&)>& on_epoch = {}) {
    if (dataset.empty()) throw ParameterError("train: empty dataset");
    cfg.validate();
    Adam opt(model.params(), cfg.learning_rate);
    std::vector<EpochStat> stats;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t e = 1; e <= cfg.epochs; ++e) {
        Rng rng = make_rng(derive_seed(cfg.seed, "shuffle", e));
        const auto order = shuffled_indices(dataset.size(), rng);
        double sum = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::vector<const ComplexGrid*> batch;
            for (std::size_t j = start; j < std::min(order.size(), start + cfg.batch_size); ++j)
                batch.push_back(&dataset[order[j]]);
            sum += training_step(model, opt, batch, cfg, masks, derive_seed(cfg.seed, "step", e, start));
            ++n_batches;
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        stats.push_back({e, sum / static_cast<double>(n_batches), wall});
        if (on_epoch) on_epoch(stats.back());
    }
    return stats;
}

// Rescales a dataset to unit average power per pixel; returns the factor.
inline double normalize_power(std::vector<ComplexGrid>& dataset) {
    double p = 0.0;
    std::size_t n = 0;
    for (const auto& g : dataset) {
        p += g.squared_norm();
        n += g.size();
    }
    if (n == 0 || p <= 0.0) throw ParameterError("normalize_power: zero-power dataset");
    const double s = std::sqrt(static_cast<double>(n) / p);
    for (auto& g : dataset) g *= s;
    return s;
}

// 1.5 x the largest pairwise RMS per-component distance among (a sample of)
// the training grids: sigma_1 then dominates the data diameter in the same
// per-component units the VE noise uses.
inline double desk_sigma1(const std::vector<ComplexGrid>& dataset, std::size_t max_samples = 128) {
    const std::size_t n = std::min(dataset.size(), max_samples);
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d2 = squared_error(dataset[i], dataset[j]) / (2.0 * static_cast<double>(dataset[i].size()));
            best = std::max(best, std::sqrt(d2));
        }
    return 1.5 * best;
}

}  // namespace srsdi
