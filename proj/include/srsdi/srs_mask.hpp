// srs_mask.hpp
//
// SRS allocation patterns: comb allocation, disjoint per-user sub-masks, and
// test-time random masking on top of an allocation. Fractional counts round
// down and every random selection is without replacement.

#pragma once

#include "srsdi/core.hpp"
#include "srsdi/random.hpp"

#include <string>

namespace srsdi {

enum class ExtraMaskMode { subcarrier_only, subcarrier_and_antenna };

inline std::string to_string(ExtraMaskMode m) {
    return m == ExtraMaskMode::subcarrier_only ? "subcarrier_only" : "subcarrier_and_antenna";
}

inline ExtraMaskMode parse_extra_mask_mode(const std::string& s) {
    if (s == "subcarrier_only") return ExtraMaskMode::subcarrier_only;
    if (s == "subcarrier_and_antenna") return ExtraMaskMode::subcarrier_and_antenna;
    throw ParameterError("unknown mask mode '" + s + "'");
}

inline std::size_t floor_count(double fraction, std::size_t total) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(total) + 1e-9));
}

// Active iff k mod comb == offset, on every antenna.
inline Mask comb_mask(std::size_t n_subcarriers, std::size_t comb, std::size_t offset, std::size_t n_antennas) {
    if (comb < 1 || comb > n_subcarriers) throw ParameterError("comb_mask: require 1 <= comb <= N");
    if (offset >= comb) throw ParameterError("comb_mask: offset must be < comb");
    Mask m(n_subcarriers, n_antennas);
    for (std::size_t k = offset; k < n_subcarriers; k += comb)
        for (std::size_t a = 0; a < n_antennas; ++a) m.set(k, a, true);
    return m;
}

// Splits the active subcarriers of `base` into n_users disjoint groups of
// floor(keep_ratio * active) subcarriers each.
inline std::vector<Mask> user_submasks(const Mask& base, std::size_t n_users, double keep_ratio, std::uint64_t seed) {
    if (n_users < 1) throw ParameterError("user_submasks: n_users must be >= 1");
    if (!(keep_ratio >= 0.0 && keep_ratio <= 1.0)) throw ParameterError("user_submasks: keep_ratio outside [0,1]");
    if (keep_ratio * static_cast<double>(n_users) > 1.0 + 1e-12)
        throw ParameterError("user_submasks: keep_ratio * n_users exceeds 1");
    const auto active = base.active_subcarriers();
    const std::size_t per_user = floor_count(keep_ratio, active.size());
    Rng rng = make_rng(derive_seed(seed, "user_submasks"));
    const auto order = sample_without_replacement(active, active.size(), rng);
    std::vector<Mask> out;
    for (std::size_t u = 0; u < n_users; ++u) {
        Mask m(base.n_subcarriers(), base.n_antennas());
        for (std::size_t j = u * per_user; j < (u + 1) * per_user; ++j) {
            const std::size_t k = order[j];
            for (std::size_t a = 0; a < base.n_antennas(); ++a) m.set(k, a, base(k, a));
        }
        out.push_back(std::move(m));
    }
    return out;
}

// Removes floor(r% of active subcarriers) or floor(r% of active pixels).
inline Mask additional_mask(const Mask& base, double r_pct, ExtraMaskMode mode, std::uint64_t seed) {
    if (!(r_pct >= 0.0 && r_pct <= 100.0)) throw ParameterError("additional_mask: r outside [0, 100]");
    Rng rng = make_rng(derive_seed(seed, "additional_mask"));
    Mask out = base;
    if (mode == ExtraMaskMode::subcarrier_only) {
        const auto active = base.active_subcarriers();
        const auto drop = sample_without_replacement(active, floor_count(r_pct / 100.0, active.size()), rng);
        for (std::size_t k : drop)
            for (std::size_t a = 0; a < base.n_antennas(); ++a) out.set(k, a, false);
    } else {
        std::vector<std::size_t> pixels;
        for (std::size_t i = 0; i < base.size(); ++i)
            if (base[i]) pixels.push_back(i);
        const auto drop = sample_without_replacement(pixels, floor_count(r_pct / 100.0, pixels.size()), rng);
        for (std::size_t i : drop) out.set_flat(i, false);
    }
    return out;
}

// Training-time mask distribution: one fixed partition of the comb into
// user sub-masks; each draw picks one user's sub-mask uniformly.
class TrainingMaskSampler {
public:
    TrainingMaskSampler(const Mask& comb, double mask_ratio, std::uint64_t partition_seed) {
        if (!(mask_ratio >= 0.0 && mask_ratio < 1.0)) throw ParameterError("mask_ratio must lie in [0, 1)");
        const double keep = 1.0 - mask_ratio;
        const auto n_users = static_cast<std::size_t>(std::floor(1.0 / keep + 1e-9));
        masks_ = user_submasks(comb, n_users, keep, partition_seed);
    }

    const Mask& draw(Rng& rng) const {
        std::uniform_int_distribution<std::size_t> d(0, masks_.size() - 1);
        return masks_[d(rng)];
    }
    const std::vector<Mask>& masks() const { return masks_; }

private:
    std::vector<Mask> masks_;
};

}  // namespace srsdi
