// denoiser.hpp
//
// The f_theta contract: map a masked, noisy grid at a known noise level to an
// estimate of the clean channel on the full grid. Implementations here: the
// exact Gaussian-prior MMSE estimator and a call-counting decorator. The
// neural implementation lives in nn/patch_transformer.hpp.

#pragma once

#include "srsdi/core.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <variant>

namespace srsdi {

// VE level: noise std sigma. The Gaussian denoiser reads it as
// z ~ CN(0, sigma^2 I).
struct VeLevel {
    double sigma;
};
// VP step i with its cumulative alphabar_i.
struct VpLevel {
    std::size_t step;
    double alphabar;
};
using NoiseLevel = std::variant<VeLevel, VpLevel>;

struct DenoiserInput {
    ComplexGrid grid;  // already multiplied by the mask
    Mask mask;
    NoiseLevel level;
};

class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual ComplexGrid denoise(const DenoiserInput& in) const = 0;
};

inline ComplexGrid denoise(const Denoiser& d, const DenoiserInput& in) { return d.denoise(in); }

// Per antenna column a, with O the masked-in subcarriers:
//   E[h | x] = Sigma[:, O] (Sigma[O, O] + s^2 I)^-1 x_O
// For a VP level the input is first rescaled by 1/sqrt(alphabar), giving
// s^2 = (1 - alphabar) / alphabar.
class AnalyticGaussianDenoiser final : public Denoiser {
public:
    explicit AnalyticGaussianDenoiser(Eigen::MatrixXcd covariance) : cov_(std::move(covariance)) {
        if (cov_.rows() != cov_.cols() || cov_.rows() == 0)
            throw ParameterError("AnalyticGaussianDenoiser: covariance must be square and non-empty");
        if ((cov_ - cov_.adjoint()).norm() > 1e-9 * (1.0 + cov_.norm()))
            throw ParameterError("AnalyticGaussianDenoiser: covariance is not Hermitian");
        floor_ = 1e-12 * std::max(cov_.diagonal().real().mean(), 1e-300);
    }

    const Eigen::MatrixXcd& covariance() const { return cov_; }

    ComplexGrid denoise(const DenoiserInput& in) const override {
        require_same_shape(in.grid.shape(), in.mask.shape(), "AnalyticGaussianDenoiser");
        const std::size_t n = in.grid.n_subcarriers();
        const std::size_t n_ant = in.grid.n_antennas();
        if (static_cast<std::size_t>(cov_.rows()) != n)
            throw ShapeError("AnalyticGaussianDenoiser: covariance size does not match subcarrier count");

        double scale = 1.0;
        double noise_var = 0.0;
        if (const auto* ve = std::get_if<VeLevel>(&in.level)) {
            if (!(ve->sigma >= 0.0)) throw ParameterError("AnalyticGaussianDenoiser: negative sigma");
            noise_var = ve->sigma * ve->sigma;
        } else {
            const double ab = std::get<VpLevel>(in.level).alphabar;
            if (!(ab > 0.0 && ab <= 1.0)) throw ParameterError("AnalyticGaussianDenoiser: alphabar outside (0, 1]");
            scale = 1.0 / std::sqrt(ab);
            noise_var = (1.0 - ab) / ab;
        }

        ComplexGrid out(in.grid.shape());
        for (std::size_t a = 0; a < n_ant; ++a) {
            std::vector<std::uint8_t> pattern(n);
            std::size_t m = 0;
            for (std::size_t k = 0; k < n; ++k) m += (pattern[k] = in.mask(k, a) ? 1 : 0);
            if (m == 0) continue;  // prior mean
            const auto gain = gain_matrix(pattern, noise_var);
            Eigen::VectorXcd x(static_cast<Eigen::Index>(m));
            Eigen::Index j = 0;
            for (std::size_t k = 0; k < n; ++k)
                if (pattern[k]) x(j++) = in.grid(k, a) * scale;
            const Eigen::VectorXcd h = (*gain) * x;
            for (std::size_t k = 0; k < n; ++k) out(k, a) = h(static_cast<Eigen::Index>(k));
        }
        out.require_finite("AnalyticGaussianDenoiser");
        return out;
    }

private:
    using Key = std::pair<std::vector<std::uint8_t>, double>;

    std::shared_ptr<const Eigen::MatrixXcd> gain_matrix(const std::vector<std::uint8_t>& pattern,
                                                        double noise_var) const {
        Key key{pattern, noise_var};
        {
            std::lock_guard lock(mu_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        std::vector<Eigen::Index> obs;
        for (std::size_t k = 0; k < pattern.size(); ++k)
            if (pattern[k]) obs.push_back(static_cast<Eigen::Index>(k));
        const auto m = static_cast<Eigen::Index>(obs.size());
        Eigen::MatrixXcd s_oo(m, m);
        Eigen::MatrixXcd s_no(cov_.rows(), m);
        for (Eigen::Index j = 0; j < m; ++j) {
            s_no.col(j) = cov_.col(obs[j]);
            for (Eigen::Index i = 0; i < m; ++i) s_oo(i, j) = cov_(obs[i], obs[j]);
        }
        s_oo.diagonal().array() += std::max(noise_var, floor_);
        Eigen::LDLT<Eigen::MatrixXcd> ldlt(s_oo);
        if (ldlt.info() != Eigen::Success) throw LinAlgError("AnalyticGaussianDenoiser: factorization failed");
        // W = S_no (S_oo)^-1, computed as (S_oo^-1 S_no^H)^H.
        Eigen::MatrixXcd w = ldlt.solve(s_no.adjoint()).adjoint();
        if (!w.allFinite()) throw LinAlgError("AnalyticGaussianDenoiser: singular system");
        auto ptr = std::make_shared<const Eigen::MatrixXcd>(std::move(w));
        std::lock_guard lock(mu_);
        if (cache_.size() > 8192) cache_.clear();
        cache_.emplace(std::move(key), ptr);
        return ptr;
    }

    Eigen::MatrixXcd cov_;
    double floor_ = 0.0;
    mutable std::mutex mu_;
    mutable std::map<Key, std::shared_ptr<const Eigen::MatrixXcd>> cache_;
};

inline std::shared_ptr<AnalyticGaussianDenoiser> analytic_gaussian_denoiser(const Eigen::MatrixXcd& cov) {
    return std::make_shared<AnalyticGaussianDenoiser>(cov);
}

// Closed-form score of the smoothed Gaussian prior, per antenna column:
// grad log N(x; 0, Sigma + sigma^2 I) = -(Sigma + sigma^2 I)^-1 x.
inline ComplexGrid gaussian_score(const Eigen::MatrixXcd& cov, double sigma, const ComplexGrid& x) {
    const auto n = cov.rows();
    if (static_cast<std::size_t>(n) != x.n_subcarriers()) throw ShapeError("gaussian_score: size mismatch");
    Eigen::MatrixXcd c = cov;
    c.diagonal().array() += sigma * sigma;
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(c);
    ComplexGrid out(x.shape());
    for (std::size_t a = 0; a < x.n_antennas(); ++a) {
        Eigen::VectorXcd v(n);
        for (Eigen::Index k = 0; k < n; ++k) v(k) = x(static_cast<std::size_t>(k), a);
        const Eigen::VectorXcd s = -ldlt.solve(v);
        for (Eigen::Index k = 0; k < n; ++k) out(static_cast<std::size_t>(k), a) = s(k);
    }
    return out;
}

// Literal score estimate -(H - f(A .* H, sigma)) / sigma. For the Gaussian
// denoiser this equals sigma times the Tweedie score.
inline ComplexGrid score_from_denoiser(const Denoiser& d, const ComplexGrid& h_est, const Mask& mask, double sigma) {
    if (!(sigma > 0.0)) throw ParameterError("score_from_denoiser: sigma must be > 0");
    const ComplexGrid f = d.denoise({apply(mask, h_est), mask, VeLevel{sigma}});
    return (f - h_est) *= (1.0 / sigma);
}

class CountingDenoiser final : public Denoiser {
public:
    explicit CountingDenoiser(std::shared_ptr<const Denoiser> inner) : inner_(std::move(inner)) {}
    ComplexGrid denoise(const DenoiserInput& in) const override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_->denoise(in);
    }
    std::size_t calls() const { return calls_.load(); }

private:
    std::shared_ptr<const Denoiser> inner_;
    mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace srsdi
