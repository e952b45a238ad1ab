// Analytic Gaussian denoiser and the literal score estimate.

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace srsdi;

namespace {

Eigen::MatrixXcd toeplitz_cov(std::size_t n, double rho, double phase) {
    Eigen::MatrixXcd c(n, n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
            const double d = static_cast<double>(k) - static_cast<double>(l);
            c(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
                std::pow(rho, std::abs(d)) * std::polar(1.0, phase * d);
        }
    return c;
}

std::vector<Eigen::MatrixXcd> three_covariances() {
    return {Eigen::MatrixXcd::Identity(8, 8) * 0.7, toeplitz_cov(8, 0.8, 0.3),
            channel_covariance(tu::three_path_params(), 8)};
}

}  // namespace

TEST(Analytic, IdentityHalvesAtUnitSigma) {
    AnalyticGaussianDenoiser d(Eigen::MatrixXcd::Identity(6, 6));
    const ComplexGrid x = tu::random_grid(6, 3, 1);
    const ComplexGrid f = d.denoise({x, Mask::ones(6, 3), VeLevel{1.0}});
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(std::abs(f[i] - x[i] * 0.5), 0.0, 1e-14);
}

TEST(Analytic, ScalarShrinkage) {
    const double c = 2.5, s = 0.7;
    AnalyticGaussianDenoiser d(Eigen::MatrixXcd::Identity(5, 5) * c);
    const ComplexGrid x = tu::random_grid(5, 2, 2);
    const ComplexGrid f = d.denoise({x, Mask::ones(5, 2), VeLevel{s}});
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(std::abs(f[i] - x[i] * (c / (c + s * s))), 0.0, 1e-13);
}

TEST(Analytic, LargeSigmaAndEmptyMaskGivePriorMean) {
    AnalyticGaussianDenoiser d(toeplitz_cov(8, 0.9, 0.1));
    const ComplexGrid x = tu::random_grid(8, 2, 3);
    EXPECT_LT(d.denoise({x, Mask::ones(8, 2), VeLevel{1e6}}).squared_norm(), 1e-20);
    EXPECT_EQ(d.denoise({x, Mask::zeros(8, 2), VeLevel{0.1}}).squared_norm(), 0.0);
}

TEST(Analytic, FlatChannelExtrapolatesPerfectly) {
    AnalyticGaussianDenoiser d(Eigen::MatrixXcd::Ones(8, 8));
    Mask m(8, 1);
    for (std::size_t k = 0; k < 4; ++k) m.set(k, 0, true);
    const ComplexGrid x(8, 1, cplx{0.4, -1.1});
    const ComplexGrid f = d.denoise({apply(m, x), m, VeLevel{1e-5}});
    for (std::size_t k = 4; k < 8; ++k) EXPECT_NEAR(std::abs(f(k, 0) - f(0, 0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(f(0, 0) - x(0, 0)), 0.0, 1e-8);
}

// Brute force: E[H | H + z = x] by self-normalized importance sampling over
// prior draws, 2x2 covariance, 10^6 samples.
TEST(Analytic, MatchesMonteCarloPosteriorMean) {
    Eigen::MatrixXcd cov(2, 2);
    cov << 1.0, cplx{0.5, 0.2}, cplx{0.5, -0.2}, 0.8;
    const double sigma = 0.8;
    AnalyticGaussianDenoiser d(cov);
    ComplexGrid x(2, 1);
    x(0, 0) = {0.6, -0.3};
    x(1, 0) = {0.2, 0.5};
    const ComplexGrid f = d.denoise({x, Mask::ones(2, 1), VeLevel{sigma}});

    Eigen::LLT<Eigen::MatrixXcd> llt(cov);
    const Eigen::MatrixXcd lower = llt.matrixL();
    Rng rng = make_rng(5);
    cplx num0{}, num1{};
    double den = 0.0;
    for (int s = 0; s < 1000000; ++s) {
        Eigen::Vector2cd w(complex_normal(rng), complex_normal(rng));
        const Eigen::Vector2cd h = lower * w;
        const double r = std::norm(x(0, 0) - h(0)) + std::norm(x(1, 0) - h(1));
        const double wt = std::exp(-r / (sigma * sigma));
        num0 += wt * h(0);
        num1 += wt * h(1);
        den += wt;
    }
    const cplx mc0 = num0 / den, mc1 = num1 / den;
    const double ref = std::sqrt(std::norm(f(0, 0)) + std::norm(f(1, 0)));
    EXPECT_LT(std::sqrt(std::norm(mc0 - f(0, 0)) + std::norm(mc1 - f(1, 0))) / ref, 0.01);
}

TEST(Score, FixedPointIsZero) {
    struct Identity final : Denoiser {
        ComplexGrid denoise(const DenoiserInput& in) const override { return in.grid; }
    } id;
    const ComplexGrid h = tu::random_grid(4, 2, 1);
    EXPECT_EQ(score_from_denoiser(id, h, Mask::ones(4, 2), 0.3).squared_norm(), 0.0);
    EXPECT_THROW(score_from_denoiser(id, h, Mask::ones(4, 2), 0.0), ParameterError);
}

TEST(Score, IdentityCovarianceUnitSigma) {
    AnalyticGaussianDenoiser d(Eigen::MatrixXcd::Identity(4, 4));
    const ComplexGrid h = tu::random_grid(4, 2, 2);
    const ComplexGrid s = score_from_denoiser(d, h, Mask::ones(4, 2), 1.0);
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(std::abs(s[i] + h[i] * 0.5), 0.0, 1e-14);
}

// score / sigma equals the closed-form Gaussian score: 3 covariances x 5 sigmas.
TEST(Score, TweedieMatchesClosedForm) {
    for (const auto& cov : three_covariances()) {
        AnalyticGaussianDenoiser d(cov);
        for (double sigma : {0.05, 0.1, 0.5, 1.0, 3.0}) {
            const ComplexGrid h = tu::random_grid(8, 3, 7);
            const ComplexGrid lit = score_from_denoiser(d, h, Mask::ones(8, 3), sigma);
            const ComplexGrid ref = gaussian_score(cov, sigma, h);
            for (std::size_t i = 0; i < h.size(); ++i)
                EXPECT_NEAR(std::abs(lit[i] / sigma - ref[i]), 0.0, 1e-8) << "sigma " << sigma;
        }
    }
}

// gaussian_score agrees with finite differences of log N(x; 0, Sigma + s^2 I):
// for f real, the score is (df/dRe + j df/dIm) / 2.
TEST(Score, FiniteDifferenceOfLogDensity) {
    for (const auto& cov : three_covariances())
        for (double sigma : {0.1, 1.0}) {
            Eigen::MatrixXcd c = cov;
            c.diagonal().array() += sigma * sigma;
            const Eigen::MatrixXcd ci = c.inverse();
            ComplexGrid x = tu::random_grid(8, 1, 3);
            auto logp = [&](const ComplexGrid& g) {
                Eigen::VectorXcd v(8);
                for (Eigen::Index k = 0; k < 8; ++k) v(k) = g(static_cast<std::size_t>(k), 0);
                return -(v.adjoint() * ci * v)(0).real();
            };
            const ComplexGrid s = gaussian_score(cov, sigma, x);
            const double eps = 1e-6;
            for (std::size_t k = 0; k < 8; ++k) {
                ComplexGrid a = x, b = x, e = x, f = x;
                a(k, 0) += eps;
                b(k, 0) -= eps;
                e(k, 0) += cplx{0.0, eps};
                f(k, 0) -= cplx{0.0, eps};
                const cplx fd{(logp(a) - logp(b)) / (2 * eps) / 2.0, (logp(e) - logp(f)) / (2 * eps) / 2.0};
                EXPECT_LT(std::abs(fd - s(k, 0)), 1e-4 * std::max(1.0, std::abs(s(k, 0))));
            }
        }
}

TEST(Analytic, VpLevelMatchesScaledGaussian) {
    // x = sqrt(ab) H + sqrt(1 - ab) z  ->  E[H | x] = f(x / sqrt(ab)) at sigma^2 = (1 - ab) / ab.
    const auto cov = toeplitz_cov(8, 0.7, 0.2);
    AnalyticGaussianDenoiser d(cov);
    const double ab = 0.6;
    const ComplexGrid x = tu::random_grid(8, 2, 4);
    const ComplexGrid vp = d.denoise({x, Mask::ones(8, 2), VpLevel{5, ab}});
    const ComplexGrid ve =
        d.denoise({x * (1.0 / std::sqrt(ab)), Mask::ones(8, 2), VeLevel{std::sqrt((1.0 - ab) / ab)}});
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(std::abs(vp[i] - ve[i]), 0.0, 1e-12);
}

TEST(Analytic, Deterministic) {
    AnalyticGaussianDenoiser d(toeplitz_cov(8, 0.5, 0.0));
    const ComplexGrid x = tu::random_grid(8, 2, 5);
    const Mask m = comb_mask(8, 2, 0, 2);
    EXPECT_EQ(d.denoise({x, m, VeLevel{0.2}}).values(), d.denoise({x, m, VeLevel{0.2}}).values());
}
