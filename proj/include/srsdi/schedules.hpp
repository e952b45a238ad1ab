// schedules.hpp
//
// Noise schedules. VE: sigma_i = sigma_1 rho^(i-1), i = 1..L. VP: beta_i
// linear between the two endpoints, alpha_i = 1 - beta_i, alphabar_i the
// running product (alphabar_0 = 1).

#pragma once

#include "srsdi/core.hpp"

#include <vector>

namespace srsdi {

class VeSchedule {
public:
    VeSchedule(std::size_t levels, double sigma_1, double rho) : levels_(levels), sigma_1_(sigma_1), rho_(rho) {
        if (levels < 1) throw ParameterError("VeSchedule: L must be >= 1");
        if (!(sigma_1 > 0.0)) throw ParameterError("VeSchedule: sigma_1 must be > 0");
        if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("VeSchedule: rho must lie in (0, 1)");
    }

    // Geometric schedule pinned by its two endpoints.
    static VeSchedule from_endpoints(std::size_t levels, double sigma_1, double sigma_L) {
        if (levels < 2) throw ParameterError("VeSchedule::from_endpoints: L must be >= 2");
        if (!(sigma_L > 0.0 && sigma_L < sigma_1)) throw ParameterError("VeSchedule: need 0 < sigma_L < sigma_1");
        return {levels, sigma_1, std::pow(sigma_L / sigma_1, 1.0 / static_cast<double>(levels - 1))};
    }

    std::size_t levels() const { return levels_; }
    double sigma_1() const { return sigma_1_; }
    double rho() const { return rho_; }

    double sigma(std::size_t i) const {
        if (i < 1 || i > levels_) throw ParameterError("ve_sigma: level index out of range");
        return sigma_1_ * std::pow(rho_, static_cast<double>(i - 1));
    }
    double sigma_last() const { return sigma(levels_); }

private:
    std::size_t levels_;
    double sigma_1_;
    double rho_;
};

inline double ve_sigma(const VeSchedule& s, std::size_t i) { return s.sigma(i); }

struct VpCoeffs {
    double beta;
    double alpha;
    double alphabar;
};

class VpSchedule {
public:
    VpSchedule(std::size_t steps, double beta_1, double beta_L) : beta_1_(beta_1), beta_L_(beta_L) {
        if (steps < 1) throw ParameterError("VpSchedule: L must be >= 1");
        if (!(beta_1 > 0.0 && beta_1 <= beta_L && beta_L < 1.0))
            throw ParameterError("VpSchedule: require 0 < beta_1 <= beta_L < 1");
        beta_.resize(steps);
        alphabar_.resize(steps + 1);
        alphabar_[0] = 1.0;
        for (std::size_t i = 1; i <= steps; ++i) {
            beta_[i - 1] = steps == 1 ? beta_1
                                      : beta_1 + static_cast<double>(i - 1) / static_cast<double>(steps - 1) *
                                                     (beta_L - beta_1);
            alphabar_[i] = alphabar_[i - 1] * (1.0 - beta_[i - 1]);
        }
        if (steps > 1) beta_.back() = beta_L;
    }

    std::size_t steps() const { return beta_.size(); }
    double beta_1() const { return beta_1_; }
    double beta_L() const { return beta_L_; }

    VpCoeffs coeffs(std::size_t i) const {
        check(i);
        return {beta_[i - 1], 1.0 - beta_[i - 1], alphabar_[i]};
    }
    // Valid for i in [0, L]; alphabar(0) = 1.
    double alphabar(std::size_t i) const {
        if (i > steps()) throw ParameterError("vp_coeffs: step index out of range");
        return alphabar_[i];
    }

private:
    void check(std::size_t i) const {
        if (i < 1 || i > steps()) throw ParameterError("vp_coeffs: step index out of range");
    }
    double beta_1_, beta_L_;
    std::vector<double> beta_;
    std::vector<double> alphabar_;
};

inline VpCoeffs vp_coeffs(const VpSchedule& s, std::size_t i) { return s.coeffs(i); }

}  // namespace srsdi
