// channel.hpp
//
// Clustered multipath surrogate for frequency-domain MIMO channels:
//
//   H[k,a] = sum_p g_p exp(-j 2 pi f_k tau_p) exp(j 2 pi a d sin(phi_p))
//
// with f_k = k * subcarrier_spacing and d the element spacing in wavelengths.
// Gains g_p ~ CN(0, P_p). In fixed-geometry mode only the gains are random,
// so each antenna column is exactly CN(0, Sigma) with Sigma from
// channel_covariance().

#pragma once

#include "srsdi/core.hpp"
#include "srsdi/random.hpp"

#include <Eigen/Dense>

#include <numbers>
#include <optional>
#include <string>

namespace srsdi {

struct PathGeometry {
    std::vector<double> delays_s;
    std::vector<double> angles_rad;
    std::vector<double> powers;

    std::size_t n_paths() const { return delays_s.size(); }
    void validate() const {
        if (delays_s.empty()) throw ParameterError("PathGeometry: at least one path required");
        if (angles_rad.size() != delays_s.size() || powers.size() != delays_s.size())
            throw ParameterError("PathGeometry: delays/angles/powers length mismatch");
        for (double p : powers)
            if (!(p >= 0.0) || !std::isfinite(p)) throw ParameterError("PathGeometry: invalid path power");
    }
    friend bool operator==(const PathGeometry&, const PathGeometry&) = default;
};

struct ClusterParams {
    std::size_t n_paths = 6;
    double delay_spread = 100e-9;       // s, mean excess delay of the exponential profile
    double angle_spread = 0.25;         // rad, std of path angles around the cluster centre
    double antenna_spacing = 0.5;       // wavelengths
    double subcarrier_spacing = 382.5e3;  // Hz
    double power_decay = 1.0;           // P_p ~ exp(-power_decay * tau_p / delay_spread)
    bool normalize_power = true;
    // When set, delays/angles/powers are frozen and only gains are drawn.
    std::optional<PathGeometry> fixed_geometry;

    void validate() const {
        if (n_paths < 1) throw ParameterError("ClusterParams: n_paths must be >= 1");
        if (!(delay_spread > 0.0)) throw ParameterError("ClusterParams: delay_spread must be > 0");
        if (!(subcarrier_spacing > 0.0)) throw ParameterError("ClusterParams: subcarrier_spacing must be > 0");
        if (!(angle_spread >= 0.0)) throw ParameterError("ClusterParams: angle_spread must be >= 0");
        if (!(power_decay >= 0.0)) throw ParameterError("ClusterParams: power_decay must be >= 0");
        if (!std::isfinite(antenna_spacing)) throw ParameterError("ClusterParams: antenna_spacing not finite");
        if (fixed_geometry) fixed_geometry->validate();
    }
};

// Draws a geometry from the surrogate's delay/angle/power profile.
inline PathGeometry draw_geometry(const ClusterParams& p, std::uint64_t seed) {
    p.validate();
    Rng rng = make_rng(derive_seed(seed, "geometry"));
    PathGeometry g;
    const double centre = (uniform01(rng) * 2.0 - 1.0) * std::numbers::pi / 3.0;
    for (std::size_t i = 0; i < p.n_paths; ++i) {
        const double tau = i == 0 ? 0.0 : -p.delay_spread * std::log(1.0 - uniform01(rng));
        const double phi = centre + p.angle_spread * std_normal(rng);
        g.delays_s.push_back(tau);
        g.angles_rad.push_back(phi);
    }
    std::sort(g.delays_s.begin(), g.delays_s.end());
    double total = 0.0;
    for (double tau : g.delays_s) {
        g.powers.push_back(std::exp(-p.power_decay * tau / p.delay_spread));
        total += g.powers.back();
    }
    if (p.normalize_power)
        for (double& pw : g.powers) pw /= total;
    return g;
}

// Freezes a geometry drawn from `geometry_seed` into the parameters.
inline ClusterParams with_fixed_geometry(ClusterParams p, std::uint64_t geometry_seed) {
    p.fixed_geometry.reset();
    p.fixed_geometry = draw_geometry(p, geometry_seed);
    p.n_paths = p.fixed_geometry->n_paths();
    return p;
}

// Evaluates the multipath sum for explicit geometry and gains.
inline ComplexGrid synthesize(const PathGeometry& g, const std::vector<cplx>& gains, std::size_t n_subcarriers,
                              std::size_t n_antennas, double subcarrier_spacing, double antenna_spacing) {
    g.validate();
    if (gains.size() != g.n_paths()) throw ParameterError("synthesize: one gain per path required");
    ComplexGrid h(n_subcarriers, n_antennas);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t p = 0; p < g.n_paths(); ++p) {
        const double wf = -two_pi * subcarrier_spacing * g.delays_s[p];
        const double wa = two_pi * antenna_spacing * std::sin(g.angles_rad[p]);
        for (std::size_t k = 0; k < n_subcarriers; ++k) {
            const cplx fk = gains[p] * std::polar(1.0, wf * static_cast<double>(k));
            for (std::size_t a = 0; a < n_antennas; ++a) h(k, a) += fk * std::polar(1.0, wa * static_cast<double>(a));
        }
    }
    h.require_finite("synthesize");
    return h;
}

inline ComplexGrid generate_channel(const ClusterParams& params, std::size_t n_subcarriers, std::size_t n_antennas,
                                    std::uint64_t seed) {
    params.validate();
    if (n_subcarriers < 1 || n_antennas < 1) throw ParameterError("generate_channel: N and A must be >= 1");
    const PathGeometry geom = params.fixed_geometry ? *params.fixed_geometry : draw_geometry(params, seed);
    Rng rng = make_rng(derive_seed(seed, "gains"));
    std::vector<cplx> gains;
    gains.reserve(geom.n_paths());
    for (double pw : geom.powers) gains.push_back(complex_normal(rng, pw));
    return synthesize(geom, gains, n_subcarriers, n_antennas, params.subcarrier_spacing, params.antenna_spacing);
}

// Per-antenna subcarrier covariance Sigma = E[h h^H] in fixed-geometry mode.
inline Eigen::MatrixXcd channel_covariance(const ClusterParams& params, std::size_t n_subcarriers) {
    params.validate();
    if (!params.fixed_geometry)
        throw UnsupportedModeError("channel_covariance: requires fixed-geometry parameters");
    const PathGeometry& g = *params.fixed_geometry;
    const auto n = static_cast<Eigen::Index>(n_subcarriers);
    Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t p = 0; p < g.n_paths(); ++p) {
        const double w = -2.0 * std::numbers::pi * params.subcarrier_spacing * g.delays_s[p];
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index l = 0; l < n; ++l)
                sigma(k, l) += g.powers[p] * std::polar(1.0, w * static_cast<double>(k - l));
    }
    return sigma;
}

// Named surrogate profiles standing in for the CDL families. They differ in
// path count, delay spread and angular spread only.
inline ClusterParams surrogate_profile(const std::string& name) {
    ClusterParams p;
    if (name == "A") {
        p.n_paths = 6;
        p.delay_spread = 60e-9;
        p.angle_spread = 0.15;
    } else if (name == "B") {
        p.n_paths = 8;
        p.delay_spread = 90e-9;
        p.angle_spread = 0.25;
    } else if (name == "C") {
        p.n_paths = 10;
        p.delay_spread = 120e-9;
        p.angle_spread = 0.35;
    } else {
        throw ParameterError("surrogate_profile: unknown profile '" + name + "' (expected A, B or C)");
    }
    return p;
}

}  // namespace srsdi
