// acceptance.cpp
//
// One PASS/FAIL line per acceptance criterion, then a summary. Exit status is
// the number of failed criteria. Trained-model criteria train in process from
// configs/desk.cfg (and configs/desk_long.cfg layered on top for 5, 6, 7, 9).

#include "srsdi/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace srsdi;

namespace {

int g_failed = 0;

void report(int id, bool ok, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failed;
}

void note(const std::string& s) {
    std::printf("  %s\n", s.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char b[64];
    std::snprintf(b, sizeof b, f, a);
    return b;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

double rel_error(const ComplexGrid& a, const ComplexGrid& b) {
    return std::sqrt(squared_error(a, b) / b.squared_norm());
}

// Central differences, d/dRe + j d/dIm.
template <class F>
ComplexGrid fd_gradient(const ComplexGrid& h, F f, double eps = 1e-6) {
    ComplexGrid g(h.shape());
    for (std::size_t i = 0; i < h.size(); ++i) {
        ComplexGrid hp = h, hm = h;
        hp[i] += eps;
        hm[i] -= eps;
        const double dre = (f(hp) - f(hm)) / (2 * eps);
        hp = h;
        hm = h;
        hp[i] += cplx{0, eps};
        hm[i] -= cplx{0, eps};
        const double dim = (f(hp) - f(hm)) / (2 * eps);
        g[i] = cplx{dre, dim};
    }
    return g;
}

ComplexGrid random_grid(std::size_t n, std::size_t a, std::uint64_t seed, double var = 1.0) {
    Rng rng = make_rng(seed);
    return gaussian_grid({n, a}, rng, var / 2.0);
}

ExperimentConfig load_cfg(const std::string& name, const std::vector<std::string>& layers = {}) {
    ExperimentConfig c = ExperimentConfig::load(SRSDI_CONFIG_DIR "/" + name);
    for (const auto& l : layers) {
        std::ifstream is(SRSDI_CONFIG_DIR "/" + l);
        if (!is) throw ConfigError("cannot open " + l);
        c.merge_text(is, l);
    }
    c.validate();
    return c;
}

double mean_of(const std::vector<ResultRecord>& r, const std::function<bool(const ResultRecord&)>& pred) {
    return mean_nmse(r, pred);
}

// ---------------------------------------------------------------------------

void criterion_1() {
    Stopwatch sw;
    const std::size_t n = 32;
    const ClusterParams prior = with_fixed_geometry(surrogate_profile("A"), 11);
    const Eigen::MatrixXcd cov = channel_covariance(prior, n);
    const auto den = analytic_gaussian_denoiser(cov);
    const Mask mask = comb_mask(n, 2, 0, 1);  // 50%
    const NoiseSpec noise = NoiseSpec::from_snr_db(20.0);
    LikelihoodModel lik;
    lik.sigma_obs_sq = noise.sigma_obs_sq;

    std::vector<ComplexGrid> train;
    for (std::size_t i = 0; i < 64; ++i) train.push_back(generate_channel(prior, n, 1, derive_seed(1, "train", i)));
    const VeSchedule ve = VeSchedule::from_endpoints(200, desk_sigma1(train), 1e-3);
    const VpSchedule vp(200, 1e-4, 0.05);
    LangevinConfig lc;  // defaults, M = 3

    const std::size_t seeds = 50;
    double e_lan = 0.0, e_ddpm = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) {
        const ComplexGrid h = generate_channel(prior, n, 1, derive_seed(2, "oracle", s));
        const ComplexGrid y = observe(h, mask, noise, derive_seed(2, "oracle_noise", s));
        const ComplexGrid pm = den->denoise({y, mask, VeLevel{std::sqrt(noise.sigma_obs_sq)}});
        e_lan += rel_error(langevin_inpaint(y, mask, *den, ve, lc, lik, s), pm);
        e_ddpm += rel_error(ddpm_inpaint(y, mask, *den, vp, 1.2e-3, lik, DdpmScoreMode::tweedie_consistent, s), pm);
    }
    e_lan /= seeds;
    e_ddpm /= seeds;
    const double t = sw.seconds();
    report(1, e_lan < 0.05 && e_ddpm < 0.05 && t < 60.0,
           "oracle posterior mean, 50 seeds: langevin rel err " + fmt("%.4f", e_lan) + ", ddpm " + fmt("%.4f", e_ddpm) +
               " (bound 0.05), " + fmt("%.1f s", t) + " (bound 60 s)");
}

// ---------------------------------------------------------------------------

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

void criterion_2() {
    const std::vector<Eigen::MatrixXcd> covs{Eigen::MatrixXcd::Identity(8, 8) * 0.7, toeplitz_cov(8, 0.8, 0.3),
                                             channel_covariance(with_fixed_geometry(surrogate_profile("B"), 4), 8)};
    double worst_score = 0.0;
    for (const auto& cov : covs) {
        AnalyticGaussianDenoiser d(cov);
        for (double sigma : {0.05, 0.1, 0.5, 1.0, 3.0}) {
            const ComplexGrid x = random_grid(8, 3, 7);
            const ComplexGrid lit = score_from_denoiser(d, x, Mask::ones(8, 3), sigma);
            const ComplexGrid ref = gaussian_score(cov, sigma, x);
            for (std::size_t i = 0; i < x.size(); ++i) worst_score = std::max(worst_score, std::abs(lit[i] / sigma - ref[i]));
        }
    }

    // Likelihood gradients against finite differences.
    const std::size_t n = 12, a = 2;
    const double sigma = 0.2;
    Mask m(n, a);
    for (std::size_t k = 0; k < n; k += 2)
        for (std::size_t j = 0; j < a; ++j) m.set(k, j, true);
    const ComplexGrid y = apply(m, random_grid(n, a, 3));
    LikelihoodModel g;
    g.sigma_obs_sq = 0.05;
    const double v = g.sigma_obs_sq + sigma * sigma;
    auto gauss_ll = [&](const ComplexGrid& h) {
        double s = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i)
            if (m[i]) s -= std::norm(y[i] - h[i]) / (2.0 * v);
        return s;
    };
    const ComplexGrid h0 = random_grid(n, a, 4);
    const double e_gauss = rel_error(loglik_grad(g, y, h0, m, sigma), fd_gradient(h0, gauss_ll));

    const ComplexGrid p1 = zc_pilot_grid({n, a}, 1), p2 = zc_pilot_grid({n, a}, 5);
    LikelihoodModel j;
    j.kind = LikelihoodKind::joint_interference;
    j.sigma_obs_sq = 0.05;
    j.pilots = std::make_pair(p1, p2);
    const ComplexGrid h2 = random_grid(n, a, 5);
    auto joint_ll = [&](const ComplexGrid& x1, const ComplexGrid& x2) {
        double s = 0.0;
        for (std::size_t i = 0; i < x1.size(); ++i)
            if (m[i]) s -= std::norm(y[i] - p1[i] * x1[i] - p2[i] * x2[i]) / (2.0 * v);
        return s;
    };
    const auto [g1, g2] = loglik_grad(j, y, h0, h2, m, sigma);
    const double e_j1 = rel_error(g1, fd_gradient(h0, [&](const ComplexGrid& x) { return joint_ll(x, h2); }));
    const double e_j2 = rel_error(g2, fd_gradient(h2, [&](const ComplexGrid& x) { return joint_ll(h0, x); }));
    const double e_lik = std::max({e_gauss, e_j1, e_j2});
    report(2, worst_score < 1e-8 && e_lik < 1e-5,
           "score max abs dev " + fmt("%.2e", worst_score) + " (bound 1e-8, 3 covariances x 5 sigmas); likelihood FD rel " +
               fmt("%.2e", e_lik) + " (bound 1e-5)");
}

// ---------------------------------------------------------------------------

void criterion_3() {
    const VeSchedule ve(3000, 156.6, 0.995);
    const VpSchedule vp(1000, 1e-4, 0.02);
    bool ok = ve_sigma(ve, 1) == 156.6 && std::abs(ve_sigma(ve, 2) / ve_sigma(ve, 1) - 0.995) < 1e-15;
    ok = ok && std::abs(ve_sigma(ve, 3000) - 156.6 * std::pow(0.995, 2999)) < 1e-18;
    ok = ok && vp.coeffs(1).beta == 1e-4 && vp.coeffs(1000).beta == 0.02;
    bool decreasing = true;
    for (std::size_t i = 1; i <= 1000; ++i) decreasing = decreasing && vp.alphabar(i) < vp.alphabar(i - 1);
    report(3, ok && decreasing,
           "sigma_1 " + fmt("%.4g", ve_sigma(ve, 1)) + ", ratio 0.995, sigma_3000 " + fmt("%.4e", ve_sigma(ve, 3000)) +
               "; beta_1 " + fmt("%.0e", vp.coeffs(1).beta) + ", beta_1000 " + fmt("%.2g", vp.coeffs(1000).beta) +
               "; alphabar strictly decreasing " + (decreasing ? "yes" : "no"));
}

// ---------------------------------------------------------------------------

double toy_gradient_check() {
    nn::PatchTransformerConfig c;
    c.n_subcarriers = 8;
    c.n_antennas = 4;
    c.patch_h = 2;
    c.patch_w = 2;
    c.embed_enc = c.embed_dec = 8;
    c.depth_enc = c.depth_dec = 1;
    c.heads = 2;
    c.mlp_ratio = 2;
    c.level_embedding = true;
    c.input_skip = true;
    nn::PatchTransformer model(c);
    model.init(11);
    Rng rng = make_rng(5);
    for (std::size_t t = 0; t < model.params().size(); ++t)
        for (Eigen::Index i = 0; i < model.params()[t].size(); ++i) model.params()[t](i) += 0.1 * std_normal(rng);
    Mask m(8, 4);
    for (std::size_t k : {0u, 1u, 4u})
        for (std::size_t a = 0; a < 4; ++a) m.set(k, a, true);
    const ComplexGrid target = random_grid(8, 4, 21);
    const ComplexGrid x = apply(m, target + random_grid(8, 4, 22, 0.1));
    const NoiseLevel lvl = VeLevel{0.3};
    auto loss = [&] { return squared_error(target, model.from_patches(model.forward(x, m, lvl, nullptr))); };

    nn::PatchTransformer::Cache cache;
    const nn::Mat out = model.forward(x, m, lvl, &cache);
    nn::Grads g = model.params().zeros_like();
    model.backward(cache, 2.0 * (out - model.to_patches(target, Mask::ones(8, 4))), g);
    double worst = 0.0;
    const double h = 1e-5;
    for (std::size_t t = 0; t < model.params().size(); ++t) {
        nn::Mat& w = model.params()[t];
        nn::Mat num(w.rows(), w.cols());
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double keep = w(i);
            w(i) = keep + h;
            const double lp = loss();
            w(i) = keep - h;
            const double lm = loss();
            w(i) = keep;
            num(i) = (lp - lm) / (2 * h);
        }
        worst = std::max(worst, (g[t] - num).norm() / std::max(num.norm(), 1e-8));
    }
    return worst;
}

void criterion_4() {
    Stopwatch sw;
    const ExperimentConfig cfg = load_cfg("desk.cfg");
    const Dataset data = generate_dataset(cfg);
    const TrainedModel tm = train_model(cfg, data, Objective::ve, 1);
    const double first = tm.history.front().mean_loss, last = tm.history.back().mean_loss;
    double zero = 0.0;  // loss of the all-zero prediction
    for (const auto& g : data.grids) zero += g.squared_norm();
    zero /= static_cast<double>(data.grids.size());
    const double gain_db = 10.0 * std::log10(zero / last);
    const double fd = toy_gradient_check();
    const double t = sw.seconds();
    report(4, last < 0.5 * first && gain_db >= 6.0 && fd < 1e-3 && t < 1800.0,
           std::to_string(tm.history.size()) + " epochs on " + std::to_string(data.grids.size()) +
               " examples: loss " + fmt("%.2f", first) + " -> " + fmt("%.2f", last) + " (ratio " +
               fmt("%.3f", last / first) + ", bound 0.5); vs zero predictor " + fmt("%.2f dB", gain_db) +
               " (bound 6 dB); toy FD rel " + fmt("%.2e", fd) + " (bound 1e-3); " + fmt("%.0f s", t));
}

// ---------------------------------------------------------------------------
// Trained-model trends.

struct Trained {
    ExperimentConfig cfg;
    EvalSetup setup;
};

Trained train_long(bool need_vp) {
    Trained t{load_cfg("desk.cfg", {"desk_long.cfg"}), {}};
    const Dataset data = generate_dataset(t.cfg);
    Stopwatch sw;
    const TrainedModel ve = train_model(t.cfg, data, Objective::ve, 1);
    note("VE model: " + std::to_string(ve.history.size()) + " epochs, final loss " +
         fmt("%.2f", ve.history.back().mean_loss) + ", " + fmt("%.0f s", sw.seconds()));
    EvalSetup& e = t.setup;
    e = t.cfg.eval_setup(default_workers());
    e.channel = channel_params_for(t.cfg, false);
    e.ve_denoiser = std::make_shared<nn::PatchTransformerDenoiser>(ve.model);
    e.ve = t.cfg.ve_schedule(metadata_real(ve.metadata, "sigma1"));
    e.data_scale = data.scale;
    const auto factor = t.cfg.real_or_auto("sweep.one_step_sigma_factor");
    e.one_step_sigma_factor = factor.value_or(1.0 / std::numbers::sqrt2);
    if (need_vp) {
        Stopwatch sv;
        const TrainedModel vp = train_model(t.cfg, data, Objective::vp, 1);
        note("VP model: final loss " + fmt("%.2f", vp.history.back().mean_loss) + ", " + fmt("%.0f s", sv.seconds()));
        e.vp_denoiser = std::make_shared<nn::PatchTransformerDenoiser>(vp.model);
    }
    return t;
}

auto at(const std::string& method, std::optional<double> r = {}, std::optional<std::string> mode = {}) {
    return [=](const ResultRecord& x) {
        return x.method == method && (!r || x.r_pct == *r) && (!mode || x.mask_mode == *mode);
    };
}

void criterion_5(const Trained& t) {
    Stopwatch sw;
    SweepSpec sp = t.cfg.sweep_spec();
    sp.r_grid = {0.0, 50.0};
    sp.robust_methods = {"score_langevin", "one_step"};
    const auto recs = run_masking_sweep(t.setup, sp).records;
    bool ok = true;
    std::string detail;
    for (const auto mode : sp.mask_modes) {
        const std::string m = to_string(mode);
        const double d_diff = mean_of(recs, at("score_langevin", 50.0, m)) - mean_of(recs, at("score_langevin", 0.0, m));
        const double d_one = mean_of(recs, at("one_step", 50.0, m)) - mean_of(recs, at("one_step", 0.0, m));
        note(m + ": diffusion " + fmt("%.2f", mean_of(recs, at("score_langevin", 0.0, m))) + " -> " +
             fmt("%.2f dB", mean_of(recs, at("score_langevin", 50.0, m))) + ", one_step " +
             fmt("%.2f", mean_of(recs, at("one_step", 0.0, m))) + " -> " +
             fmt("%.2f dB", mean_of(recs, at("one_step", 50.0, m))));
        ok = ok && d_diff <= d_one - 2.0;
        detail += m + ": degradation diffusion " + fmt("%.2f", d_diff) + " vs one_step " + fmt("%.2f dB", d_one) + "; ";
    }
    report(5, ok, detail + std::to_string(t.setup.n_seeds) + " seeds, margin bound 2 dB, " + fmt("%.0f s", sw.seconds()));
}

void criterion_6(const Trained& t) {
    Stopwatch sw;
    SweepSpec sp = t.cfg.sweep_spec();
    sp.laplace_r_pct = 50.0;
    const auto recs = run_laplace_experiment(t.setup, sp).records;
    const double diff = mean_of(recs, at("score_langevin")), one = mean_of(recs, at("one_step"));
    report(6, one - diff >= 3.0,
           "laplace noise, r = 50% (" + to_string(sp.laplace_mask_mode) + "): diffusion " + fmt("%.2f", diff) +
               " vs one_step " + fmt("%.2f dB", one) + ", gap " + fmt("%.2f dB", one - diff) + " (bound 3 dB), " +
               std::to_string(t.setup.n_seeds) + " seeds, " + fmt("%.0f s", sw.seconds()));
}

EvalSetup oracle_setup(const ExperimentConfig& cfg) {
    EvalSetup e = cfg.eval_setup(default_workers());
    e.channel = channel_params_for(cfg, true);
    const auto den = analytic_gaussian_denoiser(channel_covariance(e.channel, e.n_subcarriers));
    e.ve_denoiser = den;
    e.vp_denoiser = den;
    e.ve = cfg.ve_schedule(desk_sigma1(generate_dataset(cfg, true).grids));
    e.one_step_sigma_factor = 1.0;
    return e;
}

void criterion_7(const Trained& t) {
    Stopwatch sw;
    const SweepSpec sp = t.cfg.sweep_spec();
    const auto trained = run_interference_experiment(t.setup, sp).records;
    const double td = mean_of(trained, at("score_langevin")), to = mean_of(trained, at("one_step"));
    const ExperimentConfig ocfg = load_cfg("desk.cfg");
    const auto oracle = run_interference_experiment(oracle_setup(ocfg), ocfg.sweep_spec()).records;
    const double od = mean_of(oracle, at("score_langevin")), oo = mean_of(oracle, at("one_step"));
    report(7, to - td >= 5.0 && oo - od >= 15.0,
           "SIR " + fmt("%g", sp.sir_db) + " dB, SNR " + fmt("%g", sp.fixed_snr_db) + " dB: trained joint " +
               fmt("%.2f", td) + " vs per-user one_step " + fmt("%.2f dB", to) + " (gap " + fmt("%.2f", to - td) +
               ", bound 5); oracle joint " + fmt("%.2f", od) + " vs " + fmt("%.2f dB", oo) + " (gap " +
               fmt("%.2f", oo - od) + ", bound 15); " + fmt("%.0f s", sw.seconds()));
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct CliCall {
    int code;
    std::string out;
};

CliCall cli(std::vector<std::string> args) {
    std::vector<char*> argv;
    std::string prog = "srsdi_cli";
    argv.push_back(prog.data());
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str()};
}

fs::path first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

void criterion_8() {
    const fs::path dir = fs::temp_directory_path() / ("srsdi_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream c(dir / "tiny.cfg");
        c << "io.out_dir = " << (dir / "runs").string() << "\nchannel.n_subcarriers = 16\nchannel.n_antennas = 2\n"
          << "channel.n_examples = 16\nmodel.patch_h = 2\nmodel.patch_w = 2\nmodel.embed = 16\nmodel.heads = 2\n"
          << "model.depth_enc = 1\nmodel.depth_dec = 1\ntrain.epochs = 2\ntrain.batch_size = 4\nve.L = 20\n"
          << "vp.L = 20\nsweep.n_seeds = 3\nsweep.snr_grid = 0,20\nsweep.r_grid = 0,50\n";
    }
    const std::string cfgp = (dir / "tiny.cfg").string();
    std::vector<std::string> checks;
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) checks.push_back(what);
    };

    const auto g1 = cli({"gen", "-c", cfgp}), g2 = cli({"gen", "-c", cfgp});
    check(g1.code == 0 && g2.code == 0 &&
              slurp(first_line(g1.out) / "dataset.chgrid") == slurp(first_line(g2.out) / "dataset.chgrid") &&
              slurp(first_line(g1.out) / "manifest.txt") == slurp(first_line(g2.out) / "manifest.txt"),
          "gen");

    const std::string c1 = (dir / "a.ckpt").string(), c2 = (dir / "b.ckpt").string(), c3 = (dir / "c.ckpt").string();
    const auto t1 = cli({"train", "-c", cfgp, "--checkpoint", c1, "--workers", "1"});
    const auto t2 = cli({"train", "-c", cfgp, "--checkpoint", c2, "--workers", "1"});
    const auto t3 = cli({"train", "-c", cfgp, "--checkpoint", c3, "--workers", "3"});
    // The metadata records the worker count; the weights must not depend on it.
    auto same_weights = [](const std::string& a, const std::string& b) {
        const auto x = nn::load_checkpoint(a), y = nn::load_checkpoint(b);
        for (std::size_t t = 0; t < x.model->params().size(); ++t)
            if (x.model->params()[t] != y.model->params()[t]) return false;
        return true;
    };
    check(t1.code == 0 && t2.code == 0 && t3.code == 0 && slurp(c1) == slurp(c2) && same_weights(c1, c3), "train");

    const auto i1 = cli({"infer", "-c", cfgp, "--checkpoint", c1, "--index", "2"});
    const auto i2 = cli({"infer", "-c", cfgp, "--checkpoint", c1, "--index", "2"});
    const auto i3 = cli({"infer", "-c", cfgp, "--oracle", "--method", "ddpm", "--index", "2"});
    const auto i4 = cli({"infer", "-c", cfgp, "--oracle", "--method", "ddpm", "--index", "2"});
    check(i1.code == 0 && i1.out == i2.out && i3.code == 0 && i3.out == i4.out, "infer");

    const auto s1 = cli({"sweep", "masking_sweep", "-c", cfgp, "--oracle", "--workers", "1"});
    const auto s2 = cli({"sweep", "masking_sweep", "-c", cfgp, "--oracle", "--workers", "1"});
    const auto s3 = cli({"sweep", "masking_sweep", "-c", cfgp, "--oracle", "--workers", "3"});
    const fs::path r1 = first_line(s1.out) / "results.csv";
    check(s1.code == 0 && s2.code == 0 && s3.code == 0 && slurp(r1) == slurp(first_line(s2.out) / "results.csv") &&
              slurp(r1) == slurp(first_line(s3.out) / "results.csv"),
          "sweep");

    // Formats.
    const auto grids = load_grids((first_line(g1.out) / "dataset.chgrid").string());
    save_grids((dir / "rt.chgrid").string(), grids);
    check(load_grids((dir / "rt.chgrid").string()) == grids &&
              slurp(dir / "rt.chgrid") == slurp(first_line(g1.out) / "dataset.chgrid"),
          "chgrid round trip");
    const auto ck = nn::load_checkpoint(c1);
    nn::save_checkpoint((dir / "rt.ckpt").string(), *ck.model, ck.metadata);
    check(slurp(dir / "rt.ckpt") == slurp(c1), "checkpoint round trip");
    const auto recs = load_csv(r1.string());
    std::ostringstream os;
    write_csv(os, recs);
    std::istringstream is(os.str());
    check(!recs.empty() && read_csv(is) == recs && os.str() == slurp(r1), "csv round trip");

    fs::remove_all(dir);
    std::string failed;
    for (const auto& c : checks) failed += " " + c;
    report(8, checks.empty(),
           "gen/train/infer/sweep bitwise reproducible (workers 1 vs 3 where applicable); CHGRID01, checkpoint, CSV "
           "round trips" +
               (failed.empty() ? std::string{} : "; failed:" + failed));
}

// ---------------------------------------------------------------------------

void criterion_9(const Trained& t) {
    Stopwatch sw;
    const SweepSpec sp = t.cfg.sweep_spec();
    const auto snr = run_snr_sweep(t.setup, sp).records;
    bool mono = true;
    std::string curves;
    for (const auto& m : sp.snr_methods) {
        double prev = std::numeric_limits<double>::infinity();
        curves += m + " [";
        for (double s : sp.snr_grid) {
            const double v = mean_of(snr, [&](const ResultRecord& r) { return r.method == m && r.snr_db == s; });
            mono = mono && v <= prev;
            prev = v;
            curves += fmt(" %.2f", v);
        }
        curves += " ] ";
    }
    note("SNR sweep (dB at " + std::to_string(sp.snr_grid.size()) + " points): " + curves);

    SweepSpec cp = sp;
    cp.tau_grid = {10.0};  // only tau = 10 is checked
    const auto clip = run_clipping_sweep(t.setup, cp).records;
    double worst = 0.0;
    for (const auto& m : sp.robust_methods) {
        const double ref = mean_of(clip, [&](const ResultRecord& r) { return r.method == m && !r.tau; });
        const double at10 = mean_of(clip, [&](const ResultRecord& r) { return r.method == m && r.tau && *r.tau == 10.0; });
        worst = std::max(worst, std::abs(at10 - ref));
    }
    report(9, mono && worst <= 0.2,
           std::string("SNR sweep monotone nonincreasing for all methods: ") + (mono ? "yes" : "no") + "; clipping tau=10 "
               "vs unclipped max |diff| " + fmt("%.3f dB", worst) + " (bound 0.2), " +
               std::to_string(t.setup.n_seeds) + " seeds, " + fmt("%.0f s", sw.seconds()));
}

}  // namespace

int main(int argc, char** argv) {
    // Optional criterion filter: acceptance 1 2 8
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    auto want = [&](int c) { return only.empty() || std::find(only.begin(), only.end(), c) != only.end(); };
    Stopwatch total;
    try {
        if (want(1)) criterion_1();
        if (want(2)) criterion_2();
        if (want(3)) criterion_3();
        if (want(4)) criterion_4();
        if (want(8)) criterion_8();
        if (want(5) || want(6) || want(7) || want(9)) {
            const Trained t = train_long(want(9));
            if (want(5)) criterion_5(t);
            if (want(6)) criterion_6(t);
            if (want(7)) criterion_7(t);
            if (want(9)) criterion_9(t);
        }
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 100;
    }
    std::printf("%d criteria failed, %.0f s total\n", g_failed, total.seconds());
    return g_failed;
}
