// cli.hpp
//
// Command-line front end: gen, train, infer, sweep, report and
// config print-defaults. Every command writes into a fresh run directory
// "<out_dir>/<UTC timestamp>-<config hash>" holding the resolved config.
//
// Exit codes: 0 ok, 2 config error, 3 numeric divergence, 4 I/O.

#pragma once

#include "srsdi/config.hpp"
#include "srsdi/grid_io.hpp"
#include "srsdi/nn/checkpoint.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>

namespace srsdi {

namespace fs = std::filesystem;

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numeric = 3, exit_io = 4 };

// ---------------------------------------------------------------------------
// Pipeline pieces shared by the commands and the acceptance binary
// ---------------------------------------------------------------------------

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Channel parameters for the chosen denoiser: the oracle needs a frozen
// geometry so that the prior is exactly Gaussian.
inline ClusterParams channel_params_for(const ExperimentConfig& cfg, bool oracle) {
    ClusterParams p = cfg.channel_params();
    if (oracle) p = with_fixed_geometry(p, cfg.count("channel.geometry_seed"));
    return p;
}

struct Dataset {
    std::vector<ComplexGrid> grids;  // power-normalized
    double scale = 1.0;              // factor applied to the raw draws
};

inline Dataset generate_dataset(const ExperimentConfig& cfg, bool oracle = false) {
    const ClusterParams p = channel_params_for(cfg, oracle);
    const std::uint64_t seed = cfg.count("io.seed");
    Dataset d;
    const std::size_t n = cfg.count("channel.n_examples");
    d.grids.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        d.grids.push_back(generate_channel(p, cfg.n_subcarriers(), cfg.n_antennas(), derive_seed(seed, "train", i)));
    d.scale = normalize_power(d.grids);
    return d;
}

// Training set from io.dataset when given, otherwise generated.
inline Dataset training_data(const ExperimentConfig& cfg) {
    const auto& path = cfg.get("io.dataset");
    if (path.empty()) return generate_dataset(cfg);
    Dataset d;
    d.grids = load_grids(path);
    if (d.grids.empty()) throw IoError("dataset '" + path + "' is empty");
    for (const auto& g : d.grids)
        if (g.n_subcarriers() != cfg.n_subcarriers() || g.n_antennas() != cfg.n_antennas())
            throw ConfigError("dataset grid shape does not match channel.n_subcarriers x channel.n_antennas");
    d.scale = normalize_power(d.grids);
    return d;
}

struct TrainedModel {
    std::shared_ptr<nn::PatchTransformer> model;
    std::map<std::string, std::string> metadata;
    std::vector<EpochStat> history;
};

inline TrainedModel train_model(const ExperimentConfig& cfg, const Dataset& data, Objective obj, std::size_t workers,
                                const std::function<void(const EpochStat&)>& on_epoch = {}) {
    const double s1 = desk_sigma1(data.grids);
    const TrainConfig tc = cfg.train_config(obj, s1, workers);
    TrainedModel out;
    out.model = std::make_shared<nn::PatchTransformer>(cfg.model_config());
    out.model->init(derive_seed(cfg.count("io.seed"), "model"));
    out.history = train(*out.model, data.grids, tc, cfg.mask_sampler(), [&](const EpochStat& e) {
        if (on_epoch) on_epoch(e);
    });
    out.metadata = {{"objective", to_string(obj)},
                    {"sigma1", detail::fmt_double(obj == Objective::ve ? tc.ve.sigma_1() : s1)},
                    {"data_scale", detail::fmt_double(data.scale)},
                    {"config_hash", hex64(cfg.hash())},
                    {"epochs", std::to_string(tc.epochs)}};
    return out;
}

inline double metadata_real(const std::map<std::string, std::string>& m, const std::string& key) {
    auto it = m.find(key);
    if (it == m.end()) throw IoError("checkpoint metadata lacks '" + key + "'");
    double v = 0.0;
    if (!detail::parse_real(it->second, v)) throw IoError("checkpoint metadata '" + key + "' is not a number");
    return v;
}

// Fills the denoisers, schedule and data scale of an evaluation setup.
// Oracle: analytic Gaussian prior of the frozen geometry. Otherwise the
// VE checkpoint (and the VP one when ddpm is requested).
inline EvalSetup build_eval_setup(const ExperimentConfig& cfg, bool oracle, std::size_t workers, bool need_vp,
                                  const std::string& checkpoint_override = {}) {
    EvalSetup e = cfg.eval_setup(workers);
    e.channel = channel_params_for(cfg, oracle);
    const auto factor = cfg.real_or_auto("sweep.one_step_sigma_factor");
    if (oracle) {
        auto den = analytic_gaussian_denoiser(channel_covariance(e.channel, e.n_subcarriers));
        e.ve_denoiser = den;
        e.vp_denoiser = den;
        e.ve = cfg.ve_schedule(desk_sigma1(generate_dataset(cfg, true).grids));
        e.one_step_sigma_factor = factor.value_or(1.0);
        return e;
    }
    const std::string path = checkpoint_override.empty() ? cfg.get("io.checkpoint") : checkpoint_override;
    if (path.empty()) throw ConfigError("no checkpoint given (io.checkpoint or --checkpoint); use --oracle to run without one");
    auto ck = nn::load_checkpoint(path);
    e.ve_denoiser = std::make_shared<nn::PatchTransformerDenoiser>(ck.model);
    e.ve = cfg.ve_schedule(metadata_real(ck.metadata, "sigma1"));
    e.data_scale = metadata_real(ck.metadata, "data_scale");
    if (need_vp) {
        const auto& vp = cfg.get("io.vp_checkpoint");
        if (vp.empty()) throw ConfigError("ddpm needs io.vp_checkpoint (train with --objective vp)");
        e.vp_denoiser = std::make_shared<nn::PatchTransformerDenoiser>(nn::load_checkpoint(vp).model);
    }
    e.one_step_sigma_factor = factor.value_or(1.0 / std::numbers::sqrt2);
    return e;
}

// ---------------------------------------------------------------------------
// Run directories
// ---------------------------------------------------------------------------

inline fs::path make_run_dir(const ExperimentConfig& cfg, const std::string& command) {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
    const fs::path base = fs::path(cfg.get("io.out_dir")) / (std::string(stamp) + "-" + hex64(cfg.hash()).substr(0, 8));
    fs::path dir = base;
    for (int k = 1; fs::exists(dir); ++k) dir = base.string() + "-" + std::to_string(k);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create run directory '" + dir.string() + "': " + ec.message());
    std::ofstream os(dir / "config.cfg");
    os << "# command: " << command << '\n' << cfg.to_text();
    if (!os) throw IoError("cannot write config into '" + dir.string() + "'");
    return dir;
}

inline void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
    if (!os) throw IoError("cannot write '" + p.string() + "'");
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct CliOptions {
    std::string config_path;
    std::vector<std::string> sets;
    bool force = false;
    bool oracle = false;
    bool dry_run = false;
    bool paper_scale = false;
    std::size_t workers = 0;  // 0: default_workers()
    std::string checkpoint;
    std::string objective = "ve";
    std::string experiment;
    std::string method = "score_langevin";
    std::size_t index = 0;
    std::vector<std::string> inputs;
    std::string output;
};

inline ExperimentConfig resolve_config(const CliOptions& o) {
    ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(o.config_path);
    for (const auto& s : o.sets) cfg.set_assignment(s);
    cfg.apply_environment();
    cfg.validate();
    if (cfg.paper_scale() && !o.paper_scale)
        throw ConfigError("config is paper scale (io.scale = paper); pass --paper-scale to run it");
    return cfg;
}

inline std::size_t resolved_workers(const CliOptions& o) { return o.workers ? o.workers : default_workers(); }

inline int cmd_gen(const CliOptions& o, std::ostream& out) {
    const auto cfg = resolve_config(o);
    const Dataset d = generate_dataset(cfg, o.oracle);
    const fs::path dir = make_run_dir(cfg, "gen");
    save_grids((dir / "dataset.chgrid").string(), d.grids);
    save_masks((dir / "user_masks.chgrid").string(), cfg.mask_sampler().masks());
    std::ostringstream m;
    m << "count = " << d.grids.size() << "\nscale = " << detail::fmt_double(d.scale) << "\nseed = " << cfg.get("io.seed")
      << "\nconfig_hash = " << hex64(cfg.hash()) << "\nfixed_geometry = " << (o.oracle ? "true" : "false") << '\n';
    write_text(dir / "manifest.txt", m.str());
    out << dir.string() << '\n';
    return exit_ok;
}

inline int cmd_train(const CliOptions& o, std::ostream& out) {
    const auto cfg = resolve_config(o);
    const Objective obj = parse_objective(o.objective);
    std::string target = o.checkpoint;
    if (target.empty()) target = obj == Objective::ve ? cfg.get("io.checkpoint") : cfg.get("io.vp_checkpoint");
    if (!target.empty() && fs::exists(target) && !o.force)
        throw ConfigError("checkpoint '" + target + "' exists; pass --force to overwrite");
    const std::size_t workers = resolved_workers(o);
    const Dataset data = training_data(cfg);
    const fs::path dir = make_run_dir(cfg, "train --objective " + o.objective);
    std::ofstream log(dir / "loss.csv");
    log << "epoch,mean_loss,wall_seconds\n";
    auto tm = train_model(cfg, data, obj, workers, [&](const EpochStat& e) {
        log << e.epoch << ',' << detail::fmt_double(e.mean_loss) << ',' << detail::fmt_double(e.wall_seconds) << '\n';
        log.flush();
        out << "epoch " << e.epoch << " loss " << e.mean_loss << '\n';
    });
    if (!log) throw IoError("cannot write loss log");
    tm.metadata["workers"] = std::to_string(workers);
    if (target.empty()) target = (dir / "model.ckpt").string();
    nn::save_checkpoint(target, *tm.model, tm.metadata);
    write_text(dir / "run.txt", "workers = " + std::to_string(workers) + "\ncheckpoint = " + target + '\n');
    out << "checkpoint " << target << '\n';
    return exit_ok;
}

inline int cmd_infer(const CliOptions& o, std::ostream& out) {
    const auto cfg = resolve_config(o);
    validate_methods({o.method});
    const EvalSetup s = build_eval_setup(cfg, o.oracle, 1, o.method == "ddpm", o.checkpoint);
    NoiseSpec noise = NoiseSpec::from_snr_db(cfg.real("noise.snr_db"), parse_noise_kind(cfg.get("noise.kind")));
    const auto allocs = s.allocations();
    const Trial t = make_trial(s, allocs, o.index, noise, cfg.real("noise.extra_r_pct"),
                               parse_extra_mask_mode(cfg.get("noise.extra_mode")));
    const auto kind = noise.kind == NoiseKind::laplace ? LikelihoodKind::laplace : LikelihoodKind::gaussian;
    const ComplexGrid est = run_method(s, o.method, t, kind);
    const double v = nmse_db(est, t.h);
    if (!o.output.empty()) save_grids(o.output, {est});
    out << "nmse_db " << detail::fmt_double(v) << '\n';
    return exit_ok;
}

inline bool uses_ddpm(const std::string& experiment, const SweepSpec& spec) {
    if (experiment != "snr_sweep") return false;
    return std::find(spec.snr_methods.begin(), spec.snr_methods.end(), "ddpm") != spec.snr_methods.end();
}

inline int cmd_sweep(const CliOptions& o, std::ostream& out) {
    const auto cfg = resolve_config(o);
    const auto& reg = experiment_registry();
    if (std::find(reg.begin(), reg.end(), o.experiment) == reg.end()) {
        std::string list;
        for (const auto& e : reg) list += (list.empty() ? "" : ", ") + e;
        throw ConfigError("unknown experiment '" + o.experiment + "'; available: " + list);
    }
    const SweepSpec spec = cfg.sweep_spec();
    const std::size_t workers = resolved_workers(o);
    if (o.dry_run) {
        EvalSetup s = cfg.eval_setup(workers);
        for (const auto& p : experiment_points(o.experiment, s, spec)) out << o.experiment << ' ' << p << '\n';
        return exit_ok;
    }
    const EvalSetup s = build_eval_setup(cfg, o.oracle, workers, uses_ddpm(o.experiment, spec), o.checkpoint);
    const fs::path dir = make_run_dir(cfg, "sweep " + o.experiment + (o.oracle ? " --oracle" : ""));
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentResult r = run_experiment(o.experiment, s, spec);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save_csv((dir / "results.csv").string(), r.records);
    {
        std::ofstream os(dir / "aggregate.csv");
        write_aggregate(os, aggregate(r.records));
        std::ofstream rs(dir / "regions.csv");
        write_regions(rs, r.records, r.regions);
        if (!os || !rs) throw IoError("cannot write sweep outputs");
    }
    write_text(dir / "run.txt", "workers = " + std::to_string(workers) + "\noracle = " + (o.oracle ? "true" : "false") +
                                    "\nwall_seconds = " + detail::fmt_double(secs) + '\n');
    out << dir.string() << '\n';
    return exit_ok;
}

inline int cmd_report(const CliOptions& o, std::ostream& out) {
    if (o.inputs.empty()) throw ConfigError("report needs at least one results CSV");
    std::vector<ResultRecord> all;
    for (const auto& p : o.inputs) {
        auto r = load_csv(p);
        all.insert(all.end(), r.begin(), r.end());
    }
    const auto agg = aggregate(all);
    if (o.output.empty()) {
        write_aggregate(out, agg);
    } else {
        std::ofstream os(o.output);
        write_aggregate(os, agg);
        if (!os) throw IoError("cannot write '" + o.output + "'");
    }
    return exit_ok;
}

// Runs the CLI; returns the process exit code.
inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"SRS channel estimation by masked diffusion"};
    app.require_subcommand(1);
    CliOptions o;

    auto common = [&](CLI::App* c) {
        c->add_option("-c,--config", o.config_path, "config file (key = value)");
        c->add_option("-s,--set", o.sets, "override, key=value (repeatable)");
        c->add_flag("--paper-scale", o.paper_scale, "allow io.scale = paper");
    };
    auto inference = [&](CLI::App* c) {
        c->add_flag("--oracle", o.oracle, "analytic Gaussian denoiser on a frozen geometry");
        c->add_option("--checkpoint", o.checkpoint, "VE checkpoint (overrides io.checkpoint)");
    };

    auto* gen = app.add_subcommand("gen", "generate a training set");
    common(gen);
    gen->add_flag("--oracle", o.oracle, "use the frozen oracle geometry");

    auto* tr = app.add_subcommand("train", "train a denoiser");
    common(tr);
    tr->add_option("--objective", o.objective, "ve or vp")->check(CLI::IsMember({"ve", "vp"}));
    tr->add_option("--checkpoint", o.checkpoint, "output checkpoint path");
    tr->add_flag("--force", o.force, "overwrite an existing checkpoint");
    tr->add_option("--workers", o.workers, "worker threads");

    auto* inf = app.add_subcommand("infer", "estimate one example and print its NMSE");
    common(inf);
    inference(inf);
    inf->add_option("--method", o.method, "score_langevin, ddpm or one_step");
    inf->add_option("--index", o.index, "trial index");
    inf->add_option("-o,--output", o.output, "write the estimate as a CHGRID01 file");

    auto* sw = app.add_subcommand("sweep", "run a registered experiment");
    common(sw);
    inference(sw);
    sw->add_option("experiment", o.experiment, "experiment name")->required();
    sw->add_flag("--dry-run", o.dry_run, "print the point grid only");
    sw->add_option("--workers", o.workers, "worker threads");

    auto* rep = app.add_subcommand("report", "aggregate result CSVs");
    rep->add_option("inputs", o.inputs, "results.csv files")->required();
    rep->add_option("-o,--output", o.output, "aggregate CSV path (default stdout)");

    auto* cf = app.add_subcommand("config", "configuration utilities");
    cf->require_subcommand(1);
    auto* pd = cf->add_subcommand("print-defaults", "print every key with its default");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }

    try {
        if (*gen) return cmd_gen(o, out);
        if (*tr) return cmd_train(o, out);
        if (*inf) return cmd_infer(o, out);
        if (*sw) return cmd_sweep(o, out);
        if (*rep) return cmd_report(o, out);
        if (*pd) {
            out << ExperimentConfig::defaults().to_text();
            return exit_ok;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const DivergedError& e) {
        err << "diverged at level " << e.level << ": " << e.what() << '\n';
        return exit_numeric;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return exit_numeric;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return exit_io;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }
    return exit_config;
}

}  // namespace srsdi
