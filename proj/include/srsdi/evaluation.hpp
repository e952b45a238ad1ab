// evaluation.hpp
//
// NMSE metric, result records and their CSV forms, and the experiment
// runners (SNR sweep, additional masking, interference, per-pixel SNR,
// Laplace noise, clipping).
//
// Every trial draws its channel, allocation, extra mask, noise and chain
// seeds from the trial index alone, so the same index means the same
// channel and observation in every experiment.

#pragma once

#include "srsdi/channel.hpp"
#include "srsdi/inference.hpp"
#include "srsdi/observation.hpp"
#include "srsdi/parallel.hpp"
#include "srsdi/srs_mask.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <tuple>

namespace srsdi {

inline constexpr double nmse_exact_db = -300.0;

inline double nmse_db(const ComplexGrid& h_est, const ComplexGrid& h) {
    require_same_shape(h_est.shape(), h.shape(), "nmse_db");
    const double p = h.squared_norm();
    if (!(p > 0.0)) throw ParameterError("nmse_db: reference has zero power");
    double e = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) e += std::norm(h_est[i] - h[i]);
    if (e == 0.0) return nmse_exact_db;
    return db10(e / p);
}

// NMSE restricted to the pixels where `region` is set; NaN if empty.
inline double nmse_db_on(const ComplexGrid& h_est, const ComplexGrid& h, const Mask& region) {
    double e = 0.0, p = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (region[i]) {
            e += std::norm(h_est[i] - h[i]);
            p += std::norm(h[i]);
        }
    if (p == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return e == 0.0 ? nmse_exact_db : db10(e / p);
}

// ---------------------------------------------------------------------------
// Records and CSV
// ---------------------------------------------------------------------------

struct ResultRecord {
    std::string experiment;
    std::string channel_profile;
    std::optional<double> snr_db;
    double r_pct = 0.0;
    std::string method;
    std::string noise_kind = "gaussian";
    std::string mask_mode;  // empty when not applicable
    std::optional<double> sir_db;
    std::optional<double> tau;
    std::uint64_t seed = 0;
    double nmse_db = 0.0;

    friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

// Observed / inpainted breakdown kept beside the main table.
struct RegionRecord {
    std::size_t record_index;
    double nmse_observed_db;
    double nmse_inpainted_db;
};

inline constexpr const char* kCsvHeader =
    "experiment,channel_profile,snr_db,r_pct,method,noise_kind,mask_mode,sir_db,tau,seed,nmse_db";

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_double(*v) : std::string{}; }

inline void check_field(const std::string& s) {
    if (s.find_first_of(",\n\r\"") != std::string::npos)
        throw ParameterError("csv: field contains a separator: '" + s + "'");
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(std::string("csv: bad ") + what + " value '" + s + "'");
    }
}
inline std::optional<double> parse_opt(const std::string& s, const char* what) {
    if (s.empty()) return std::nullopt;
    return parse_double(s, what);
}

}  // namespace detail

inline void write_csv(std::ostream& os, const std::vector<ResultRecord>& records) {
    os << kCsvHeader << '\n';
    for (const auto& r : records) {
        for (const auto* s : {&r.experiment, &r.channel_profile, &r.method, &r.noise_kind, &r.mask_mode})
            detail::check_field(*s);
        os << r.experiment << ',' << r.channel_profile << ',' << detail::fmt_opt(r.snr_db) << ','
           << detail::fmt_double(r.r_pct) << ',' << r.method << ',' << r.noise_kind << ',' << r.mask_mode << ','
           << detail::fmt_opt(r.sir_db) << ',' << detail::fmt_opt(r.tau) << ',' << r.seed << ','
           << detail::fmt_double(r.nmse_db) << '\n';
    }
    if (!os) throw IoError("write_csv: stream write failed");
}

inline std::vector<ResultRecord> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("read_csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw IoError("read_csv: unexpected header '" + line + "'");
    std::vector<ResultRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 11) throw IoError("read_csv: expected 11 fields, got " + std::to_string(f.size()));
        ResultRecord r;
        r.experiment = f[0];
        r.channel_profile = f[1];
        r.snr_db = detail::parse_opt(f[2], "snr_db");
        r.r_pct = detail::parse_double(f[3], "r_pct");
        r.method = f[4];
        r.noise_kind = f[5];
        r.mask_mode = f[6];
        r.sir_db = detail::parse_opt(f[7], "sir_db");
        r.tau = detail::parse_opt(f[8], "tau");
        try {
            r.seed = std::stoull(f[9]);
        } catch (const std::exception&) {
            throw IoError("read_csv: bad seed '" + f[9] + "'");
        }
        r.nmse_db = detail::parse_double(f[10], "nmse_db");
        out.push_back(std::move(r));
    }
    return out;
}

inline void save_csv(const std::string& path, const std::vector<ResultRecord>& records) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_csv(os, records);
}
inline std::vector<ResultRecord> load_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    return read_csv(is);
}

// Mean and standard error per point (all key fields except the seed).
struct AggregatePoint {
    ResultRecord key;  // seed and nmse_db unused
    std::size_t n = 0;
    double mean_db = 0.0;
    double stderr_db = 0.0;
};

inline std::vector<AggregatePoint> aggregate(const std::vector<ResultRecord>& records) {
    using Key = std::tuple<std::string, std::string, std::optional<double>, double, std::string, std::string,
                           std::string, std::optional<double>, std::optional<double>>;
    std::vector<Key> order;
    std::map<Key, std::vector<double>> groups;
    std::map<Key, ResultRecord> first;
    for (const auto& r : records) {
        Key k{r.experiment, r.channel_profile, r.snr_db, r.r_pct, r.method, r.noise_kind, r.mask_mode, r.sir_db, r.tau};
        auto [it, inserted] = groups.try_emplace(k);
        if (inserted) {
            order.push_back(k);
            first.emplace(k, r);
        }
        it->second.push_back(r.nmse_db);
    }
    std::vector<AggregatePoint> out;
    for (const auto& k : order) {
        const auto& v = groups[k];
        AggregatePoint a;
        a.key = first[k];
        a.n = v.size();
        for (double x : v) a.mean_db += x;
        a.mean_db /= static_cast<double>(a.n);
        if (a.n > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - a.mean_db) * (x - a.mean_db);
            a.stderr_db = std::sqrt(ss / static_cast<double>(a.n - 1) / static_cast<double>(a.n));
        }
        out.push_back(a);
    }
    return out;
}

inline void write_aggregate(std::ostream& os, const std::vector<AggregatePoint>& pts) {
    os << "experiment,channel_profile,snr_db,r_pct,method,noise_kind,mask_mode,sir_db,tau,n,mean_nmse_db,stderr_db\n";
    for (const auto& a : pts) {
        const auto& r = a.key;
        os << r.experiment << ',' << r.channel_profile << ',' << detail::fmt_opt(r.snr_db) << ','
           << detail::fmt_double(r.r_pct) << ',' << r.method << ',' << r.noise_kind << ',' << r.mask_mode << ','
           << detail::fmt_opt(r.sir_db) << ',' << detail::fmt_opt(r.tau) << ',' << a.n << ','
           << detail::fmt_double(a.mean_db) << ',' << detail::fmt_double(a.stderr_db) << '\n';
    }
}

inline void write_regions(std::ostream& os, const std::vector<ResultRecord>& records,
                          const std::vector<RegionRecord>& regions) {
    os << "experiment,method,seed,snr_db,r_pct,mask_mode,sir_db,tau,nmse_observed_db,nmse_inpainted_db\n";
    for (const auto& g : regions) {
        const auto& r = records.at(g.record_index);
        os << r.experiment << ',' << r.method << ',' << r.seed << ',' << detail::fmt_opt(r.snr_db) << ','
           << detail::fmt_double(r.r_pct) << ',' << r.mask_mode << ',' << detail::fmt_opt(r.sir_db) << ','
           << detail::fmt_opt(r.tau) << ',' << detail::fmt_double(g.nmse_observed_db) << ','
           << detail::fmt_double(g.nmse_inpainted_db) << '\n';
    }
}

// Mean NMSE over the records matching a predicate.
template <class Pred>
double mean_nmse(const std::vector<ResultRecord>& records, Pred pred) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& r : records)
        if (pred(r)) {
            s += r.nmse_db;
            ++n;
        }
    if (n == 0) throw ParameterError("mean_nmse: no matching records");
    return s / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Experiment set-up
// ---------------------------------------------------------------------------

enum class PriorMaskPolicy { allocation, observation };

inline std::string to_string(PriorMaskPolicy p) { return p == PriorMaskPolicy::allocation ? "allocation" : "observation"; }
inline PriorMaskPolicy parse_prior_mask_policy(const std::string& s) {
    if (s == "allocation") return PriorMaskPolicy::allocation;
    if (s == "observation") return PriorMaskPolicy::observation;
    throw ParameterError("unknown prior mask policy '" + s + "'");
}

enum class InterferencePilots { disjoint, zc_overlap };

inline std::string to_string(InterferencePilots p) { return p == InterferencePilots::disjoint ? "disjoint" : "zc_overlap"; }
inline InterferencePilots parse_interference_pilots(const std::string& s) {
    if (s == "disjoint") return InterferencePilots::disjoint;
    if (s == "zc_overlap") return InterferencePilots::zc_overlap;
    throw ParameterError("unknown interference pilot mode '" + s + "'");
}

// Everything a runner needs besides the per-experiment grid.
struct EvalSetup {
    std::string profile = "A";
    ClusterParams channel;
    std::size_t n_subcarriers = 64;
    std::size_t n_antennas = 8;
    double data_scale = 1.0;  // applied to generated test channels

    Mask comb;  // allocation comb
    double mask_ratio = 0.75;
    std::uint64_t partition_seed = 1;

    std::shared_ptr<const Denoiser> ve_denoiser;
    std::shared_ptr<const Denoiser> vp_denoiser;  // may be null if ddpm is unused
    // VE level handed to one_step for observation noise variance s2:
    // sigma = sqrt(s2) * one_step_sigma_factor.
    double one_step_sigma_factor = 1.0;

    VeSchedule ve{200, 2.0, 0.97};
    VpSchedule vp{200, 1e-4, 0.05};
    LangevinConfig langevin{};
    double ddpm_zeta = 1.2e-3;
    DdpmScoreMode score_mode = DdpmScoreMode::tweedie_consistent;
    PriorMaskPolicy prior_mask = PriorMaskPolicy::allocation;

    std::size_t n_seeds = 100;
    std::uint64_t seed = 1;
    std::size_t workers = 1;

    std::vector<Mask> allocations() const { return TrainingMaskSampler(comb, mask_ratio, partition_seed).masks(); }
};

// Point grids for every experiment.
struct SweepSpec {
    std::vector<double> snr_grid{-10, -5, 0, 5, 10, 15, 20};
    std::vector<std::string> snr_methods{"score_langevin", "ddpm", "one_step"};
    std::vector<double> r_grid{0, 10, 20, 30, 40, 50};
    std::vector<ExtraMaskMode> mask_modes{ExtraMaskMode::subcarrier_only, ExtraMaskMode::subcarrier_and_antenna};
    std::vector<std::string> robust_methods{"score_langevin", "one_step"};
    double fixed_snr_db = 20.0;
    double sir_db = 0.0;
    InterferencePilots interference_pilots = InterferencePilots::disjoint;
    PriorMaskPolicy interference_prior = PriorMaskPolicy::allocation;
    SnrRange per_pixel{-10.0, 20.0};
    double laplace_r_pct = 50.0;
    ExtraMaskMode laplace_mask_mode = ExtraMaskMode::subcarrier_only;
    std::vector<double> tau_grid{0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0};
};

struct ExperimentResult {
    std::vector<ResultRecord> records;
    std::vector<RegionRecord> regions;
};

inline const std::vector<std::string>& method_registry() {
    static const std::vector<std::string> m{"score_langevin", "ddpm", "one_step"};
    return m;
}

inline const std::vector<std::string>& experiment_registry() {
    static const std::vector<std::string> r{"snr_sweep", "masking_sweep", "interference",
                                            "per_pixel_snr", "laplace", "clipping"};
    return r;
}

// One test case: channel, allocation, observation mask and noisy Y.
struct Trial {
    ComplexGrid h;
    Mask allocation;
    Mask observed;
    ComplexGrid y;
    NoiseSpec noise;
    std::vector<double> variances;
    std::uint64_t chain_seed;
};

inline ComplexGrid test_channel(const EvalSetup& s, std::size_t index, const char* tag = "channel") {
    ComplexGrid h = generate_channel(s.channel, s.n_subcarriers, s.n_antennas, derive_seed(s.seed, tag, index));
    h *= s.data_scale;
    return h;
}

inline Mask test_allocation(const EvalSetup& s, const std::vector<Mask>& allocs, std::size_t index) {
    Rng rng = make_rng(derive_seed(s.seed, "allocation", index));
    std::uniform_int_distribution<std::size_t> d(0, allocs.size() - 1);
    return allocs[d(rng)];
}

inline Trial make_trial(const EvalSetup& s, const std::vector<Mask>& allocs, std::size_t index,
                        const NoiseSpec& noise, double r_pct, ExtraMaskMode mode) {
    Trial t;
    t.h = test_channel(s, index);
    t.allocation = test_allocation(s, allocs, index);
    t.observed = r_pct > 0.0 ? additional_mask(t.allocation, r_pct, mode, derive_seed(s.seed, "extra", index))
                             : t.allocation;
    t.noise = noise;
    const std::uint64_t ns = derive_seed(s.seed, "noise", index);
    t.y = observe(t.h, t.observed, noise, ns);
    t.variances = noise_variances(t.h.shape(), noise, ns);
    t.chain_seed = derive_seed(s.seed, "chain", index);
    return t;
}

// Runs one method on a single-user trial.
inline ComplexGrid run_method(const EvalSetup& s, const std::string& method, const Trial& t,
                              LikelihoodKind kind = LikelihoodKind::gaussian) {
    LikelihoodModel lik;
    lik.kind = kind;
    lik.sigma_obs_sq = t.noise.sigma_obs_sq;
    if (t.noise.per_pixel_snr) lik.variance_map = t.variances;
    const std::optional<Mask> prior =
        s.prior_mask == PriorMaskPolicy::allocation ? std::optional<Mask>(t.allocation) : std::nullopt;
    if (method == "score_langevin")
        return langevin_inpaint(t.y, t.observed, *s.ve_denoiser, s.ve, s.langevin, lik, t.chain_seed, prior);
    if (method == "ddpm") {
        if (!s.vp_denoiser) throw ParameterError("ddpm method requires a VP denoiser");
        return ddpm_inpaint(t.y, t.observed, *s.vp_denoiser, s.vp, s.ddpm_zeta, lik, s.score_mode, t.chain_seed, prior);
    }
    if (method == "one_step") {
        const ComplexGrid ones(t.y.n_subcarriers(), t.y.n_antennas(), cplx{1.0});
        double s2 = t.noise.sigma_obs_sq;
        if (t.noise.per_pixel_snr) {
            s2 = 0.0;
            for (double v : t.variances) s2 += v;
            s2 /= static_cast<double>(t.variances.size());
        }
        return one_step_baseline(zero_forcing(t.y, ones, t.observed), t.observed, *s.ve_denoiser,
                                 VeLevel{std::sqrt(s2) * s.one_step_sigma_factor});
    }
    throw ParameterError("unknown method '" + method + "'");
}

namespace detail {

struct Job {
    ResultRecord rec;  // template, nmse filled by the runner
    std::function<std::pair<double, std::optional<std::pair<double, double>>>()> run;
};

inline ExperimentResult run_jobs(std::vector<Job>& jobs, std::size_t workers) {
    std::vector<double> nmse(jobs.size());
    std::vector<std::optional<std::pair<double, double>>> regions(jobs.size());
    parallel_for(jobs.size(), workers, [&](std::size_t i) {
        auto [v, reg] = jobs[i].run();
        nmse[i] = v;
        regions[i] = reg;
    });
    ExperimentResult out;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        jobs[i].rec.nmse_db = nmse[i];
        out.records.push_back(jobs[i].rec);
        if (regions[i]) out.regions.push_back({i, regions[i]->first, regions[i]->second});
    }
    return out;
}

inline std::pair<double, std::optional<std::pair<double, double>>> score_trial(const ComplexGrid& est,
                                                                               const Trial& t) {
    Mask missing = t.observed;
    for (std::size_t i = 0; i < missing.size(); ++i) missing.set_flat(i, !t.observed[i]);
    return {nmse_db(est, t.h), std::make_pair(nmse_db_on(est, t.h, t.observed), nmse_db_on(est, t.h, missing))};
}

inline ResultRecord base_record(const EvalSetup& s, const std::string& experiment, const std::string& method,
                                std::size_t index) {
    ResultRecord r;
    r.experiment = experiment;
    r.channel_profile = s.profile;
    r.method = method;
    r.seed = index;
    return r;
}

// Single-user job for (method, trial parameters).
inline Job single_job(const EvalSetup& s, const std::vector<Mask>& allocs, ResultRecord rec, std::size_t index,
                      NoiseSpec noise, double r_pct, ExtraMaskMode mode, LikelihoodKind kind) {
    Job j;
    j.rec = std::move(rec);
    const std::string method = j.rec.method;
    j.run = [&s, &allocs, method, index, noise, r_pct, mode, kind] {
        const Trial t = make_trial(s, allocs, index, noise, r_pct, mode);
        return score_trial(run_method(s, method, t, method == "one_step" ? LikelihoodKind::gaussian : kind), t);
    };
    return j;
}

}  // namespace detail

inline void validate_methods(const std::vector<std::string>& methods) {
    for (const auto& m : methods)
        if (std::find(method_registry().begin(), method_registry().end(), m) == method_registry().end())
            throw ParameterError("unknown method '" + m + "'");
}

inline ExperimentResult run_snr_sweep(const EvalSetup& s, const SweepSpec& spec) {
    validate_methods(spec.snr_methods);
    const auto allocs = s.allocations();
    std::vector<detail::Job> jobs;
    for (double snr : spec.snr_grid)
        for (const auto& m : spec.snr_methods)
            for (std::size_t i = 0; i < s.n_seeds; ++i) {
                auto rec = detail::base_record(s, "snr_sweep", m, i);
                rec.snr_db = snr;
                jobs.push_back(detail::single_job(s, allocs, rec, i, NoiseSpec::from_snr_db(snr), 0.0,
                                                  ExtraMaskMode::subcarrier_only, LikelihoodKind::gaussian));
            }
    return detail::run_jobs(jobs, s.workers);
}

inline ExperimentResult run_masking_sweep(const EvalSetup& s, const SweepSpec& spec) {
    validate_methods(spec.robust_methods);
    const auto allocs = s.allocations();
    std::vector<detail::Job> jobs;
    for (auto mode : spec.mask_modes)
        for (double r : spec.r_grid)
            for (const auto& m : spec.robust_methods)
                for (std::size_t i = 0; i < s.n_seeds; ++i) {
                    auto rec = detail::base_record(s, "masking_sweep", m, i);
                    rec.snr_db = spec.fixed_snr_db;
                    rec.r_pct = r;
                    rec.mask_mode = to_string(mode);
                    jobs.push_back(detail::single_job(s, allocs, rec, i, NoiseSpec::from_snr_db(spec.fixed_snr_db), r,
                                                      mode, LikelihoodKind::gaussian));
                }
    return detail::run_jobs(jobs, s.workers);
}

inline ExperimentResult run_per_pixel_snr_experiment(const EvalSetup& s, const SweepSpec& spec) {
    validate_methods(spec.robust_methods);
    const auto allocs = s.allocations();
    NoiseSpec noise;
    noise.per_pixel_snr = spec.per_pixel;
    noise.sigma_obs_sq = 1.0 / from_db10(0.5 * (spec.per_pixel.low_db + spec.per_pixel.high_db));
    std::vector<detail::Job> jobs;
    for (const auto& m : spec.robust_methods)
        for (std::size_t i = 0; i < s.n_seeds; ++i) {
            auto rec = detail::base_record(s, "per_pixel_snr", m, i);
            jobs.push_back(detail::single_job(s, allocs, rec, i, noise, 0.0, ExtraMaskMode::subcarrier_only,
                                              LikelihoodKind::gaussian));
        }
    return detail::run_jobs(jobs, s.workers);
}

inline ExperimentResult run_laplace_experiment(const EvalSetup& s, const SweepSpec& spec) {
    validate_methods(spec.robust_methods);
    const auto allocs = s.allocations();
    const NoiseSpec noise = NoiseSpec::from_snr_db(spec.fixed_snr_db, NoiseKind::laplace);
    std::vector<detail::Job> jobs;
    for (const auto& m : spec.robust_methods)
        for (std::size_t i = 0; i < s.n_seeds; ++i) {
            auto rec = detail::base_record(s, "laplace", m, i);
            rec.snr_db = spec.fixed_snr_db;
            rec.r_pct = spec.laplace_r_pct;
            rec.noise_kind = "laplace";
            rec.mask_mode = to_string(spec.laplace_mask_mode);
            jobs.push_back(detail::single_job(s, allocs, rec, i, noise, spec.laplace_r_pct, spec.laplace_mask_mode,
                                              LikelihoodKind::laplace));
        }
    return detail::run_jobs(jobs, s.workers);
}

// tau = NA is the unclipped reference point.
inline ExperimentResult run_clipping_sweep(const EvalSetup& s, const SweepSpec& spec) {
    validate_methods(spec.robust_methods);
    const auto allocs = s.allocations();
    std::vector<std::optional<double>> taus{std::nullopt};
    for (double t : spec.tau_grid) taus.emplace_back(t);
    std::vector<detail::Job> jobs;
    for (const auto& tau : taus)
        for (const auto& m : spec.robust_methods)
            for (std::size_t i = 0; i < s.n_seeds; ++i) {
                auto rec = detail::base_record(s, "clipping", m, i);
                rec.snr_db = spec.fixed_snr_db;
                rec.tau = tau;
                NoiseSpec noise = NoiseSpec::from_snr_db(spec.fixed_snr_db);
                noise.clip_threshold = tau;
                jobs.push_back(
                    detail::single_job(s, allocs, rec, i, noise, 0.0, ExtraMaskMode::subcarrier_only, LikelihoodKind::gaussian));
            }
    return detail::run_jobs(jobs, s.workers);
}

// Two users at the given SIR on one allocation. Joint diffusion estimates
// both channels; the baseline runs one_step per user on the shared
// allocation. NMSE is taken over both users together.
inline ExperimentResult run_interference_experiment(const EvalSetup& s, const SweepSpec& spec) {
    const auto allocs = s.allocations();
    if (spec.interference_pilots == InterferencePilots::disjoint && allocs.size() < 2)
        throw ParameterError("interference: disjoint pilots need at least two allocations (mask_ratio >= 0.5)");
    std::vector<detail::Job> jobs;
    for (const std::string m : {"score_langevin", "one_step"})
        for (std::size_t i = 0; i < s.n_seeds; ++i) {
            detail::Job j;
            j.rec = detail::base_record(s, "interference", m, i);
            j.rec.snr_db = spec.fixed_snr_db;
            j.rec.sir_db = spec.sir_db;
            j.run = [&s, &allocs, &spec, m, i]() -> std::pair<double, std::optional<std::pair<double, double>>> {
                const ComplexGrid h1 = test_channel(s, i);
                ComplexGrid h2 = test_channel(s, i, "interferer");
                const Mask alloc = test_allocation(s, allocs, i);
                Mask support = alloc;
                std::pair<Mask, Mask> own{alloc, alloc};
                ComplexGrid p1, p2;
                if (spec.interference_pilots == InterferencePilots::disjoint) {
                    // User 2 sounds on the next allocation of the partition.
                    const auto k = static_cast<std::size_t>(std::find(allocs.begin(), allocs.end(), alloc) - allocs.begin());
                    own.second = allocs[(k + 1) % allocs.size()];
                    for (std::size_t q = 0; q < support.size(); ++q) support.set_flat(q, alloc[q] || own.second[q]);
                    p1 = ComplexGrid::from_mask(own.first);
                    p2 = ComplexGrid::from_mask(own.second);
                } else {
                    p1 = apply(alloc, zc_pilot_grid(alloc.shape(), 1));
                    p2 = apply(alloc, zc_pilot_grid(alloc.shape(), 3));
                }
                const NoiseSpec noise = NoiseSpec::from_snr_db(spec.fixed_snr_db);
                const ComplexGrid y =
                    observe_interference(h1, h2, p1, p2, noise, spec.sir_db, derive_seed(s.seed, "noise", i));
                const double scale = interferer_scale(p1, p2, spec.sir_db);
                h2 *= scale;
                ComplexGrid e1, e2;
                if (m == "score_langevin") {
                    std::optional<std::pair<Mask, Mask>> priors;
                    if (spec.interference_prior == PriorMaskPolicy::allocation) priors = own;
                    // The chain for user 2 models the scaled channel.
                    auto [a, b] = joint_inpaint(y, support, p1, p2, *s.ve_denoiser, s.ve, s.langevin,
                                                noise.sigma_obs_sq, derive_seed(s.seed, "chain", i), priors);
                    e1 = std::move(a);
                    e2 = std::move(b);
                } else {
                    // Each user treats the whole received support as its own.
                    const NoiseLevel lvl = VeLevel{std::sqrt(noise.sigma_obs_sq) * s.one_step_sigma_factor};
                    auto zf = [&](const ComplexGrid& p) {
                        ComplexGrid x(support.n_subcarriers(), support.n_antennas());
                        for (std::size_t q = 0; q < x.size(); ++q)
                            if (support[q]) x[q] = p[q] != cplx{} ? y[q] / p[q] : y[q];
                        return x;
                    };
                    e1 = one_step_baseline(zf(p1), support, *s.ve_denoiser, lvl);
                    e2 = one_step_baseline(zf(p2), support, *s.ve_denoiser, lvl);
                }
                const double err = (e1 - h1).squared_norm() + (e2 - h2).squared_norm();
                const double pow = h1.squared_norm() + h2.squared_norm();
                return {err == 0.0 ? nmse_exact_db : db10(err / pow), std::nullopt};
            };
            jobs.push_back(std::move(j));
        }
    return detail::run_jobs(jobs, s.workers);
}

inline ExperimentResult run_experiment(const std::string& name, const EvalSetup& s, const SweepSpec& spec) {
    if (name == "snr_sweep") return run_snr_sweep(s, spec);
    if (name == "masking_sweep") return run_masking_sweep(s, spec);
    if (name == "interference") return run_interference_experiment(s, spec);
    if (name == "per_pixel_snr") return run_per_pixel_snr_experiment(s, spec);
    if (name == "laplace") return run_laplace_experiment(s, spec);
    if (name == "clipping") return run_clipping_sweep(s, spec);
    std::string list;
    for (const auto& e : experiment_registry()) list += (list.empty() ? "" : ", ") + e;
    throw ParameterError("unknown experiment '" + name + "'; available: " + list);
}

// Human-readable point grid of an experiment (for dry runs).
inline std::vector<std::string> experiment_points(const std::string& name, const EvalSetup& s, const SweepSpec& spec) {
    std::vector<std::string> pts;
    auto seeds = " x " + std::to_string(s.n_seeds) + " seeds";
    auto join = [](const std::vector<std::string>& v) {
        std::string o;
        for (const auto& x : v) o += (o.empty() ? "" : "|") + x;
        return o;
    };
    if (name == "snr_sweep") {
        for (double snr : spec.snr_grid) pts.push_back("snr_db=" + detail::fmt_double(snr) + " methods=" + join(spec.snr_methods) + seeds);
    } else if (name == "masking_sweep") {
        for (auto mode : spec.mask_modes)
            for (double r : spec.r_grid)
                pts.push_back("mask_mode=" + to_string(mode) + " r_pct=" + detail::fmt_double(r) +
                              " methods=" + join(spec.robust_methods) + seeds);
    } else if (name == "interference") {
        pts.push_back("sir_db=" + detail::fmt_double(spec.sir_db) + " snr_db=" + detail::fmt_double(spec.fixed_snr_db) +
                      " pilots=" + to_string(spec.interference_pilots) + " methods=score_langevin|one_step" + seeds);
    } else if (name == "per_pixel_snr") {
        pts.push_back("snr_range=[" + detail::fmt_double(spec.per_pixel.low_db) + "," +
                      detail::fmt_double(spec.per_pixel.high_db) + "] methods=" + join(spec.robust_methods) + seeds);
    } else if (name == "laplace") {
        pts.push_back("noise=laplace r_pct=" + detail::fmt_double(spec.laplace_r_pct) + " mask_mode=" +
                      to_string(spec.laplace_mask_mode) + " methods=" + join(spec.robust_methods) + seeds);
    } else if (name == "clipping") {
        pts.push_back("tau=none methods=" + join(spec.robust_methods) + seeds);
        for (double t : spec.tau_grid)
            pts.push_back("tau=" + detail::fmt_double(t) + " methods=" + join(spec.robust_methods) + seeds);
    } else {
        run_experiment(name, s, spec);  // throws with the registry listing
    }
    return pts;
}

}  // namespace srsdi
