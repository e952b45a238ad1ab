// config.hpp
//
// Experiment configuration: a flat "section.key = value" document checked
// against a fixed schema. Unknown keys and malformed values are rejected
// with ConfigError. Builders turn a resolved config into the typed
// structures of the other modules.

#pragma once

#include "srsdi/channel.hpp"
#include "srsdi/evaluation.hpp"
#include "srsdi/nn/patch_transformer.hpp"
#include "srsdi/training.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace srsdi {

enum class ValueType { real, count, integer, boolean, text, real_list, text_list, real_or_auto };

struct ConfigKey {
    std::string key;
    std::string default_value;
    ValueType type;
    std::string help;
};

// Desk-scale defaults.
inline const std::vector<ConfigKey>& config_schema() {
    using V = ValueType;
    static const std::vector<ConfigKey> s{
        {"io.scale", "desk", V::text, "desk or paper; paper needs --paper-scale"},
        {"io.seed", "1", V::count, "base seed (SRSDI_SEED overrides)"},
        {"io.out_dir", "runs", V::text, "parent of run directories"},
        {"io.dataset", "", V::text, "CHGRID01 training set (empty: generate)"},
        {"io.checkpoint", "", V::text, "VE model checkpoint"},
        {"io.vp_checkpoint", "", V::text, "VP model checkpoint (ddpm)"},

        {"channel.profile", "A", V::text, "surrogate profile A, B or C"},
        {"channel.n_subcarriers", "64", V::count, ""},
        {"channel.n_antennas", "8", V::count, ""},
        {"channel.n_examples", "512", V::count, "training set size for gen/train"},
        {"channel.geometry_seed", "11", V::count, "frozen geometry used with --oracle"},

        {"mask.comb", "1", V::count, "SRS comb spacing (desk: every subcarrier)"},
        {"mask.comb_offset", "0", V::count, ""},
        {"mask.mask_ratio", "0.75", V::real, "fraction of the comb hidden per user"},
        {"mask.partition_seed", "9", V::count, ""},

        {"noise.snr_db", "20", V::real, "used by infer"},
        {"noise.kind", "gaussian", V::text, "gaussian or laplace"},
        {"noise.extra_r_pct", "0", V::real, "additional masking for infer"},
        {"noise.extra_mode", "subcarrier_only", V::text, "subcarrier_only or subcarrier_and_antenna"},

        {"ve.L", "200", V::count, "levels"},
        {"ve.sigma1", "auto", V::real_or_auto, "auto: 1.5x max pairwise training distance"},
        {"ve.rho", "auto", V::real_or_auto, "auto: derived from ve.sigmaL"},
        {"ve.sigmaL", "0.001", V::real, "last level when ve.rho = auto"},
        {"vp.L", "200", V::count, ""},
        {"vp.beta1", "0.0001", V::real, ""},
        {"vp.betaL", "0.05", V::real, ""},

        {"langevin.alpha0", "0.0002", V::real, ""},
        {"langevin.beta", "0.05", V::real, "noise temperature"},
        {"langevin.zeta", "100", V::count, "level where step decay starts"},
        {"langevin.r0", "0.99", V::real, ""},
        {"langevin.beta0", "0", V::real, "stored only"},
        {"langevin.M", "3", V::count, "inner iterations"},
        {"langevin.literal_step_scaling", "false", V::boolean, "compare L instead of i with zeta"},
        {"langevin.prior_mask", "allocation", V::text, "allocation or observation"},

        {"ddpm.zeta", "0.0012", V::real, "likelihood weight"},
        {"ddpm.score_mode", "tweedie_consistent", V::text, "tweedie_consistent or literal"},

        {"model.patch_h", "2", V::count, ""},
        {"model.patch_w", "8", V::count, ""},
        {"model.embed", "64", V::count, "encoder width"},
        {"model.embed_dec", "auto", V::real_or_auto, "decoder width; auto: same as model.embed"},
        {"model.depth_enc", "2", V::count, ""},
        {"model.depth_dec", "2", V::count, ""},
        {"model.heads", "4", V::count, ""},
        {"model.mlp_ratio", "2", V::count, ""},
        {"model.level_embedding", "false", V::boolean, ""},
        {"model.input_skip", "false", V::boolean, "add the shrunk masked input to the output"},

        {"train.epochs", "30", V::count, ""},
        {"train.batch_size", "8", V::count, ""},
        {"train.learning_rate", "0.001", V::real, ""},
        {"train.mask_ve_noise", "false", V::boolean, "ablation: no VE noise outside the mask"},

        {"sweep.n_seeds", "100", V::count, "trials per point"},
        {"sweep.snr_grid", "-10,-5,0,5,10,15,20", V::real_list, ""},
        {"sweep.snr_methods", "score_langevin,ddpm,one_step", V::text_list, ""},
        {"sweep.robust_methods", "score_langevin,one_step", V::text_list, ""},
        {"sweep.r_grid", "0,10,20,30,40,50", V::real_list, ""},
        {"sweep.mask_modes", "subcarrier_only,subcarrier_and_antenna", V::text_list, ""},
        {"sweep.fixed_snr_db", "20", V::real, ""},
        {"sweep.sir_db", "0", V::real, ""},
        {"sweep.interference_pilots", "disjoint", V::text, "disjoint or zc_overlap"},
        {"sweep.interference_prior", "allocation", V::text, "allocation or pilot"},
        {"sweep.per_pixel_low_db", "-10", V::real, ""},
        {"sweep.per_pixel_high_db", "20", V::real, ""},
        {"sweep.laplace_r_pct", "50", V::real, ""},
        {"sweep.laplace_mask_mode", "subcarrier_only", V::text, ""},
        {"sweep.tau_grid", "0.5,1,1.5,2,3,5,10", V::real_list, ""},
        {"sweep.one_step_sigma_factor", "auto", V::real_or_auto, "auto: 1 for the oracle, 1/sqrt2 for the network"},
    };
    return s;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline bool parse_real(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

inline bool valid_value(const std::string& v, ValueType t) {
    double d = 0.0;
    switch (t) {
        case ValueType::real: return parse_real(v, d);
        case ValueType::real_or_auto: return v == "auto" || parse_real(v, d);
        case ValueType::count:
            return !v.empty() && v.find_first_not_of("0123456789") == std::string::npos && v.size() < 20;
        case ValueType::integer: return parse_real(v, d) && d == std::floor(d);
        case ValueType::boolean: return v == "true" || v == "false";
        case ValueType::text: return v.find_first_of(",\n") == std::string::npos;
        case ValueType::real_list:
            for (const auto& x : split_list(v))
                if (!parse_real(x, d)) return false;
            return true;
        case ValueType::text_list: return true;
    }
    return false;
}

}  // namespace detail

class ExperimentConfig {
public:
    ExperimentConfig() {
        for (const auto& k : config_schema()) values_[k.key] = k.default_value;
    }

    static ExperimentConfig defaults() { return {}; }

    void set(const std::string& key, const std::string& raw) {
        const ConfigKey* k = find(key);
        if (!k) throw ConfigError("unknown config key '" + key + "'");
        const std::string v = detail::trim(raw);
        if (!detail::valid_value(v, k->type)) throw ConfigError("bad value for '" + key + "': '" + v + "'");
        values_[key] = v;
    }

    // "key=value" as given on the command line.
    void set_assignment(const std::string& kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + kv + "'");
        set(detail::trim(kv.substr(0, eq)), kv.substr(eq + 1));
    }

    void merge_text(std::istream& is, const std::string& origin = "<config>") {
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            try {
                set_assignment(line);
            } catch (const ConfigError& e) {
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ConfigError("cannot open config '" + path + "'");
        ExperimentConfig c;
        c.merge_text(is, path);
        return c;
    }

    // SRSDI_SEED replaces io.seed when set.
    void apply_environment() {
        if (const char* s = std::getenv("SRSDI_SEED"); s && *s) set("io.seed", s);
    }

    const std::string& get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
        return it->second;
    }
    double real(const std::string& key) const { return std::stod(get(key)); }
    std::size_t count(const std::string& key) const { return static_cast<std::size_t>(std::stoull(get(key))); }
    bool flag(const std::string& key) const { return get(key) == "true"; }
    std::optional<double> real_or_auto(const std::string& key) const {
        const auto& v = get(key);
        if (v == "auto") return std::nullopt;
        return std::stod(v);
    }
    std::vector<double> reals(const std::string& key) const {
        std::vector<double> out;
        for (const auto& x : detail::split_list(get(key))) out.push_back(std::stod(x));
        return out;
    }
    std::vector<std::string> texts(const std::string& key) const { return detail::split_list(get(key)); }

    // Fully resolved document in schema order.
    std::string to_text() const {
        std::ostringstream os;
        std::string section;
        for (const auto& k : config_schema()) {
            const std::string sec = k.key.substr(0, k.key.find('.'));
            if (sec != section) {
                if (!section.empty()) os << '\n';
                os << "# " << sec << '\n';
                section = sec;
            }
            os << k.key << " = " << values_.at(k.key);
            if (!k.help.empty()) os << "  # " << k.help;
            os << '\n';
        }
        return os.str();
    }

    std::uint64_t hash() const {
        std::string canon;
        for (const auto& k : config_schema()) canon += k.key + '=' + values_.at(k.key) + '\n';
        return fnv1a64(canon);
    }

    bool paper_scale() const { return get("io.scale") == "paper"; }

    void validate() const {
        const auto& sc = get("io.scale");
        if (sc != "desk" && sc != "paper") throw ConfigError("io.scale must be desk or paper");
        try {
            surrogate_profile(get("channel.profile"));
            parse_noise_kind(get("noise.kind"));
            parse_extra_mask_mode(get("noise.extra_mode"));
            parse_prior_mask_policy(get("langevin.prior_mask"));
            parse_score_mode(get("ddpm.score_mode"));
            parse_interference_pilots(get("sweep.interference_pilots"));
            parse_extra_mask_mode(get("sweep.laplace_mask_mode"));
            for (const auto& m : texts("sweep.mask_modes")) parse_extra_mask_mode(m);
            validate_methods(texts("sweep.snr_methods"));
            validate_methods(texts("sweep.robust_methods"));
            const auto& ip = get("sweep.interference_prior");
            if (ip != "allocation" && ip != "pilot") throw ParameterError("sweep.interference_prior must be allocation or pilot");
            model_config().validate();
            langevin_config().validate();
            if (mask_ratio() < 0.0 || mask_ratio() >= 1.0) throw ParameterError("mask.mask_ratio outside [0, 1)");
            if (count("mask.comb") < 1) throw ParameterError("mask.comb must be >= 1");
            vp_schedule();
            if (count("ve.L") < 2) throw ParameterError("ve.L must be >= 2");
        } catch (const ParameterError& e) {
            throw ConfigError(e.what());
        }
    }

    // --- builders -----------------------------------------------------------

    ClusterParams channel_params() const { return surrogate_profile(get("channel.profile")); }
    std::size_t n_subcarriers() const { return count("channel.n_subcarriers"); }
    std::size_t n_antennas() const { return count("channel.n_antennas"); }
    double mask_ratio() const { return real("mask.mask_ratio"); }

    Mask comb() const {
        return comb_mask(n_subcarriers(), count("mask.comb"), count("mask.comb_offset"), n_antennas());
    }
    TrainingMaskSampler mask_sampler() const {
        return TrainingMaskSampler(comb(), mask_ratio(), count("mask.partition_seed"));
    }

    // sigma1 = auto needs the training data (or a stored value).
    VeSchedule ve_schedule(std::optional<double> sigma1_hint = std::nullopt) const {
        std::optional<double> s1 = real_or_auto("ve.sigma1");
        if (!s1) s1 = sigma1_hint;
        if (!s1) throw ConfigError("ve.sigma1 = auto needs training data or a checkpoint that records it");
        const std::size_t L = count("ve.L");
        if (auto rho = real_or_auto("ve.rho")) return {L, *s1, *rho};
        return VeSchedule::from_endpoints(L, *s1, real("ve.sigmaL"));
    }
    VpSchedule vp_schedule() const { return {count("vp.L"), real("vp.beta1"), real("vp.betaL")}; }

    LangevinConfig langevin_config() const {
        LangevinConfig l;
        l.alpha_0 = real("langevin.alpha0");
        l.beta = real("langevin.beta");
        l.zeta = count("langevin.zeta");
        l.r_0 = real("langevin.r0");
        l.beta_0 = real("langevin.beta0");
        l.M = count("langevin.M");
        l.literal_step_scaling = flag("langevin.literal_step_scaling");
        return l;
    }

    nn::PatchTransformerConfig model_config() const {
        nn::PatchTransformerConfig m;
        m.n_subcarriers = n_subcarriers();
        m.n_antennas = n_antennas();
        m.patch_h = count("model.patch_h");
        m.patch_w = count("model.patch_w");
        m.embed_enc = m.embed_dec = count("model.embed");
        if (const auto d = real_or_auto("model.embed_dec")) m.embed_dec = static_cast<std::size_t>(*d);
        m.depth_enc = count("model.depth_enc");
        m.depth_dec = count("model.depth_dec");
        m.heads = count("model.heads");
        m.mlp_ratio = count("model.mlp_ratio");
        m.level_embedding = flag("model.level_embedding");
        m.input_skip = flag("model.input_skip");
        return m;
    }

    TrainConfig train_config(Objective obj, std::optional<double> sigma1_hint, std::size_t workers) const {
        TrainConfig t;
        t.objective = obj;
        if (obj == Objective::ve) t.ve = ve_schedule(sigma1_hint);
        t.vp = vp_schedule();
        t.mask_ratio = mask_ratio();
        t.epochs = count("train.epochs");
        t.batch_size = count("train.batch_size");
        t.learning_rate = real("train.learning_rate");
        t.seed = count("io.seed");
        t.mask_ve_noise = flag("train.mask_ve_noise");
        t.workers = workers;
        t.validate();
        return t;
    }

    SweepSpec sweep_spec() const {
        SweepSpec s;
        s.snr_grid = reals("sweep.snr_grid");
        s.snr_methods = texts("sweep.snr_methods");
        s.robust_methods = texts("sweep.robust_methods");
        s.r_grid = reals("sweep.r_grid");
        s.mask_modes.clear();
        for (const auto& m : texts("sweep.mask_modes")) s.mask_modes.push_back(parse_extra_mask_mode(m));
        s.fixed_snr_db = real("sweep.fixed_snr_db");
        s.sir_db = real("sweep.sir_db");
        s.interference_pilots = parse_interference_pilots(get("sweep.interference_pilots"));
        s.interference_prior =
            get("sweep.interference_prior") == "allocation" ? PriorMaskPolicy::allocation : PriorMaskPolicy::observation;
        s.per_pixel = {real("sweep.per_pixel_low_db"), real("sweep.per_pixel_high_db")};
        s.laplace_r_pct = real("sweep.laplace_r_pct");
        s.laplace_mask_mode = parse_extra_mask_mode(get("sweep.laplace_mask_mode"));
        s.tau_grid = reals("sweep.tau_grid");
        return s;
    }

    // Denoisers and sigma1 are filled in by the caller.
    EvalSetup eval_setup(std::size_t workers) const {
        EvalSetup e;
        e.profile = get("channel.profile");
        e.channel = channel_params();
        e.n_subcarriers = n_subcarriers();
        e.n_antennas = n_antennas();
        e.comb = comb();
        e.mask_ratio = mask_ratio();
        e.partition_seed = count("mask.partition_seed");
        e.vp = vp_schedule();
        e.langevin = langevin_config();
        e.ddpm_zeta = real("ddpm.zeta");
        e.score_mode = parse_score_mode(get("ddpm.score_mode"));
        e.prior_mask = parse_prior_mask_policy(get("langevin.prior_mask"));
        e.n_seeds = count("sweep.n_seeds");
        e.seed = count("io.seed");
        e.workers = workers;
        return e;
    }

private:
    static const ConfigKey* find(const std::string& key) {
        for (const auto& k : config_schema())
            if (k.key == key) return &k;
        return nullptr;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace srsdi
