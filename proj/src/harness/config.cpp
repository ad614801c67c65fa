#include "metadsp/harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "metadsp/channel.hpp"
#include "metadsp/rng.hpp"

namespace metadsp::harness {
namespace {

const std::set<std::string> kMethods{"edc", "dbp", "fdbp", "meta-dsp"};

std::string where(const std::string& src, const YAML::Mark& m) {
    if (m.is_null()) return src;
    return src + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

struct Reader {
    std::string src;

    [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
        throw ConfigError(where(src, n.Mark()) + ": " + msg);
    }

    void allow(const YAML::Node& map, std::initializer_list<const char*> keys) const {
        if (!map.IsMap()) fail(map, "expected a mapping");
        for (auto it = map.begin(); it != map.end(); ++it) {
            const std::string k = it->first.as<std::string>();
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
                fail(it->first, "unknown key '" + k + "'");
        }
    }

    template <class T>
    void get(const YAML::Node& map, const char* key, T& out) const {
        const YAML::Node n = map[key];
        if (!n) return;
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, std::string("bad value for '") + key + "'");
        }
    }

    template <class T>
    void get_list(const YAML::Node& map, const char* key, std::vector<T>& out) const {
        const YAML::Node n = map[key];
        if (!n) return;
        if (!n.IsSequence()) fail(n, std::string("'") + key + "' must be a list");
        std::vector<T> v;
        for (const auto& e : n) {
            try {
                v.push_back(e.as<T>());
            } catch (const YAML::Exception&) {
                fail(e, std::string("bad list entry in '") + key + "'");
            }
        }
        out = std::move(v);
    }
};

}  // namespace

OptimizerKind parse_optimizer(const std::string& name) {
    if (name == "lms") return OptimizerKind::lms;
    if (name == "nlms") return OptimizerKind::nlms;
    if (name == "rmsprop") return OptimizerKind::rmsprop;
    if (name == "adam") return OptimizerKind::adam;
    throw ConfigError("unknown optimizer '" + name + "'");
}

const char* optimizer_name(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::lms: return "lms";
        case OptimizerKind::nlms: return "nlms";
        case OptimizerKind::rmsprop: return "rmsprop";
        case OptimizerKind::adam: return "adam";
    }
    return "?";
}

ExperimentConfig default_config(Scale scale) {
    ExperimentConfig c;
    if (scale == Scale::desk) {
        c.n_symbols = 4000;
        c.grid.powers_dbm = {-2.0, 2.0};
        c.grid.symbol_rates_baud = {20e9, 40e9};
        c.grid.n_channels = {1, 3};
    } else {
        c.n_symbols = 100000;
        for (int p = -8; p <= 6; ++p) c.grid.powers_dbm.push_back(p);
        c.grid.symbol_rates_baud = {20e9, 40e9, 80e9, 160e9};
        c.grid.n_channels = {1, 3, 5, 7, 9, 11};
        c.dsp.pilots = 2000;
    }
    return c;
}

void ExperimentConfig::validate() const {
    try {
        fiber.validate();
        train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (grid.powers_dbm.empty() || grid.symbol_rates_baud.empty() || grid.n_channels.empty())
        throw ConfigError("grid lists must be nonempty");
    for (double r : grid.symbol_rates_baud)
        if (!(r > 0.0)) throw ConfigError("symbol rates must be positive");
    for (int n : grid.n_channels)
        if (n < 1 || n % 2 == 0) throw ConfigError("channel counts must be odd and positive");
    if (n_symbols < static_cast<std::size_t>(dsp.taps)) throw ConfigError("n_symbols too small for the ADF");
    if (dsp.methods.empty()) throw ConfigError("dsp.methods must be nonempty");
    for (const auto& m : dsp.methods)
        if (!kMethods.count(m)) throw ConfigError("unknown method '" + m + "'");
    if (dsp.taps < 2 || dsp.taps % 2 != 0) throw ConfigError("dsp.taps must be even and >= 2");
    if (dsp.stride != kRxSps) throw ConfigError("dsp.stride must equal the receiver oversampling (2)");
    if (dsp.pilots < 0) throw ConfigError("dsp.pilots must be >= 0");
    if (dsp.n_f < 1 || dsp.n_f % 2 == 0) throw ConfigError("dsp.n_f must be odd");
    if (dsp.dbp_steps_per_span.empty()) throw ConfigError("dsp.dbp_steps_per_span must be nonempty");
    if (!(phi_max > 0.0)) throw ConfigError("phi_max must be positive");
    if (channel_spacing_hz < 0.0) throw ConfigError("channel_spacing_hz must be >= 0");
    for (const auto& s : splits)
        if (s != "train" && s != "test_a" && s != "test_b") throw ConfigError("unknown split '" + s + "'");
}

std::uint64_t ExperimentConfig::split_seed(const std::string& split) const {
    if (split == "train") return seeds.train;
    if (split == "test_a") return seeds.test_a;
    if (split == "test_b") return seeds.test_b;
    throw ConfigError("unknown split '" + split + "'");
}

AdfRunConfig ExperimentConfig::adf() const {
    AdfRunConfig a;
    a.taps = dsp.taps;
    a.stride = dsp.stride;
    a.pilot_count = dsp.pilots;
    a.optimizer = dsp.optimizer;
    a.hyper = dsp.hyper;
    return a;
}

MetaArchitecture ExperimentConfig::architecture() const {
    MetaArchitecture a;
    a.kernel_taps = dsp.n_f;
    a.hidden = dsp.egru_hidden;
    a.layers = dsp.egru_layers;
    return a;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source, Scale scale) {
    ExperimentConfig c = default_config(scale);
    Reader rd{source};
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(where(source, e.mark) + ": " + e.msg);
    }
    if (!root || root.IsNull()) {
        c.validate();
        return c;
    }
    try {
        rd.allow(root, {"fiber", "grid", "dsp", "train", "seeds", "n_symbols", "channel_spacing_hz", "noise",
                        "phi_max", "splits"});
        if (auto f = root["fiber"]) {
            rd.allow(f, {"attenuation_db_per_km", "dispersion_ps_nm_km", "gamma_per_w_km", "wavelength_nm",
                         "span_length_km", "n_spans", "noise_figure_db"});
            rd.get(f, "attenuation_db_per_km", c.fiber.attenuation_db_per_km);
            rd.get(f, "dispersion_ps_nm_km", c.fiber.dispersion_ps_nm_km);
            rd.get(f, "gamma_per_w_km", c.fiber.gamma_per_w_km);
            rd.get(f, "wavelength_nm", c.fiber.wavelength_nm);
            rd.get(f, "span_length_km", c.fiber.span_length_km);
            rd.get(f, "n_spans", c.fiber.n_spans);
            rd.get(f, "noise_figure_db", c.fiber.noise_figure_db);
        }
        if (auto g = root["grid"]) {
            rd.allow(g, {"powers_dbm", "symbol_rates_baud", "n_channels"});
            rd.get_list(g, "powers_dbm", c.grid.powers_dbm);
            rd.get_list(g, "symbol_rates_baud", c.grid.symbol_rates_baud);
            rd.get_list(g, "n_channels", c.grid.n_channels);
        }
        rd.get(root, "n_symbols", c.n_symbols);
        rd.get(root, "channel_spacing_hz", c.channel_spacing_hz);
        rd.get(root, "noise", c.noise);
        rd.get(root, "phi_max", c.phi_max);
        rd.get_list(root, "splits", c.splits);
        if (auto d = root["dsp"]) {
            rd.allow(d, {"methods", "dbp_steps_per_span", "fdbp_steps_per_span", "fdbp_kernel_sigma", "n_f", "taps",
                         "stride", "pilots", "optimizer", "eta", "gamma0", "gamma1", "gamma2", "eps", "egru_hidden",
                         "egru_layers"});
            rd.get_list(d, "methods", c.dsp.methods);
            rd.get_list(d, "dbp_steps_per_span", c.dsp.dbp_steps_per_span);
            rd.get(d, "fdbp_steps_per_span", c.dsp.fdbp_steps_per_span);
            rd.get(d, "fdbp_kernel_sigma", c.dsp.fdbp_kernel_sigma);
            rd.get(d, "n_f", c.dsp.n_f);
            rd.get(d, "taps", c.dsp.taps);
            rd.get(d, "stride", c.dsp.stride);
            rd.get(d, "pilots", c.dsp.pilots);
            if (auto o = d["optimizer"]) {
                try {
                    c.dsp.optimizer = parse_optimizer(o.as<std::string>());
                } catch (const ConfigError& e) {
                    rd.fail(o, e.what());
                }
            }
            rd.get(d, "eta", c.dsp.hyper.eta);
            rd.get(d, "gamma0", c.dsp.hyper.gamma0);
            rd.get(d, "gamma1", c.dsp.hyper.gamma1);
            rd.get(d, "gamma2", c.dsp.hyper.gamma2);
            rd.get(d, "eps", c.dsp.hyper.eps);
            rd.get(d, "egru_hidden", c.dsp.egru_hidden);
            rd.get(d, "egru_layers", c.dsp.egru_layers);
            if (auto m = d["methods"])
                for (const auto& e : m)
                    if (!kMethods.count(e.as<std::string>())) rd.fail(e, "unknown method '" + e.as<std::string>() + "'");
        }
        if (auto t = root["train"]) {
            rd.allow(t, {"truncation_len", "outer_lr", "epochs", "seed", "train_hypernet", "train_egru"});
            rd.get(t, "truncation_len", c.train.truncation_len);
            rd.get(t, "outer_lr", c.train.outer_lr);
            rd.get(t, "epochs", c.train.epochs);
            rd.get(t, "seed", c.train.seed);
            rd.get(t, "train_hypernet", c.train.train_hypernet);
            rd.get(t, "train_egru", c.train.train_egru);
        }
        if (auto s = root["seeds"]) {
            rd.allow(s, {"train", "test_a", "test_b"});
            rd.get(s, "train", c.seeds.train);
            rd.get(s, "test_a", c.seeds.test_a);
            rd.get(s, "test_b", c.seeds.test_b);
        }
    } catch (const YAML::Exception& e) {
        throw ConfigError(where(source, e.mark) + ": " + e.msg);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path, Scale scale) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), path, scale);
}

void apply_root_seed(ExperimentConfig& cfg, std::uint64_t root) {
    cfg.seeds.train = derive_seed(root, "train");
    cfg.seeds.test_a = derive_seed(root, "test_a");
    cfg.seeds.test_b = derive_seed(root, "test_b");
    cfg.train.seed = derive_seed(root, "init");
}

}  // namespace metadsp::harness
