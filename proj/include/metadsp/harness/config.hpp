#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metadsp/adaptive.hpp"
#include "metadsp/meta.hpp"
#include "metadsp/signal.hpp"
#include "metadsp/training.hpp"

namespace metadsp::harness {

enum class Scale { desk, full };

struct GridConfig {
    std::vector<double> powers_dbm;
    std::vector<double> symbol_rates_baud;
    std::vector<int> n_channels;
    std::size_t size() const { return powers_dbm.size() * symbol_rates_baud.size() * n_channels.size(); }
};

struct DspConfig {
    std::vector<std::string> methods{"edc"};
    std::vector<double> dbp_steps_per_span{1.0};
    double fdbp_steps_per_span = 0.2;
    double fdbp_kernel_sigma = 5.0;  // samples, Gaussian power filter of FDBP
    int n_f = 401;
    int taps = 32;
    int stride = 2;
    int pilots = 200;
    OptimizerKind optimizer = OptimizerKind::lms;
    OptimizerHyper hyper;
    int egru_hidden = 1;
    int egru_layers = 2;
};

struct SeedsConfig {
    std::uint64_t train = 1;
    std::uint64_t test_a = 2;
    std::uint64_t test_b = 3;
};

struct ExperimentConfig {
    FiberParams fiber;
    GridConfig grid;
    std::size_t n_symbols = 4000;
    double channel_spacing_hz = 0.0;  // 0: 1.2 x symbol rate
    bool noise = true;
    double phi_max = 1e-3;
    DspConfig dsp;
    TrainConfig train;
    SeedsConfig seeds;
    std::vector<std::string> splits{"train", "test_a"};

    void validate() const;
    std::uint64_t split_seed(const std::string& split) const;
    AdfRunConfig adf() const;
    MetaArchitecture architecture() const;
};

ExperimentConfig default_config(Scale scale);
// Missing keys keep the defaults of `scale`. Errors carry "file:line:col".
ExperimentConfig load_config(const std::string& path, Scale scale = Scale::desk);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>",
                              Scale scale = Scale::desk);
// Root seed override: every split seed becomes derive_seed(root, split).
void apply_root_seed(ExperimentConfig& cfg, std::uint64_t root);

OptimizerKind parse_optimizer(const std::string& name);
const char* optimizer_name(OptimizerKind k);

}  // namespace metadsp::harness
