#pragma once

#include <string>
#include <vector>

#include "metadsp/harness/config.hpp"
#include "metadsp/harness/dataset.hpp"
#include "metadsp/meta.hpp"
#include "metadsp/metrics.hpp"

namespace metadsp::harness {

// One compensation chain. steps_per_span is used by dbp and fdbp/meta-dsp.
struct MethodSpec {
    std::string method;  // edc | dbp | fdbp | meta-dsp
    double steps_per_span = 1.0;
    std::string label() const;
};

// dbp expands to one entry per configured step count.
std::vector<MethodSpec> expand_methods(const ExperimentConfig& cfg, const std::vector<std::string>& methods);

// Dispersion kernel length of the whole link at 2 SpS.
int link_kernel_length(const FiberParams& fiber, double symbol_rate_baud);
double method_rmps(const ExperimentConfig& cfg, const MethodSpec& m, double symbol_rate_baud);

// Compensated 2 SpS samples normalised to unit constellation energy, ready for the ADF.
CVec compensate(const Dataset& ds, const ExperimentConfig& cfg, const MethodSpec& m, const MetaParams* meta);
// ADF stage: DDLMS for the classic chains, Meta-ADF for meta-dsp.
CVec equalize(const CVec& front, const Dataset& ds, const ExperimentConfig& cfg, const MethodSpec& m,
              const MetaParams* meta);

// Metrics over symbols k in [max(taps/2, discard), n - taps/2).
QualityReport assess(const CVec& y, const CVec& tx, int taps, std::size_t discard);

struct MethodOutcome {
    MethodSpec spec;
    CVec y;
    std::vector<QualityReport> quality;  // one per discard prefix
    double rmps = 0.0;
};

MethodOutcome run_method(const Dataset& ds, const ExperimentConfig& cfg, const MethodSpec& m,
                         const MetaParams* meta, const std::vector<std::size_t>& discards = {0});

// Receiver samples divided by sqrt(P), the Meta-DBP input convention.
Waveform normalized_rx(const Dataset& ds);

}  // namespace metadsp::harness
