#pragma once

#include <cstdint>
#include <vector>

#include "metadsp/rng.hpp"
#include "metadsp/signal.hpp"

namespace metadsp {

constexpr double kRolloff = 0.1;
constexpr int kFilterSpanSymbols = 32;
constexpr int kRxSps = 2;

struct SimStepPlan {
    int sps_tx = 2;
    double dz_m = 1.0;
    int n_steps_per_span = 1;

    void validate(const FiberParams& params) const;
};

int choose_sps(const TaskInfo& task);

// min(phi/(gamma Ps), sqrt(phi/((|b2|(2 pi Bw)^2/2) gamma Ps)), L_span/50).
double choose_dz(const FiberParams& params, const TaskInfo& task, double phi_max = 1e-3);

// Uniform step plan: n = ceil(L_span/dz), dz = L_span/n.
SimStepPlan make_step_plan(const FiberParams& params, const TaskInfo& task, double phi_max = 1e-3);

Waveform build_tx_waveform(const SymbolFrame& frame, const TaskInfo& task, int sps);

// One span of lossy NLSE. Each step: nonlinear phase with gamma*L_eff(dz)
// from the power at the step start, then dispersion and loss over dz.
Waveform ssfm_span(const Waveform& w, const FiberParams& params, const SimStepPlan& plan);
// Exact inverse of ssfm_span (steps in reverse, each sub-step undone).
Waveform ssfm_span_inverse(const Waveform& w, const FiberParams& params, const SimStepPlan& plan);

// EDFA: amplitude gain then circular complex AWGN of power
// (G-1) h nu (NF_lin/2) Fs. nf_db = -inf disables the noise.
Waveform edfa_amplify(const Waveform& w, double gain_db, double nf_db, double carrier_hz, Rng& rng);

// Demux one WDM channel: shift to baseband, ideal low-pass at (1+rolloff)Rs/2,
// decimate to 2 SpS. Samples stay in physical units (sqrt(W)).
Waveform receiver_front_end(const Waveform& fullband, const TaskInfo& task, int channel_offset);

// Matched RRC at the input rate; the 1/sqrt(sps) gain puts symbol centres
// at sqrt(P) * x for a noiseless back-to-back link.
Waveform matched_filter(const Waveform& w, double symbol_rate_baud);

struct LinkOptions {
    bool noise = true;
    bool all_channels = false;
    bool keep_fullband = false;
};

struct LinkOutput {
    Waveform rx;                  // centre channel, 2 SpS, before matched filter
    std::vector<Waveform> rx_all; // every channel, low to high, when requested
    SymbolFrame tx_symbols;
    TaskInfo task;
    std::uint64_t seed = 0;
    Waveform tx_fullband;  // when keep_fullband
    Waveform rx_fullband;
};

LinkOutput propagate_link(const SymbolFrame& frame, const TaskInfo& task, const FiberParams& params,
                          const SimStepPlan& plan, Rng& rng, const LinkOptions& opts = {});

// Undo propagate_link on the full-band waveform (noise-free links only).
Waveform inverse_propagate(const Waveform& rx_fullband, const FiberParams& params,
                           const SimStepPlan& plan);

// Convenience: draws symbols and noise from streams derived from `seed`.
LinkOutput simulate_link(const TaskInfo& task, const FiberParams& params, std::size_t n_symbols,
                         std::uint64_t seed, const LinkOptions& opts = {}, double phi_max = 1e-3);

}  // namespace metadsp
