#pragma once

#include <cstdint>
#include <vector>

#include "metadsp/autodiff.hpp"
#include "metadsp/meta.hpp"

namespace metadsp {

double log_mse(const CVec& yhat, const CVec& y, double eps = 1e-12);

struct OuterAdamState {
    RVec m;
    RVec v;
    long t = 0;
};

// Standard Adam with bias correction, elementwise, in place.
void adam_update(RVec& params, const RVec& grads, OuterAdamState& state, double lr, double beta1 = 0.9,
                 double beta2 = 0.999, double eps = 1e-8);

struct TrainConfig {
    int truncation_len = 200;
    double outer_lr = 1e-4;
    int epochs = 5;
    std::uint64_t seed = 1;
    bool train_hypernet = true;
    bool train_egru = true;
    void validate() const;
};

// rx_norm: 2 SpS receiver samples before the matched filter, divided by sqrt(P).
struct TrainingTask {
    TaskInfo task;
    Waveform rx_norm;
    CVec symbols;
    int id = 0;
};

struct PipelineSpec {
    FiberParams fiber;
    MetaDbpConfig dbp;
    AdfRunConfig adf;
    bool use_meta_dbp = true;  // false feeds rx_norm straight to the matched filter
};

// Plain (untaped) compensator output fed to the ADF: Meta-DBP (optional) then matched filter.
CVec pipeline_front(const TrainingTask& t, const MetaParams& p, const PipelineSpec& spec);

struct SegmentCarry {
    AdfWeights theta;
    EgruState state;
    static SegmentCarry initial(const MetaParams& p, int taps);
};

struct SegmentEval {
    double loss = 0.0;
    bool has_loss = false;  // false when the segment lies inside the trimmed edge
    RVec grad;  // trainable order, empty if not requested
    SegmentCarry carry_out;
    CVec y;     // ADF outputs of the segment
};

// Loss over ADF outputs k in [k0, k1) restricted to the edge-trimmed range,
// teacher forced. Gradients do not flow into carry_in. A segment with no
// loss terms still advances the carry.
SegmentEval segment_loss_and_grad(const TrainingTask& t, const MetaParams& p, const PipelineSpec& spec,
                                  std::size_t k0, std::size_t k1, const SegmentCarry& carry_in);
// Same forward without a tape (finite-difference oracle path).
SegmentEval segment_loss_plain(const TrainingTask& t, const MetaParams& p, const PipelineSpec& spec,
                               std::size_t k0, std::size_t k1, const SegmentCarry& carry_in);

struct LossRecord {
    int epoch = 0;
    int segment = 0;
    int task_id = 0;
    double loss = 0.0;
};

struct TrainResult {
    MetaParams params;
    std::vector<LossRecord> history;
    RVec epoch_means;
};

TrainResult tbptt_train(const std::vector<TrainingTask>& dataset, const TrainConfig& cfg, const MetaParams& init,
                        const PipelineSpec& spec);

// Tape building blocks, exposed for gradient checks.
struct ParamVars {
    std::vector<ad::Id> ids;  // one leaf per tensor, same order as MetaParams::tensors
};
ParamVars register_params(ad::Tape& tape, const MetaParams& p, bool hyper_grad = true, bool egru_grad = true);
RVec collect_grads(const ad::Tape& tape, const ParamVars& vars, const MetaParams& p);

ad::Id tape_hypernet(ad::Tape& tape, const MetaParams& p, const ParamVars& v, const RVec& features);
// hidden: one id per layer, each E x H complex; updated in place.
ad::Id tape_egru_step(ad::Tape& tape, const MetaParams& p, const ParamVars& v, ad::Id gbar, ad::Id theta,
                      std::vector<ad::Id>& hidden);
ad::Id tape_meta_dbp(ad::Tape& tape, ad::Id c, const Waveform& w_norm, const TaskInfo& task,
                     const FiberParams& params, const MetaDbpConfig& cfg);

}  // namespace metadsp
