#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "metadsp/adaptive.hpp"
#include "metadsp/dsp_classic.hpp"
#include "metadsp/signal.hpp"

namespace metadsp {

// Named float64 tensor. Complex tensors carry a trailing dimension of 2
// (interleaved re, im).
struct Tensor {
    std::string name;
    std::vector<std::int64_t> shape;
    RVec data;
    bool trainable = true;

    std::size_t numel() const;
};

struct MetaArchitecture {
    int hyper_h1 = 100;
    int hyper_h2 = 100;
    int kernel_taps = 401;  // N_f
    int hidden = 1;         // H
    int input_dim = 2;      // H_i, fixed by xi = (g, theta)
    int layers = 2;         // L
};

// Standardisation of (log10 P_W, log10 Fs, N_ch): z = (x - shift) / scale.
struct FeatureScaling {
    double shift[3] = {-3.0, 11.05, 6.0};
    double scale[3] = {1.0, 0.45, 5.0};
};

struct MetaInit {
    std::uint64_t seed = 1;
    double kernel_sigma = 5.0;  // Gaussian low-pass start for c, in samples; 0 gives a delta
    double adf_eta = 1.0 / 128.0;  // LMS-like starting step of the EGRU
    double in_scale = 10.0;        // fixed gain on gbar at the EGRU input
    double out_scale = 1.0 / 128.0;  // fixed gain on the EGRU output v
};

// Hypernetwork phi and EGRU phi' as one named tensor list:
//   hyper.W1 [h1,3] hyper.b1 [h1] hyper.W2 [h2,h1] hyper.b2 [h2] hyper.W3 [Nf,h2] hyper.b3 [Nf]
//   hyper.feature_shift [3] hyper.feature_scale [3]            (not trained)
//   egru.enc.W [H,Hi,2] egru.enc.b [H,2]
//   egru.l{l}.W_ir|W_iz|W_in [H,in,2] W_hr|W_hz|W_hn [H,H,2] b_ir|b_iz|b_in|b_hr|b_hz|b_hn [H,2]
//   egru.dec1.W [H,H,2] egru.dec1.b [H,2] egru.dec2.W [1,H,2] egru.dec2.b [1,2]
//   egru.in_scale [1] egru.out_scale [1]                      (not trained)
struct MetaParams {
    MetaArchitecture arch;
    std::vector<Tensor> tensors;

    Tensor& get(std::string_view name);
    const Tensor& get(std::string_view name) const;
    bool has(std::string_view name) const;

    // Trainable entries only, in tensor order.
    std::size_t trainable_size() const;
    RVec flatten_trainable() const;
    void unflatten_trainable(const RVec& flat);

    FeatureScaling scaling() const;
};

MetaParams init_meta_params(const MetaArchitecture& arch, const MetaInit& init = {});
// Overwrites the hypernet output bias with a centred kernel; hidden-to-output weights zeroed.
void set_fixed_kernel(MetaParams& p, const RVec& c);
// Zeroes the EGRU decoder so that v_k = 0.
void zero_decoder(MetaParams& p);
RVec gaussian_kernel(int taps, double sigma);
RVec delta_kernel(int taps);

RVec task_features(const TaskInfo& task, double sample_rate_hz, const FeatureScaling& s);
RVec hypernet_forward(const TaskInfo& task, double sample_rate_hz, const MetaParams& p);

cplx complex_relu(cplx z);

// Per-element hidden state, (d+1) x L x H complex.
struct EgruState {
    int elements = 0;
    int layers = 0;
    int hidden = 0;
    CVec h;

    static EgruState zeros(int elements, const MetaArchitecture& arch);
    cplx& at(int e, int l, int k) { return h[(static_cast<std::size_t>(e) * layers + l) * hidden + k]; }
    cplx at(int e, int l, int k) const { return h[(static_cast<std::size_t>(e) * layers + l) * hidden + k]; }
};

// xi_g / xi_theta have one entry per weight element. Returns v_k.
CVec egru_step(const CVec& xi_g, const CVec& xi_theta, EgruState& state, const MetaParams& p);

struct MetaDbpConfig {
    DbpConfig dbp{0.2, true, LinearRoute::spectral};
};

// Input normalised by sqrt(P); phase gamma*L_eff*P*(|u|^2 * c).
Waveform meta_dbp(const Waveform& w_norm, const TaskInfo& task, const FiberParams& params,
                  const MetaDbpConfig& cfg, const MetaParams& p);
Waveform meta_dbp_with_kernel(const Waveform& w_norm, const TaskInfo& task, const FiberParams& params,
                              const MetaDbpConfig& cfg, const RVec& c);

struct MetaAdfResult {
    CVec y;
    AdfWeights final_weights;
    EgruState final_state;
    std::vector<CVec> trajectory;
};

// Adaptive-filter loop with the optimizer replaced by egru_step on xi = (gbar, theta).
// teacher_forcing uses pilots as reference for every symbol.
MetaAdfResult meta_adf_run(const CVec& samples, const CVec& pilots, const AdfRunConfig& cfg,
                           const MetaParams& p, const Constellation& c, bool teacher_forcing = false);
MetaAdfResult meta_adf_run(const Waveform& w, const CVec& pilots, const AdfRunConfig& cfg,
                           const MetaParams& p, const Constellation& c);

// Checkpoint: "MDSP", u32 version, u32 tensor count, then per tensor
// u32 name length, name bytes, u32 rank, u64 dims, u8 trainable, f64 data.
void save_checkpoint(const std::string& path, const MetaParams& p);
MetaParams load_checkpoint(const std::string& path);

}  // namespace metadsp
