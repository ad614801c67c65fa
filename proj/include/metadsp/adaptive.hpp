#pragma once

#include <variant>
#include <vector>

#include "metadsp/signal.hpp"

namespace metadsp {

// h(u, theta) = v * (w^T u), plain transpose.
struct AdfWeights {
    CVec w;
    cplx v{1.0, 0.0};

    // Centre spike w[d/2] = 1, v = 1.
    static AdfWeights center_spike(int d);
    std::size_t n_elements() const { return w.size() + 1; }
    // Flattened (w_0, ..., w_{d-1}, v).
    CVec flat() const;
    void set_flat(const CVec& f);
};

struct AdfGradient {
    // Wirtinger derivatives g = dL/dtheta of L = |e|^2, e = y_hat - y_ref.
    // The conjugate gbar = conj(g) is the descent direction: the real
    // gradient with respect to (Re, Im) of each element is 2 * gbar.
    CVec gw;
    cplx gv;
    CVec flat() const;
};

enum class OptimizerKind { lms, nlms, rmsprop, adam };

struct OptimizerHyper {
    double eta = 1.0 / 128.0;
    double gamma0 = 0.999;
    double gamma1 = 0.9;
    double gamma2 = 0.999;
    double eps = 1e-8;
};

struct LmsState {};
struct NlmsState {
    double mu = 0.0;  // running power of o_k, scalar
    bool primed = false;
};
struct RmsPropState {
    RVec mu;  // per element running |g|^2
};
struct AdamState {
    CVec m;
    RVec b;
    long t = 0;
};
using OptimizerState = std::variant<LmsState, NlmsState, RmsPropState, AdamState>;

OptimizerState make_optimizer_state(OptimizerKind kind, std::size_t n_elements);

struct AdfRunConfig {
    int taps = 32;
    int stride = 2;
    int pilot_count = 200;
    OptimizerKind optimizer = OptimizerKind::lms;
    OptimizerHyper hyper;
    bool record_trajectory = false;
    void validate() const;
};

cplx filter_apply(const cplx* u, std::size_t d, const AdfWeights& theta);
cplx filter_apply(const CVec& u_window, const AdfWeights& theta);

cplx decide(cplx y, const Constellation& c);

AdfGradient adf_gradient(const cplx* u, std::size_t d, const AdfWeights& theta, cplx y_ref);
AdfGradient adf_gradient(const CVec& u_window, const AdfWeights& theta, cplx y_ref);

// o_k = dh/dtheta, used by NLMS: (v u_0, ..., v u_{d-1}, w^T u).
CVec filter_sensitivity(const cplx* u, std::size_t d, const AdfWeights& theta);

// One optimizer step: returns v_k (flattened like AdfWeights::flat).
// `o` is only read by NLMS. Throws if the state does not match `kind`.
CVec optimizer_step(OptimizerKind kind, const CVec& g, const CVec& o, OptimizerState& state,
                    const OptimizerHyper& hyper);

struct AdfResult {
    CVec y;                        // one estimate per output symbol
    AdfWeights final_weights;
    std::vector<CVec> trajectory;  // flattened theta before each update, when recorded
};

// Number of windows for a signal of n samples.
std::size_t adf_output_length(std::size_t n, int taps, int stride);

// Circular padding so that window k is centred on sample k*stride and the
// run yields n/stride outputs: padded[i] = x[(i - taps/2) mod n].
CVec pad_for_adf(const CVec& x, int taps, int stride);

AdfResult adf_run(const Waveform& w, const CVec& pilots, const AdfRunConfig& cfg, const Constellation& c);
AdfResult adf_run(const CVec& samples, const CVec& pilots, const AdfRunConfig& cfg, const Constellation& c,
                  const AdfWeights& init);

}  // namespace metadsp
