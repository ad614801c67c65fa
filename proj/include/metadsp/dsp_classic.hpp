#pragma once

#include <functional>

#include "metadsp/signal.hpp"

namespace metadsp {

// spectral: whole-signal FFT multiply (exact, circular).
// fir: N_d-tap time-domain kernel, zero-padded linear convolution.
enum class LinearRoute { spectral, fir };

struct DbpConfig {
    double steps_per_span = 1.0;
    bool include_attenuation = true;
    LinearRoute route = LinearRoute::spectral;

    // Throws unless steps_per_span * n_spans is an integer >= 1 that either
    // divides n_spans or is a multiple of it.
    int total_steps(int n_spans) const;
};

struct DispersionKernel {
    CVec taps;
    double dz_m = 0.0;
    double sample_rate_hz = 1.0;
};

int kernel_length(double dz_m, double beta2, double sample_rate_hz);

// Time-domain form of exp(D dz) without loss; length 0 picks kernel_length.
DispersionKernel dispersion_kernel(double dz_m, const FiberParams& params, double sample_rate_hz,
                                   int length = 0);

// Zero-padded centred linear convolution, output length == input length.
CVec fir_filter_direct(const CVec& x, const CVec& taps);
CVec fir_filter_overlap_save(const CVec& x, const CVec& taps, std::size_t fft_size = 0);
// Direct up to 1024 taps, overlap-save above.
CVec fir_filter(const CVec& x, const CVec& taps);

// Frequency response exp(-i beta2 w^2 dz / 2), FFT bin order.
CVec spectral_dispersion(std::size_t n, double fs, double beta2, double dz);

// exp(D dz) on the whole signal (dz may be negative), no loss.
Waveform apply_dispersion(const Waveform& w, double beta2, double dz_m);

Waveform edc(const Waveform& w, const FiberParams& params, double link_length_m,
             LinearRoute route = LinearRoute::spectral);

// Per-step nonlinear weights gamma_eff*dz / gamma, ordered from the receiver end.
RVec dbp_step_lengths(const FiberParams& params, const DbpConfig& cfg, double total_length_m);

// Phase hook: given the post-dispersion samples and gamma*L_eff of the step,
// returns the phase to add to every sample.
using NonlinearPhaseFn = std::function<void(const CVec& u, double gamma_leff, RVec& phase)>;

Waveform backpropagate(const Waveform& w, const FiberParams& params, const DbpConfig& cfg,
                       double total_length_m, const NonlinearPhaseFn& phase_fn);

Waveform dbp(const Waveform& w, const FiberParams& params, const DbpConfig& cfg, double total_length_m);
Waveform dbp(const Waveform& w, const FiberParams& params, const DbpConfig& cfg);

// Centred circular convolution of a real sequence with an odd-length real kernel.
RVec power_filter(const RVec& p, const RVec& c);

Waveform fdbp(const Waveform& w, const FiberParams& params, const DbpConfig& cfg, const RVec& c,
              double total_length_m);
Waveform fdbp(const Waveform& w, const FiberParams& params, const DbpConfig& cfg, const RVec& c);

}  // namespace metadsp
