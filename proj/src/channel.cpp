#include "metadsp/channel.hpp"

#include <cmath>
#include <limits>

#include "metadsp/fft.hpp"

namespace metadsp {
namespace {

// Effective length of a lossy segment of length dz.
double effective_length(double alpha, double dz) {
    if (alpha == 0.0) return dz;
    return -std::expm1(-alpha * dz) / alpha;
}

CVec dispersion_response(std::size_t n, double fs, double beta2, double alpha, double dz) {
    RVec om = fft::angular_frequencies(n, fs);
    CVec h(n);
    const double loss = std::exp(-0.5 * alpha * dz);
    for (std::size_t k = 0; k < n; ++k) h[k] = std::polar(loss, -0.5 * beta2 * om[k] * om[k] * dz);
    return h;
}

void apply_response(CVec& u, const CVec& h) {
    fft::forward(u);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] *= h[k];
    fft::inverse(u);
}

void nonlinear_phase(CVec& u, double gamma_leff, double sign) {
    for (auto& v : u) v *= std::polar(1.0, sign * gamma_leff * std::norm(v));
}

}  // namespace

void SimStepPlan::validate(const FiberParams& params) const {
    if (sps_tx < 2 || (sps_tx & (sps_tx - 1)) != 0)
        throw std::invalid_argument("sps_tx must be a power of two >= 2");
    if (!(dz_m > 0.0)) throw std::invalid_argument("dz must be positive");
    if (n_steps_per_span < 1) throw std::invalid_argument("n_steps_per_span must be >= 1");
    const double l = params.span_length_m();
    if (std::abs(n_steps_per_span * dz_m - l) > 1e-9 * l)
        throw std::invalid_argument("step plan does not tile the span");
}

int choose_sps(const TaskInfo& task) {
    task.validate();
    const double ratio = task.n_channels * task.channel_spacing_hz / task.symbol_rate_baud;
    // small tolerance so an exact power-of-two ratio is not pushed up by rounding
    const int e = static_cast<int>(std::ceil(std::log2(ratio) - 1e-12));
    return 1 << (std::max(e, 0) + 1);
}

double choose_dz(const FiberParams& params, const TaskInfo& task, double phi_max) {
    if (!(phi_max > 0.0)) throw std::invalid_argument("phi_max must be positive");
    const double inf = std::numeric_limits<double>::infinity();
    const double gp = params.gamma_per_w_m() * task.total_power_w();
    const double bw = task.n_channels * task.channel_spacing_hz;
    const double disp = 0.5 * std::abs(params.beta2()) * std::pow(2.0 * kPi * bw, 2);
    const double dz_nl = gp > 0.0 ? phi_max / gp : inf;
    const double dz_prod = (gp > 0.0 && disp > 0.0) ? std::sqrt(phi_max / (disp * gp)) : inf;
    const double cap = params.span_length_m() / 50.0;
    return std::min({dz_nl, dz_prod, cap});
}

SimStepPlan make_step_plan(const FiberParams& params, const TaskInfo& task, double phi_max) {
    SimStepPlan plan;
    plan.sps_tx = choose_sps(task);
    const double l = params.span_length_m();
    const double dz = choose_dz(params, task, phi_max);
    plan.n_steps_per_span = static_cast<int>(std::ceil(l / dz - 1e-9));
    plan.dz_m = l / plan.n_steps_per_span;
    return plan;
}

Waveform build_tx_waveform(const SymbolFrame& frame, const TaskInfo& task, int sps) {
    task.validate();
    if (frame.n_channels() != static_cast<std::size_t>(task.n_channels))
        throw std::invalid_argument("symbol frame channel count does not match task");
    const std::size_t ns = frame.n_symbols();
    for (auto& ch : frame.symbols)
        if (ch.size() != ns) throw std::invalid_argument("channels must have equal symbol counts");
    if (ns == 0) throw std::invalid_argument("symbol frame is empty");
    const double fs = sps * task.symbol_rate_baud;
    if (task.n_channels * task.channel_spacing_hz > fs * (1.0 + 1e-12))
        throw std::invalid_argument("aggregate WDM bandwidth exceeds the sample rate");

    const std::size_t n = ns * sps;
    const RVec g = rrc_taps(kRolloff, kFilterSpanSymbols, sps);
    const CVec h = circular_response(g, n);
    // unit-energy taps at sps samples/symbol: amplitude sqrt(P sps) gives mean power P
    const double amp = std::sqrt(task.power_w() * sps);
    const int m = task.n_channels / 2;

    CVec total(n, cplx(0.0, 0.0));
    for (int ch = 0; ch < task.n_channels; ++ch) {
        CVec up(n, cplx(0.0, 0.0));
        for (std::size_t k = 0; k < ns; ++k) up[k * sps] = amp * frame.symbols[ch][k];
        fft::forward(up);
        for (std::size_t k = 0; k < n; ++k) up[k] *= h[k];
        fft::inverse(up);
        Waveform shaped(std::move(up), fs);
        // channel centres snapped to the FFT grid so the frame stays periodic
        Waveform shifted = frequency_shift(shaped, grid_frequency((ch - m) * task.channel_spacing_hz, n, fs));
        for (std::size_t k = 0; k < n; ++k) total[k] += shifted.samples[k];
    }
    return Waveform(std::move(total), fs);
}

Waveform ssfm_span(const Waveform& w, const FiberParams& params, const SimStepPlan& plan) {
    plan.validate(params);
    const double alpha = params.alpha_per_m();
    const double gl = params.gamma_per_w_m() * effective_length(alpha, plan.dz_m);
    const CVec h = dispersion_response(w.size(), w.sample_rate_hz, params.beta2(), alpha, plan.dz_m);
    CVec u = w.samples;
    for (int s = 0; s < plan.n_steps_per_span; ++s) {
        if (gl != 0.0) nonlinear_phase(u, gl, -1.0);
        apply_response(u, h);
    }
    return Waveform(std::move(u), w.sample_rate_hz);
}

Waveform ssfm_span_inverse(const Waveform& w, const FiberParams& params, const SimStepPlan& plan) {
    plan.validate(params);
    const double alpha = params.alpha_per_m();
    const double gl = params.gamma_per_w_m() * effective_length(alpha, plan.dz_m);
    CVec h = dispersion_response(w.size(), w.sample_rate_hz, params.beta2(), alpha, plan.dz_m);
    for (auto& v : h) v = 1.0 / v;
    CVec u = w.samples;
    for (int s = 0; s < plan.n_steps_per_span; ++s) {
        apply_response(u, h);
        if (gl != 0.0) nonlinear_phase(u, gl, +1.0);
    }
    return Waveform(std::move(u), w.sample_rate_hz);
}

Waveform edfa_amplify(const Waveform& w, double gain_db, double nf_db, double carrier_hz, Rng& rng) {
    if (!(gain_db >= 0.0)) throw std::invalid_argument("EDFA gain must be >= 0 dB");
    const double g = std::pow(10.0, gain_db / 10.0);
    const double a = std::sqrt(g);
    Waveform out(w.samples, w.sample_rate_hz);
    for (auto& v : out.samples) v *= a;
    if (std::isinf(nf_db) && nf_db < 0.0) return out;
    const double nf_lin = std::pow(10.0, nf_db / 10.0);
    const double p_ase = (g - 1.0) * kPlanck * carrier_hz * (nf_lin / 2.0) * w.sample_rate_hz;
    const double sigma = std::sqrt(p_ase / 2.0);
    for (auto& v : out.samples) {
        const double re = rng.normal();
        const double im = rng.normal();
        v += cplx(sigma * re, sigma * im);
    }
    return out;
}

Waveform receiver_front_end(const Waveform& fullband, const TaskInfo& task, int channel_offset) {
    const double rs = task.symbol_rate_baud;
    const double ratio = fullband.sample_rate_hz / (kRxSps * rs);
    const int factor = static_cast<int>(std::lround(ratio));
    if (factor < 1 || std::abs(ratio - factor) > 1e-9)
        throw std::invalid_argument("front end needs an integer multiple of 2 SpS");
    Waveform bb = frequency_shift(
        fullband, grid_frequency(-channel_offset * task.channel_spacing_hz, fullband.size(), fullband.sample_rate_hz));
    // ideal demultiplexer, passband equal to the RRC occupied bandwidth
    const double cutoff = 0.5 * (1.0 + kRolloff) * rs;
    RVec om = fft::angular_frequencies(bb.size(), bb.sample_rate_hz);
    fft::forward(bb.samples);
    for (std::size_t k = 0; k < bb.size(); ++k)
        if (std::abs(om[k]) > 2.0 * kPi * cutoff * (1.0 + 1e-12)) bb.samples[k] = 0.0;
    fft::inverse(bb.samples);
    return resample_decimate(bb, factor, 0);
}

Waveform matched_filter(const Waveform& w, double symbol_rate_baud) {
    const double ratio = w.sample_rate_hz / symbol_rate_baud;
    const int sps = static_cast<int>(std::lround(ratio));
    if (sps < 2 || std::abs(ratio - sps) > 1e-9)
        throw std::invalid_argument("matched filter needs an integer SpS >= 2");
    const RVec g = rrc_taps(kRolloff, kFilterSpanSymbols, sps);
    CVec y = circular_filter(w.samples, g);
    const double s = 1.0 / std::sqrt(static_cast<double>(sps));
    for (auto& v : y) v *= s;
    return Waveform(std::move(y), w.sample_rate_hz);
}

LinkOutput propagate_link(const SymbolFrame& frame, const TaskInfo& task, const FiberParams& params,
                          const SimStepPlan& plan, Rng& rng, const LinkOptions& opts) {
    params.validate();
    plan.validate(params);
    LinkOutput out;
    out.task = task;
    out.tx_symbols = frame;
    out.seed = frame.seed;

    Waveform u = build_tx_waveform(frame, task, plan.sps_tx);
    if (opts.keep_fullband) out.tx_fullband = u;
    const double nf = opts.noise ? params.noise_figure_db : -std::numeric_limits<double>::infinity();
    for (int s = 0; s < params.n_spans; ++s) {
        u = ssfm_span(u, params, plan);
        u = edfa_amplify(u, params.span_loss_db(), nf, params.carrier_freq_hz(), rng);
    }
    if (opts.keep_fullband) out.rx_fullband = u;

    const int m = task.n_channels / 2;
    if (opts.all_channels) {
        for (int ch = -m; ch <= m; ++ch) out.rx_all.push_back(receiver_front_end(u, task, ch));
        out.rx = out.rx_all[m];
    } else {
        out.rx = receiver_front_end(u, task, 0);
    }
    return out;
}

Waveform inverse_propagate(const Waveform& rx_fullband, const FiberParams& params,
                           const SimStepPlan& plan) {
    const double a = std::pow(10.0, -params.span_loss_db() / 20.0);
    Waveform u = rx_fullband;
    for (int s = 0; s < params.n_spans; ++s) {
        for (auto& v : u.samples) v *= a;
        u = ssfm_span_inverse(u, params, plan);
    }
    return u;
}

LinkOutput simulate_link(const TaskInfo& task, const FiberParams& params, std::size_t n_symbols,
                         std::uint64_t seed, const LinkOptions& opts, double phi_max) {
    const Constellation c = Constellation::qam16();
    SymbolFrame frame = draw_symbol_frame(c, task.n_channels, n_symbols, derive_seed(seed, "frame"));
    frame.seed = seed;
    SimStepPlan plan = make_step_plan(params, task, phi_max);
    Rng rng(derive_seed(seed, "ase"));
    return propagate_link(frame, task, params, plan, rng, opts);
}

}  // namespace metadsp
