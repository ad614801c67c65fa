#include "metadsp/dsp_classic.hpp"

#include <cmath>

#include "metadsp/fft.hpp"

namespace metadsp {
namespace {

double effective_length(double alpha, double dz) {
    if (alpha == 0.0) return dz;
    return -std::expm1(-alpha * dz) / alpha;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

CVec spectral_dispersion(std::size_t n, double fs, double beta2, double dz) {
    RVec om = fft::angular_frequencies(n, fs);
    CVec h(n);
    for (std::size_t k = 0; k < n; ++k) h[k] = std::polar(1.0, -0.5 * beta2 * om[k] * om[k] * dz);
    return h;
}

int DbpConfig::total_steps(int n_spans) const {
    if (!(steps_per_span > 0.0) || !std::isfinite(steps_per_span))
        throw std::invalid_argument("steps_per_span must be positive");
    const double raw = steps_per_span * n_spans;
    const long steps = std::lround(raw);
    if (steps < 1) throw std::invalid_argument("DBP needs at least one step");
    if (std::abs(raw - static_cast<double>(steps)) > 1e-9 * std::max(1.0, raw))
        throw std::invalid_argument("steps_per_span * n_spans must be an integer");
    if (n_spans % steps != 0 && steps % n_spans != 0)
        throw std::invalid_argument("DBP steps must align with span boundaries");
    return static_cast<int>(steps);
}

int kernel_length(double dz_m, double beta2, double sample_rate_hz) {
    const double raw = 2.0 * kPi * std::abs(dz_m) * std::abs(beta2) * sample_rate_hz * sample_rate_hz;
    long n = static_cast<long>(std::ceil(raw));
    if (n < 1) n = 1;
    if (n % 2 == 0) ++n;
    return static_cast<int>(n);
}

DispersionKernel dispersion_kernel(double dz_m, const FiberParams& params, double sample_rate_hz,
                                   int length) {
    const double beta2 = params.beta2();
    const int n = length > 0 ? length : kernel_length(dz_m, beta2, sample_rate_hz);
    if (n % 2 == 0) throw std::invalid_argument("dispersion kernel length must be odd");
    CVec h = spectral_dispersion(static_cast<std::size_t>(n), sample_rate_hz, beta2, dz_m);
    fft::inverse(h);
    DispersionKernel k;
    k.dz_m = dz_m;
    k.sample_rate_hz = sample_rate_hz;
    k.taps.resize(n);
    const int c = (n - 1) / 2;
    for (int j = 0; j < n; ++j) k.taps[j] = h[((j - c) % n + n) % n];
    return k;
}

CVec fir_filter_direct(const CVec& x, const CVec& taps) {
    if (taps.size() % 2 == 0) throw std::invalid_argument("centred filter needs an odd, nonzero length");
    const long n = static_cast<long>(x.size());
    const long m = static_cast<long>(taps.size());
    const long c = (m - 1) / 2;
    CVec y(x.size(), cplx(0.0, 0.0));
    for (long i = 0; i < n; ++i) {
        cplx acc(0.0, 0.0);
        const long jlo = std::max(0L, i + c - (n - 1));
        const long jhi = std::min(m - 1, i + c);
        for (long j = jlo; j <= jhi; ++j) acc += taps[j] * x[i + c - j];
        y[i] = acc;
    }
    return y;
}

CVec fir_filter_overlap_save(const CVec& x, const CVec& taps, std::size_t fft_size) {
    if (taps.size() % 2 == 0) throw std::invalid_argument("centred filter needs an odd, nonzero length");
    const std::size_t n = x.size();
    const std::size_t m = taps.size();
    const std::size_t c = (m - 1) / 2;
    std::size_t nfft = fft_size ? fft_size : next_pow2(std::max<std::size_t>(4 * m, 1024));
    if (nfft < m + 1) throw std::invalid_argument("overlap-save FFT size too small");
    const std::size_t step = nfft - m + 1;

    CVec h(nfft, cplx(0.0, 0.0));
    std::copy(taps.begin(), taps.end(), h.begin());
    fft::forward(h);

    // full linear convolution index k maps to output index k - c
    const std::size_t need = c + n;
    const std::size_t n_blocks = (need + step - 1) / step;
    CVec xe(m - 1 + n_blocks * step + nfft, cplx(0.0, 0.0));
    std::copy(x.begin(), x.end(), xe.begin() + (m - 1));

    CVec y(n);
    CVec buf(nfft);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        std::copy(xe.begin() + b * step, xe.begin() + b * step + nfft, buf.begin());
        fft::forward(buf);
        for (std::size_t k = 0; k < nfft; ++k) buf[k] *= h[k];
        fft::inverse(buf);
        for (std::size_t k = 0; k < step; ++k) {
            const std::size_t full = b * step + k;
            if (full >= c && full < c + n) y[full - c] = buf[m - 1 + k];
        }
    }
    return y;
}

CVec fir_filter(const CVec& x, const CVec& taps) {
    if (taps.size() > 1024) return fir_filter_overlap_save(x, taps);
    return fir_filter_direct(x, taps);
}

Waveform apply_dispersion(const Waveform& w, double beta2, double dz_m) {
    Waveform out(w.samples, w.sample_rate_hz);
    if (dz_m == 0.0 || beta2 == 0.0) return out;
    CVec h = spectral_dispersion(w.size(), w.sample_rate_hz, beta2, dz_m);
    fft::forward(out.samples);
    for (std::size_t k = 0; k < out.size(); ++k) out.samples[k] *= h[k];
    fft::inverse(out.samples);
    return out;
}

Waveform edc(const Waveform& w, const FiberParams& params, double link_length_m, LinearRoute route) {
    if (link_length_m == 0.0) return w;
    if (route == LinearRoute::spectral) return apply_dispersion(w, params.beta2(), -link_length_m);
    DispersionKernel k = dispersion_kernel(-link_length_m, params, w.sample_rate_hz);
    return Waveform(fir_filter(w.samples, k.taps), w.sample_rate_hz);
}

RVec dbp_step_lengths(const FiberParams& params, const DbpConfig& cfg, double total_length_m) {
    const int n_spans = params.n_spans;
    const int steps = cfg.total_steps(n_spans);
    const double span = total_length_m / n_spans;
    const double alpha = cfg.include_attenuation ? params.alpha_per_m() : 0.0;
    RVec out(steps);
    if (steps >= n_spans) {
        const int per_span = steps / n_spans;
        const double dz = span / per_span;
        for (int j = 0; j < steps; ++j) {
            // j counts from the receiver; m is the step index inside its span
            const int m = per_span - 1 - (j % per_span);
            out[j] = std::exp(-alpha * m * dz) * effective_length(alpha, dz);
        }
    } else {
        const int spans_per_step = n_spans / steps;
        for (int j = 0; j < steps; ++j) out[j] = spans_per_step * effective_length(alpha, span);
    }
    return out;
}

Waveform backpropagate(const Waveform& w, const FiberParams& params, const DbpConfig& cfg,
                       double total_length_m, const NonlinearPhaseFn& phase_fn) {
    const int steps = cfg.total_steps(params.n_spans);
    const double dz = total_length_m / steps;
    const RVec lengths = dbp_step_lengths(params, cfg, total_length_m);
    const double gamma = params.gamma_per_w_m();

    CVec h;
    DispersionKernel kernel;
    if (cfg.route == LinearRoute::spectral)
        h = spectral_dispersion(w.size(), w.sample_rate_hz, params.beta2(), -dz);
    else
        kernel = dispersion_kernel(-dz, params, w.sample_rate_hz);

    CVec u = w.samples;
    RVec phase(u.size());
    for (int j = 0; j < steps; ++j) {
        if (cfg.route == LinearRoute::spectral) {
            fft::forward(u);
            for (std::size_t k = 0; k < u.size(); ++k) u[k] *= h[k];
            fft::inverse(u);
        } else {
            u = fir_filter(u, kernel.taps);
        }
        std::fill(phase.begin(), phase.end(), 0.0);
        phase_fn(u, gamma * lengths[j], phase);
        for (std::size_t k = 0; k < u.size(); ++k) u[k] *= std::polar(1.0, phase[k]);
    }
    return Waveform(std::move(u), w.sample_rate_hz);
}

Waveform dbp(const Waveform& w, const FiberParams& params, const DbpConfig& cfg, double total_length_m) {
    return backpropagate(w, params, cfg, total_length_m, [](const CVec& u, double gl, RVec& phase) {
        for (std::size_t k = 0; k < u.size(); ++k) phase[k] = gl * std::norm(u[k]);
    });
}

Waveform dbp(const Waveform& w, const FiberParams& params, const DbpConfig& cfg) {
    return dbp(w, params, cfg, params.link_length_m());
}

RVec power_filter(const RVec& p, const RVec& c) {
    if (c.empty() || c.size() % 2 == 0) throw std::invalid_argument("power filter length must be odd");
    const long n = static_cast<long>(p.size());
    const long h = static_cast<long>(c.size() / 2);
    RVec out(p.size(), 0.0);
    if (n == 0) return out;
    for (long j = 0; j < static_cast<long>(c.size()); ++j) {
        const double cj = c[j];
        if (cj == 0.0) continue;
        // out[i] += c[j] * p[i - lag], indices taken modulo n
        const long lag = (((j - h) % n) + n) % n;
        for (long i = 0; i < lag; ++i) out[i] += cj * p[i - lag + n];
        for (long i = lag; i < n; ++i) out[i] += cj * p[i - lag];
    }
    return out;
}

Waveform fdbp(const Waveform& w, const FiberParams& params, const DbpConfig& cfg, const RVec& c,
              double total_length_m) {
    if (c.empty() || c.size() % 2 == 0) throw std::invalid_argument("FDBP kernel length must be odd");
    RVec pw(w.size());
    return backpropagate(w, params, cfg, total_length_m, [&](const CVec& u, double gl, RVec& phase) {
        for (std::size_t k = 0; k < u.size(); ++k) pw[k] = std::norm(u[k]);
        RVec f = power_filter(pw, c);
        for (std::size_t k = 0; k < u.size(); ++k) phase[k] = gl * f[k];
    });
}

Waveform fdbp(const Waveform& w, const FiberParams& params, const DbpConfig& cfg, const RVec& c) {
    return fdbp(w, params, cfg, c, params.link_length_m());
}

}  // namespace metadsp
