#include "metadsp/signal.hpp"

#include <cmath>
#include <limits>

#include "metadsp/fft.hpp"
#include "metadsp/rng.hpp"

namespace metadsp {

double Waveform::mean_power() const {
    if (samples.empty()) return 0.0;
    double s = 0.0;
    for (auto& v : samples) s += std::norm(v);
    return s / static_cast<double>(samples.size());
}

void Waveform::validate() const {
    if (samples.empty()) throw std::invalid_argument("waveform is empty");
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
        throw std::invalid_argument("waveform sample rate must be positive");
    for (auto& v : samples)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("waveform contains non-finite samples");
}

double dbm_to_watts(double p_dbm) { return std::pow(10.0, p_dbm / 10.0) * 1e-3; }

double watts_to_dbm(double p_w) { return 10.0 * std::log10(p_w / 1e-3); }

double dispersion_to_beta2(double d_ps_nm_km, double wavelength_nm) {
    const double d_si = d_ps_nm_km * 1e-6;  // ps/(nm km) -> s/m^2
    const double lambda = wavelength_nm * 1e-9;
    return -d_si * lambda * lambda / (2.0 * kPi * kSpeedOfLight);
}

double FiberParams::alpha_per_m() const {
    return attenuation_db_per_km / (10.0 * std::log10(std::exp(1.0))) * 1e-3;
}

double FiberParams::beta2() const { return dispersion_to_beta2(dispersion_ps_nm_km, wavelength_nm); }

double FiberParams::gamma_per_w_m() const { return gamma_per_w_km * 1e-3; }

double FiberParams::carrier_freq_hz() const { return kSpeedOfLight / (wavelength_nm * 1e-9); }

void FiberParams::validate() const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!finite_nonneg(attenuation_db_per_km)) throw std::invalid_argument("attenuation must be >= 0");
    if (!finite_nonneg(dispersion_ps_nm_km)) throw std::invalid_argument("dispersion must be >= 0");
    if (!finite_nonneg(gamma_per_w_km)) throw std::invalid_argument("gamma must be >= 0");
    if (!(wavelength_nm > 0.0)) throw std::invalid_argument("wavelength must be positive");
    if (!(span_length_km > 0.0)) throw std::invalid_argument("span length must be positive");
    if (n_spans < 1) throw std::invalid_argument("n_spans must be >= 1");
    if (std::isnan(noise_figure_db)) throw std::invalid_argument("noise figure is NaN");
}

TaskInfo TaskInfo::make(double p_dbm, double rs, int n_ch, double spacing_hz) {
    TaskInfo t;
    t.power_dbm_per_channel = p_dbm;
    t.symbol_rate_baud = rs;
    t.n_channels = n_ch;
    t.channel_spacing_hz = spacing_hz > 0.0 ? spacing_hz : kDefaultSpacingRatio * rs;
    return t;
}

void TaskInfo::validate() const {
    if (!std::isfinite(power_dbm_per_channel)) throw std::invalid_argument("power must be finite");
    if (!(symbol_rate_baud > 0.0)) throw std::invalid_argument("symbol rate must be positive");
    if (n_channels < 1 || n_channels % 2 == 0)
        throw std::invalid_argument("n_channels must be odd and >= 1");
    if (!(channel_spacing_hz >= symbol_rate_baud))
        throw std::invalid_argument("channel spacing must be >= symbol rate");
}

Constellation Constellation::qam16() {
    Constellation c;
    c.bits_ = 4;
    const double scale = 1.0 / std::sqrt(10.0);
    for (unsigned p = 0; p < 16; ++p) {
        unsigned li = p % 4, lq = p / 4;
        c.points_.emplace_back((2.0 * li - 3.0) * scale, (2.0 * lq - 3.0) * scale);
        unsigned gi = li ^ (li >> 1), gq = lq ^ (lq >> 1);
        c.labels_.push_back((gi << 2) | gq);
    }
    return c;
}

std::size_t Constellation::nearest_index(cplx y) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
        double d = std::norm(y - points_[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

long Constellation::index_of(cplx x) const {
    for (std::size_t i = 0; i < points_.size(); ++i)
        if (points_[i] == x) return static_cast<long>(i);
    return -1;
}

void Constellation::append_bits(std::size_t i, std::vector<std::uint8_t>& out) const {
    for (int b = bits_ - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((labels_[i] >> b) & 1u));
}

SymbolFrame draw_symbol_frame(const Constellation& c, int n_channels, std::size_t n_symbols,
                              std::uint64_t seed) {
    if (n_channels < 1) throw std::invalid_argument("n_channels must be >= 1");
    SymbolFrame f;
    f.seed = seed;
    f.indices.resize(n_channels);
    f.symbols.resize(n_channels);
    const int m = static_cast<int>(c.size()) - 1;
    for (int ch = 0; ch < n_channels; ++ch) {
        Rng rng(derive_seed(seed, "symbols", static_cast<std::uint64_t>(ch)));
        f.indices[ch].resize(n_symbols);
        f.symbols[ch].resize(n_symbols);
        for (std::size_t n = 0; n < n_symbols; ++n) {
            int idx = rng.uniform_int(0, m);
            f.indices[ch][n] = idx;
            f.symbols[ch][n] = c.point(idx);
        }
    }
    return f;
}

RVec rrc_taps(double rolloff, int span_symbols, int sps) {
    if (!(rolloff > 0.0 && rolloff <= 1.0)) throw std::invalid_argument("rolloff must be in (0, 1]");
    if (span_symbols < 2 || span_symbols % 2 != 0)
        throw std::invalid_argument("span_symbols must be even and >= 2");
    if (sps < 2) throw std::invalid_argument("sps must be >= 2");
    const int n = span_symbols * sps + 1;
    const int center = n / 2;
    const double b = rolloff;
    RVec h(n);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i - center) / sps;
        double v;
        if (i == center) {
            v = 1.0 - b + 4.0 * b / kPi;
        } else if (std::abs(1.0 - 16.0 * b * b * t * t) < 1e-10) {
            const double a = kPi / (4.0 * b);
            v = b / std::sqrt(2.0) * ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
        } else {
            v = (std::sin(kPi * t * (1.0 - b)) + 4.0 * b * t * std::cos(kPi * t * (1.0 + b))) /
                (kPi * t * (1.0 - 16.0 * b * b * t * t));
        }
        h[i] = v;
    }
    double e = 0.0;
    for (double v : h) e += v * v;
    const double s = 1.0 / std::sqrt(e);
    // enforce exact symmetry after scaling
    for (int i = 0; i < center; ++i) {
        const double v = 0.5 * (h[i] + h[n - 1 - i]) * s;
        h[i] = v;
        h[n - 1 - i] = v;
    }
    h[center] *= s;
    return h;
}

double grid_frequency(double df_hz, std::size_t n, double fs) {
    if (n == 0 || !(fs > 0.0)) throw std::invalid_argument("grid_frequency: empty frame or bad sample rate");
    const double bin = fs / static_cast<double>(n);
    return std::round(df_hz / bin) * bin;
}

Waveform frequency_shift(const Waveform& w, double df_hz) {
    Waveform out(w.samples, w.sample_rate_hz);
    if (df_hz == 0.0) return out;
    const double ratio = df_hz / w.sample_rate_hz;
    for (std::size_t n = 0; n < out.samples.size(); ++n) {
        // reduce the cycle count before forming the angle to keep precision
        double cycles = std::fmod(ratio * static_cast<double>(n), 1.0);
        out.samples[n] *= std::polar(1.0, 2.0 * kPi * cycles);
    }
    return out;
}

Waveform resample_decimate(const Waveform& w, int factor, int phase) {
    if (factor < 1) throw std::invalid_argument("decimation factor must be >= 1");
    if (phase < 0 || phase >= factor) throw std::invalid_argument("decimation phase out of range");
    if (w.size() % static_cast<std::size_t>(factor) != 0)
        throw std::invalid_argument("waveform length not divisible by decimation factor");
    Waveform out;
    out.sample_rate_hz = w.sample_rate_hz / factor;
    out.samples.reserve(w.size() / factor);
    for (std::size_t n = phase; n < w.size(); n += factor) out.samples.push_back(w.samples[n]);
    return out;
}

CVec circular_response(const RVec& taps, std::size_t n) {
    CVec h(n, cplx(0.0, 0.0));
    const long center = static_cast<long>(taps.size() / 2);
    const long nn = static_cast<long>(n);
    for (long j = 0; j < static_cast<long>(taps.size()); ++j) {
        long lag = ((j - center) % nn + nn) % nn;
        h[lag] += taps[j];
    }
    fft::forward(h);
    return h;
}

CVec circular_filter(const CVec& x, const RVec& taps) {
    if (x.empty()) return {};
    CVec h = circular_response(taps, x.size());
    CVec y = fft::forward_copy(x);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] *= h[k];
    fft::inverse(y);
    return y;
}

double relative_l2(const CVec& a, const CVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("relative_l2: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

}  // namespace metadsp
