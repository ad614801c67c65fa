#pragma once

#include <cstdint>
#include <vector>

#include "metadsp/types.hpp"

namespace metadsp {

// Uniformly sampled complex baseband signal, samples in sqrt(W).
struct Waveform {
    CVec samples;
    double sample_rate_hz = 1.0;

    Waveform() = default;
    Waveform(CVec s, double fs) : samples(std::move(s)), sample_rate_hz(fs) {}

    std::size_t size() const { return samples.size(); }
    double mean_power() const;
    // Throws std::invalid_argument on empty, non-finite or bad sample rate.
    void validate() const;
};

double dbm_to_watts(double p_dbm);
double watts_to_dbm(double p_w);
// beta2 in s^2/m from D in ps/(nm km) and wavelength in nm.
double dispersion_to_beta2(double d_ps_nm_km, double wavelength_nm);

struct FiberParams {
    double attenuation_db_per_km = 0.2;
    double dispersion_ps_nm_km = 16.5;
    double gamma_per_w_km = 1.31;
    double wavelength_nm = 1550.0;
    double span_length_km = 80.0;
    int n_spans = 25;
    double noise_figure_db = 4.5;

    double alpha_per_m() const;  // power attenuation coefficient, 1/m
    double beta2() const;        // s^2/m
    double gamma_per_w_m() const;
    double carrier_freq_hz() const;
    double span_length_m() const { return span_length_km * 1e3; }
    double link_length_m() const { return span_length_m() * n_spans; }
    double span_loss_db() const { return attenuation_db_per_km * span_length_km; }
    // Zero alpha/D/gamma are accepted so that ablations can switch effects off.
    void validate() const;
};

struct TaskInfo {
    double power_dbm_per_channel = 0.0;
    double symbol_rate_baud = 20e9;
    int n_channels = 1;
    double channel_spacing_hz = 24e9;

    // spacing <= 0 selects the default ratio 1.2 * Rs.
    static TaskInfo make(double p_dbm, double rs, int n_ch, double spacing_hz = 0.0);
    double power_w() const { return dbm_to_watts(power_dbm_per_channel); }
    double total_power_w() const { return power_w() * n_channels; }
    void validate() const;
};

constexpr double kDefaultSpacingRatio = 1.2;

// 16-QAM with independent 2-bit Gray code per rail, unit mean energy.
// Point index p: I level p % 4, Q level p / 4, level l -> (2l - 3)/sqrt(10).
class Constellation {
public:
    static Constellation qam16();

    std::size_t size() const { return points_.size(); }
    int bits_per_symbol() const { return bits_; }
    cplx point(std::size_t i) const { return points_[i]; }
    unsigned label(std::size_t i) const { return labels_[i]; }
    const CVec& points() const { return points_; }

    // Nearest point, ties to the smaller index.
    std::size_t nearest_index(cplx y) const;
    cplx decide(cplx y) const { return points_[nearest_index(y)]; }
    // Exact membership test.
    long index_of(cplx x) const;
    // Appends bits_per_symbol bits (MSB first) of the label of point i.
    void append_bits(std::size_t i, std::vector<std::uint8_t>& out) const;

private:
    CVec points_;
    std::vector<unsigned> labels_;
    int bits_ = 0;
};

struct SymbolFrame {
    std::vector<std::vector<int>> indices;  // per channel, point index
    std::vector<CVec> symbols;              // per channel
    std::uint64_t seed = 0;

    std::size_t n_channels() const { return symbols.size(); }
    std::size_t n_symbols() const { return symbols.empty() ? 0 : symbols[0].size(); }
    const CVec& center() const { return symbols[symbols.size() / 2]; }
    const std::vector<int>& center_indices() const { return indices[indices.size() / 2]; }
};

SymbolFrame draw_symbol_frame(const Constellation& c, int n_channels, std::size_t n_symbols,
                              std::uint64_t seed);

// Root-raised-cosine, span_symbols*sps+1 taps, unit energy.
RVec rrc_taps(double rolloff, int span_symbols, int sps);

Waveform frequency_shift(const Waveform& w, double df_hz);
// Nearest multiple of fs/n: a shift by it keeps an n-sample periodic frame periodic.
double grid_frequency(double df_hz, std::size_t n, double fs);
Waveform resample_decimate(const Waveform& w, int factor, int phase);

// Centered circular convolution with real taps (tap (len-1)/2 is lag 0).
CVec circular_filter(const CVec& x, const RVec& taps);
// Frequency response of the centered circular filter on an n-point grid.
CVec circular_response(const RVec& taps, std::size_t n);

double relative_l2(const CVec& a, const CVec& b);

}  // namespace metadsp
