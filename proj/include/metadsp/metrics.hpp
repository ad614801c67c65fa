#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metadsp/types.hpp"

namespace metadsp {

// Fraction of differing bits. Throws on empty input or length mismatch.
double ber_count(const std::vector<std::uint8_t>& decided, const std::vector<std::uint8_t>& truth);

// Inverse complementary error function on (0, 2): rational start, then
// Newton steps on std::erfc, safeguarded by a bisection bracket.
double erfcinv(double y);

struct QFactor {
    double db = 0.0;
    bool sentinel = false;  // ber outside (0, 0.5): db is +inf or -inf
};
QFactor q_factor(double ber);
// 20 log10(sqrt(2) erfcinv(2 ber)); +inf for ber <= 0, -inf for ber >= 0.5.
double q_from_ber(double ber);

// 10 log10(mean|y|^2 / mean|yhat - y|^2); +inf when the error is zero.
double effective_snr_db(const CVec& yhat, const CVec& y);

struct QPoint {
    double power_dbm = 0.0;
    double symbol_rate_baud = 0.0;
    int n_channels = 1;
    double q_db = 0.0;
};
// Max over power inside each (rate, channel count) cell, mean over cells.
double mpq(const std::vector<QPoint>& grid);

struct QualityReport {
    double ber = 0.0;
    double q_db = 0.0;
    double eff_snr_db = 0.0;
    long n_bits_counted = 0;
};

struct ComplexityReport {
    std::string method;
    double rmps = 0.0;
    double n_d = 0.0;
    int n_f = 0;
    int n_span = 0;
    double n_stps = 0.0;
    int taps = 0;
    int hidden = 0;
    int input_dim = 0;
    int layers = 0;
    long fft_size = 0;      // convolution FFT size, 0 when unused
    long fft_size_nl = 0;   // second FFT size for the power filter, 0 when unused
};

constexpr int kMaxFftLog2 = 26;

ComplexityReport rmps_ddlms(int taps);
ComplexityReport rmps_edc(int n_d);
ComplexityReport rmps_dbp(int n_span, double n_stps, int n_d);
ComplexityReport rmps_fdbp(int n_span, double n_stps, int n_d, int n_f);
ComplexityReport rmps_meta_dbp(int n_span, double n_stps, int n_d, int n_f);
ComplexityReport rmps_meta_adf(int taps, int hidden = 1, int input_dim = 2, int layers = 2);
ComplexityReport rmps_meta_dsp(int n_span, double n_stps, int n_d, int n_f, int taps, int hidden = 1,
                               int input_dim = 2, int layers = 2);

}  // namespace metadsp
