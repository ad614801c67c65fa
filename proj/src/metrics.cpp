#include "metadsp/metrics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

namespace metadsp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cost 2N(log2 N + 1) / (N - len + 1) minimised over N = 2^j with a positive denominator.
struct FftMin {
    double cost;
    long n;
};

FftMin min_overlap_save(double len, double scale) {
    FftMin best{kInf, 0};
    for (int j = 0; j <= kMaxFftLog2; ++j) {
        const double n = std::ldexp(1.0, j);
        const double den = n - len + 1.0;
        if (den <= 0.0) continue;
        const double c = scale * n * (j + 1.0) / den;
        if (c < best.cost) best = {c, static_cast<long>(n)};
    }
    if (best.n == 0) throw std::invalid_argument("filter longer than the largest FFT size");
    return best;
}

void check_link(int n_span, double n_stps, int n_d) {
    if (n_span < 1 || !(n_stps > 0.0) || n_span * n_stps < 1.0 - 1e-12)
        throw std::invalid_argument("need n_span * n_stps >= 1");
    if (n_d < 1) throw std::invalid_argument("N_d must be >= 1");
}

}  // namespace

double ber_count(const std::vector<std::uint8_t>& decided, const std::vector<std::uint8_t>& truth) {
    if (decided.empty() || decided.size() != truth.size())
        throw std::invalid_argument("ber_count: bit streams must be nonempty and of equal length");
    std::size_t err = 0;
    for (std::size_t i = 0; i < decided.size(); ++i) err += (decided[i] != 0) != (truth[i] != 0);
    return static_cast<double>(err) / static_cast<double>(decided.size());
}

double erfcinv(double y) {
    if (!(y > 0.0 && y < 2.0)) {
        if (y == 0.0) return kInf;
        if (y == 2.0) return -kInf;
        throw std::domain_error("erfcinv: argument outside [0, 2]");
    }
    // erfcinv(y) = -erfcinv(2 - y); solve on (0, 1] where the root is >= 0
    if (y > 1.0) return -erfcinv(2.0 - y);
    // start: Winitzki-style closed form for erfinv(1 - y)
    const double a = 0.147;
    const double x0 = 1.0 - y;
    const double ln = std::log((1.0 - x0) * (1.0 + x0));
    const double t = 2.0 / (kPi * a) + 0.5 * ln;
    double x = std::sqrt(std::sqrt(t * t - ln / a) - t);
    // bracket [lo, hi] with erfc decreasing
    double lo = 0.0, hi = 30.0;
    for (int it = 0; it < 100; ++it) {
        const double f = std::erfc(x) - y;
        if (f > 0.0)
            lo = x;
        else
            hi = x;
        const double df = -2.0 / std::sqrt(kPi) * std::exp(-x * x);
        double xn = x - f / df;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        const double step = std::abs(xn - x);
        x = xn;
        if (step <= 1e-15 * std::max(1.0, x)) break;
    }
    return x;
}

QFactor q_factor(double ber) {
    if (std::isnan(ber)) throw std::invalid_argument("q_factor: ber is NaN");
    if (ber <= 0.0) return {kInf, true};
    if (ber >= 0.5) return {-kInf, true};
    return {20.0 * std::log10(std::sqrt(2.0) * erfcinv(2.0 * ber)), false};
}

double q_from_ber(double ber) { return q_factor(ber).db; }

double effective_snr_db(const CVec& yhat, const CVec& y) {
    if (yhat.size() != y.size() || y.empty()) throw std::invalid_argument("effective_snr_db: size mismatch");
    double ps = 0.0, pe = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ps += std::norm(y[i]);
        pe += std::norm(yhat[i] - y[i]);
    }
    if (pe == 0.0) return kInf;
    return 10.0 * std::log10(ps / pe);
}

double mpq(const std::vector<QPoint>& grid) {
    if (grid.empty()) throw std::invalid_argument("mpq: empty grid");
    std::map<std::tuple<int, double>, double> best;
    for (const auto& q : grid) {
        auto key = std::make_tuple(q.n_channels, q.symbol_rate_baud);
        auto it = best.find(key);
        if (it == best.end())
            best.emplace(key, q.q_db);
        else if (q.q_db > it->second)
            it->second = q.q_db;
    }
    double sum = 0.0;
    for (const auto& kv : best) sum += kv.second;
    return sum / static_cast<double>(best.size());
}

ComplexityReport rmps_ddlms(int taps) {
    if (taps < 1) throw std::invalid_argument("taps must be >= 1");
    ComplexityReport r;
    r.method = "ddlms";
    r.taps = taps;
    r.rmps = 4.0 * 2.0 * (taps + 1.0);
    return r;
}

ComplexityReport rmps_edc(int n_d) {
    if (n_d < 1) throw std::invalid_argument("N_d must be >= 1");
    ComplexityReport r;
    r.method = "edc";
    r.n_d = n_d;
    const FftMin m = min_overlap_save(n_d, 8.0);
    r.rmps = m.cost;
    r.fft_size = m.n;
    return r;
}

ComplexityReport rmps_dbp(int n_span, double n_stps, int n_d) {
    check_link(n_span, n_stps, n_d);
    const double steps = n_span * n_stps;
    ComplexityReport r;
    r.method = "dbp";
    r.n_d = n_d;
    r.n_span = n_span;
    r.n_stps = n_stps;
    // the +2 rotation term is independent of N, so the argmin is the linear term's
    const FftMin m = min_overlap_save(n_d / steps, 2.0);
    r.rmps = 4.0 * steps * (m.cost + 2.0);
    r.fft_size = m.n;
    return r;
}

ComplexityReport rmps_fdbp(int n_span, double n_stps, int n_d, int n_f) {
    check_link(n_span, n_stps, n_d);
    if (n_f < 1) throw std::invalid_argument("N_f must be >= 1");
    const double steps = n_span * n_stps;
    ComplexityReport r;
    r.method = "fdbp";
    r.n_d = n_d;
    r.n_f = n_f;
    r.n_span = n_span;
    r.n_stps = n_stps;
    const FftMin lin = min_overlap_save(n_d / steps, 2.0);
    const FftMin nl = min_overlap_save(n_f, 2.0);
    r.rmps = 4.0 * steps * (lin.cost + nl.cost);
    r.fft_size = lin.n;
    r.fft_size_nl = nl.n;
    return r;
}

ComplexityReport rmps_meta_dbp(int n_span, double n_stps, int n_d, int n_f) {
    ComplexityReport r = rmps_fdbp(n_span, n_stps, n_d, n_f);
    r.method = "meta-dbp";
    return r;
}

ComplexityReport rmps_meta_adf(int taps, int hidden, int input_dim, int layers) {
    if (taps < 0 || hidden < 0 || input_dim < 0 || layers < 0)
        throw std::invalid_argument("meta-adf sizes must be non-negative");
    ComplexityReport r;
    r.method = "meta-adf";
    r.taps = taps;
    r.hidden = hidden;
    r.input_dim = input_dim;
    r.layers = layers;
    const double h = hidden;
    r.rmps = 4.0 * (input_dim * h + 3.0 * layers * (2.0 * h * h + h)) * (taps + 1.0);
    return r;
}

ComplexityReport rmps_meta_dsp(int n_span, double n_stps, int n_d, int n_f, int taps, int hidden, int input_dim,
                               int layers) {
    const ComplexityReport a = rmps_fdbp(n_span, n_stps, n_d, n_f);
    const ComplexityReport b = rmps_meta_adf(taps, hidden, input_dim, layers);
    ComplexityReport r = a;
    r.method = "meta-dsp";
    r.taps = taps;
    r.hidden = hidden;
    r.input_dim = input_dim;
    r.layers = layers;
    r.rmps = a.rmps + b.rmps;
    return r;
}

}  // namespace metadsp
