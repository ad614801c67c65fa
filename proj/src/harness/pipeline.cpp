#include "metadsp/harness/pipeline.hpp"

#include <cmath>

#include "metadsp/channel.hpp"
#include "metadsp/dsp_classic.hpp"
#include "metadsp/harness/csv.hpp"

namespace metadsp::harness {

std::string MethodSpec::label() const {
    if (method == "dbp") return "dbp-stps" + format_double(steps_per_span);
    return method;
}

std::vector<MethodSpec> expand_methods(const ExperimentConfig& cfg, const std::vector<std::string>& methods) {
    std::vector<MethodSpec> out;
    for (const auto& m : methods) {
        if (m == "edc")
            out.push_back({m, 0.0});
        else if (m == "dbp")
            for (double s : cfg.dsp.dbp_steps_per_span) out.push_back({m, s});
        else if (m == "fdbp" || m == "meta-dsp")
            out.push_back({m, cfg.dsp.fdbp_steps_per_span});
        else
            throw ConfigError("unknown method '" + m + "'");
    }
    return out;
}

int link_kernel_length(const FiberParams& fiber, double symbol_rate_baud) {
    return kernel_length(fiber.link_length_m(), fiber.beta2(), kRxSps * symbol_rate_baud);
}

double method_rmps(const ExperimentConfig& cfg, const MethodSpec& m, double symbol_rate_baud) {
    const int nd = link_kernel_length(cfg.fiber, symbol_rate_baud);
    const int ns = cfg.fiber.n_spans;
    const double adf = rmps_ddlms(cfg.dsp.taps).rmps;
    if (m.method == "edc") return rmps_edc(nd).rmps + adf;
    if (m.method == "dbp") return rmps_dbp(ns, m.steps_per_span, nd).rmps + adf;
    if (m.method == "fdbp") return rmps_fdbp(ns, m.steps_per_span, nd, cfg.dsp.n_f).rmps + adf;
    if (m.method == "meta-dsp")
        return rmps_meta_dsp(ns, m.steps_per_span, nd, cfg.dsp.n_f, cfg.dsp.taps, cfg.dsp.egru_hidden, 2,
                             cfg.dsp.egru_layers)
            .rmps;
    throw ConfigError("unknown method '" + m.method + "'");
}

Waveform normalized_rx(const Dataset& ds) {
    const double s = 1.0 / std::sqrt(ds.task.power_w());
    Waveform w = ds.rx;
    for (auto& v : w.samples) v *= s;
    return w;
}

CVec compensate(const Dataset& ds, const ExperimentConfig& cfg, const MethodSpec& m, const MetaParams* meta) {
    const FiberParams& f = cfg.fiber;
    Waveform u;
    if (m.method == "meta-dsp") {
        if (!meta) throw ConfigError("meta-dsp needs a checkpoint");
        MetaDbpConfig mc;
        mc.dbp = DbpConfig{m.steps_per_span, true, LinearRoute::spectral};
        u = meta_dbp(normalized_rx(ds), ds.task, f, mc, *meta);
        return matched_filter(u, ds.task.symbol_rate_baud).samples;
    }
    if (m.method == "edc") {
        u = edc(ds.rx, f, f.link_length_m());
    } else if (m.method == "dbp") {
        u = dbp(ds.rx, f, DbpConfig{m.steps_per_span, true, LinearRoute::spectral});
    } else if (m.method == "fdbp") {
        const RVec c = gaussian_kernel(cfg.dsp.n_f, cfg.dsp.fdbp_kernel_sigma);
        u = fdbp(ds.rx, f, DbpConfig{m.steps_per_span, true, LinearRoute::spectral}, c);
    } else {
        throw ConfigError("unknown method '" + m.method + "'");
    }
    CVec y = matched_filter(u, ds.task.symbol_rate_baud).samples;
    const double s = 1.0 / std::sqrt(ds.task.power_w());
    for (auto& v : y) v *= s;
    return y;
}

CVec equalize(const CVec& front, const Dataset& ds, const ExperimentConfig& cfg, const MethodSpec& m,
              const MetaParams* meta) {
    const AdfRunConfig adf = cfg.adf();
    const CVec padded = pad_for_adf(front, adf.taps, adf.stride);
    const Constellation c = Constellation::qam16();
    if (m.method == "meta-dsp") {
        if (!meta) throw ConfigError("meta-dsp needs a checkpoint");
        return meta_adf_run(padded, ds.tx, adf, *meta, c, false).y;
    }
    return adf_run(padded, ds.tx, adf, c, AdfWeights::center_spike(adf.taps)).y;
}

QualityReport assess(const CVec& y, const CVec& tx, int taps, std::size_t discard) {
    const std::size_t trim = static_cast<std::size_t>(taps / 2);
    const std::size_t n = std::min(y.size(), tx.size());
    const std::size_t k0 = std::max(trim, discard);
    if (n <= trim || k0 >= n - trim) throw std::invalid_argument("nothing left to assess after trimming");
    const Constellation c = Constellation::qam16();
    std::vector<std::uint8_t> got, want;
    CVec yh, yt;
    for (std::size_t k = k0; k < n - trim; ++k) {
        c.append_bits(c.nearest_index(y[k]), got);
        c.append_bits(c.nearest_index(tx[k]), want);
        yh.push_back(y[k]);
        yt.push_back(tx[k]);
    }
    QualityReport r;
    r.ber = ber_count(got, want);
    r.q_db = q_from_ber(r.ber);
    r.eff_snr_db = effective_snr_db(yh, yt);
    r.n_bits_counted = static_cast<long>(got.size());
    return r;
}

MethodOutcome run_method(const Dataset& ds, const ExperimentConfig& cfg, const MethodSpec& m,
                         const MetaParams* meta, const std::vector<std::size_t>& discards) {
    MethodOutcome out;
    out.spec = m;
    const CVec front = compensate(ds, cfg, m, meta);
    out.y = equalize(front, ds, cfg, m, meta);
    for (const auto& v : out.y)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericalError(m.label() + ": non-finite equalizer output");
    for (std::size_t d : discards) out.quality.push_back(assess(out.y, ds.tx, cfg.dsp.taps, d));
    out.rmps = method_rmps(cfg, m, ds.task.symbol_rate_baud);
    return out;
}

}  // namespace metadsp::harness
