#include "metadsp/adaptive.hpp"

#include <cmath>

namespace metadsp {

AdfWeights AdfWeights::center_spike(int d) {
    if (d < 1) throw std::invalid_argument("filter length must be >= 1");
    AdfWeights t;
    t.w.assign(d, cplx(0.0, 0.0));
    t.w[d / 2] = 1.0;
    t.v = 1.0;
    return t;
}

CVec AdfWeights::flat() const {
    CVec f(w);
    f.push_back(v);
    return f;
}

void AdfWeights::set_flat(const CVec& f) {
    if (f.size() != w.size() + 1) throw std::invalid_argument("flat weight size mismatch");
    std::copy(f.begin(), f.end() - 1, w.begin());
    v = f.back();
}

CVec AdfGradient::flat() const {
    CVec f(gw);
    f.push_back(gv);
    return f;
}

OptimizerState make_optimizer_state(OptimizerKind kind, std::size_t n) {
    switch (kind) {
        case OptimizerKind::lms: return LmsState{};
        case OptimizerKind::nlms: return NlmsState{};
        case OptimizerKind::rmsprop: return RmsPropState{RVec(n, 0.0)};
        case OptimizerKind::adam: return AdamState{CVec(n, cplx(0.0, 0.0)), RVec(n, 0.0), 0};
    }
    throw std::invalid_argument("unknown optimizer");
}

void AdfRunConfig::validate() const {
    if (taps < 1) throw std::invalid_argument("taps must be >= 1");
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (pilot_count < 0) throw std::invalid_argument("pilot count must be >= 0");
}

cplx filter_apply(const cplx* u, std::size_t d, const AdfWeights& theta) {
    if (d != theta.w.size()) throw std::invalid_argument("window length does not match filter taps");
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < d; ++i) acc += theta.w[i] * u[i];
    return theta.v * acc;
}

cplx filter_apply(const CVec& u_window, const AdfWeights& theta) {
    return filter_apply(u_window.data(), u_window.size(), theta);
}

cplx decide(cplx y, const Constellation& c) { return c.decide(y); }

AdfGradient adf_gradient(const cplx* u, std::size_t d, const AdfWeights& theta, cplx y_ref) {
    if (d != theta.w.size()) throw std::invalid_argument("window length does not match filter taps");
    cplx wu(0.0, 0.0);
    for (std::size_t i = 0; i < d; ++i) wu += theta.w[i] * u[i];
    const cplx e = theta.v * wu - y_ref;
    const cplx ce = std::conj(e);
    AdfGradient g;
    g.gw.resize(d);
    for (std::size_t i = 0; i < d; ++i) g.gw[i] = ce * theta.v * u[i];
    g.gv = ce * wu;
    return g;
}

AdfGradient adf_gradient(const CVec& u_window, const AdfWeights& theta, cplx y_ref) {
    return adf_gradient(u_window.data(), u_window.size(), theta, y_ref);
}

CVec filter_sensitivity(const cplx* u, std::size_t d, const AdfWeights& theta) {
    CVec o(d + 1);
    cplx wu(0.0, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        o[i] = theta.v * u[i];
        wu += theta.w[i] * u[i];
    }
    o[d] = wu;
    return o;
}

CVec optimizer_step(OptimizerKind kind, const CVec& g, const CVec& o, OptimizerState& state,
                    const OptimizerHyper& hp) {
    const std::size_t n = g.size();
    CVec v(n);
    switch (kind) {
        case OptimizerKind::lms: {
            if (!std::holds_alternative<LmsState>(state)) throw std::invalid_argument("optimizer state mismatch");
            for (std::size_t i = 0; i < n; ++i) v[i] = -hp.eta * std::conj(g[i]);
            return v;
        }
        case OptimizerKind::nlms: {
            auto* s = std::get_if<NlmsState>(&state);
            if (!s) throw std::invalid_argument("optimizer state mismatch");
            if (o.size() != n) throw std::invalid_argument("NLMS needs the filter sensitivity");
            double p = 0.0;
            for (auto& x : o) p += std::norm(x);
            if (!s->primed) {
                s->mu = p;
                s->primed = true;
            } else {
                s->mu = hp.gamma0 * s->mu + (1.0 - hp.gamma0) * p;
            }
            for (std::size_t i = 0; i < n; ++i)
                v[i] = s->mu > 0.0 ? -hp.eta * std::conj(g[i]) / s->mu : cplx(0.0, 0.0);
            return v;
        }
        case OptimizerKind::rmsprop: {
            auto* s = std::get_if<RmsPropState>(&state);
            if (!s || s->mu.size() != n) throw std::invalid_argument("optimizer state mismatch");
            for (std::size_t i = 0; i < n; ++i) {
                s->mu[i] = hp.gamma0 * s->mu[i] + (1.0 - hp.gamma0) * std::norm(g[i]);
                v[i] = -hp.eta * std::conj(g[i]) / (std::sqrt(s->mu[i]) + hp.eps);
            }
            return v;
        }
        case OptimizerKind::adam: {
            auto* s = std::get_if<AdamState>(&state);
            if (!s || s->m.size() != n || s->b.size() != n) throw std::invalid_argument("optimizer state mismatch");
            s->t += 1;
            const double c1 = 1.0 - std::pow(hp.gamma1, static_cast<double>(s->t));
            const double c2 = 1.0 - std::pow(hp.gamma2, static_cast<double>(s->t));
            for (std::size_t i = 0; i < n; ++i) {
                s->m[i] = hp.gamma1 * s->m[i] + (1.0 - hp.gamma1) * std::conj(g[i]);
                s->b[i] = hp.gamma2 * s->b[i] + (1.0 - hp.gamma2) * std::norm(g[i]);
                const cplx mh = s->m[i] / c1;
                const double bh = s->b[i] / c2;
                v[i] = -hp.eta * mh / (std::sqrt(bh) + hp.eps);
            }
            return v;
        }
    }
    throw std::invalid_argument("unknown optimizer");
}

std::size_t adf_output_length(std::size_t n, int taps, int stride) {
    if (n < static_cast<std::size_t>(taps)) return 0;
    return (n - taps) / stride + 1;
}

CVec pad_for_adf(const CVec& x, int taps, int stride) {
    const long n = static_cast<long>(x.size());
    if (n == 0 || n % stride != 0) throw std::invalid_argument("ADF input length must be a multiple of the stride");
    const long len = (n / stride - 1) * stride + taps;
    const long front = taps / 2;
    CVec p(len);
    for (long i = 0; i < len; ++i) p[i] = x[(((i - front) % n) + n) % n];
    return p;
}

AdfResult adf_run(const CVec& samples, const CVec& pilots, const AdfRunConfig& cfg, const Constellation& c,
                  const AdfWeights& init) {
    cfg.validate();
    const std::size_t d = cfg.taps;
    if (init.w.size() != d) throw std::invalid_argument("initial weights do not match taps");
    const std::size_t k_out = adf_output_length(samples.size(), cfg.taps, cfg.stride);
    if (k_out == 0) throw std::invalid_argument("signal shorter than one ADF window");
    if (pilots.size() < std::min<std::size_t>(cfg.pilot_count, k_out))
        throw std::invalid_argument("not enough pilot symbols");

    AdfResult r;
    r.y.resize(k_out);
    AdfWeights theta = init;
    OptimizerState state = make_optimizer_state(cfg.optimizer, d + 1);
    CVec o;
    for (std::size_t k = 0; k < k_out; ++k) {
        const cplx* u = samples.data() + k * cfg.stride;
        const cplx y = filter_apply(u, d, theta);
        r.y[k] = y;
        if (cfg.record_trajectory) r.trajectory.push_back(theta.flat());
        const cplx ref = k < static_cast<std::size_t>(cfg.pilot_count) ? pilots[k] : c.decide(y);
        const CVec g = adf_gradient(u, d, theta, ref).flat();
        if (cfg.optimizer == OptimizerKind::nlms) o = filter_sensitivity(u, d, theta);
        const CVec step = optimizer_step(cfg.optimizer, g, o, state, cfg.hyper);
        for (std::size_t i = 0; i < d; ++i) theta.w[i] += step[i];
        theta.v += step[d];
    }
    r.final_weights = theta;
    return r;
}

AdfResult adf_run(const Waveform& w, const CVec& pilots, const AdfRunConfig& cfg, const Constellation& c) {
    return adf_run(w.samples, pilots, cfg, c, AdfWeights::center_spike(cfg.taps));
}

}  // namespace metadsp
