#include "metadsp/training.hpp"

#include <cmath>
#include <memory>

#include "metadsp/channel.hpp"
#include "metadsp/fft.hpp"

namespace metadsp {
namespace {

using ad::Id;
using ad::Tape;

std::size_t tensor_index(const MetaParams& p, std::string_view name) {
    for (std::size_t i = 0; i < p.tensors.size(); ++i)
        if (p.tensors[i].name == name) return i;
    throw std::out_of_range("no tensor named " + std::string(name));
}

Id var(const MetaParams& p, const ParamVars& v, std::string_view name) { return v.ids[tensor_index(p, name)]; }

std::string layer_name(int l, const char* field) { return "egru.l" + std::to_string(l) + "." + field; }

std::shared_ptr<const CVec> matched_response(std::size_t n, double fs, double rs) {
    const int sps = static_cast<int>(std::lround(fs / rs));
    const RVec g = rrc_taps(kRolloff, kFilterSpanSymbols, sps);
    CVec h = circular_response(g, n);
    const double s = 1.0 / std::sqrt(static_cast<double>(sps));
    for (auto& v : h) v *= s;
    return std::make_shared<const CVec>(std::move(h));
}

std::size_t total_outputs(const TrainingTask& t, const AdfRunConfig& cfg) {
    return t.rx_norm.size() / static_cast<std::size_t>(cfg.stride);
}

std::size_t trim_of(const AdfRunConfig& cfg) { return static_cast<std::size_t>(cfg.taps / 2); }

void check_segment(const TrainingTask& t, const AdfRunConfig& cfg, std::size_t k0, std::size_t k1) {
    if (t.rx_norm.size() % static_cast<std::size_t>(cfg.stride) != 0)
        throw std::invalid_argument("training waveform length must be a multiple of the stride");
    const std::size_t n_out = total_outputs(t, cfg);
    if (k0 >= k1 || k1 > n_out) throw std::invalid_argument("segment out of range");
    if (t.symbols.size() < n_out) throw std::invalid_argument("not enough reference symbols");
}

}  // namespace

double log_mse(const CVec& yhat, const CVec& y, double eps) {
    if (yhat.empty() || yhat.size() != y.size()) throw std::invalid_argument("log_mse: size mismatch or empty input");
    double m = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) m += std::norm(yhat[i] - y[i]);
    return std::log(m / static_cast<double>(y.size()) + eps);
}

void adam_update(RVec& params, const RVec& grads, OuterAdamState& s, double lr, double beta1, double beta2,
                 double eps) {
    if (params.size() != grads.size()) throw std::invalid_argument("adam_update: shape mismatch");
    if (s.m.empty()) {
        s.m.assign(params.size(), 0.0);
        s.v.assign(params.size(), 0.0);
    }
    if (s.m.size() != params.size()) throw std::invalid_argument("adam_update: state shape mismatch");
    s.t += 1;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        s.m[i] = beta1 * s.m[i] + (1.0 - beta1) * grads[i];
        s.v[i] = beta2 * s.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double mh = s.m[i] / c1;
        const double vh = s.v[i] / c2;
        params[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
}

void TrainConfig::validate() const {
    if (truncation_len < 1) throw std::invalid_argument("truncation length must be >= 1");
    if (!(outer_lr >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
}

SegmentCarry SegmentCarry::initial(const MetaParams& p, int taps) {
    return {AdfWeights::center_spike(taps), EgruState::zeros(taps + 1, p.arch)};
}

ParamVars register_params(Tape& tape, const MetaParams& p, bool hyper_grad, bool egru_grad) {
    ParamVars v;
    for (auto& t : p.tensors) {
        const bool hyper = t.name.rfind("hyper.", 0) == 0;
        const bool req = t.trainable && (hyper ? hyper_grad : egru_grad);
        v.ids.push_back(tape.leaf(t.data, req));
    }
    return v;
}

RVec collect_grads(const Tape& tape, const ParamVars& vars, const MetaParams& p) {
    RVec g;
    g.reserve(p.trainable_size());
    for (std::size_t i = 0; i < p.tensors.size(); ++i) {
        if (!p.tensors[i].trainable) continue;
        const RVec& gi = tape.grad(vars.ids[i]);
        g.insert(g.end(), gi.begin(), gi.end());
    }
    return g;
}

Id tape_hypernet(Tape& tape, const MetaParams& p, const ParamVars& v, const RVec& features) {
    const int h1 = p.arch.hyper_h1, h2 = p.arch.hyper_h2, nf = p.arch.kernel_taps;
    Id x = tape.leaf(features, false);
    Id a1 = ad::relu(tape, ad::affine(tape, var(p, v, "hyper.W1"), x, var(p, v, "hyper.b1"), h1, 3));
    Id a2 = ad::relu(tape, ad::affine(tape, var(p, v, "hyper.W2"), a1, var(p, v, "hyper.b2"), h2, h1));
    return ad::affine(tape, var(p, v, "hyper.W3"), a2, var(p, v, "hyper.b3"), nf, h2);
}

Id tape_egru_step(Tape& tape, const MetaParams& p, const ParamVars& v, Id gbar, Id theta,
                  std::vector<Id>& hidden) {
    const int H = p.arch.hidden, L = p.arch.layers;
    const int E = static_cast<int>(tape.value(gbar).size() / 2);
    if (static_cast<int>(hidden.size()) != L) throw std::invalid_argument("tape_egru_step: hidden layer count");
    // per element input pair (gbar_e, theta_e)
    auto idx = std::make_shared<std::vector<int>>(2 * E);
    for (int e = 0; e < E; ++e) {
        (*idx)[2 * e] = e;
        (*idx)[2 * e + 1] = E + e;
    }
    Id xi = ad::cgather(tape, ad::concat(tape, {ad::scale(tape, gbar, p.get("egru.in_scale").data[0]), theta}), idx);
    Id x = ad::cadd_bias(tape, ad::cmatvec(tape, var(p, v, "egru.enc.W"), xi, E, 2, H), var(p, v, "egru.enc.b"), E, H);
    x = ad::relu(tape, x);
    auto aff = [&](Id in, int l, const char* w, const char* b) {
        return ad::cadd_bias(tape, ad::cmatvec(tape, var(p, v, layer_name(l, w)), in, E, H, H),
                             var(p, v, layer_name(l, b)), E, H);
    };
    for (int l = 0; l < L; ++l) {
        Id h = hidden[l];
        Id r = ad::sigmoid(tape, ad::add(tape, aff(x, l, "W_ir", "b_ir"), aff(h, l, "W_hr", "b_hr")));
        Id z = ad::sigmoid(tape, ad::add(tape, aff(x, l, "W_iz", "b_iz"), aff(h, l, "W_hz", "b_hz")));
        Id n = ad::tanh(tape, ad::add(tape, aff(x, l, "W_in", "b_in"), ad::cmul(tape, r, aff(h, l, "W_hn", "b_hn"))));
        Id hn = ad::add(tape, ad::cmul(tape, ad::crsub_const(tape, cplx(1.0, 0.0), z), n), ad::cmul(tape, z, h));
        hidden[l] = hn;
        x = hn;
    }
    Id y1 = ad::relu(tape, ad::cadd_bias(tape, ad::cmatvec(tape, var(p, v, "egru.dec1.W"), x, E, H, H),
                                         var(p, v, "egru.dec1.b"), E, H));
    Id y = ad::cadd_bias(tape, ad::cmatvec(tape, var(p, v, "egru.dec2.W"), y1, E, H, 1), var(p, v, "egru.dec2.b"), E, 1);
    return ad::scale(tape, y, p.get("egru.out_scale").data[0]);
}

Id tape_meta_dbp(Tape& tape, Id c, const Waveform& w_norm, const TaskInfo& task, const FiberParams& params,
                 const MetaDbpConfig& cfg) {
    const int steps = cfg.dbp.total_steps(params.n_spans);
    const double total = params.link_length_m();
    const double dz = total / steps;
    const RVec lengths = dbp_step_lengths(params, cfg.dbp, total);
    if (cfg.dbp.route != LinearRoute::spectral) throw std::invalid_argument("taped Meta-DBP supports the spectral route only");
    CVec hd = spectral_dispersion(w_norm.size(), w_norm.sample_rate_hz, params.beta2(), -dz);
    auto h = std::make_shared<const CVec>(std::move(hd));
    const double pw = task.power_w();
    Id u = tape.leaf(ad::from_complex(w_norm.samples), false);
    for (int j = 0; j < steps; ++j) {
        u = ad::cspectral(tape, u, h);
        Id f = ad::circular_conv(tape, ad::cabs2(tape, u), c);
        u = ad::crotate(tape, u, ad::scale(tape, f, params.gamma_per_w_m() * lengths[j] * pw));
    }
    return u;
}

CVec pipeline_front(const TrainingTask& t, const MetaParams& p, const PipelineSpec& spec) {
    Waveform u = spec.use_meta_dbp ? meta_dbp(t.rx_norm, t.task, spec.fiber, spec.dbp, p) : t.rx_norm;
    return matched_filter(u, t.task.symbol_rate_baud).samples;
}

SegmentEval segment_loss_plain(const TrainingTask& t, const MetaParams& p, const PipelineSpec& spec, std::size_t k0,
                               std::size_t k1, const SegmentCarry& carry_in) {
    const AdfRunConfig& cfg = spec.adf;
    check_segment(t, cfg, k0, k1);
    const CVec front = pipeline_front(t, p, spec);
    const CVec padded = pad_for_adf(front, cfg.taps, cfg.stride);
    const std::size_t n_out = total_outputs(t, cfg), trim = trim_of(cfg), d = cfg.taps;

    SegmentEval r;
    r.carry_out = carry_in;
    AdfWeights& theta = r.carry_out.theta;
    EgruState& state = r.carry_out.state;
    CVec yl, tl, gbar(d + 1);
    for (std::size_t k = k0; k < k1; ++k) {
        const cplx* u = padded.data() + k * cfg.stride;
        const cplx y = filter_apply(u, d, theta);
        r.y.push_back(y);
        if (k >= trim && k + trim < n_out) {
            yl.push_back(y);
            tl.push_back(t.symbols[k]);
        }
        const AdfGradient g = adf_gradient(u, d, theta, t.symbols[k]);
        for (std::size_t i = 0; i < d; ++i) gbar[i] = std::conj(g.gw[i]);
        gbar[d] = std::conj(g.gv);
        const CVec step = egru_step(gbar, theta.flat(), state, p);
        for (std::size_t i = 0; i < d; ++i) theta.w[i] += step[i];
        theta.v += step[d];
    }
    r.has_loss = !yl.empty();
    if (r.has_loss) r.loss = log_mse(yl, tl);
    return r;
}

SegmentEval segment_loss_and_grad(const TrainingTask& t, const MetaParams& p, const PipelineSpec& spec,
                                  std::size_t k0, std::size_t k1, const SegmentCarry& carry_in) {
    const AdfRunConfig& cfg = spec.adf;
    check_segment(t, cfg, k0, k1);
    const std::size_t n_out = total_outputs(t, cfg), trim = trim_of(cfg), d = cfg.taps;
    const int n = static_cast<int>(t.rx_norm.size());

    Tape tape;
    ParamVars vars = register_params(tape, p, spec.use_meta_dbp, true);
    Id u;
    if (spec.use_meta_dbp) {
        Id c = tape_hypernet(tape, p, vars, task_features(t.task, t.rx_norm.sample_rate_hz, p.scaling()));
        u = tape_meta_dbp(tape, c, t.rx_norm, t.task, spec.fiber, spec.dbp);
    } else {
        u = tape.leaf(ad::from_complex(t.rx_norm.samples), false);
    }
    Id m = ad::cspectral(tape, u, matched_response(t.rx_norm.size(), t.rx_norm.sample_rate_hz, t.task.symbol_rate_baud));

    Id w = tape.leaf(ad::from_complex(carry_in.theta.w), false);
    Id v = tape.leaf(RVec{carry_in.theta.v.real(), carry_in.theta.v.imag()}, false);
    std::vector<Id> hidden;
    const int E = carry_in.state.elements, H = carry_in.state.hidden, L = carry_in.state.layers;
    if (E != static_cast<int>(d + 1)) throw std::invalid_argument("carry state does not match taps");
    for (int l = 0; l < L; ++l) {
        CVec hl(static_cast<std::size_t>(E) * H);
        for (int e = 0; e < E; ++e)
            for (int k = 0; k < H; ++k) hl[static_cast<std::size_t>(e) * H + k] = carry_in.state.at(e, l, k);
        hidden.push_back(tape.leaf(ad::from_complex(hl), false));
    }
    auto w_idx = std::make_shared<std::vector<int>>(d);
    for (std::size_t i = 0; i < d; ++i) (*w_idx)[i] = static_cast<int>(i);
    auto v_idx = std::make_shared<std::vector<int>>(1, static_cast<int>(d));

    SegmentEval r;
    std::vector<Id> loss_y;
    CVec targets;
    for (std::size_t k = k0; k < k1; ++k) {
        auto idx = std::make_shared<std::vector<int>>(d);
        const int base = static_cast<int>(k * cfg.stride) - cfg.taps / 2;
        for (std::size_t i = 0; i < d; ++i) (*idx)[i] = (((base + static_cast<int>(i)) % n) + n) % n;
        Id uk = ad::cgather(tape, m, idx);
        Id wu = ad::cdot(tape, w, uk);
        Id y = ad::cmul(tape, v, wu);
        if (k >= trim && k + trim < n_out) {
            loss_y.push_back(y);
            targets.push_back(t.symbols[k]);
        }
        const cplx ref = t.symbols[k];
        Id e = ad::sub(tape, y, tape.leaf(RVec{ref.real(), ref.imag()}, false));
        Id gw = ad::cmul_bcast(tape, ad::cmul(tape, e, ad::cconj(tape, v)), ad::cconj(tape, uk));
        Id gv = ad::cmul(tape, e, ad::cconj(tape, wu));
        Id theta = ad::concat(tape, {w, v});
        Id step = tape_egru_step(tape, p, vars, ad::concat(tape, {gw, gv}), theta, hidden);
        Id next = ad::add(tape, theta, step);
        w = ad::cgather(tape, next, w_idx);
        v = ad::cgather(tape, next, v_idx);
        const RVec& yv = tape.value(y);
        r.y.emplace_back(yv[0], yv[1]);
    }
    r.has_loss = !loss_y.empty();
    if (r.has_loss) {
        Id loss = ad::log_mse(tape, ad::concat(tape, loss_y), targets);
        r.loss = tape.value(loss)[0];
        tape.backward(loss);
        r.grad = collect_grads(tape, vars, p);
    } else {
        r.grad.assign(p.trainable_size(), 0.0);
    }

    r.carry_out.theta.w = ad::to_complex(tape.value(w));
    r.carry_out.theta.v = cplx(tape.value(v)[0], tape.value(v)[1]);
    r.carry_out.state = carry_in.state;
    for (int l = 0; l < L; ++l) {
        const CVec hl = ad::to_complex(tape.value(hidden[l]));
        for (int e = 0; e < E; ++e)
            for (int k = 0; k < H; ++k) r.carry_out.state.at(e, l, k) = hl[static_cast<std::size_t>(e) * H + k];
    }
    return r;
}

TrainResult tbptt_train(const std::vector<TrainingTask>& dataset, const TrainConfig& cfg, const MetaParams& init,
                        const PipelineSpec& spec) {
    cfg.validate();
    if (dataset.empty()) throw std::invalid_argument("training dataset is empty");
    TrainResult res;
    res.params = init;
    OuterAdamState adam;
    RVec flat = res.params.flatten_trainable();

    // mask so frozen blocks never move even through Adam state
    RVec mask(flat.size(), 1.0);
    {
        std::size_t off = 0;
        for (auto& t : res.params.tensors) {
            if (!t.trainable) continue;
            const bool hyper = t.name.rfind("hyper.", 0) == 0;
            const bool on = hyper ? (cfg.train_hypernet && spec.use_meta_dbp) : cfg.train_egru;
            for (std::size_t i = 0; i < t.data.size(); ++i) mask[off + i] = on ? 1.0 : 0.0;
            off += t.data.size();
        }
    }

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double sum = 0.0;
        int count = 0;
        for (const auto& task : dataset) {
            const std::size_t n_out = task.rx_norm.size() / static_cast<std::size_t>(spec.adf.stride);
            SegmentCarry carry = SegmentCarry::initial(res.params, spec.adf.taps);
            int seg = 0;
            for (std::size_t k0 = 0; k0 < n_out; k0 += cfg.truncation_len, ++seg) {
                const std::size_t k1 = std::min<std::size_t>(n_out, k0 + cfg.truncation_len);
                SegmentEval ev = segment_loss_and_grad(task, res.params, spec, k0, k1, carry);
                if (!ev.has_loss) {
                    // segment inside the trimmed edge: carry the state, no update
                    carry = std::move(ev.carry_out);
                    continue;
                }
                if (!std::isfinite(ev.loss)) throw NumericalError("training loss is not finite");
                for (std::size_t i = 0; i < flat.size(); ++i) {
                    if (!std::isfinite(ev.grad[i])) throw NumericalError("training gradient is not finite");
                    ev.grad[i] *= mask[i];
                }
                adam_update(flat, ev.grad, adam, cfg.outer_lr);
                res.params.unflatten_trainable(flat);
                carry = std::move(ev.carry_out);
                res.history.push_back({epoch + 1, seg, task.id, ev.loss});
                sum += ev.loss;
                ++count;
            }
        }
        res.epoch_means.push_back(count ? sum / count : 0.0);
    }
    return res;
}

}  // namespace metadsp
