#include "metadsp/meta.hpp"

#include <cmath>
#include <fstream>

#include "metadsp/binio.hpp"
#include "metadsp/rng.hpp"

namespace metadsp {
namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

Tensor make_tensor(std::string name, std::vector<std::int64_t> shape, bool trainable = true) {
    Tensor t;
    t.name = std::move(name);
    t.shape = std::move(shape);
    t.data.assign(t.numel(), 0.0);
    t.trainable = trainable;
    return t;
}

const cplx* cdata(const Tensor& t) { return reinterpret_cast<const cplx*>(t.data.data()); }
cplx* cdata(Tensor& t) { return reinterpret_cast<cplx*>(t.data.data()); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
cplx csigmoid(cplx z) { return {sigmoid(z.real()), sigmoid(z.imag())}; }
cplx ctanh(cplx z) { return {std::tanh(z.real()), std::tanh(z.imag())}; }

std::string layer_name(int l, const char* field) { return "egru.l" + std::to_string(l) + "." + field; }

// y[o] = sum_i W[o,i] x[i] + b[o] over complex values.
void caffine(const Tensor& w, const Tensor& b, const cplx* x, int in, int out, cplx* y) {
    const cplx* vw = cdata(w);
    const cplx* vb = cdata(b);
    for (int o = 0; o < out; ++o) {
        cplx acc = vb[o];
        for (int i = 0; i < in; ++i) acc += vw[o * in + i] * x[i];
        y[o] = acc;
    }
}

}  // namespace

std::size_t Tensor::numel() const {
    std::size_t n = 1;
    for (auto d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

Tensor& MetaParams::get(std::string_view name) {
    for (auto& t : tensors)
        if (t.name == name) return t;
    throw std::out_of_range("no tensor named " + std::string(name));
}

const Tensor& MetaParams::get(std::string_view name) const {
    for (auto& t : tensors)
        if (t.name == name) return t;
    throw std::out_of_range("no tensor named " + std::string(name));
}

bool MetaParams::has(std::string_view name) const {
    for (auto& t : tensors)
        if (t.name == name) return true;
    return false;
}

std::size_t MetaParams::trainable_size() const {
    std::size_t n = 0;
    for (auto& t : tensors)
        if (t.trainable) n += t.data.size();
    return n;
}

RVec MetaParams::flatten_trainable() const {
    RVec f;
    f.reserve(trainable_size());
    for (auto& t : tensors)
        if (t.trainable) f.insert(f.end(), t.data.begin(), t.data.end());
    return f;
}

void MetaParams::unflatten_trainable(const RVec& flat) {
    if (flat.size() != trainable_size()) throw std::invalid_argument("flat parameter size mismatch");
    std::size_t off = 0;
    for (auto& t : tensors) {
        if (!t.trainable) continue;
        std::copy(flat.begin() + off, flat.begin() + off + t.data.size(), t.data.begin());
        off += t.data.size();
    }
}

FeatureScaling MetaParams::scaling() const {
    FeatureScaling s;
    const Tensor& sh = get("hyper.feature_shift");
    const Tensor& sc = get("hyper.feature_scale");
    for (int i = 0; i < 3; ++i) {
        s.shift[i] = sh.data[i];
        s.scale[i] = sc.data[i];
    }
    return s;
}

RVec gaussian_kernel(int taps, double sigma) {
    if (taps < 1 || taps % 2 == 0) throw std::invalid_argument("kernel length must be odd");
    if (sigma <= 0.0) return delta_kernel(taps);
    RVec c(taps);
    const int h = taps / 2;
    double s = 0.0;
    for (int j = 0; j < taps; ++j) {
        const double x = (j - h) / sigma;
        c[j] = std::exp(-0.5 * x * x);
        s += c[j];
    }
    for (auto& v : c) v /= s;
    return c;
}

RVec delta_kernel(int taps) {
    if (taps < 1 || taps % 2 == 0) throw std::invalid_argument("kernel length must be odd");
    RVec c(taps, 0.0);
    c[taps / 2] = 1.0;
    return c;
}

MetaParams init_meta_params(const MetaArchitecture& a, const MetaInit& init) {
    if (a.input_dim != 2) throw std::invalid_argument("EGRU input dimension must be 2 (g, theta)");
    if (a.kernel_taps < 1 || a.kernel_taps % 2 == 0) throw std::invalid_argument("kernel length must be odd");
    if (a.hidden < 1 || a.layers < 1 || a.hyper_h1 < 1 || a.hyper_h2 < 1)
        throw std::invalid_argument("architecture sizes must be positive");
    MetaParams p;
    p.arch = a;
    const int h1 = a.hyper_h1, h2 = a.hyper_h2, nf = a.kernel_taps, H = a.hidden;
    p.tensors.push_back(make_tensor("hyper.W1", {h1, 3}));
    p.tensors.push_back(make_tensor("hyper.b1", {h1}));
    p.tensors.push_back(make_tensor("hyper.W2", {h2, h1}));
    p.tensors.push_back(make_tensor("hyper.b2", {h2}));
    p.tensors.push_back(make_tensor("hyper.W3", {nf, h2}));
    p.tensors.push_back(make_tensor("hyper.b3", {nf}));
    p.tensors.push_back(make_tensor("hyper.feature_shift", {3}, false));
    p.tensors.push_back(make_tensor("hyper.feature_scale", {3}, false));

    p.tensors.push_back(make_tensor("egru.enc.W", {H, a.input_dim, 2}));
    p.tensors.push_back(make_tensor("egru.enc.b", {H, 2}));
    for (int l = 0; l < a.layers; ++l) {
        for (const char* f : {"W_ir", "W_iz", "W_in"}) p.tensors.push_back(make_tensor(layer_name(l, f), {H, H, 2}));
        for (const char* f : {"W_hr", "W_hz", "W_hn"}) p.tensors.push_back(make_tensor(layer_name(l, f), {H, H, 2}));
        for (const char* f : {"b_ir", "b_iz", "b_in", "b_hr", "b_hz", "b_hn"})
            p.tensors.push_back(make_tensor(layer_name(l, f), {H, 2}));
    }
    p.tensors.push_back(make_tensor("egru.dec1.W", {H, H, 2}));
    p.tensors.push_back(make_tensor("egru.dec1.b", {H, 2}));
    p.tensors.push_back(make_tensor("egru.dec2.W", {1, H, 2}));
    p.tensors.push_back(make_tensor("egru.dec2.b", {1, 2}));
    p.tensors.push_back(make_tensor("egru.in_scale", {1}, false));
    p.tensors.push_back(make_tensor("egru.out_scale", {1}, false));

    // hypernet: He-uniform hidden layers, zero output weights, low-pass output bias
    Rng rng(derive_seed(init.seed, "hypernet-init"));
    auto he = [&](Tensor& t, int fan_in) {
        const double bound = std::sqrt(6.0 / fan_in);
        for (auto& v : t.data) v = (2.0 * rng.uniform() - 1.0) * bound;
    };
    he(p.get("hyper.W1"), 3);
    he(p.get("hyper.W2"), h1);
    p.get("hyper.b3").data = gaussian_kernel(nf, init.kernel_sigma);
    FeatureScaling fs;
    for (int i = 0; i < 3; ++i) {
        p.get("hyper.feature_shift").data[i] = fs.shift[i];
        p.get("hyper.feature_scale").data[i] = fs.scale[i];
    }

    // EGRU starts as an LMS-like map v ~ -eta * gbar: the encoder and first
    // decoder layer are shifted into the linear part of the CReLU, the GRU
    // input path runs in the linear part of tanh, and the update gate is
    // mostly closed so h' ~ n. The fixed input and output scales keep the
    // network internals O(1) while v stays at the size of an LMS step.
    p.get("egru.in_scale").data[0] = init.in_scale;
    p.get("egru.out_scale").data[0] = init.out_scale;
    const cplx one_one(1.0, 1.0);
    const double shift_enc = 4.0, gain0 = 0.1;
    for (int k = 0; k < H; ++k) {
        cdata(p.get("egru.enc.W"))[k * a.input_dim + 0] = 1.0;
        cdata(p.get("egru.enc.b"))[k] = shift_enc * one_one;
    }
    for (int l = 0; l < a.layers; ++l) {
        const double g = l == 0 ? gain0 : 1.0;
        for (int k = 0; k < H; ++k) {
            cdata(p.get(layer_name(l, "W_in")))[k * H + k] = g;
            if (l == 0) cdata(p.get(layer_name(l, "b_in")))[k] = -g * shift_enc * one_one;
            cdata(p.get(layer_name(l, "b_iz")))[k] = -4.0 * one_one;
        }
    }
    cplx out_bias(0.0, 0.0);
    for (int k = 0; k < H; ++k) {
        cdata(p.get("egru.dec1.W"))[k * H + k] = 1.0;
        cdata(p.get("egru.dec1.b"))[k] = one_one;
        const double w = -init.adf_eta / (init.out_scale * init.in_scale * gain0 * H);
        cdata(p.get("egru.dec2.W"))[k] = w;
        out_bias -= w * one_one;
    }
    cdata(p.get("egru.dec2.b"))[0] = out_bias;
    return p;
}

void set_fixed_kernel(MetaParams& p, const RVec& c) {
    Tensor& b3 = p.get("hyper.b3");
    if (c.size() != b3.data.size()) throw std::invalid_argument("kernel length does not match architecture");
    b3.data = c;
    std::fill(p.get("hyper.W3").data.begin(), p.get("hyper.W3").data.end(), 0.0);
}

void zero_decoder(MetaParams& p) {
    for (const char* n : {"egru.dec1.W", "egru.dec1.b", "egru.dec2.W", "egru.dec2.b"}) {
        auto& d = p.get(n).data;
        std::fill(d.begin(), d.end(), 0.0);
    }
}

RVec task_features(const TaskInfo& task, double sample_rate_hz, const FeatureScaling& s) {
    const double raw[3] = {std::log10(task.power_w()), std::log10(sample_rate_hz),
                           static_cast<double>(task.n_channels)};
    RVec z(3);
    for (int i = 0; i < 3; ++i) z[i] = (raw[i] - s.shift[i]) / s.scale[i];
    return z;
}

RVec hypernet_forward(const TaskInfo& task, double sample_rate_hz, const MetaParams& p) {
    task.validate();
    const RVec x = task_features(task, sample_rate_hz, p.scaling());
    auto layer = [](const Tensor& w, const Tensor& b, const RVec& in, bool relu) {
        const std::size_t out = b.data.size(), n = in.size();
        RVec y(b.data);
        for (std::size_t o = 0; o < out; ++o) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += w.data[o * n + i] * in[i];
            y[o] += acc;
            if (relu && y[o] < 0.0) y[o] = 0.0;
        }
        return y;
    };
    RVec h1 = layer(p.get("hyper.W1"), p.get("hyper.b1"), x, true);
    RVec h2 = layer(p.get("hyper.W2"), p.get("hyper.b2"), h1, true);
    return layer(p.get("hyper.W3"), p.get("hyper.b3"), h2, false);
}

cplx complex_relu(cplx z) { return {z.real() > 0.0 ? z.real() : 0.0, z.imag() > 0.0 ? z.imag() : 0.0}; }

EgruState EgruState::zeros(int elements, const MetaArchitecture& arch) {
    EgruState s;
    s.elements = elements;
    s.layers = arch.layers;
    s.hidden = arch.hidden;
    s.h.assign(static_cast<std::size_t>(elements) * arch.layers * arch.hidden, cplx(0.0, 0.0));
    return s;
}

CVec egru_step(const CVec& xi_g, const CVec& xi_theta, EgruState& state, const MetaParams& p) {
    const int H = p.arch.hidden, L = p.arch.layers;
    const int E = static_cast<int>(xi_g.size());
    if (xi_theta.size() != xi_g.size() || state.elements != E || state.layers != L || state.hidden != H)
        throw std::invalid_argument("egru_step: shape mismatch");
    const Tensor& enc_w = p.get("egru.enc.W");
    const Tensor& enc_b = p.get("egru.enc.b");
    std::vector<const Tensor*> lw;
    for (int l = 0; l < L; ++l)
        for (const char* f : {"W_ir", "W_iz", "W_in", "W_hr", "W_hz", "W_hn", "b_ir", "b_iz", "b_in", "b_hr", "b_hz", "b_hn"})
            lw.push_back(&p.get(layer_name(l, f)));
    const Tensor& d1w = p.get("egru.dec1.W");
    const Tensor& d1b = p.get("egru.dec1.b");
    const Tensor& d2w = p.get("egru.dec2.W");
    const Tensor& d2b = p.get("egru.dec2.b");
    const double s_in = p.get("egru.in_scale").data[0], s_out = p.get("egru.out_scale").data[0];

    CVec out(E);
    CVec x(H), gi(H), gh(H), r(H), z(H), n(H), hn(H), tmp(H);
    for (int e = 0; e < E; ++e) {
        const cplx in[2] = {s_in * xi_g[e], xi_theta[e]};
        caffine(enc_w, enc_b, in, 2, H, x.data());
        for (auto& v : x) v = complex_relu(v);
        for (int l = 0; l < L; ++l) {
            const Tensor* const* t = &lw[static_cast<std::size_t>(l) * 12];
            cplx* h = &state.at(e, l, 0);
            // r and z gates
            caffine(*t[0], *t[6], x.data(), H, H, gi.data());
            caffine(*t[3], *t[9], h, H, H, gh.data());
            for (int k = 0; k < H; ++k) r[k] = csigmoid(gi[k] + gh[k]);
            caffine(*t[1], *t[7], x.data(), H, H, gi.data());
            caffine(*t[4], *t[10], h, H, H, gh.data());
            for (int k = 0; k < H; ++k) z[k] = csigmoid(gi[k] + gh[k]);
            // candidate, reset gate applied to the recurrent path
            caffine(*t[2], *t[8], x.data(), H, H, gi.data());
            caffine(*t[5], *t[11], h, H, H, gh.data());
            for (int k = 0; k < H; ++k) n[k] = ctanh(gi[k] + r[k] * gh[k]);
            for (int k = 0; k < H; ++k) hn[k] = (1.0 - z[k]) * n[k] + z[k] * h[k];
            for (int k = 0; k < H; ++k) h[k] = hn[k];
            x = hn;
        }
        caffine(d1w, d1b, x.data(), H, H, tmp.data());
        for (auto& v : tmp) v = complex_relu(v);
        cplx y;
        caffine(d2w, d2b, tmp.data(), H, 1, &y);
        out[e] = s_out * y;
    }
    return out;
}

Waveform meta_dbp_with_kernel(const Waveform& w_norm, const TaskInfo& task, const FiberParams& params,
                              const MetaDbpConfig& cfg, const RVec& c) {
    if (c.empty() || c.size() % 2 == 0) throw std::invalid_argument("Meta-DBP kernel length must be odd");
    const double pw = task.power_w();
    RVec p(w_norm.size());
    return backpropagate(w_norm, params, cfg.dbp, params.link_length_m(), [&](const CVec& u, double gl, RVec& phase) {
        for (std::size_t k = 0; k < u.size(); ++k) p[k] = std::norm(u[k]);
        RVec f = power_filter(p, c);
        for (std::size_t k = 0; k < u.size(); ++k) phase[k] = gl * pw * f[k];
    });
}

Waveform meta_dbp(const Waveform& w_norm, const TaskInfo& task, const FiberParams& params,
                  const MetaDbpConfig& cfg, const MetaParams& p) {
    return meta_dbp_with_kernel(w_norm, task, params, cfg, hypernet_forward(task, w_norm.sample_rate_hz, p));
}

MetaAdfResult meta_adf_run(const CVec& samples, const CVec& pilots, const AdfRunConfig& cfg,
                           const MetaParams& p, const Constellation& c, bool teacher_forcing) {
    cfg.validate();
    const std::size_t d = cfg.taps;
    const std::size_t k_out = adf_output_length(samples.size(), cfg.taps, cfg.stride);
    if (k_out == 0) throw std::invalid_argument("signal shorter than one ADF window");
    const std::size_t need = teacher_forcing ? k_out : std::min<std::size_t>(cfg.pilot_count, k_out);
    if (pilots.size() < need) throw std::invalid_argument("not enough pilot symbols");

    MetaAdfResult r;
    r.y.resize(k_out);
    AdfWeights theta = AdfWeights::center_spike(cfg.taps);
    EgruState state = EgruState::zeros(static_cast<int>(d + 1), p.arch);
    CVec gbar(d + 1);
    for (std::size_t k = 0; k < k_out; ++k) {
        const cplx* u = samples.data() + k * cfg.stride;
        const cplx y = filter_apply(u, d, theta);
        r.y[k] = y;
        if (cfg.record_trajectory) r.trajectory.push_back(theta.flat());
        const bool pilot = teacher_forcing || k < static_cast<std::size_t>(cfg.pilot_count);
        const cplx ref = pilot ? pilots[k] : c.decide(y);
        const AdfGradient g = adf_gradient(u, d, theta, ref);
        for (std::size_t i = 0; i < d; ++i) gbar[i] = std::conj(g.gw[i]);
        gbar[d] = std::conj(g.gv);
        const CVec step = egru_step(gbar, theta.flat(), state, p);
        for (std::size_t i = 0; i < d; ++i) theta.w[i] += step[i];
        theta.v += step[d];
    }
    r.final_weights = theta;
    r.final_state = state;
    return r;
}

MetaAdfResult meta_adf_run(const Waveform& w, const CVec& pilots, const AdfRunConfig& cfg,
                           const MetaParams& p, const Constellation& c) {
    return meta_adf_run(w.samples, pilots, cfg, p, c, false);
}

void save_checkpoint(const std::string& path, const MetaParams& p) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    binio::write_magic(os, "MDSP");
    binio::write_le<std::uint32_t>(os, kCheckpointVersion);
    binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.tensors.size()));
    for (auto& t : p.tensors) {
        binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.name.size()));
        os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.shape.size()));
        for (auto d : t.shape) binio::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(d));
        binio::write_le<std::uint8_t>(os, t.trainable ? 1 : 0);
        for (double v : t.data) binio::write_le<double>(os, v);
    }
    if (!os) throw IoError("failed writing checkpoint: " + path);
}

MetaParams load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    binio::expect_magic(is, "MDSP", "checkpoint");
    if (binio::read_le<std::uint32_t>(is) != kCheckpointVersion) throw IoError("unsupported checkpoint version");
    const std::uint32_t count = binio::read_le<std::uint32_t>(is);
    MetaParams p;
    for (std::uint32_t i = 0; i < count; ++i) {
        Tensor t;
        const std::uint32_t len = binio::read_le<std::uint32_t>(is);
        if (len > 4096) throw IoError("checkpoint tensor name too long");
        t.name.resize(len);
        is.read(t.name.data(), len);
        const std::uint32_t rank = binio::read_le<std::uint32_t>(is);
        if (rank > 8) throw IoError("checkpoint tensor rank too large");
        for (std::uint32_t r = 0; r < rank; ++r)
            t.shape.push_back(static_cast<std::int64_t>(binio::read_le<std::uint64_t>(is)));
        t.trainable = binio::read_le<std::uint8_t>(is) != 0;
        const std::size_t n = t.numel();
        if (n > (std::size_t{1} << 28)) throw IoError("checkpoint tensor too large");
        t.data.resize(n);
        for (auto& v : t.data) v = binio::read_le<double>(is);
        p.tensors.push_back(std::move(t));
    }
    try {
        p.arch.hyper_h1 = static_cast<int>(p.get("hyper.W1").shape[0]);
        p.arch.hyper_h2 = static_cast<int>(p.get("hyper.W2").shape[0]);
        p.arch.kernel_taps = static_cast<int>(p.get("hyper.W3").shape[0]);
        p.arch.hidden = static_cast<int>(p.get("egru.enc.W").shape[0]);
        p.arch.input_dim = static_cast<int>(p.get("egru.enc.W").shape[1]);
        int layers = 0;
        while (p.has(layer_name(layers, "W_ir"))) ++layers;
        p.arch.layers = layers;
    } catch (const std::out_of_range& e) {
        throw IoError(std::string("checkpoint is missing a tensor: ") + e.what());
    }
    return p;
}

}  // namespace metadsp
