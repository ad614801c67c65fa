#include "metadsp/autodiff.hpp"

#include <cmath>

#include "metadsp/fft.hpp"

namespace metadsp::ad {
namespace {

void check_same(const Tape& t, Id a, Id b, const char* what) {
    if (t.value(a).size() != t.value(b).size()) throw std::invalid_argument(std::string(what) + ": size mismatch");
}

bool any_grad(const Tape& t, std::initializer_list<Id> ids) {
    for (Id i : ids)
        if (t.requires_grad(i)) return true;
    return false;
}

}  // namespace

RVec from_complex(const CVec& v) {
    RVec r(2 * v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        r[2 * i] = v[i].real();
        r[2 * i + 1] = v[i].imag();
    }
    return r;
}

CVec to_complex(const RVec& v) {
    CVec c(v.size() / 2);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = cplx(v[2 * i], v[2 * i + 1]);
    return c;
}

Id Tape::leaf(RVec value, bool requires_grad) { return push(std::move(value), requires_grad, nullptr); }

Id Tape::push(RVec value, bool requires_grad, Backward back) {
    Node n;
    n.grad.assign(value.size(), 0.0);
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if (requires_grad) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
}

void Tape::zero_grad() {
    for (auto& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
}

void Tape::backward(Id root) {
    if (nodes_[root].value.size() != 1) throw std::invalid_argument("backward needs a scalar root");
    zero_grad();
    nodes_[root].grad[0] = 1.0;
    for (Id i = root; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.requires_grad && n.back) n.back(*this, i);
    }
}

Id add(Tape& t, Id a, Id b) {
    check_same(t, a, b, "add");
    RVec y = t.value(a);
    const RVec& vb = t.value(b);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += vb[i];
    return t.push(std::move(y), any_grad(t, {a, b}), [a, b](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        if (t.requires_grad(a)) {
            RVec& ga = t.grad(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.requires_grad(b)) {
            RVec& gb = t.grad(b);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        }
    });
}

Id sub(Tape& t, Id a, Id b) {
    check_same(t, a, b, "sub");
    RVec y = t.value(a);
    const RVec& vb = t.value(b);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= vb[i];
    return t.push(std::move(y), any_grad(t, {a, b}), [a, b](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        if (t.requires_grad(a)) {
            RVec& ga = t.grad(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.requires_grad(b)) {
            RVec& gb = t.grad(b);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    });
}

Id scale(Tape& t, Id x, double sc) {
    RVec y = t.value(x);
    for (auto& v : y) v *= sc;
    return t.push(std::move(y), t.requires_grad(x), [x, sc](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        RVec& gx = t.grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += sc * g[i];
    });
}

Id relu(Tape& t, Id x) {
    RVec y = t.value(x);
    for (auto& v : y) v = v > 0.0 ? v : 0.0;
    return t.push(std::move(y), t.requires_grad(x), [x](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        const RVec& vx = t.value(x);
        RVec& gx = t.grad(x);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (vx[i] > 0.0) gx[i] += g[i];
    });
}

Id sigmoid(Tape& t, Id x) {
    RVec y = t.value(x);
    for (auto& v : y) v = 1.0 / (1.0 + std::exp(-v));
    return t.push(std::move(y), t.requires_grad(x), [x](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        const RVec& vy = t.value(s);
        RVec& gx = t.grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * vy[i] * (1.0 - vy[i]);
    });
}

Id tanh(Tape& t, Id x) {
    RVec y = t.value(x);
    for (auto& v : y) v = std::tanh(v);
    return t.push(std::move(y), t.requires_grad(x), [x](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        const RVec& vy = t.value(s);
        RVec& gx = t.grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - vy[i] * vy[i]);
    });
}

Id affine(Tape& t, Id w, Id x, Id b, int out, int in) {
    const RVec& vw = t.value(w);
    const RVec& vx = t.value(x);
    const RVec& vb = t.value(b);
    if (vw.size() != static_cast<std::size_t>(out) * in || vx.size() != static_cast<std::size_t>(in) ||
        vb.size() != static_cast<std::size_t>(out))
        throw std::invalid_argument("affine: shape mismatch");
    RVec y(vb);
    for (int o = 0; o < out; ++o) {
        double acc = 0.0;
        const double* row = vw.data() + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) acc += row[i] * vx[i];
        y[o] += acc;
    }
    return t.push(std::move(y), any_grad(t, {w, x, b}), [w, x, b, out, in](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        const RVec& vw = t.value(w);
        const RVec& vx = t.value(x);
        if (t.requires_grad(w)) {
            RVec& gw = t.grad(w);
            for (int o = 0; o < out; ++o) {
                if (g[o] == 0.0) continue;
                double* row = gw.data() + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) row[i] += g[o] * vx[i];
            }
        }
        if (t.requires_grad(x)) {
            RVec& gx = t.grad(x);
            for (int o = 0; o < out; ++o) {
                const double* row = vw.data() + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) gx[i] += row[i] * g[o];
            }
        }
        if (t.requires_grad(b)) {
            RVec& gb = t.grad(b);
            for (int o = 0; o < out; ++o) gb[o] += g[o];
        }
    });
}

Id concat(Tape& t, const std::vector<Id>& parts) {
    RVec y;
    bool req = false;
    for (Id p : parts) {
        y.insert(y.end(), t.value(p).begin(), t.value(p).end());
        req = req || t.requires_grad(p);
    }
    return t.push(std::move(y), req, [parts](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        std::size_t off = 0;
        for (Id p : parts) {
            const std::size_t n = t.value(p).size();
            if (t.requires_grad(p)) {
                RVec& gp = t.grad(p);
                for (std::size_t i = 0; i < n; ++i) gp[i] += g[off + i];
            }
            off += n;
        }
    });
}

Id circular_conv(Tape& t, Id p, Id c) {
    const RVec& vp = t.value(p);
    const RVec& vc = t.value(c);
    if (vc.empty() || vc.size() % 2 == 0) throw std::invalid_argument("circular_conv: kernel length must be odd");
    const long n = static_cast<long>(vp.size());
    const long m = static_cast<long>(vc.size());
    const long h = m / 2;
    RVec y(vp.size(), 0.0);
    for (long j = 0; j < m; ++j) {
        const double cj = vc[j];
        if (cj == 0.0) continue;
        const long lag = (((j - h) % n) + n) % n;
        for (long i = 0; i < lag; ++i) y[i] += cj * vp[i - lag + n];
        for (long i = lag; i < n; ++i) y[i] += cj * vp[i - lag];
    }
    return t.push(std::move(y), any_grad(t, {p, c}), [p, c, n, m, h](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        const RVec& vp = t.value(p);
        const RVec& vc = t.value(c);
        const bool gp_on = t.requires_grad(p);
        const bool gc_on = t.requires_grad(c);
        for (long j = 0; j < m; ++j) {
            const long lag = (((j - h) % n) + n) % n;
            if (gp_on && vc[j] != 0.0) {
                RVec& gp = t.grad(p);
                const double cj = vc[j];
                for (long i = 0; i < lag; ++i) gp[i - lag + n] += cj * g[i];
                for (long i = lag; i < n; ++i) gp[i - lag] += cj * g[i];
            }
            if (gc_on) {
                double acc = 0.0;
                for (long i = 0; i < lag; ++i) acc += g[i] * vp[i - lag + n];
                for (long i = lag; i < n; ++i) acc += g[i] * vp[i - lag];
                t.grad(c)[j] += acc;
            }
        }
    });
}

Id cmul(Tape& t, Id a, Id b) {
    check_same(t, a, b, "cmul");
    const std::size_t n = t.value(a).size() / 2;
    RVec y(2 * n);
    const cplx* va = as_complex(t.value(a));
    const cplx* vb = as_complex(t.value(b));
    cplx* vy = as_complex(y);
    for (std::size_t i = 0; i < n; ++i) vy[i] = va[i] * vb[i];
    return t.push(std::move(y), any_grad(t, {a, b}), [a, b, n](Tape& t, Id s) {
        const cplx* g = as_complex(t.grad(s));
        const cplx* va = as_complex(t.value(a));
        const cplx* vb = as_complex(t.value(b));
        if (t.requires_grad(a)) {
            cplx* ga = as_complex(t.grad(a));
            for (std::size_t i = 0; i < n; ++i) ga[i] += std::conj(vb[i]) * g[i];
        }
        if (t.requires_grad(b)) {
            cplx* gb = as_complex(t.grad(b));
            for (std::size_t i = 0; i < n; ++i) gb[i] += std::conj(va[i]) * g[i];
        }
    });
}

Id cconj(Tape& t, Id a) {
    RVec y = t.value(a);
    for (std::size_t i = 1; i < y.size(); i += 2) y[i] = -y[i];
    return t.push(std::move(y), t.requires_grad(a), [a](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        RVec& ga = t.grad(a);
        for (std::size_t i = 0; i < g.size(); i += 2) {
            ga[i] += g[i];
            ga[i + 1] -= g[i + 1];
        }
    });
}

Id cmul_bcast(Tape& t, Id sc, Id x) {
    if (t.value(sc).size() != 2) throw std::invalid_argument("cmul_bcast: scalar expected");
    const std::size_t n = t.value(x).size() / 2;
    const cplx a = as_complex(t.value(sc))[0];
    RVec y(2 * n);
    const cplx* vx = as_complex(t.value(x));
    cplx* vy = as_complex(y);
    for (std::size_t i = 0; i < n; ++i) vy[i] = a * vx[i];
    return t.push(std::move(y), any_grad(t, {sc, x}), [sc, x, n](Tape& t, Id s) {
        const cplx* g = as_complex(t.grad(s));
        const cplx* vx = as_complex(t.value(x));
        const cplx a = as_complex(t.value(sc))[0];
        if (t.requires_grad(sc)) {
            cplx acc(0.0, 0.0);
            for (std::size_t i = 0; i < n; ++i) acc += std::conj(vx[i]) * g[i];
            as_complex(t.grad(sc))[0] += acc;
        }
        if (t.requires_grad(x)) {
            cplx* gx = as_complex(t.grad(x));
            for (std::size_t i = 0; i < n; ++i) gx[i] += std::conj(a) * g[i];
        }
    });
}

Id cdot(Tape& t, Id a, Id b) {
    check_same(t, a, b, "cdot");
    const std::size_t n = t.value(a).size() / 2;
    const cplx* va = as_complex(t.value(a));
    const cplx* vb = as_complex(t.value(b));
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) acc += va[i] * vb[i];
    return t.push(RVec{acc.real(), acc.imag()}, any_grad(t, {a, b}), [a, b, n](Tape& t, Id s) {
        const cplx g = as_complex(t.grad(s))[0];
        const cplx* va = as_complex(t.value(a));
        const cplx* vb = as_complex(t.value(b));
        if (t.requires_grad(a)) {
            cplx* ga = as_complex(t.grad(a));
            for (std::size_t i = 0; i < n; ++i) ga[i] += std::conj(vb[i]) * g;
        }
        if (t.requires_grad(b)) {
            cplx* gb = as_complex(t.grad(b));
            for (std::size_t i = 0; i < n; ++i) gb[i] += std::conj(va[i]) * g;
        }
    });
}

Id cabs2(Tape& t, Id x) {
    const std::size_t n = t.value(x).size() / 2;
    const RVec& vx = t.value(x);
    RVec y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = vx[2 * i] * vx[2 * i] + vx[2 * i + 1] * vx[2 * i + 1];
    return t.push(std::move(y), t.requires_grad(x), [x, n](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        const RVec& vx = t.value(x);
        RVec& gx = t.grad(x);
        for (std::size_t i = 0; i < n; ++i) {
            gx[2 * i] += 2.0 * vx[2 * i] * g[i];
            gx[2 * i + 1] += 2.0 * vx[2 * i + 1] * g[i];
        }
    });
}

Id crotate(Tape& t, Id x, Id phase) {
    const std::size_t n = t.value(x).size() / 2;
    if (t.value(phase).size() != n) throw std::invalid_argument("crotate: size mismatch");
    RVec y(2 * n);
    const cplx* vx = as_complex(t.value(x));
    const RVec& ph = t.value(phase);
    cplx* vy = as_complex(y);
    for (std::size_t i = 0; i < n; ++i) vy[i] = vx[i] * std::polar(1.0, ph[i]);
    return t.push(std::move(y), any_grad(t, {x, phase}), [x, phase, n](Tape& t, Id s) {
        const cplx* g = as_complex(t.grad(s));
        const cplx* vy = as_complex(t.value(s));
        const RVec& ph = t.value(phase);
        if (t.requires_grad(x)) {
            cplx* gx = as_complex(t.grad(x));
            for (std::size_t i = 0; i < n; ++i) gx[i] += std::polar(1.0, -ph[i]) * g[i];
        }
        if (t.requires_grad(phase)) {
            RVec& gp = t.grad(phase);
            const cplx j(0.0, 1.0);
            for (std::size_t i = 0; i < n; ++i) gp[i] += (std::conj(g[i]) * j * vy[i]).real();
        }
    });
}

Id crsub_const(Tape& t, cplx c, Id x) {
    RVec y = t.value(x);
    for (std::size_t i = 0; i < y.size(); i += 2) {
        y[i] = c.real() - y[i];
        y[i + 1] = c.imag() - y[i + 1];
    }
    return t.push(std::move(y), t.requires_grad(x), [x](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        RVec& gx = t.grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] -= g[i];
    });
}

Id cgather(Tape& t, Id x, std::shared_ptr<const std::vector<int>> idx) {
    const std::size_t n = t.value(x).size() / 2;
    RVec y(2 * idx->size());
    const cplx* vx = as_complex(t.value(x));
    cplx* vy = as_complex(y);
    for (std::size_t k = 0; k < idx->size(); ++k) {
        const int i = (*idx)[k];
        if (i < 0 || static_cast<std::size_t>(i) >= n) throw std::out_of_range("cgather index");
        vy[k] = vx[i];
    }
    return t.push(std::move(y), t.requires_grad(x), [x, idx](Tape& t, Id s) {
        const cplx* g = as_complex(t.grad(s));
        cplx* gx = as_complex(t.grad(x));
        for (std::size_t k = 0; k < idx->size(); ++k) gx[(*idx)[k]] += g[k];
    });
}

Id cspectral(Tape& t, Id x, std::shared_ptr<const CVec> h) {
    CVec u = to_complex(t.value(x));
    if (u.size() != h->size()) throw std::invalid_argument("cspectral: size mismatch");
    fft::forward(u);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] *= (*h)[k];
    fft::inverse(u);
    return t.push(from_complex(u), t.requires_grad(x), [x, h](Tape& t, Id s) {
        CVec g = to_complex(t.grad(s));
        fft::forward(g);
        for (std::size_t k = 0; k < g.size(); ++k) g[k] *= std::conj((*h)[k]);
        fft::inverse(g);
        cplx* gx = as_complex(t.grad(x));
        for (std::size_t k = 0; k < g.size(); ++k) gx[k] += g[k];
    });
}

Id cmatvec(Tape& t, Id w, Id x, int e, int in, int out) {
    if (t.value(w).size() != 2u * in * out || t.value(x).size() != 2u * e * in)
        throw std::invalid_argument("cmatvec: shape mismatch");
    RVec y(2u * e * out);
    const cplx* vw = as_complex(t.value(w));
    const cplx* vx = as_complex(t.value(x));
    cplx* vy = as_complex(y);
    for (int k = 0; k < e; ++k)
        for (int o = 0; o < out; ++o) {
            cplx acc(0.0, 0.0);
            for (int i = 0; i < in; ++i) acc += vw[o * in + i] * vx[k * in + i];
            vy[k * out + o] = acc;
        }
    return t.push(std::move(y), any_grad(t, {w, x}), [w, x, e, in, out](Tape& t, Id s) {
        const cplx* g = as_complex(t.grad(s));
        const cplx* vw = as_complex(t.value(w));
        const cplx* vx = as_complex(t.value(x));
        if (t.requires_grad(x)) {
            cplx* gx = as_complex(t.grad(x));
            for (int k = 0; k < e; ++k)
                for (int o = 0; o < out; ++o)
                    for (int i = 0; i < in; ++i) gx[k * in + i] += std::conj(vw[o * in + i]) * g[k * out + o];
        }
        if (t.requires_grad(w)) {
            cplx* gw = as_complex(t.grad(w));
            for (int k = 0; k < e; ++k)
                for (int o = 0; o < out; ++o)
                    for (int i = 0; i < in; ++i) gw[o * in + i] += std::conj(vx[k * in + i]) * g[k * out + o];
        }
    });
}

Id cadd_bias(Tape& t, Id x, Id b, int e, int out) {
    if (t.value(b).size() != 2u * out || t.value(x).size() != 2u * e * out)
        throw std::invalid_argument("cadd_bias: shape mismatch");
    RVec y = t.value(x);
    const RVec& vb = t.value(b);
    for (int k = 0; k < e; ++k)
        for (int o = 0; o < 2 * out; ++o) y[2 * k * out + o] += vb[o];
    return t.push(std::move(y), any_grad(t, {x, b}), [x, b, e, out](Tape& t, Id s) {
        const RVec& g = t.grad(s);
        if (t.requires_grad(x)) {
            RVec& gx = t.grad(x);
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        }
        if (t.requires_grad(b)) {
            RVec& gb = t.grad(b);
            for (int k = 0; k < e; ++k)
                for (int o = 0; o < 2 * out; ++o) gb[o] += g[2 * k * out + o];
        }
    });
}

Id log_mse(Tape& t, Id yhat, const CVec& target, double eps) {
    const std::size_t n = t.value(yhat).size() / 2;
    if (n == 0 || n != target.size()) throw std::invalid_argument("log_mse: size mismatch or empty");
    const cplx* vy = as_complex(t.value(yhat));
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += std::norm(vy[i] - target[i]);
    m /= static_cast<double>(n);
    auto tgt = std::make_shared<const CVec>(target);
    return t.push(RVec{std::log(m + eps)}, t.requires_grad(yhat), [yhat, tgt, n, m, eps](Tape& t, Id s) {
        const double g = t.grad(s)[0];
        const cplx* vy = as_complex(t.value(yhat));
        cplx* gy = as_complex(t.grad(yhat));
        const double k = g / (m + eps) * 2.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) gy[i] += k * (vy[i] - (*tgt)[i]);
    });
}

}  // namespace metadsp::ad
