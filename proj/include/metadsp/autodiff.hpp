#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "metadsp/types.hpp"

// Reverse-mode tape over real vectors. Complex vectors are stored as
// interleaved (re, im) pairs; the adjoint of a complex entry z is
// dL/dRe z + i dL/dIm z, so for y = a*x the adjoint of x is conj(a)*adj(y).
namespace metadsp::ad {

using Id = int;

class Tape {
public:
    using Backward = std::function<void(Tape&, Id self)>;

    Id leaf(RVec value, bool requires_grad);
    Id push(RVec value, bool requires_grad, Backward back);

    const RVec& value(Id id) const { return nodes_[id].value; }
    RVec& grad(Id id) { return nodes_[id].grad; }
    const RVec& grad(Id id) const { return nodes_[id].grad; }
    bool requires_grad(Id id) const { return nodes_[id].requires_grad; }
    std::size_t size() const { return nodes_.size(); }

    // Seeds d(root)/d(root) = 1 (root must be a scalar) and runs every
    // recorded backward rule in reverse order. Adjoints accumulate.
    void backward(Id root);
    void zero_grad();

private:
    struct Node {
        RVec value;
        RVec grad;
        bool requires_grad = false;
        Backward back;
    };
    std::vector<Node> nodes_;
};

inline const cplx* as_complex(const RVec& v) { return reinterpret_cast<const cplx*>(v.data()); }
inline cplx* as_complex(RVec& v) { return reinterpret_cast<cplx*>(v.data()); }
RVec from_complex(const CVec& v);
CVec to_complex(const RVec& v);

// Real ops.
Id add(Tape& t, Id a, Id b);
Id sub(Tape& t, Id a, Id b);
Id scale(Tape& t, Id x, double s);
Id relu(Tape& t, Id x);
Id sigmoid(Tape& t, Id x);
Id tanh(Tape& t, Id x);
// y = W x + b, W row-major out x in.
Id affine(Tape& t, Id w, Id x, Id b, int out, int in);
Id concat(Tape& t, const std::vector<Id>& parts);
// Centred circular convolution of a real sequence p with odd-length kernel c.
Id circular_conv(Tape& t, Id p, Id c);

// Complex ops (operands interleaved).
Id cmul(Tape& t, Id a, Id b);
Id cconj(Tape& t, Id a);
Id cmul_bcast(Tape& t, Id s, Id x);   // s is a single complex value
Id cdot(Tape& t, Id a, Id b);         // sum a_i b_i, no conjugation
Id cabs2(Tape& t, Id x);              // real output |x_i|^2
Id crotate(Tape& t, Id x, Id phase);  // x_i * exp(i phase_i), phase real
Id crsub_const(Tape& t, cplx c, Id x);  // c - x_i
Id cgather(Tape& t, Id x, std::shared_ptr<const std::vector<int>> idx);
// y = ifft(H * fft(x)) with a fixed response H.
Id cspectral(Tape& t, Id x, std::shared_ptr<const CVec> h);
// Per-element complex matrix-vector product: x is E blocks of `in`
// values, W is out x in; output is E blocks of `out` values.
Id cmatvec(Tape& t, Id w, Id x, int e, int in, int out);
Id cadd_bias(Tape& t, Id x, Id b, int e, int out);

// ln(mean |yhat - y|^2 + eps) over complex vectors.
Id log_mse(Tape& t, Id yhat, const CVec& target, double eps = 1e-12);

}  // namespace metadsp::ad
