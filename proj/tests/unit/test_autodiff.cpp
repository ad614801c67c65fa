#include <doctest.h>

#include <functional>

#include "metadsp/autodiff.hpp"
#include "metadsp/rng.hpp"

using namespace metadsp;
using namespace metadsp::ad;

namespace {

using Builder = std::function<Id(Tape&, const std::vector<Id>&)>;

RVec random_rvec(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    RVec v(n);
    for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
    return v;
}

// Scalar projection sum_i r_i out_i, so every output entry gets a distinct adjoint.
Id project(Tape& t, Id out, std::uint64_t seed) {
    const int n = static_cast<int>(t.value(out).size());
    const Id r = t.leaf(random_rvec(n, seed), false);
    const Id b = t.leaf(RVec{0.0}, false);
    return affine(t, r, out, b, 1, n);
}

double eval(const Builder& f, const std::vector<RVec>& in) {
    Tape t;
    std::vector<Id> ids;
    for (const auto& v : in) ids.push_back(t.leaf(v, false));
    const Id root = project(t, f(t, ids), 99);
    return t.value(root)[0];
}

// Max relative deviation between tape adjoints and central differences.
double fd_error(const Builder& f, const std::vector<RVec>& in, double h = 1e-6) {
    Tape t;
    std::vector<Id> ids;
    for (const auto& v : in) ids.push_back(t.leaf(v, true));
    const Id root = project(t, f(t, ids), 99);
    t.backward(root);
    double worst = 0.0;
    for (std::size_t a = 0; a < in.size(); ++a) {
        for (std::size_t i = 0; i < in[a].size(); ++i) {
            auto p = in, m = in;
            p[a][i] += h;
            m[a][i] -= h;
            const double fd = (eval(f, p) - eval(f, m)) / (2 * h);
            const double an = t.grad(ids[a])[i];
            worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(fd)));
        }
    }
    return worst;
}

}  // namespace

TEST_SUITE("autodiff") {
    TEST_CASE("real ops against finite differences") {
        const RVec a = random_rvec(6, 1), b = random_rvec(6, 2);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return add(t, x[0], x[1]); }, {a, b}) < 1e-8);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return sub(t, x[0], x[1]); }, {a, b}) < 1e-8);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return scale(t, x[0], -2.5); }, {a}) < 1e-8);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return sigmoid(t, x[0]); }, {a}) < 1e-8);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return tanh(t, x[0]); }, {a}) < 1e-8);
        // keep relu inputs away from the kink
        RVec r = a;
        for (auto& x : r) x += (x >= 0 ? 0.1 : -0.1);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return relu(t, x[0]); }, {r}) < 1e-8);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return concat(t, {x[0], x[1], x[0]}); }, {a, b}) <
              1e-8);
    }

    TEST_CASE("affine and circular_conv") {
        const RVec w = random_rvec(12, 3), x = random_rvec(4, 4), b = random_rvec(3, 5);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& v) { return affine(t, v[0], v[1], v[2], 3, 4); },
                       {w, x, b}) < 1e-8);
        const RVec p = random_rvec(16, 6, 0.0, 1.0), c = random_rvec(5, 7);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& v) { return circular_conv(t, v[0], v[1]); }, {p, c}) <
              1e-8);
        // kernel longer than the sequence wraps
        const RVec c2 = random_rvec(21, 8);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& v) { return circular_conv(t, v[0], v[1]); }, {p, c2}) <
              1e-8);
    }

    TEST_CASE("circular_conv values") {
        Tape t;
        const Id p = t.leaf(RVec{1, 2, 3, 4}, false);
        const Id c = t.leaf(RVec{0, 1, 0}, false);
        CHECK(t.value(circular_conv(t, p, c)) == RVec{1, 2, 3, 4});
        const Id c2 = t.leaf(RVec{1, 0, 0}, false);
        // y[n] = sum_j c[j] p[n - (j - 1)]: c[0] picks p[n + 1]
        CHECK(t.value(circular_conv(t, p, c2)) == RVec{2, 3, 4, 1});
    }

    TEST_CASE("complex ops against finite differences") {
        const RVec a = random_rvec(8, 11), b = random_rvec(8, 12), s = random_rvec(2, 13);
        const RVec ph = random_rvec(4, 14);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return cmul(t, x[0], x[1]); }, {a, b}) < 1e-8);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return cconj(t, x[0]); }, {a}) < 1e-8);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return cmul_bcast(t, x[0], x[1]); }, {s, a}) < 1e-8);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return cdot(t, x[0], x[1]); }, {a, b}) < 1e-8);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return cabs2(t, x[0]); }, {a}) < 1e-8);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return crotate(t, x[0], x[1]); }, {a, ph}) < 1e-8);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& x) { return crsub_const(t, cplx(0.3, -1), x[0]); }, {a}) <
              1e-8);
        auto idx = std::make_shared<const std::vector<int>>(std::vector<int>{3, 0, 0, 2, 1});
        CHECK(fd_error([idx](Tape& t, const std::vector<Id>& x) { return cgather(t, x[0], idx); }, {a}) < 1e-8);
    }

    TEST_CASE("cspectral, cmatvec, cadd_bias, log_mse") {
        const RVec x = random_rvec(16, 21);
        Rng rng(22);
        auto h = std::make_shared<CVec>(8);
        for (auto& z : *h) z = std::polar(1.0, 6.28 * rng.uniform());
        std::shared_ptr<const CVec> hc = h;
        CHECK(fd_error([hc](Tape& t, const std::vector<Id>& v) { return cspectral(t, v[0], hc); }, {x}) < 1e-8);

        const RVec w = random_rvec(2 * 3 * 2, 23), xin = random_rvec(2 * 4 * 2, 24);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& v) { return cmatvec(t, v[0], v[1], 4, 2, 3); }, {w, xin}) <
              1e-8);
        const RVec xo = random_rvec(2 * 4 * 3, 25), bo = random_rvec(2 * 3, 26);
        CHECK(fd_error([](Tape& t, const std::vector<Id>& v) { return cadd_bias(t, v[0], v[1], 4, 3); }, {xo, bo}) <
              1e-8);
        const CVec target = {{0.1, 0.2}, {-0.3, 0.5}, {1, 0}, {0, -1}};
        CHECK(fd_error([target](Tape& t, const std::vector<Id>& v) { return log_mse(t, v[0], target); },
                       {random_rvec(8, 27)}) < 1e-7);
    }

    TEST_CASE("cmatvec values") {
        Tape t;
        // W = [[i, 2]] (1 x 2), one element x = (1, 1+i)
        const Id w = t.leaf(from_complex(CVec{{0, 1}, {2, 0}}), false);
        const Id x = t.leaf(from_complex(CVec{{1, 0}, {1, 1}}), false);
        const CVec y = to_complex(t.value(cmatvec(t, w, x, 1, 2, 1)));
        CHECK(y.size() == 1);
        CHECK(std::abs(y[0] - cplx(2, 3)) < 1e-15);
    }

    TEST_CASE("backward twice is bit-identical") {
        const RVec a = random_rvec(8, 31), b = random_rvec(8, 32);
        auto run = [&](Tape& t, Id& ia, Id& ib) {
            ia = t.leaf(a, true);
            ib = t.leaf(b, true);
            const Id y = tanh(t, cabs2(t, cmul(t, ia, ib)));
            return project(t, y, 5);
        };
        Tape t;
        Id ia, ib;
        const Id root = run(t, ia, ib);
        t.backward(root);
        const RVec g1 = t.grad(ia);
        t.zero_grad();
        t.backward(root);
        CHECK(t.grad(ia) == g1);

        Tape t2;
        Id ja, jb;
        const Id root2 = run(t2, ja, jb);
        t2.backward(root2);
        CHECK(t2.grad(ja) == g1);
    }

    TEST_CASE("unused parameter gets zero gradient") {
        Tape t;
        const Id a = t.leaf(random_rvec(4, 41), true);
        const Id unused = t.leaf(random_rvec(4, 42), true);
        const Id root = project(t, sigmoid(t, a), 1);
        t.backward(root);
        for (double g : t.grad(unused)) CHECK(g == 0.0);
        bool any = false;
        for (double g : t.grad(a)) any = any || g != 0.0;
        CHECK(any);
    }

    TEST_CASE("shape mismatch throws") {
        Tape t;
        const Id a = t.leaf(RVec(4, 1.0), true);
        const Id b = t.leaf(RVec(6, 1.0), true);
        CHECK_THROWS(add(t, a, b));
        CHECK_THROWS(t.backward(a));
    }
}
