#include <doctest.h>

#include "helpers.hpp"
#include "metadsp/adaptive.hpp"

using namespace metadsp;

namespace {

// 2 SpS samples whose even entries are the symbols (odd entries midway).
CVec two_sps(const CVec& sym, cplx rot = 1.0) {
    CVec x(2 * sym.size());
    for (std::size_t k = 0; k < sym.size(); ++k) {
        x[2 * k] = rot * sym[k];
        x[2 * k + 1] = rot * 0.5 * (sym[k] + sym[(k + 1) % sym.size()]);
    }
    return x;
}

CVec random_symbols(std::size_t n, std::uint64_t seed) {
    return draw_symbol_frame(Constellation::qam16(), 1, n, seed).symbols[0];
}

}  // namespace

TEST_SUITE("adaptive") {
    TEST_CASE("filter_apply") {
        AdfWeights t = AdfWeights::center_spike(1);
        CHECK(filter_apply(CVec{cplx(0.3, -0.2)}, t) == cplx(0.3, -0.2));
        t.v = cplx(0, 1);
        CHECK(filter_apply(CVec{cplx(1, 0)}, t) == cplx(0, 1));
        AdfWeights t2;
        t2.w = {1.0, 1.0};
        t2.v = 2.0;
        CHECK(filter_apply(CVec{cplx(1, 0), cplx(0, 1)}, t2) == cplx(2, 2));
        CHECK_THROWS(filter_apply(CVec{cplx(1, 0)}, t2));
        const AdfWeights s = AdfWeights::center_spike(32);
        CHECK(s.w[16] == cplx(1, 0));
        CHECK(s.v == cplx(1, 0));
    }

    TEST_CASE("decide") {
        const Constellation c = Constellation::qam16();
        for (auto p : c.points()) CHECK(decide(p, c) == p);
        // y = 0 is equidistant to the four inner points; the smallest index wins
        const cplx z = decide(0.0, c);
        const double a = 1.0 / std::sqrt(10.0);
        CHECK(std::abs(std::abs(z.real()) - a) < 1e-15);
        CHECK(std::abs(std::abs(z.imag()) - a) < 1e-15);
        CHECK(c.nearest_index(0.0) == 5u);
        const cplx inner(a, a);
        CHECK(decide(inner + 0.01 * cplx(1, 1), c) == inner);
    }

    TEST_CASE("gradient convention") {
        AdfWeights t;
        t.w = {0.0};
        t.v = 1.0;
        const AdfGradient g = adf_gradient(CVec{cplx(1, 0)}, t, 1.0);
        CHECK(std::conj(g.gw[0]) == cplx(-1, 0));
        OptimizerHyper h;
        h.eta = 0.5;
        OptimizerState s = LmsState{};
        const CVec v = optimizer_step(OptimizerKind::lms, g.flat(), {}, s, h);
        CHECK(t.w[0] + v[0] == cplx(0.5, 0));

        AdfWeights p = AdfWeights::center_spike(4);
        const CVec u{0.1, 0.2, 0.3, 0.4};
        const AdfGradient z = adf_gradient(u, p, filter_apply(u, p));
        for (auto x : z.flat()) CHECK(x == cplx(0, 0));
    }

    TEST_CASE("gradient matches central differences") {
        const std::size_t d = 6;
        const CVec u = testutil::random_cvec(d, 3);
        AdfWeights t;
        t.w = testutil::random_cvec(d, 4, 0.5);
        t.v = cplx(0.8, 0.3);
        const cplx ref(0.3, -0.9);
        auto loss = [&](const AdfWeights& th) { return std::norm(filter_apply(u, th) - ref); };
        const CVec gbar = [&] {
            CVec f = adf_gradient(u, t, ref).flat();
            for (auto& x : f) x = std::conj(x);
            return f;
        }();
        const double h = 1e-6;
        for (std::size_t i = 0; i <= d; ++i)
            for (int part = 0; part < 2; ++part) {
                CVec fp = t.flat(), fm = t.flat();
                const cplx dlt = part == 0 ? cplx(h, 0) : cplx(0, h);
                fp[i] += dlt;
                fm[i] -= dlt;
                AdfWeights tp = t, tm = t;
                tp.set_flat(fp);
                tm.set_flat(fm);
                const double fd = (loss(tp) - loss(tm)) / (2 * h);
                const double an = 2.0 * (part == 0 ? gbar[i].real() : gbar[i].imag());
                CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
            }
    }

    TEST_CASE("optimizer rules") {
        OptimizerHyper h;
        h.eta = 0.1;
        OptimizerState lms = LmsState{};
        CHECK(optimizer_step(OptimizerKind::lms, {cplx(1, 0)}, {}, lms, h)[0] == cplx(-0.1, 0));

        OptimizerHyper hr;
        OptimizerState rms = RmsPropState{RVec{2.0}};
        const CVec v0 = optimizer_step(OptimizerKind::rmsprop, {cplx(0, 0)}, {}, rms, hr);
        CHECK(v0[0] == cplx(0, 0));
        CHECK(std::get<RmsPropState>(rms).mu[0] == doctest::Approx(2.0 * 0.999));

        OptimizerHyper ha;
        ha.eta = 0.01;
        OptimizerState adam = make_optimizer_state(OptimizerKind::adam, 1);
        const CVec va = optimizer_step(OptimizerKind::adam, {cplx(1, 0)}, {}, adam, ha);
        CHECK(va[0].real() == doctest::Approx(-0.01 / (1 + 1e-8)).epsilon(1e-14));
        CHECK(std::get<AdamState>(adam).t == 1);
        // conjugation: a gradient i gives a step along -conj(i) = +i
        OptimizerState adam2 = make_optimizer_state(OptimizerKind::adam, 1);
        CHECK(optimizer_step(OptimizerKind::adam, {cplx(0, 1)}, {}, adam2, ha)[0].imag() > 0.0);

        OptimizerHyper hn;
        hn.eta = 0.5;
        OptimizerState nl = make_optimizer_state(OptimizerKind::nlms, 2);
        const CVec o{cplx(1, 0), cplx(0, 1)};  // |o|^2 = 2
        const CVec vn = optimizer_step(OptimizerKind::nlms, {cplx(1, 0), cplx(0, 2)}, o, nl, hn);
        CHECK(vn[0] == cplx(-0.25, 0));
        CHECK(std::abs(vn[1] - cplx(0, 0.5)) < 1e-15);
        const CVec vn2 = optimizer_step(OptimizerKind::nlms, {cplx(1, 0), cplx(0, 0)}, {cplx(2, 0), cplx(0, 0)}, nl, hn);
        const double mu2 = 0.999 * 2.0 + 0.001 * 4.0;
        CHECK(vn2[0].real() == doctest::Approx(-0.5 / mu2).epsilon(1e-14));

        OptimizerState wrong = LmsState{};
        CHECK_THROWS(optimizer_step(OptimizerKind::adam, {cplx(1, 0)}, {}, wrong, h));
    }

    TEST_CASE("zero error leaves weights and decays states") {
        const CVec zero(3, cplx(0, 0));
        const CVec o{cplx(1, 0), cplx(1, 0), cplx(1, 0)};
        OptimizerHyper h;
        for (auto k : {OptimizerKind::lms, OptimizerKind::nlms, OptimizerKind::rmsprop, OptimizerKind::adam}) {
            OptimizerState s = make_optimizer_state(k, 3);
            if (k == OptimizerKind::rmsprop) std::get<RmsPropState>(s).mu.assign(3, 1.0);
            if (k == OptimizerKind::adam) {
                std::get<AdamState>(s).m.assign(3, cplx(1, 0));
                std::get<AdamState>(s).b.assign(3, 1.0);
            }
            const CVec v = optimizer_step(k, zero, o, s, h);
            if (k != OptimizerKind::adam) {
                for (auto x : v) CHECK(x == cplx(0, 0));
            }
            if (k == OptimizerKind::rmsprop) CHECK(std::get<RmsPropState>(s).mu[0] == doctest::Approx(0.999));
            if (k == OptimizerKind::adam) {
                CHECK(std::get<AdamState>(s).m[0].real() == doctest::Approx(0.9));
                CHECK(std::get<AdamState>(s).b[0] == doctest::Approx(0.999));
            }
        }
    }

    TEST_CASE("padding and output length") {
        CHECK(adf_output_length(100, 32, 2) == 35u);
        CHECK(adf_output_length(10, 32, 2) == 0u);
        CVec x(8);
        for (int i = 0; i < 8; ++i) x[i] = cplx(i, 0);
        const CVec p = pad_for_adf(x, 4, 2);
        CHECK(p.size() == 10u);
        CHECK(adf_output_length(p.size(), 4, 2) == 4u);
        CHECK(p[0] == cplx(6, 0));
        CHECK(p[2] == cplx(0, 0));
        CHECK_THROWS(pad_for_adf(CVec(7), 4, 2));
    }

    TEST_CASE("frozen identity filter passes centre samples") {
        const CVec sym = random_symbols(300, 5);
        const CVec x = pad_for_adf(two_sps(sym), 32, 2);
        AdfRunConfig cfg;
        cfg.hyper.eta = 0.0;
        const AdfResult r = adf_run(x, sym, cfg, Constellation::qam16(), AdfWeights::center_spike(32));
        REQUIRE(r.y.size() == sym.size());
        for (std::size_t k = 0; k < sym.size(); ++k) CHECK(r.y[k] == sym[k]);
        CHECK_THROWS(adf_run(CVec(10), sym, cfg, Constellation::qam16(), AdfWeights::center_spike(32)));
    }

    TEST_CASE("static phase rotation is tracked") {
        const CVec sym = random_symbols(3000, 6);
        const cplx rot = std::polar(1.0, kPi / 6);
        const CVec x = pad_for_adf(two_sps(sym, rot), 32, 2);
        AdfRunConfig cfg;
        cfg.hyper.eta = 1e-2;
        cfg.record_trajectory = true;
        const AdfResult r = adf_run(x, sym, cfg, Constellation::qam16(), AdfWeights::center_spike(32));
        double mse = 0.0;
        for (std::size_t k = 1500; k < 3000; ++k) mse += std::norm(r.y[k] - sym[k]);
        CHECK(mse / 1500 < 1e-3);
        CHECK(r.trajectory.size() == sym.size());
        const AdfResult again = adf_run(x, sym, cfg, Constellation::qam16(), AdfWeights::center_spike(32));
        CHECK(again.y == r.y);
    }

    TEST_CASE("adaptation beats frozen weights on a noisy channel") {
        const CVec sym = random_symbols(2000, 7);
        CVec x = two_sps(sym, std::polar(1.0, 0.2));
        const CVec n = testutil::random_cvec(x.size(), 8, 0.05);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += n[i];
        const CVec p = pad_for_adf(x, 32, 2);
        AdfRunConfig a, f;
        f.hyper.eta = 0.0;
        const auto ra = adf_run(p, sym, a, Constellation::qam16(), AdfWeights::center_spike(32));
        const auto rf = adf_run(p, sym, f, Constellation::qam16(), AdfWeights::center_spike(32));
        double la = 0.0, lf = 0.0;
        for (std::size_t k = 1000; k < 2000; ++k) {
            la += std::norm(ra.y[k] - sym[k]);
            lf += std::norm(rf.y[k] - sym[k]);
        }
        CHECK(la < lf);
    }
}
