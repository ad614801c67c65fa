#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "metadsp/fft.hpp"
#include "metadsp/signal.hpp"

using namespace metadsp;

TEST_SUITE("signal") {
    TEST_CASE("dbm conversions") {
        CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3).epsilon(1e-14));
        CHECK(dbm_to_watts(-6.0) == doctest::Approx(2.5119e-4).epsilon(1e-4));
        CHECK(dbm_to_watts(6.0) == doctest::Approx(3.9811e-3).epsilon(1e-4));
        CHECK(watts_to_dbm(dbm_to_watts(-3.7)) == doctest::Approx(-3.7).epsilon(1e-12));
    }

    TEST_CASE("dispersion to beta2") {
        const double b2 = dispersion_to_beta2(16.5, 1550.0);
        CHECK(b2 == doctest::Approx(-2.1044895291667e-26).epsilon(1e-10));
        CHECK(std::abs(b2) * 1e24 * 1e3 == doctest::Approx(21.04).epsilon(1e-3));  // ps^2/km
        CHECK(dispersion_to_beta2(0.0, 1550.0) == 0.0);
        FiberParams f;
        CHECK(f.beta2() < 0.0);
    }

    TEST_CASE("waveform validation") {
        CHECK_THROWS(Waveform({}, 1.0).validate());
        CHECK_THROWS(Waveform({cplx(1, 0)}, 0.0).validate());
        CHECK_THROWS(Waveform({cplx(std::nan(""), 0)}, 1.0).validate());
        CHECK_NOTHROW(Waveform({cplx(1, 0)}, 1.0).validate());
    }

    TEST_CASE("task info invariants") {
        CHECK_THROWS(TaskInfo::make(0.0, 20e9, 2).validate());
        CHECK_THROWS(TaskInfo::make(0.0, 20e9, 1, 10e9).validate());
        const TaskInfo t = TaskInfo::make(0.0, 20e9, 3);
        CHECK(t.channel_spacing_hz == doctest::Approx(24e9));
        CHECK(t.total_power_w() == doctest::Approx(3e-3));
    }

    TEST_CASE("rrc taps") {
        const RVec g = rrc_taps(0.1, 16, 2);
        REQUIRE(g.size() == 33u);
        double e = 0.0;
        for (double v : g) e += v * v;
        CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == g[g.size() - 1 - i]);
        const auto peak = std::max_element(g.begin(), g.end()) - g.begin();
        CHECK(peak == 16);
        // the t = +-Ts/(4 rolloff) singular points are finite
        for (double v : rrc_taps(0.25, 32, 4)) CHECK(std::isfinite(v));
        CHECK_THROWS(rrc_taps(0.0, 16, 2));
        CHECK_THROWS(rrc_taps(1.5, 16, 2));
        CHECK_THROWS(rrc_taps(0.1, 15, 2));
        CHECK_THROWS(rrc_taps(0.1, 16, 1));
    }

    TEST_CASE("rrc cascade is Nyquist") {
        // RRC * RRC sampled at symbol spacing is a delta (up to truncation).
        const int sps = 4;
        const RVec g = rrc_taps(0.1, 32, sps);
        const int n = static_cast<int>(g.size());
        RVec rc(2 * n - 1, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) rc[i + j] += g[i] * g[j];
        const int c = n - 1;
        CHECK(rc[c] == doctest::Approx(1.0).epsilon(1e-3));
        // truncation ISI of a 32-symbol, 0.1-rolloff RRC pair, from an independent numpy evaluation
        double isi = 0.0;
        for (int k = 1; k < 32; ++k) isi = std::max(isi, std::abs(rc[c + k * sps]));
        CHECK(isi == doctest::Approx(0.003417324537603018).epsilon(1e-9));
    }

    TEST_CASE("fft round trip and parseval") {
        const CVec x = testutil::random_cvec(1000, 11);
        CVec X = fft::forward_copy(x);
        const CVec y = fft::inverse_copy(X);
        CHECK(relative_l2(y, x) < 1e-12);
        double ex = 0.0, eX = 0.0;
        for (auto v : x) ex += std::norm(v);
        for (auto v : X) eX += std::norm(v);
        CHECK(ex == doctest::Approx(eX / 1000.0).epsilon(1e-10));
        const RVec om = fft::angular_frequencies(8, 8.0);
        CHECK(om[1] == doctest::Approx(2 * kPi));
        CHECK(om[4] == doctest::Approx(-8 * kPi));
        CHECK(om[7] == doctest::Approx(-2 * kPi));
    }

    TEST_CASE("frequency shift") {
        const Waveform w(testutil::random_cvec(256, 3), 10e9);
        const Waveform same = frequency_shift(w, 0.0);
        CHECK(testutil::max_abs_diff(same.samples, w.samples) == 0.0);
        const Waveform s = frequency_shift(w, 1.3e9);
        const Waveform back = frequency_shift(s, -1.3e9);
        CHECK(testutil::max_abs_diff(back.samples, w.samples) < 1e-12);
        for (std::size_t i = 0; i < w.size(); ++i)
            CHECK(std::abs(s.samples[i]) == doctest::Approx(std::abs(w.samples[i])).epsilon(1e-14));
        CHECK(s.sample_rate_hz == w.sample_rate_hz);
    }

    TEST_CASE("decimation") {
        CVec x(8);
        for (int i = 0; i < 8; ++i) x[i] = cplx(i, 0);
        const Waveform w(x, 8.0);
        const Waveform d = resample_decimate(w, 2, 0);
        REQUIRE(d.size() == 4u);
        for (int i = 0; i < 4; ++i) CHECK(d.samples[i].real() == 2 * i);
        CHECK(d.sample_rate_hz == 4.0);
        CHECK(testutil::max_abs_diff(resample_decimate(w, 1, 0).samples, x) == 0.0);
        CHECK_THROWS(resample_decimate(Waveform(CVec(7), 1.0), 2, 0));
        CHECK_THROWS(resample_decimate(w, 2, 2));
    }

    TEST_CASE("decimation keeps a narrowband spectrum") {
        // band-limited below Fs/4: spectrum of the decimated signal equals the
        // original in-band bins divided by the factor
        const std::size_t n = 512;
        CVec X(n, cplx(0, 0));
        const CVec v = testutil::random_cvec(40, 5);
        for (int k = 0; k < 20; ++k) X[k] = v[k];
        for (int k = 1; k <= 20; ++k) X[n - k] = v[19 + k];
        const CVec x = fft::inverse_copy(X);
        const Waveform d = resample_decimate(Waveform(x, 1.0), 2, 0);
        const CVec D = fft::forward_copy(d.samples);
        for (int k = 0; k < 20; ++k) CHECK(std::abs(D[k] - X[k] / 2.0) < 1e-12);
        for (int k = 1; k <= 20; ++k) CHECK(std::abs(D[n / 2 - k] - X[n - k] / 2.0) < 1e-12);
    }

    TEST_CASE("constellation") {
        const Constellation c = Constellation::qam16();
        REQUIRE(c.size() == 16u);
        double e = 0.0;
        for (auto p : c.points()) e += std::norm(p);
        CHECK(e / 16.0 == doctest::Approx(1.0).epsilon(1e-14));
        const double step = 2.0 / std::sqrt(10.0);
        int neighbours = 0;
        for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t j = i + 1; j < 16; ++j) {
                if (std::abs(std::abs(c.point(i) - c.point(j)) - step) > 1e-12) continue;
                ++neighbours;
                CHECK(__builtin_popcount(c.label(i) ^ c.label(j)) == 1);
            }
        CHECK(neighbours == 24);
        std::set<unsigned> labels;
        for (std::size_t i = 0; i < 16; ++i) labels.insert(c.label(i));
        CHECK(labels.size() == 16u);
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(c.nearest_index(c.point(i) * 1.05) == i);
            CHECK(c.index_of(c.point(i)) == static_cast<long>(i));
        }
        CHECK(c.index_of(cplx(0.1, 0.2)) == -1);
        std::vector<std::uint8_t> bits;
        c.append_bits(5, bits);
        REQUIRE(bits.size() == 4u);
        unsigned v = 0;
        for (auto b : bits) v = (v << 1) | b;
        CHECK(v == c.label(5));
    }

    TEST_CASE("symbol frame") {
        const Constellation c = Constellation::qam16();
        const SymbolFrame f = draw_symbol_frame(c, 3, 500, 42);
        REQUIRE(f.n_channels() == 3u);
        REQUIRE(f.n_symbols() == 500u);
        for (const auto& ch : f.symbols)
            for (auto s : ch) CHECK(c.index_of(s) >= 0);
        const SymbolFrame g = draw_symbol_frame(c, 3, 500, 42);
        CHECK(f.indices == g.indices);
        const SymbolFrame h = draw_symbol_frame(c, 3, 500, 43);
        CHECK(f.indices != h.indices);
        CHECK(f.indices[0] != f.indices[1]);
    }

    TEST_CASE("circular filter agrees with direct convolution") {
        const CVec x = testutil::random_cvec(64, 9);
        const RVec taps{0.1, -0.3, 1.0, 0.25, 0.05};
        const CVec y = circular_filter(x, taps);
        const int n = 64, h = 2;
        for (int i = 0; i < n; ++i) {
            cplx acc(0, 0);
            for (int j = 0; j < 5; ++j) acc += taps[j] * x[((i - (j - h)) % n + n) % n];
            CHECK(std::abs(acc - y[i]) < 1e-12);
        }
    }
}
