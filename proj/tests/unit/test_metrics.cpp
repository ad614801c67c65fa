#include <doctest.h>

#include <algorithm>
#include <limits>

#include "metadsp/metrics.hpp"

using namespace metadsp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent re-evaluations: plain loops over N = 1, 2, 4, ... with std::log2.
double os_cost(double len, double scale) {
    double best = kInf;
    for (double n = 1; n <= 67108864.0; n *= 2) {
        if (n - len + 1.0 <= 0.0) continue;
        best = std::min(best, scale * n * (std::log2(n) + 1.0) / (n - len + 1.0));
    }
    return best;
}

double oracle_edc(int nd) { return os_cost(nd, 8.0); }
double oracle_dbp(int span, double stps, int nd) {
    const double s = span * stps;
    return 4.0 * s * (os_cost(nd / s, 2.0) + 2.0);
}
double oracle_fdbp(int span, double stps, int nd, int nf) {
    const double s = span * stps;
    return 4.0 * s * (os_cost(nd / s, 2.0) + os_cost(nf, 2.0));
}
double oracle_meta_adf(int taps, int h, int hi, int l) {
    return 4.0 * (hi * double(h) + 3.0 * l * (2.0 * h * h + h)) * (taps + 1.0);
}

}  // namespace

TEST_SUITE("metrics") {
    TEST_CASE("ber count") {
        std::vector<std::uint8_t> a(4000, 0), b(4000, 0);
        CHECK(ber_count(a, b) == 0.0);
        b[17] = 1;
        CHECK(ber_count(a, b) == doctest::Approx(2.5e-4));
        CHECK(ber_count(b, a) == ber_count(a, b));
        std::vector<std::uint8_t> c(4000, 1);
        CHECK(ber_count(a, c) == 1.0);
        CHECK_THROWS(ber_count(a, std::vector<std::uint8_t>(3)));
        CHECK_THROWS(ber_count({}, {}));
    }

    TEST_CASE("erfcinv") {
        for (double y : {1e-300, 1e-12, 1e-3, 0.3, 1.0, 1.5, 1.999}) CHECK(std::erfc(erfcinv(y)) == doctest::Approx(y).epsilon(1e-12));
        CHECK(erfcinv(1.0) == 0.0);
        CHECK(std::abs(erfcinv(0.31731050786291415) - 1.0 / std::sqrt(2.0)) < 1e-12);
        CHECK(erfcinv(0.0) == kInf);
        CHECK(erfcinv(2.0) == -kInf);
        CHECK_THROWS(erfcinv(2.5));
    }

    TEST_CASE("q from ber") {
        CHECK(std::abs(q_from_ber(0.158655)) < 1e-3);
        CHECK(q_from_ber(1e-3) == doctest::Approx(9.79982256904398).epsilon(1e-9));
        CHECK(q_from_ber(0.25) == doctest::Approx(-3.4204929129358286).epsilon(1e-9));
        CHECK(q_from_ber(0.0) == kInf);
        CHECK(q_from_ber(0.5) == -kInf);
        CHECK(q_factor(0.0).sentinel);
        CHECK(q_factor(0.7).sentinel);
        CHECK_FALSE(q_factor(1e-3).sentinel);
        double prev = kInf;
        for (int i = 1; i <= 100; ++i) {
            const double q = q_from_ber(0.5 * i / 101.0);
            CHECK(q < prev);
            prev = q;
        }
    }

    TEST_CASE("effective snr") {
        const CVec y = {{1, 0}, {0, 1}, {-0.5, 0.5}, {0.3, -0.9}};
        CVec yh = y;
        for (auto& z : yh) z *= 1.1;
        CHECK(effective_snr_db(yh, y) == doctest::Approx(20.0).epsilon(1e-12));
        CVec y2 = y;
        for (std::size_t i = 0; i < y.size(); ++i) y2[i] = y[i] + 2.0 * (yh[i] - y[i]);
        CHECK(effective_snr_db(yh, y) - effective_snr_db(y2, y) == doctest::Approx(20.0 * std::log10(2.0)));
        CHECK(effective_snr_db(y, y) == kInf);
        CHECK_THROWS(effective_snr_db(y, CVec(2)));
    }

    TEST_CASE("mpq") {
        CHECK(mpq({{0, 20e9, 1, 5.0}}) == 5.0);
        CHECK(mpq({{-2, 20e9, 1, 3.0}, {0, 20e9, 1, 7.0}, {2, 20e9, 1, 6.0}}) == 7.0);
        std::vector<QPoint> g = {{0, 20e9, 1, 1.0}, {0, 40e9, 1, 2.0}, {0, 20e9, 3, 3.0}, {0, 40e9, 3, 4.0},
                                 {-2, 20e9, 1, 0.5}};
        CHECK(mpq(g) == 2.5);
        std::reverse(g.begin(), g.end());
        CHECK(mpq(g) == 2.5);
        g.push_back({4, 40e9, 3, -1.0});
        CHECK(mpq(g) == 2.5);
        CHECK_THROWS(mpq({}));
    }

    TEST_CASE("ddlms and meta-adf complexity") {
        CHECK(rmps_ddlms(32).rmps == 264.0);
        CHECK(rmps_ddlms(1).rmps == 16.0);
        CHECK(rmps_ddlms(65).rmps / rmps_ddlms(32).rmps == 2.0);
        CHECK(rmps_meta_adf(32).rmps == 2640.0);
        CHECK(rmps_meta_adf(32, 1, 0, 0).rmps == 0.0);
        CHECK(rmps_meta_adf(65, 3, 2, 2).rmps / rmps_meta_adf(32, 3, 2, 2).rmps == 2.0);
        for (int h : {1, 2, 4})
            for (int l : {1, 2, 3}) CHECK(rmps_meta_adf(31, h, 2, l).rmps == oracle_meta_adf(31, h, 2, l));
        CHECK_THROWS(rmps_ddlms(0));
    }

    TEST_CASE("edc complexity") {
        CHECK(rmps_edc(1).rmps == 8.0);
        CHECK(rmps_edc(1).fft_size == 1);
        // 8N(log2 N + 1)/(N - 2) over N >= 4: 48 at N=4, 42.67 at N=8, 45.71 at N=16
        CHECK(rmps_edc(3).rmps == doctest::Approx(128.0 / 3.0));
        CHECK(rmps_edc(3).fft_size == 8);
        double prev = 0.0;
        for (int nd = 1; nd < 3000; nd += 7) {
            const ComplexityReport r = rmps_edc(nd);
            CHECK(r.rmps == oracle_edc(nd));
            CHECK(r.rmps >= prev);
            CHECK(r.fft_size >= nd);
            prev = r.rmps;
        }
        CHECK(rmps_edc(27075).rmps == oracle_edc(27075));
    }

    TEST_CASE("dbp and fdbp complexity") {
        for (int span : {1, 5, 25})
            for (double stps : {0.2, 1.0, 4.0, 10.0})
                for (int nd : {100, 2731, 27075}) {
                    if (span * stps < 1.0) continue;
                    CHECK(rmps_dbp(span, stps, nd).rmps == oracle_dbp(span, stps, nd));
                    for (int nf : {1, 41, 401}) {
                        const double f = rmps_fdbp(span, stps, nd, nf).rmps;
                        CHECK(f == oracle_fdbp(span, stps, nd, nf));
                        CHECK(rmps_meta_dbp(span, stps, nd, nf).rmps == f);
                        const ComplexityReport m = rmps_meta_dsp(span, stps, nd, nf, 32);
                        CHECK(m.rmps == f + rmps_meta_adf(32).rmps);
                        CHECK(rmps_meta_dsp(span, stps, nd, nf, 32, 1, 0, 0).rmps == f);
                    }
                    CHECK(rmps_fdbp(span, stps, nd, 401).rmps > rmps_fdbp(span, stps, nd, 41).rmps);
                }
        // single step: linear part is the edc cost at a quarter of the scale
        CHECK(rmps_dbp(1, 1.0, 500).rmps == doctest::Approx(4.0 * (rmps_edc(500).rmps / 4.0 + 2.0)));
        // N_f = 1: the power filter costs 2 * 1 * (0 + 1) / 1 per step
        CHECK(rmps_fdbp(5, 1.0, 2000, 1).rmps - rmps_dbp(5, 1.0, 2000).rmps == doctest::Approx(0.0));
        CHECK_THROWS(rmps_dbp(5, 0.1, 1000));
        CHECK_THROWS(rmps_fdbp(5, 1.0, 1000, 0));
    }
}
