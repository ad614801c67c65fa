#pragma once

#include <cmath>
#include <complex>

#include "metadsp/rng.hpp"
#include "metadsp/types.hpp"

namespace testutil {

inline metadsp::CVec random_cvec(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    metadsp::Rng rng(seed);
    metadsp::CVec v(n);
    for (auto& z : v) z = {scale * rng.normal(), scale * rng.normal()};
    return v;
}

inline double max_abs_diff(const metadsp::CVec& a, const metadsp::CVec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace testutil
