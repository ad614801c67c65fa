#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace metadsp {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

// Error categories map onto CLI exit codes (2, 3, 4).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr double kPi = 3.14159265358979323846;
constexpr double kSpeedOfLight = 2.99792458e8;  // m/s
constexpr double kPlanck = 6.62607015e-34;      // J s

}  // namespace metadsp
