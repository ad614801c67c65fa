#include "metadsp/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace metadsp::fft {
namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        // planner is not thread safe, so plans are made under the lock on a
        // scratch buffer and later executed with the new-array interface
        CVec scratch(n);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw std::runtime_error("fftw plan creation failed");
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void execute(CVec& x, int sign) {
    if (x.empty()) return;
    fftw_plan p = cache().get(x.size(), sign);
    auto* buf = reinterpret_cast<fftw_complex*>(x.data());
    fftw_execute_dft(p, buf, buf);
}

}  // namespace

void forward(CVec& x) { execute(x, FFTW_FORWARD); }

void inverse(CVec& x) {
    execute(x, FFTW_BACKWARD);
    const double s = 1.0 / static_cast<double>(x.size());
    for (auto& v : x) v *= s;
}

CVec forward_copy(const CVec& x) {
    CVec y = x;
    forward(y);
    return y;
}

CVec inverse_copy(const CVec& x) {
    CVec y = x;
    inverse(y);
    return y;
}

RVec angular_frequencies(std::size_t n, double sample_rate_hz) {
    RVec w(n);
    const double df = sample_rate_hz / static_cast<double>(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t k = 0; k < n; ++k) {
        double idx = k < half ? static_cast<double>(k)
                              : static_cast<double>(k) - static_cast<double>(n);
        w[k] = 2.0 * kPi * df * idx;
    }
    return w;
}

}  // namespace metadsp::fft
