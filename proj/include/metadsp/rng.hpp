#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace metadsp {

// Stream seed for a purpose: splitmix64 over (root, FNV-1a(tag), index).
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    int uniform_int(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(engine_);
    }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace metadsp
