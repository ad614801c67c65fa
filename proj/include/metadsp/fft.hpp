#pragma once

#include "metadsp/types.hpp"

// Thin wrapper over FFTW. Forward transform is unnormalized, inverse
// divides by N, so inverse(forward(x)) == x.
namespace metadsp::fft {

void forward(CVec& x);
void inverse(CVec& x);

CVec forward_copy(const CVec& x);
CVec inverse_copy(const CVec& x);

// Angular frequency of each FFT bin (rad/s), standard ordering:
// 0, 1, ..., ceil(N/2)-1, then negative frequencies.
RVec angular_frequencies(std::size_t n, double sample_rate_hz);

}  // namespace metadsp::fft
