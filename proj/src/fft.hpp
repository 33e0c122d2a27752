#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace sonarcrlb::detail {

/// Real-to-complex DFT, bins 0..n/2 (unnormalized, e^{-j 2 pi k n / N} convention).
std::vector<std::complex<double>> real_dft(std::span<const double> x);

/// Inverse of real_dft for a length-n signal, normalized by 1/n.
std::vector<double> inverse_real_dft(std::span<const std::complex<double>> half_spectrum,
                                     std::size_t n);

/// Version string of the linked FFT library.
const char* fft_library_version();

}  // namespace sonarcrlb::detail
