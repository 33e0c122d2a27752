#pragma once

#include <span>
#include <vector>

namespace sonarcrlb {

/// Kaiser-windowed sinc reconstruction kernel
///   h(x) = sinc(x) I0(beta sqrt(1 - (x/W)^2)) / I0(beta),  |x| < W,
/// with half-width W = 16 samples. h(0) = 1 and h(j) = 0 at other integers, so
/// reconstruction is exact on the sample grid. The passband is flat to about 1e-7 up
/// to 0.38 fs; stopband starts near 0.62 fs.
///
/// Values come from a cubic-Hermite table over exact values and slopes
/// (1024 nodes per sample), which is accurate to ~1e-13.
class KaiserSincKernel {
 public:
  static constexpr int kHalfWidth = 16;
  static constexpr int kTableDensity = 1024;

  explicit KaiserSincKernel(double beta = 12.0);

  double beta() const { return beta_; }

  /// Tabulated kernel value.
  double operator()(double x) const;
  /// Slope of the tabulated kernel (derivative of the Hermite pieces).
  double derivative(double x) const;

  /// Exact closed form; slow, used to build the table.
  double exact(double x) const;
  double exact_derivative(double x) const;

 private:
  double beta_;
  double i0_beta_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

/// Shared kernel instance (constructed once, immutable).
const KaiserSincKernel& default_kernel();

/// Continuous-time reconstruction of a finite sample sequence s[k] (taken at t = k / fs,
/// zero outside [0, L)) evaluated at s(eta (t_n - tau)) for each requested time.
std::vector<double> interpolate_scaled_delayed(std::span<const double> samples, double sample_rate,
                                               double eta, double tau,
                                               std::span<const double> times);

/// Reconstruction at a single fractional sample position u = t fs.
double interpolate_at(std::span<const double> samples, double position);

/// d/du of the reconstruction at position u (per sample; multiply by fs for per second).
double interpolate_derivative_at(std::span<const double> samples, double position);

}  // namespace sonarcrlb
