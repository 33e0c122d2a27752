#include "sonarcrlb/interpolation.hpp"

#include <cmath>
#include <numbers>

namespace sonarcrlb {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - (kPi * x) * (kPi * x) / 6.0;
  return std::sin(kPi * x) / (kPi * x);
}

double sinc_derivative(double x) {
  if (std::abs(x) < 1e-5) return -kPi * kPi * x / 3.0;
  const double px = kPi * x;
  return (px * std::cos(px) - std::sin(px)) / (kPi * x * x);
}

}  // namespace

KaiserSincKernel::KaiserSincKernel(double beta)
    : beta_(beta), i0_beta_(std::cyl_bessel_i(0.0, beta)) {
  const int nodes = kHalfWidth * kTableDensity + 1;
  values_.resize(nodes);
  slopes_.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double x = static_cast<double>(i) / kTableDensity;
    values_[i] = exact(x);
    slopes_[i] = exact_derivative(x);
  }
}

double KaiserSincKernel::exact(double x) const {
  const double ax = std::abs(x);
  if (ax >= kHalfWidth) return 0.0;
  const double r = ax / kHalfWidth;
  const double q = std::sqrt(std::max(0.0, 1.0 - r * r));
  return sinc(ax) * std::cyl_bessel_i(0.0, beta_ * q) / i0_beta_;
}

double KaiserSincKernel::exact_derivative(double x) const {
  const double ax = std::abs(x);
  if (ax >= kHalfWidth) return 0.0;
  const double r = ax / kHalfWidth;
  const double q = std::sqrt(std::max(0.0, 1.0 - r * r));
  const double window = std::cyl_bessel_i(0.0, beta_ * q) / i0_beta_;
  // d/dx I0(beta q) = I1(beta q) beta dq/dx with dq/dx = -x / (W^2 q); I1(z)/q stays finite.
  const double i1_over_q =
      q < 1e-10 ? beta_ / 2.0 : std::cyl_bessel_i(1.0, beta_ * q) / q;
  const double window_slope = -i1_over_q * beta_ * ax / (kHalfWidth * kHalfWidth) / i0_beta_;
  const double slope = sinc_derivative(ax) * window + sinc(ax) * window_slope;
  return x < 0.0 ? -slope : slope;
}

double KaiserSincKernel::operator()(double x) const {
  const double ax = std::abs(x);
  if (ax >= kHalfWidth) return 0.0;
  const double scaled = ax * kTableDensity;
  const auto i = static_cast<std::size_t>(scaled);
  if (i + 1 >= values_.size()) return 0.0;
  const double t = scaled - static_cast<double>(i);
  const double h = 1.0 / kTableDensity;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * values_[i] + h10 * h * slopes_[i] + h01 * values_[i + 1] +
         h11 * h * slopes_[i + 1];
}

double KaiserSincKernel::derivative(double x) const {
  const double ax = std::abs(x);
  if (ax >= kHalfWidth) return 0.0;
  const double scaled = ax * kTableDensity;
  const auto i = static_cast<std::size_t>(scaled);
  if (i + 1 >= values_.size()) return 0.0;
  const double t = scaled - static_cast<double>(i);
  const double h = 1.0 / kTableDensity;
  const double t2 = t * t;
  const double d00 = 6.0 * t2 - 6.0 * t;
  const double d10 = 3.0 * t2 - 4.0 * t + 1.0;
  const double d01 = -6.0 * t2 + 6.0 * t;
  const double d11 = 3.0 * t2 - 2.0 * t;
  const double slope = (d00 * values_[i] + d01 * values_[i + 1]) / h + d10 * slopes_[i] + d11 * slopes_[i + 1];
  return x < 0.0 ? -slope : slope;
}

const KaiserSincKernel& default_kernel() {
  static const KaiserSincKernel kernel;
  return kernel;
}

double interpolate_at(std::span<const double> samples, double position) {
  const auto& kernel = default_kernel();
  const auto length = static_cast<long>(samples.size());
  constexpr int w = KaiserSincKernel::kHalfWidth;
  if (!(position > -w && position < static_cast<double>(length - 1 + w))) return 0.0;

  const double base = std::floor(position);
  const double frac = position - base;
  const long centre = static_cast<long>(base);
  const long first = std::max(centre - w + 1, 0L);
  const long last = std::min(centre + w, length - 1);
  if (frac == 0.0) {
    return (centre >= 0 && centre < length) ? samples[static_cast<std::size_t>(centre)] : 0.0;
  }
  double acc = 0.0;
  for (long k = first; k <= last; ++k) {
    acc += samples[static_cast<std::size_t>(k)] * kernel(position - static_cast<double>(k));
  }
  return acc;
}

double interpolate_derivative_at(std::span<const double> samples, double position) {
  const auto& kernel = default_kernel();
  const auto length = static_cast<long>(samples.size());
  constexpr int w = KaiserSincKernel::kHalfWidth;
  if (!(position > -w && position < static_cast<double>(length - 1 + w))) return 0.0;
  const long centre = static_cast<long>(std::floor(position));
  const long first = std::max(centre - w, 0L);
  const long last = std::min(centre + w + 1, length - 1);
  double acc = 0.0;
  for (long k = first; k <= last; ++k) {
    acc += samples[static_cast<std::size_t>(k)] * kernel.derivative(position - static_cast<double>(k));
  }
  return acc;
}

std::vector<double> interpolate_scaled_delayed(std::span<const double> samples, double sample_rate,
                                               double eta, double tau,
                                               std::span<const double> times) {
  std::vector<double> out(times.size());
  for (std::size_t n = 0; n < times.size(); ++n) {
    out[n] = interpolate_at(samples, eta * (times[n] - tau) * sample_rate);
  }
  return out;
}

}  // namespace sonarcrlb
