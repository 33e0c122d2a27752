#include "sonarcrlb/mc_validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <random>
#include <sstream>

#include "sonarcrlb/errors.hpp"
#include "sonarcrlb/noise.hpp"
#include "sonarcrlb/parallel.hpp"
#include "sonarcrlb/passive_fim.hpp"

namespace sonarcrlb {

Eigen::VectorXd Measurements::stacked() const {
  Eigen::VectorXd out(passive[0].size() + passive[1].size() + bistatic.size());
  out << passive[0], passive[1], bistatic;
  return out;
}

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

Eigen::VectorXd ar1_noise(double a, int num_samples, int num_sensors, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd e(static_cast<Eigen::Index>(num_samples) * num_sensors);
  const double stationary = std::sqrt(1.0 / (1.0 - a * a));
  for (int m = 0; m < num_sensors; ++m) {
    const Eigen::Index base = static_cast<Eigen::Index>(m) * num_samples;
    for (int n = 0; n < num_samples; ++n) {
      const double w = normal(rng);
      e(base + n) = n == 0 ? stationary * w : -a * e(base + n - 1) + w;
    }
  }
  return e;
}

Eigen::VectorXd gaussian(Eigen::Index n, double variance, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(variance);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * normal(rng);
  return v;
}

}  // namespace

Eigen::VectorXd simulate_ar1_noise(double ar_coefficient, int num_samples, int num_sensors, std::uint64_t seed) {
  NoiseModel{ar_coefficient, num_samples}.validate();
  std::mt19937_64 rng = make_rng(seed, 0);
  return ar1_noise(ar_coefficient, num_samples, num_sensors, rng);
}

LikelihoodModel::LikelihoodModel(const Scenario& scenario, const SampledWaveform& waveform, FusionCase case_id)
    : scenario_(scenario), waveform_(waveform), case_id_(case_id) {
  scenario_.validate();
  setup_ = make_bistatic_setup(scenario_, waveform_);
  for (int node = 0; node < 2; ++node) source_power_[static_cast<std::size_t>(node)] = passive_signal_power(scenario_, node);
  bound_ = crlb_matrix(fim(), case_id_);
}

Eigen::VectorXd LikelihoodModel::truth() const {
  Eigen::VectorXd t(dimension());
  t(0) = scenario_.target.position.x();
  t(1) = scenario_.target.position.y();
  if (dimension() == 3) t(2) = 0.0;
  return t;
}

Measurements LikelihoodModel::simulate(std::uint64_t seed) const {
  std::mt19937_64 rng = make_rng(seed, 0);
  Measurements out;
  const int n = scenario_.passive.num_samples;
  for (int node = 0; node < 2; ++node) {
    const DelayOperator op = build_delay_operator(scenario_, node);
    const Eigen::VectorXd source = gaussian(n, source_power_[static_cast<std::size_t>(node)], rng);
    out.passive[static_cast<std::size_t>(node)] =
        op.assembled * source + ar1_noise(scenario_.ar_coefficient, n, op.num_sensors(), rng);
  }
  const BistaticMean mean = bistatic_mean(scenario_, waveform_, setup_);
  out.bistatic = mean.values + ar1_noise(scenario_.ar_coefficient, setup_.window.num_samples,
                                         scenario_.node(kReceiverNode).num_sensors, rng);
  return out;
}

double LikelihoodModel::passive_nll(int node, const Eigen::VectorXd& y, const Vec2& p) const {
  const Scenario at = scenario_.with_target_position(p);
  const DelayOperator op = build_delay_operator(at, node);
  const NoiseModel noise{scenario_.ar_coefficient, scenario_.passive.num_samples};
  Eigen::MatrixXd sigma = source_power_[static_cast<std::size_t>(node)] * op.assembled * op.assembled.transpose();
  const Eigen::MatrixXd r = ar1_covariance(noise);
  const int n = scenario_.passive.num_samples;
  for (int m = 0; m < op.num_sensors(); ++m) sigma.block(m * n, m * n, n, n) += r;
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw ConditioningError("passive covariance is not positive definite", 0.0);
  const Eigen::VectorXd z = llt.matrixL().solve(y);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * (log_det + z.squaredNorm());
}

double LikelihoodModel::negative_log_likelihood(const Measurements& y, const Eigen::VectorXd& phi) const {
  const Vec2 p(phi(0), phi(1));
  double total = 0.0;
  if (case_id_ != FusionCase::bistatic_only) {
    total += passive_nll(0, y.passive[0], p) + passive_nll(1, y.passive[1], p);
  }
  if (case_id_ != FusionCase::passive_only) {
    const ParamVector theta{p.x(), p.y(), doppler_scale_at(scenario_, p) + phi(2)};
    const BistaticMean mean = bistatic_mean(scenario_, waveform_, setup_, theta);
    const Ar1Whitener whitener(scenario_.ar_coefficient);
    total += 0.5 * whitener.whiten(Eigen::VectorXd(y.bistatic - mean.values), setup_.window.num_samples).squaredNorm();
  }
  return total;
}

FimMatrix LikelihoodModel::fim() const {
  FimMatrix f1 = FimMatrix::Zero();
  FimMatrix f2 = FimMatrix::Zero();
  FimMatrix fb = FimMatrix::Zero();
  if (case_id_ != FusionCase::bistatic_only) {
    f1 = fim_passive(scenario_, 0, source_power_[0]);
    f2 = fim_passive(scenario_, 1, source_power_[1]);
  }
  if (case_id_ != FusionCase::passive_only) fb = fim_bistatic(scenario_, waveform_, setup_);
  return fuse(case_id_, f1, f2, fb);
}

Eigen::MatrixXd LikelihoodModel::crlb() const {
  if (!bound_) {
    throw ConfigError("Monte-Carlo check refused: the FIM is singular for case " + std::to_string(to_int(case_id_)) +
                      " at this geometry, so no finite bound exists to compare against");
  }
  return *bound_;
}

namespace {

// Least-squares quadratic f(s) = c + g^T s + 1/2 s^T H s through stencil samples.
struct QuadraticFit {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

QuadraticFit fit_quadratic(const std::vector<Eigen::VectorXd>& points, const std::vector<double>& values, int k) {
  const int terms = 1 + k + k * (k + 1) / 2;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(points.size()), terms);
  Eigen::VectorXd b(static_cast<Eigen::Index>(points.size()));
  for (std::size_t r = 0; r < points.size(); ++r) {
    const auto& s = points[r];
    int col = 0;
    a(static_cast<Eigen::Index>(r), col++) = 1.0;
    for (int i = 0; i < k; ++i) a(static_cast<Eigen::Index>(r), col++) = s(i);
    for (int i = 0; i < k; ++i) {
      for (int j = i; j < k; ++j) {
        a(static_cast<Eigen::Index>(r), col++) = i == j ? 0.5 * s(i) * s(i) : s(i) * s(j);
      }
    }
    b(static_cast<Eigen::Index>(r)) = values[r];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  QuadraticFit fit{coef.segment(1, k), Eigen::MatrixXd(k, k)};
  int col = 1 + k;
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      fit.hessian(i, j) = coef(col);
      fit.hessian(j, i) = coef(col);
      ++col;
    }
  }
  return fit;
}

// All points of {-1, 0, 1}^k (or the coarse grid) in lexicographic order.
std::vector<Eigen::VectorXd> lattice(int k, const std::vector<double>& levels) {
  std::vector<Eigen::VectorXd> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
  while (true) {
    Eigen::VectorXd s(k);
    for (int i = 0; i < k; ++i) s(i) = levels[idx[static_cast<std::size_t>(i)]];
    out.push_back(s);
    int pos = k - 1;
    while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == levels.size()) idx[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
  return out;
}

}  // namespace

Eigen::VectorXd ml_estimate(const LikelihoodModel& model, const Measurements& y, const McOptions& options,
                            bool* converged) {
  const int k = model.dimension();
  const Eigen::MatrixXd scale = model.crlb().llt().matrixL();
  const auto nll = [&](const Eigen::VectorXd& phi) { return model.negative_log_likelihood(y, phi); };

  std::vector<double> coarse_levels;
  for (int i = 0; i < options.grid_points; ++i) {
    coarse_levels.push_back(options.grid_points == 1
                                ? 0.0
                                : -options.grid_span + 2.0 * options.grid_span * i / (options.grid_points - 1));
  }
  Eigen::VectorXd centre = model.truth();
  double best = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd origin = centre;
  for (const auto& z : lattice(k, coarse_levels)) {
    const Eigen::VectorXd phi = origin + scale * z;
    const double f = nll(phi);
    if (f < best) {
      best = f;
      centre = phi;
    }
  }

  const std::vector<Eigen::VectorXd> stencil = lattice(k, {-1.0, 0.0, 1.0});
  double h = 1.0;
  bool done = false;
  for (int iter = 0; iter < options.max_refinements && !done; ++iter) {
    std::vector<double> values;
    values.reserve(stencil.size());
    double stencil_best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd stencil_arg = Eigen::VectorXd::Zero(k);
    for (const auto& s : stencil) {
      const double f = nll(centre + scale * (h * s));
      values.push_back(f);
      if (f < stencil_best) {
        stencil_best = f;
        stencil_arg = s;
      }
    }
    const QuadraticFit fit = fit_quadratic(stencil, values, k);
    const Eigen::LLT<Eigen::MatrixXd> hess(fit.hessian);
    Eigen::VectorXd step;
    if (hess.info() == Eigen::Success) {
      step = -hess.solve(fit.gradient);
      if (step.norm() > 2.0) step *= 2.0 / step.norm();
    } else {
      step = stencil_arg;
    }
    const Eigen::VectorXd candidate = centre + scale * (h * step);
    if (nll(candidate) <= stencil_best) {
      centre = candidate;
      const double moved = h * step.norm();
      done = moved < 1e-6;
      h = std::clamp(2.0 * moved, 1e-4, 1.0);
    } else if (stencil_arg.squaredNorm() > 0.0) {
      centre = centre + scale * (h * stencil_arg);
    } else {
      // The centre beats both the model step and its neighbours: the minimum lies
      // inside the stencil, so tighten it.
      h *= 0.25;
      done = h < 1e-6;
    }
  }
  if (converged) *converged = done;
  return centre;
}

Measurements simulate_measurements(const Scenario& scenario, const SampledWaveform& waveform, std::uint64_t seed) {
  return LikelihoodModel(scenario, waveform, FusionCase::fused).simulate(seed);
}

McReport mc_crlb_check(const Scenario& scenario, const SampledWaveform& waveform, const McOptions& options) {
  if (options.num_trials < 2) throw ConfigError("Monte-Carlo check needs num_trials >= 2");
  if (options.grid_points < 1) throw ConfigError("Monte-Carlo coarse grid needs at least one point per axis");
  const LikelihoodModel model(scenario, waveform, options.case_id);
  const Eigen::MatrixXd bound = model.crlb();
  const int k = model.dimension();

  std::vector<Eigen::VectorXd> errors(static_cast<std::size_t>(options.num_trials));
  std::vector<char> converged(static_cast<std::size_t>(options.num_trials), 0);
  const Eigen::VectorXd truth = model.truth();
  parallel_for(errors.size(), options.workers, [&](std::size_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    std::mt19937_64 stream(seq);
    const Measurements y = model.simulate(stream());
    bool ok = false;
    errors[trial] = ml_estimate(model, y, options, &ok) - truth;
    converged[trial] = ok ? 1 : 0;
  });

  McReport report;
  report.case_id = options.case_id;
  report.num_trials = options.num_trials;
  report.parameters = {"x", "y", "delta_eta"};
  report.parameters.resize(static_cast<std::size_t>(k));
  report.crlb = bound;
  report.mean_error = Eigen::VectorXd::Zero(k);
  for (const auto& e : errors) report.mean_error += e;
  report.mean_error /= options.num_trials;
  report.empirical_covariance = Eigen::MatrixXd::Zero(k, k);
  for (const auto& e : errors) {
    const Eigen::VectorXd d = e - report.mean_error;
    report.empirical_covariance += d * d.transpose();
  }
  report.empirical_covariance /= options.num_trials - 1;
  report.efficiency = report.empirical_covariance.diagonal().cwiseQuotient(bound.diagonal());

  const Eigen::MatrixXd l = bound.llt().matrixL();
  const Eigen::MatrixXd half = l.triangularView<Eigen::Lower>().solve(report.empirical_covariance);
  Eigen::MatrixXd whitened = l.triangularView<Eigen::Lower>().solve(half.transpose());
  whitened = 0.5 * (whitened + whitened.transpose());
  report.min_whitened_eigenvalue =
      (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(whitened).eigenvalues().array() - 1.0).minCoeff();
  report.standard_error = std::sqrt(2.0 / (options.num_trials - 1));
  for (char c : converged) report.unconverged_trials += c ? 0 : 1;
  return report;
}

std::string format_report(const McReport& r) {
  std::ostringstream out;
  char line[256];
  out << "case " << to_int(r.case_id) << ", " << r.num_trials << " trials";
  if (r.unconverged_trials > 0) out << " (" << r.unconverged_trials << " hit the refinement limit)";
  out << "\n";
  std::snprintf(line, sizeof line, "%-10s %14s %14s %14s %10s\n", "parameter", "mean_error", "empirical_var",
                "crlb", "var/crlb");
  out << line;
  for (std::size_t i = 0; i < r.parameters.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    std::snprintf(line, sizeof line, "%-10s %14.6e %14.6e %14.6e %10.4f\n", r.parameters[i].c_str(), r.mean_error(k),
                  r.empirical_covariance(k, k), r.crlb(k, k), r.efficiency(k));
    out << line;
  }
  std::snprintf(line, sizeof line, "min eig(L^-1 C L^-T - I) = %.4f, 3 standard errors = %.4f -> %s\n",
                r.min_whitened_eigenvalue, 3.0 * r.standard_error,
                r.bound_respected() ? "bound respected" : "BOUND VIOLATED");
  out << line;
  return out.str();
}

}  // namespace sonarcrlb
