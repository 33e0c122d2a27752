#include <cmath>

#include "doctest.h"
#include "random_scenarios.hpp"
#include "sonarcrlb/bistatic_fim.hpp"
#include "sonarcrlb/errors.hpp"
#include "sonarcrlb/mc_validate.hpp"

using namespace sonarcrlb;

namespace {

Scenario mc_scenario(double power = 1e4) {
  Scenario sc;
  sc.nodes[0].origin = Vec2(-100.0, 0.0);
  sc.nodes[1].origin = Vec2(100.0, 0.0);
  for (auto& node : sc.nodes) node.num_sensors = 2;
  sc.target.position = Vec2(30.0, 120.0);
  sc.target.velocity = Vec2(0.0, 5.0);
  sc.num_samples = 64;
  sc.passive.num_samples = 64;
  sc.passive.sample_rate = 64 / 0.025;
  sc.transmit_power_watt = power;
  return sc;
}

SampledWaveform mc_waveform(double energy = 40.0) {
  return testing_support::short_burst(1, 3, energy);
}

}  // namespace

TEST_SUITE("mc_validate") {
  TEST_CASE("AR(1) noise is reproducible and has the stationary variance") {
    const Eigen::VectorXd a = simulate_ar1_noise(0.5, 4000, 2, 11);
    const Eigen::VectorXd b = simulate_ar1_noise(0.5, 4000, 2, 11);
    const Eigen::VectorXd c = simulate_ar1_noise(0.5, 4000, 2, 12);
    CHECK(a == b);
    CHECK(a != c);
    const double var = a.squaredNorm() / static_cast<double>(a.size());
    CHECK(var == doctest::Approx(1.0 / 0.75).epsilon(0.08));
  }

  TEST_CASE("simulated bistatic samples average to the mean model") {
    const Scenario sc = mc_scenario();
    const auto wf = mc_waveform();
    const LikelihoodModel model(sc, wf, FusionCase::bistatic_only);
    const Eigen::VectorXd mean = bistatic_mean(sc, wf, model.bistatic_setup()).values;
    const int trials = 1000;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(mean.size());
    for (int t = 0; t < trials; ++t) acc += model.simulate(static_cast<std::uint64_t>(t)).bistatic;
    acc /= trials;
    // Stationary AR(1) standard deviation 1/sqrt(1 - a^2).
    const double se = std::sqrt(1.0 / 0.75 / trials);
    CHECK((acc - mean).cwiseAbs().maxCoeff() < 5.0 * se);
  }

  TEST_CASE("likelihood is minimized near the truth without noise") {
    const Scenario sc = mc_scenario();
    const auto wf = mc_waveform();
    const LikelihoodModel model(sc, wf, FusionCase::bistatic_only);
    Measurements y = model.simulate(1);
    y.bistatic = bistatic_mean(sc, wf, model.bistatic_setup()).values;
    const Eigen::VectorXd truth = model.truth();
    const Eigen::MatrixXd bound = model.crlb();
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd off = truth;
      off(k) += 0.5 * std::sqrt(bound(k, k));
      CHECK(model.negative_log_likelihood(y, off) > model.negative_log_likelihood(y, truth));
    }
    McOptions opt;
    bool converged = false;
    const Eigen::VectorXd est = ml_estimate(model, y, opt, &converged);
    CHECK(converged);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(est(k) - truth(k)) < 0.05 * std::sqrt(bound(k, k)));
  }

  TEST_CASE("invalid trial counts and singular cases are refused") {
    const Scenario sc = mc_scenario();
    McOptions opt;
    opt.num_trials = 0;
    CHECK_THROWS_AS(mc_crlb_check(sc, mc_waveform(), opt), ConfigError);
    Scenario baseline = sc;
    baseline.target.position = Vec2(30.0, 0.0);
    CHECK_THROWS_AS(LikelihoodModel(baseline, mc_waveform(), FusionCase::passive_only).crlb(), ConfigError);
  }

  TEST_CASE("small run is reproducible, worker independent and near-efficient") {
    McOptions opt;
    opt.num_trials = 60;
    opt.seed = 3;
    const McReport one = mc_crlb_check(mc_scenario(), mc_waveform(), opt);
    opt.workers = 2;
    const McReport two = mc_crlb_check(mc_scenario(), mc_waveform(), opt);
    CHECK(one.empirical_covariance == two.empirical_covariance);
    CHECK(one.unconverged_trials == 0);
    CHECK(one.bound_respected());
    for (int k = 0; k < 3; ++k) {
      CHECK(one.efficiency(k) > 0.5);
      CHECK(one.efficiency(k) < 1.8);
    }
    CHECK(format_report(one).find("var/crlb") != std::string::npos);
  }

  TEST_CASE("doubling waveform energy halves the Doppler variance") {
    McOptions opt;
    opt.num_trials = 120;
    opt.seed = 5;
    const McReport base = mc_crlb_check(mc_scenario(), mc_waveform(40.0), opt);
    const McReport doubled = mc_crlb_check(mc_scenario(), mc_waveform(80.0), opt);
    const double ratio = doubled.empirical_covariance(2, 2) / base.empirical_covariance(2, 2);
    CHECK(ratio > 0.35);
    CHECK(ratio < 0.7);
    CHECK(doubled.crlb(2, 2) / base.crlb(2, 2) == doctest::Approx(0.5).epsilon(1e-9));
  }
}
