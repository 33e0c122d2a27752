#include "sonarcrlb/sonar_equation.hpp"

#include <cmath>
#include <string>

#include "sonarcrlb/errors.hpp"
#include "sonarcrlb/noise.hpp"

namespace sonarcrlb {

namespace {

double checked_log10(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(name) + " must be positive and finite");
  }
  return std::log10(value);
}

}  // namespace

void Environment::validate() const {
  if (!(wind_speed_knots >= 0.0)) throw ConfigError("wind speed must be >= 0");
  if (!(listening_frequency_khz > 0.0)) throw ConfigError("listening frequency must be > 0");
}

double passive_source_level_db(double speed_knots, double weight_tonnes, double frequency_khz) {
  return 60.0 * checked_log10(speed_knots, "target speed") +
         9.0 * checked_log10(weight_tonnes, "target weight") -
         20.0 * checked_log10(frequency_khz, "frequency") + 35.0;
}

double transmission_loss_db(double range_m) { return 17.0 * checked_log10(range_m, "range"); }

double noise_level_db(double wind_speed_knots, double frequency_khz) {
  if (!(wind_speed_knots >= 0.0)) throw DomainError("wind speed must be >= 0");
  return 35.0 + 24.0 * std::log10(1.0 + wind_speed_knots) -
         17.0 * checked_log10(frequency_khz, "frequency");
}

double active_source_level_db(double power_watt) {
  return 171.0 + 10.0 * checked_log10(power_watt, "transmit power");
}

double passive_snr_db(double range_m, double frequency_khz, double speed_knots,
                      double weight_tonnes, double wind_speed_knots) {
  return passive_source_level_db(speed_knots, weight_tonnes, frequency_khz) -
         transmission_loss_db(range_m) - noise_level_db(wind_speed_knots, frequency_khz);
}

double active_snr_db(double power_watt, double r1_m, double r2_m, double frequency_khz,
                     double wind_speed_knots) {
  return active_source_level_db(power_watt) + kTargetStrengthDb - transmission_loss_db(r1_m) -
         transmission_loss_db(r2_m) - noise_level_db(wind_speed_knots, frequency_khz);
}

double snr_db_to_signal_power(double snr_db, const NoiseModel& noise) {
  noise.validate();
  return std::pow(10.0, snr_db / 10.0) * noise.lag0_variance();
}

}  // namespace sonarcrlb
