#pragma once

// Sonar-equation levels in dB. Every "log" is log10.

namespace sonarcrlb {

struct NoiseModel;

/// Wind-driven ambient noise environment.
struct Environment {
  double wind_speed_knots = 6.0;
  double listening_frequency_khz = 6.0;

  void validate() const;
};

/// Target strength of the reflecting AUV [dB].
inline constexpr double kTargetStrengthDb = -16.0;

/// SL = 60 log(v) + 9 log(W) - 20 log(f) + 35, v in knots, W in tonnes, f in kHz.
double passive_source_level_db(double speed_knots, double weight_tonnes, double frequency_khz);

/// TL = 17 log(r), r in meters.
double transmission_loss_db(double range_m);

/// NL = 35 + 24 log(1 + w_s) - 17 log(f), w_s in knots, f in kHz.
double noise_level_db(double wind_speed_knots, double frequency_khz);

/// SL = 171 + 10 log(P), P in watts.
double active_source_level_db(double power_watt);

/// Per-sensor passive SNR: SL - TL(r) - NL.
double passive_snr_db(double range_m, double frequency_khz, double speed_knots,
                      double weight_tonnes, double wind_speed_knots);

/// Bistatic echo SNR: SL_active + TS - TL(r1) - TL(r2) - NL.
double active_snr_db(double power_watt, double r1_m, double r2_m, double frequency_khz,
                     double wind_speed_knots);

/// Linear signal power for a given SNR relative to the lag-0 noise variance 1/(1 - a^2).
double snr_db_to_signal_power(double snr_db, const NoiseModel& noise);

}  // namespace sonarcrlb
