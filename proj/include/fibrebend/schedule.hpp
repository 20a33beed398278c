#pragma once

// Pressure versus time. Pressures are kPa; times are seconds for stepped
// protocols and dimensionless step time otherwise.

#include "fibrebend/config.hpp"

#include <nlohmann/json.hpp>

#include <variant>
#include <vector>

namespace fibrebend {

/// p = p_max * t / t_end, sampled at `samples` + 1 evenly spaced times.
struct ProportionalSchedule {
  double t_end = 1.0;
  double p_max = 100.0;
  int samples = 20;
};

/// Staircase: each level is held for `hold` seconds. The first level
/// (`increment`) is applied immediately after t = 0. With `with_reverse`
/// the same levels are retraced back down to zero.
struct SteppedSchedule {
  double increment = 10.0;
  double hold = 5.0;
  double p_max = 100.0;
  bool with_reverse = false;
};

/// Pressures at t = 0, 1, 2, ... with linear interpolation between.
struct ExplicitSchedule {
  std::vector<double> pressures;
};

using PressureSchedule = std::variant<ProportionalSchedule, SteppedSchedule, ExplicitSchedule>;

void validate(const PressureSchedule& schedule);

double schedule_duration(const PressureSchedule& schedule);

double time_to_pressure(const PressureSchedule& schedule, double t);

/// Discrete pressures at which quasi-static solutions are requested, in
/// schedule order (a reverse leg follows the forward leg).
std::vector<double> pressure_levels(const PressureSchedule& schedule);

/// Number of leading entries of `pressure_levels` that form the loading leg.
std::size_t forward_count(const PressureSchedule& schedule);

PressureSchedule schedule_from_kv(const KeyValues& kv);
nlohmann::json to_json(const PressureSchedule& schedule);

}  // namespace fibrebend
