#include "fibrebend/schedule.hpp"

#include "fibrebend/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fibrebend {

namespace {

int step_count(const SteppedSchedule& s) { return static_cast<int>(std::ceil(s.p_max / s.increment - 1e-9)); }

}  // namespace

void validate(const PressureSchedule& schedule) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ProportionalSchedule>) {
          if (!(s.t_end > 0.0)) throw ValidationError("t_end must be > 0");
          if (!(s.p_max >= 0.0)) throw ValidationError("p_max must be >= 0");
          if (s.samples < 1) throw ValidationError("samples must be >= 1");
        } else if constexpr (std::is_same_v<S, SteppedSchedule>) {
          if (!(s.increment > 0.0)) throw ValidationError("stepped increment must be > 0");
          if (!(s.hold > 0.0)) throw ValidationError("stepped hold must be > 0");
          if (!(s.p_max > 0.0)) throw ValidationError("p_max must be > 0");
        } else {
          if (s.pressures.empty()) throw ValidationError("explicit schedule is empty");
          for (double p : s.pressures)
            if (!(p >= 0.0)) throw ValidationError("pressures must be >= 0");
        }
      },
      schedule);
}

double schedule_duration(const PressureSchedule& schedule) {
  validate(schedule);
  return std::visit(
      [](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ProportionalSchedule>) {
          return s.t_end;
        } else if constexpr (std::is_same_v<S, SteppedSchedule>) {
          return step_count(s) * s.hold * (s.with_reverse ? 2.0 : 1.0);
        } else {
          return static_cast<double>(s.pressures.size() - 1);
        }
      },
      schedule);
}

double time_to_pressure(const PressureSchedule& schedule, double t) {
  const double end = schedule_duration(schedule);
  if (!(t >= 0.0 && t <= end)) throw ValidationError(fmt::format("time {} outside schedule span [0, {}]", t, end));
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ProportionalSchedule>) {
          return s.p_max * t / s.t_end;
        } else if constexpr (std::is_same_v<S, SteppedSchedule>) {
          const int n = step_count(s);
          const double up = n * s.hold;
          if (t <= up) return std::min(s.p_max, std::ceil(t / s.hold - 1e-12) * s.increment);
          const double k = std::ceil((t - up) / s.hold - 1e-12);
          return std::max(0.0, std::min(s.p_max, (n - k) * s.increment));
        } else {
          const auto i = static_cast<std::size_t>(std::floor(t));
          if (i + 1 >= s.pressures.size()) return s.pressures.back();
          const double f = t - static_cast<double>(i);
          return (1.0 - f) * s.pressures[i] + f * s.pressures[i + 1];
        }
      },
      schedule);
}

std::vector<double> pressure_levels(const PressureSchedule& schedule) {
  validate(schedule);
  return std::visit(
      [](const auto& s) -> std::vector<double> {
        using S = std::decay_t<decltype(s)>;
        std::vector<double> out;
        if constexpr (std::is_same_v<S, ProportionalSchedule>) {
          for (int k = 0; k <= s.samples; ++k) out.push_back(s.p_max * k / s.samples);
        } else if constexpr (std::is_same_v<S, SteppedSchedule>) {
          const int n = step_count(s);
          for (int k = 0; k <= n; ++k) out.push_back(std::min(s.p_max, k * s.increment));
          if (s.with_reverse)
            for (int k = n - 1; k >= 0; --k) out.push_back(std::min(s.p_max, k * s.increment));
        } else {
          out = s.pressures;
        }
        return out;
      },
      schedule);
}

std::size_t forward_count(const PressureSchedule& schedule) {
  if (const auto* s = std::get_if<SteppedSchedule>(&schedule); s && s->with_reverse)
    return static_cast<std::size_t>(step_count(*s)) + 1;
  return pressure_levels(schedule).size();
}

PressureSchedule schedule_from_kv(const KeyValues& kv) {
  KvReader r(kv, "schedule");
  const std::string kind = r.get_string("kind", "proportional");
  PressureSchedule out;
  if (kind == "proportional") {
    ProportionalSchedule s;
    s.t_end = r.get_double("t_end", s.t_end);
    s.p_max = r.get_double("p_max", s.p_max);
    s.samples = r.get_int("samples", s.samples);
    out = s;
  } else if (kind == "stepped") {
    SteppedSchedule s;
    s.increment = r.get_double("increment", s.increment);
    s.hold = r.get_double("hold", s.hold);
    s.p_max = r.get_double("p_max", s.p_max);
    s.with_reverse = r.get_bool("with_reverse", s.with_reverse);
    out = s;
  } else if (kind == "explicit") {
    ExplicitSchedule s;
    std::stringstream ss(r.get_string("pressures", ""));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        s.pressures.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ValidationError("schedule.pressures: '" + tok + "' is not a number");
      }
    }
    out = s;
  } else {
    throw ValidationError("schedule.kind must be proportional, stepped or explicit");
  }
  r.finish();
  validate(out);
  return out;
}

nlohmann::json to_json(const PressureSchedule& schedule) {
  return std::visit(
      [](const auto& s) -> nlohmann::json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ProportionalSchedule>) {
          return {{"kind", "proportional"}, {"t_end", s.t_end}, {"p_max", s.p_max}, {"samples", s.samples}};
        } else if constexpr (std::is_same_v<S, SteppedSchedule>) {
          return {{"kind", "stepped"},
                  {"increment", s.increment},
                  {"hold", s.hold},
                  {"p_max", s.p_max},
                  {"with_reverse", s.with_reverse}};
        } else {
          return {{"kind", "explicit"}, {"pressures", s.pressures}};
        }
      },
      schedule);
}

}  // namespace fibrebend
