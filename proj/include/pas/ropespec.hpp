// Temporal rotary frequency line sets and time scales.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace pas {

using cplx = std::complex<double>;

/// Ordered set of rotary angular frequencies (radians per position unit).
///
/// Lines follow the standard rotary schedule base^(-2i/d) with d = 2 * pair_count,
/// so lines[0] == 1 and the sequence is strictly decreasing. Instances are
/// immutable once built; use make_lineset() or FrequencyLineSet::from_lines().
class FrequencyLineSet {
 public:
  /// Builds a set from explicit lines. Lines must be positive, finite and
  /// strictly decreasing; base is recorded as metadata (0 if unknown).
  static FrequencyLineSet from_lines(std::vector<double> lines, double base = 0.0) {
    if (lines.empty()) {
      throw std::invalid_argument("FrequencyLineSet: at least one line is required");
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!std::isfinite(lines[i]) || lines[i] <= 0.0) {
        throw std::invalid_argument("FrequencyLineSet: lines must be positive and finite");
      }
      if (i > 0 && !(lines[i] < lines[i - 1])) {
        throw std::invalid_argument("FrequencyLineSet: lines must be strictly decreasing");
      }
    }
    FrequencyLineSet ls;
    ls.lines_ = std::move(lines);
    ls.base_ = base;
    return ls;
  }

  const std::vector<double>& lines() const noexcept { return lines_; }
  double base() const noexcept { return base_; }
  std::size_t pair_count() const noexcept { return lines_.size(); }
  double max_line() const noexcept { return lines_.front(); }
  double min_line() const noexcept { return lines_.back(); }
  double operator[](std::size_t i) const { return lines_[i]; }

 private:
  FrequencyLineSet() = default;

  std::vector<double> lines_;
  double base_ = 0.0;
};

/// Standard rotary schedule: lines[i] = base^(-2i / (2 * pair_count)).
inline FrequencyLineSet make_lineset(int pair_count, double base) {
  if (pair_count < 1) {
    throw std::invalid_argument("make_lineset: pair_count must be >= 1");
  }
  if (!std::isfinite(base) || !(base > 1.0)) {
    throw std::invalid_argument("make_lineset: base must be > 1");
  }
  const double d = 2.0 * pair_count;
  std::vector<double> lines(static_cast<std::size_t>(pair_count));
  for (int i = 0; i < pair_count; ++i) {
    lines[static_cast<std::size_t>(i)] = std::pow(base, -2.0 * i / d);
  }
  return FrequencyLineSet::from_lines(std::move(lines), base);
}

/// 64 pairs at base 10000: the reference line set used throughout the tests.
inline FrequencyLineSet default_lineset() { return make_lineset(64, 10000.0); }

enum class TimeUnit { bin, frame, second };

inline const char* to_string(TimeUnit u) {
  switch (u) {
    case TimeUnit::bin: return "bin";
    case TimeUnit::frame: return "frame";
    case TimeUnit::second: return "second";
  }
  return "bin";
}

inline TimeUnit time_unit_from_string(const std::string& s) {
  if (s == "bin") return TimeUnit::bin;
  if (s == "frame") return TimeUnit::frame;
  if (s == "second") return TimeUnit::second;
  throw std::invalid_argument("unknown time unit: " + s);
}

/// Position units per time unit (delta position = alpha * delta time).
class TimeScale {
 public:
  explicit TimeScale(double alpha = 1.0, TimeUnit unit = TimeUnit::bin) : alpha_(alpha), unit_(unit) {
    if (!std::isfinite(alpha) || !(alpha > 0.0)) {
      throw std::invalid_argument("TimeScale: alpha must be positive and finite");
    }
  }

  /// One bin is one position unit. A time unit of frames or seconds needs
  /// the number of such units per bin.
  static TimeScale for_unit(TimeUnit unit, double units_per_bin = 1.0) {
    if (unit == TimeUnit::bin) return TimeScale(1.0, unit);
    if (!std::isfinite(units_per_bin) || !(units_per_bin > 0.0)) {
      throw std::invalid_argument("TimeScale: units_per_bin must be positive");
    }
    return TimeScale(1.0 / units_per_bin, unit);
  }

  double alpha() const noexcept { return alpha_; }
  TimeUnit unit() const noexcept { return unit_; }

  /// Same unit, alpha multiplied by `factor`.
  TimeScale scaled(double factor) const { return TimeScale(alpha_ * factor, unit_); }

 private:
  double alpha_;
  TimeUnit unit_;
};

/// Per-pair complex coefficients C_i = z_i * conj(w_i) of a query/key pair.
struct ComplexCoefficients {
  std::vector<cplx> values;

  std::size_t size() const noexcept { return values.size(); }

  void require_matches(const FrequencyLineSet& ls) const {
    if (values.size() != ls.pair_count()) {
      throw std::invalid_argument("ComplexCoefficients: length " + std::to_string(values.size()) +
                                  " does not match pair count " + std::to_string(ls.pair_count()));
    }
  }

  /// Coefficients of real query/key vectors whose pair i occupies (2i, 2i+1).
  template <typename Vec>
  static ComplexCoefficients from_vectors(const Vec& q, const Vec& k, std::size_t pair_count) {
    if (q.size() < 2 * pair_count || k.size() < 2 * pair_count) {
      throw std::invalid_argument("ComplexCoefficients: vectors shorter than 2 * pair_count");
    }
    ComplexCoefficients c;
    c.values.resize(pair_count);
    for (std::size_t i = 0; i < pair_count; ++i) {
      const cplx z(q[2 * i], q[2 * i + 1]);
      const cplx w(k[2 * i], k[2 * i + 1]);
      c.values[i] = z * std::conj(w);
    }
    return c;
  }
};

/// Largest sampling period for which every line is below Nyquist:
/// pi / (alpha * max line).
inline double nyquist_period(const FrequencyLineSet& ls, const TimeScale& ts) {
  return std::numbers::pi / (ts.alpha() * ls.max_line());
}

inline void to_json(nlohmann::json& j, const FrequencyLineSet& ls) {
  j = nlohmann::json{{"base", ls.base()}, {"pair_count", ls.pair_count()}, {"lines", ls.lines()}};
}

inline FrequencyLineSet lineset_from_json(const nlohmann::json& j) {
  auto lines = j.at("lines").get<std::vector<double>>();
  if (j.at("pair_count").get<std::size_t>() != lines.size()) {
    throw std::invalid_argument("FrequencyLineSet JSON: pair_count does not match lines");
  }
  return FrequencyLineSet::from_lines(std::move(lines), j.at("base").get<double>());
}

}  // namespace pas
