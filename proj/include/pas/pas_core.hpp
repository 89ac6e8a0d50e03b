// Phase groups, the aggregated (effective) kernel, the aggregation gain and the
// mean-square local variation with its smoothing inequality.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pas/kernel.hpp"
#include "pas/ropespec.hpp"

namespace pas {

/// Head groups sharing one temporal offset each (offsets in bin units).
///
/// Weights are nonnegative and sum to one. Heads map to groups either in
/// contiguous equal blocks (the default) or through an explicit list.
class PhaseConfig {
 public:
  PhaseConfig(std::vector<double> offsets, std::vector<double> weights,
              std::optional<std::vector<int>> assignment = std::nullopt)
      : offsets_(std::move(offsets)), weights_(std::move(weights)), assignment_(std::move(assignment)) {
    if (offsets_.empty()) throw std::invalid_argument("PhaseConfig: at least one group is required");
    if (offsets_.size() != weights_.size()) {
      throw std::invalid_argument("PhaseConfig: offsets and weights differ in length");
    }
    double sum = 0.0;
    for (std::size_t g = 0; g < offsets_.size(); ++g) {
      if (!std::isfinite(offsets_[g])) throw std::invalid_argument("PhaseConfig: offsets must be finite");
      if (!std::isfinite(weights_[g]) || weights_[g] < 0.0) {
        throw std::invalid_argument("PhaseConfig: weights must be nonnegative and finite");
      }
      sum += weights_[g];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("PhaseConfig: weights must sum to 1");
    if (assignment_) {
      for (int g : *assignment_) {
        if (g < 0 || static_cast<std::size_t>(g) >= offsets_.size()) {
          throw std::invalid_argument("PhaseConfig: assignment refers to a missing group");
        }
      }
    }
  }

  /// Uniform weights over the given offsets, blocked assignment.
  static PhaseConfig uniform(std::vector<double> offsets) {
    const std::size_t k = offsets.size();
    if (k == 0) throw std::invalid_argument("PhaseConfig: at least one group is required");
    return PhaseConfig(std::move(offsets), std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  std::size_t group_count() const noexcept { return offsets_.size(); }
  const std::vector<double>& offsets() const noexcept { return offsets_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::optional<std::vector<int>>& assignment() const noexcept { return assignment_; }

  double spread() const {
    const auto [lo, hi] = std::minmax_element(offsets_.begin(), offsets_.end());
    return *hi - *lo;
  }

  /// Offset spread of at most one bin keeps every head's bins in order.
  bool order_preserving() const { return spread() <= 1.0; }

  bool all_offsets_zero() const {
    return std::all_of(offsets_.begin(), offsets_.end(), [](double d) { return d == 0.0; });
  }

  /// Group of query head `head` out of `head_count`.
  std::size_t group_of_head(std::size_t head, std::size_t head_count) const {
    if (head >= head_count) throw std::invalid_argument("PhaseConfig: head index out of range");
    if (assignment_) {
      if (head >= assignment_->size()) {
        throw std::invalid_argument("PhaseConfig: head " + std::to_string(head) + " is not assigned to a group");
      }
      return static_cast<std::size_t>((*assignment_)[head]);
    }
    return head * group_count() / head_count;
  }

  double offset_of_head(std::size_t head, std::size_t head_count) const {
    return offsets_[group_of_head(head, head_count)];
  }

 private:
  std::vector<double> offsets_;
  std::vector<double> weights_;
  std::optional<std::vector<int>> assignment_;
};

/// Two groups, offsets (0, 0.5) bins, uniform weights.
inline PhaseConfig default_phase_config() { return PhaseConfig::uniform({0.0, 0.5}); }

inline void to_json(nlohmann::json& j, const PhaseConfig& cfg) {
  j = nlohmann::json{{"K", cfg.group_count()}, {"offsets", cfg.offsets()}, {"weights", cfg.weights()}};
  if (cfg.assignment()) {
    j["assignment"] = *cfg.assignment();
  } else {
    j["assignment"] = "blocked";
  }
}

inline PhaseConfig phase_config_from_json(const nlohmann::json& j) {
  auto offsets = j.at("offsets").get<std::vector<double>>();
  auto weights = j.at("weights").get<std::vector<double>>();
  if (j.at("K").get<std::size_t>() != offsets.size()) {
    throw std::invalid_argument("PhaseConfig JSON: K does not match offsets");
  }
  std::optional<std::vector<int>> assignment;
  if (j.contains("assignment") && j.at("assignment").is_array()) {
    assignment = j.at("assignment").get<std::vector<int>>();
  } else if (j.contains("assignment") && j.at("assignment") != "blocked") {
    throw std::invalid_argument("PhaseConfig JSON: assignment must be \"blocked\" or a list");
  }
  return PhaseConfig(std::move(offsets), std::move(weights), std::move(assignment));
}

/// m_eff(lag) = sum_g a_g m(lag + delta_g).
inline cplx effective_kernel_value(const FrequencyLineSet& ls, const TimeScale& ts, const PhaseConfig& cfg,
                                   double lag) {
  cplx acc{0.0, 0.0};
  for (std::size_t g = 0; g < cfg.group_count(); ++g) {
    if (cfg.weights()[g] == 0.0) continue;
    acc += cfg.weights()[g] * kernel_value(ls, ts, lag + cfg.offsets()[g]);
  }
  return acc;
}

inline KernelGrid effective_kernel(const FrequencyLineSet& ls, const TimeScale& ts, const PhaseConfig& cfg,
                                   std::vector<double> lags) {
  require_strictly_increasing(lags, "effective_kernel");
  KernelGrid g{std::move(lags), {}, ts};
  g.values.reserve(g.lags.size());
  for (double lag : g.lags) g.values.push_back(effective_kernel_value(ls, ts, cfg, lag));
  return g;
}

/// K(omega) = sum_g a_g exp(j * omega * alpha * delta_g).
inline cplx aggregation_gain(const PhaseConfig& cfg, const TimeScale& ts, double omega) {
  cplx acc{0.0, 0.0};
  for (std::size_t g = 0; g < cfg.group_count(); ++g) {
    acc += cfg.weights()[g] * std::polar(1.0, omega * ts.alpha() * cfg.offsets()[g]);
  }
  return acc;
}

/// Finite-horizon mean-square local variation of uniformly sampled values:
/// (1/T) * sum (f(tau + eps) - f(tau))^2 * grid_step over the valid range.
/// `epsilon` must be an integer multiple of `grid_step`.
inline double variation(std::span<const double> samples, double grid_step, double epsilon) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("variation: grid_step must be positive");
  const double ratio = std::abs(epsilon) / grid_step;
  const double k_real = std::round(ratio);
  if (std::abs(ratio - k_real) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("variation: epsilon is not a multiple of grid_step");
  }
  const auto k = static_cast<std::size_t>(k_real);
  if (samples.size() < k + 2) throw std::invalid_argument("variation: need at least 2 samples beyond epsilon");
  if (k == 0) return 0.0;
  const std::size_t n = samples.size() - k;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = samples[i + k] - samples[i];
    acc += d * d * grid_step;
  }
  return acc / (static_cast<double>(n) * grid_step);
}

/// Re{ sum_g a_g m(k * step + delta_g) } for k = 0 .. count-1.
///
/// Each shifted kernel is evaluated directly at its shifted arguments; phasors
/// advance by a fixed rotation per step and are re-anchored periodically so
/// rounding drift stays below 1e-13.
inline std::vector<double> sample_shifted_kernel_re(const FrequencyLineSet& ls, const TimeScale& ts,
                                                    std::span<const double> offsets,
                                                    std::span<const double> weights, double step,
                                                    std::size_t count) {
  constexpr std::size_t kResync = 256;
  const std::size_t m = ls.pair_count();
  std::vector<std::size_t> active;
  for (std::size_t g = 0; g < offsets.size(); ++g) {
    if (weights[g] != 0.0) active.push_back(g);
  }
  std::vector<cplx> advance(m);
  for (std::size_t i = 0; i < m; ++i) advance[i] = std::polar(1.0, ls[i] * ts.alpha() * step);
  std::vector<cplx> ph(active.size() * m);
  auto anchor = [&](std::size_t k) {
    const double tau = step * static_cast<double>(k);
    for (std::size_t a = 0; a < active.size(); ++a) {
      const double shift = offsets[active[a]];
      for (std::size_t i = 0; i < m; ++i) ph[a * m + i] = std::polar(1.0, ls[i] * ts.alpha() * (tau + shift));
    }
  };
  std::vector<double> out(count);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < count; ++k) {
    if (k % kResync == 0) anchor(k);
    double v = 0.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      double re = 0.0;
      cplx* p = ph.data() + a * m;
      for (std::size_t i = 0; i < m; ++i) {
        re += p[i].real();
        p[i] *= advance[i];
      }
      v += weights[active[a]] * re * inv_m;
    }
    out[k] = v;
  }
  return out;
}

/// 64 periods of the slowest line.
inline double default_variation_horizon(const FrequencyLineSet& ls, const TimeScale& ts) {
  return 64.0 * 2.0 * std::numbers::pi / (ts.alpha() * ls.min_line());
}

struct SmoothingCheck {
  double v_base = 0.0;
  double v_eff = 0.0;
  bool holds = false;
  bool strict = false;

  double relative_reduction() const { return v_base > 0.0 ? (v_base - v_eff) / v_base : 0.0; }
};

/// Compares the variation of Re{m_eff} against Re{m} on [0, horizon + epsilon].
/// The reference is the weight-averaged variation of the shifted copies
/// m(. + delta_g) on the same grid: a common shift then costs nothing, the
/// pointwise convexity bound makes the finite-grid comparison exact, and the
/// reference tends to the variation of m as the horizon grows. `holds` allows
/// `holds_rel_tol` for rounding; `strict` requires a relative reduction above
/// `strict_rel_tol`.
inline SmoothingCheck check_smoothing_inequality(const FrequencyLineSet& ls, const TimeScale& ts,
                                                 const PhaseConfig& cfg, double epsilon, double horizon,
                                                 double grid_step, double holds_rel_tol = 1e-6,
                                                 double strict_rel_tol = 1e-4) {
  if (!(horizon > 0.0)) throw std::invalid_argument("check_smoothing_inequality: horizon must be positive");
  if (!(grid_step > 0.0)) throw std::invalid_argument("check_smoothing_inequality: grid_step must be positive");
  const auto count = static_cast<std::size_t>(std::floor((horizon + std::abs(epsilon)) / grid_step)) + 1;
  const double one = 1.0;
  double v_ref = 0.0;
  for (std::size_t g = 0; g < cfg.group_count(); ++g) {
    const double w = cfg.weights()[g];
    if (w == 0.0) continue;
    const double off = cfg.offsets()[g];
    v_ref += w * variation(sample_shifted_kernel_re(ls, ts, {&off, 1}, {&one, 1}, grid_step, count), grid_step,
                           epsilon);
  }
  const auto eff = sample_shifted_kernel_re(ls, ts, cfg.offsets(), cfg.weights(), grid_step, count);
  SmoothingCheck r;
  r.v_base = v_ref;
  r.v_eff = variation(eff, grid_step, epsilon);
  r.holds = r.v_eff <= r.v_base * (1.0 + holds_rel_tol);
  r.strict = r.v_eff < r.v_base * (1.0 - strict_rel_tol);
  return r;
}

}  // namespace pas
