// Inverse-Fourier time kernel of a rotary line set, exact rotated logits,
// slope estimates and Lipschitz bounds.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pas/report.hpp"
#include "pas/ropespec.hpp"
#include "pas/stats.hpp"

namespace pas {

/// m(lag) = (1/m) * sum_i exp(j * w_i * alpha * lag).
inline cplx kernel_value(const FrequencyLineSet& ls, const TimeScale& ts, double lag) {
  cplx acc{0.0, 0.0};
  for (double w : ls.lines()) acc += std::polar(1.0, w * ts.alpha() * lag);
  return acc / static_cast<double>(ls.pair_count());
}

/// d/dtau Re{m(tau)} = -(1/m) * sum_i w_i * alpha * sin(w_i * alpha * tau).
inline double kernel_derivative_re(const FrequencyLineSet& ls, const TimeScale& ts, double tau) {
  double acc = 0.0;
  for (double w : ls.lines()) {
    const double wa = w * ts.alpha();
    acc -= wa * std::sin(wa * tau);
  }
  return acc / static_cast<double>(ls.pair_count());
}

inline void require_strictly_increasing(std::span<const double> lags, const char* what) {
  if (lags.empty()) throw std::invalid_argument(std::string(what) + ": lag list is empty");
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (!std::isfinite(lags[i])) throw std::invalid_argument(std::string(what) + ": lags must be finite");
    if (i > 0 && !(lags[i] > lags[i - 1])) {
      throw std::invalid_argument(std::string(what) + ": lags must be strictly increasing");
    }
  }
}

/// Complex kernel samples over an increasing lag grid (time units).
struct KernelGrid {
  std::vector<double> lags;
  std::vector<cplx> values;
  TimeScale scale;

  std::size_t size() const noexcept { return lags.size(); }

  std::string to_csv() const {
    std::string out = "lag,re,im\n";
    for (std::size_t j = 0; j < lags.size(); ++j) {
      out += format_real(lags[j]) + "," + format_real(values[j].real()) + "," + format_real(values[j].imag()) + "\n";
    }
    return out;
  }
};

inline KernelGrid eval_kernel(const FrequencyLineSet& ls, const TimeScale& ts, std::vector<double> lags) {
  require_strictly_increasing(lags, "eval_kernel");
  KernelGrid g{std::move(lags), {}, ts};
  g.values.reserve(g.lags.size());
  for (double lag : g.lags) g.values.push_back(kernel_value(ls, ts, lag));
  return g;
}

/// Uniform grid lo, lo + step, ... up to hi (inclusive within half a step).
inline std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("uniform_grid: need step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
  return g;
}

/// Exact rotary logit Re[sum_i C_i exp(j * w_i * alpha * lag)].
inline double rotated_logit(const ComplexCoefficients& coeffs, const FrequencyLineSet& ls, const TimeScale& ts,
                            double lag) {
  coeffs.require_matches(ls);
  double acc = 0.0;
  for (std::size_t i = 0; i < ls.pair_count(); ++i) {
    acc += (coeffs.values[i] * std::polar(1.0, ls[i] * ts.alpha() * lag)).real();
  }
  return acc;
}

/// Several periods of the slowest line.
inline double default_slope_horizon(const FrequencyLineSet& ls, const TimeScale& ts) {
  return 4.0 * std::numbers::pi / (ts.alpha() * ls.min_line());
}

/// (1/m) * sum_i w_i * alpha; no slope of Re{m} can exceed it.
inline double slope_upper_cap(const FrequencyLineSet& ls, const TimeScale& ts) {
  double acc = 0.0;
  for (double w : ls.lines()) acc += w * ts.alpha();
  return acc / static_cast<double>(ls.pair_count());
}

/// Grid estimate of L_m = sup |d/dtau Re{m(tau)}| over tau = k * grid_step in
/// [0, horizon] plus the endpoint. A lower estimate; halving the step evaluates
/// a superset of points, so it never decreases.
inline double kernel_slope(const FrequencyLineSet& ls, const TimeScale& ts, double grid_step, double horizon) {
  if (!(grid_step > 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("kernel_slope: grid_step and horizon must be positive");
  }
  const auto n = static_cast<std::size_t>(std::floor(horizon / grid_step));
  double best = std::abs(kernel_derivative_re(ls, ts, horizon));
  for (std::size_t k = 0; k <= n; ++k) {
    best = std::max(best, std::abs(kernel_derivative_re(ls, ts, grid_step * static_cast<double>(k))));
  }
  return best;
}

/// alpha * sum_i w_i |C_i|: dominates |A(lag + dt) - A(lag)| / |dt| everywhere.
inline double exact_lipschitz_bound(const ComplexCoefficients& coeffs, const FrequencyLineSet& ls,
                                    const TimeScale& ts) {
  coeffs.require_matches(ls);
  double acc = 0.0;
  for (std::size_t i = 0; i < ls.pair_count(); ++i) acc += ls[i] * std::abs(coeffs.values[i]);
  return ts.alpha() * acc;
}

/// sup over `lags` of |S_lag / S_0 - m(lag)| with S_lag = sum_i C_i exp(j w_i alpha lag).
inline double modulation_ratio_error(const ComplexCoefficients& coeffs, const FrequencyLineSet& ls,
                                     const TimeScale& ts, std::span<const double> lags) {
  coeffs.require_matches(ls);
  cplx s0{0.0, 0.0};
  for (const auto& c : coeffs.values) s0 += c;
  if (s0 == cplx{0.0, 0.0}) throw std::invalid_argument("modulation_ratio_error: S_0 is zero");
  double worst = 0.0;
  for (double lag : lags) {
    cplx s{0.0, 0.0}, k{0.0, 0.0};
    for (std::size_t i = 0; i < ls.pair_count(); ++i) {
      const cplx ph = std::polar(1.0, ls[i] * ts.alpha() * lag);
      s += coeffs.values[i] * ph;
      k += ph;
    }
    k /= static_cast<double>(ls.pair_count());
    worst = std::max(worst, std::abs(s / s0 - k));
  }
  return worst;
}

/// Coefficients with independent uniform real and imaginary parts. The
/// defaults give unit mean, bounded variance and no dependence on frequency.
struct CoefficientSampler {
  double re_lo = 0.5, re_hi = 1.5;
  double im_lo = -0.5, im_hi = 0.5;

  template <typename Rng>
  ComplexCoefficients operator()(std::size_t pair_count, Rng& rng) const {
    std::uniform_real_distribution<double> re(re_lo, re_hi), im(im_lo, im_hi);
    ComplexCoefficients c;
    c.values.resize(pair_count);
    for (auto& v : c.values) {
      const double a = re_lo == re_hi ? re_lo : re(rng);
      const double b = im_lo == im_hi ? im_lo : im(rng);
      v = cplx{a, b};
    }
    return c;
  }
};

/// Finite-m study of the scalar modulation approximation. For each pair count
/// a line set with the base of `ls` is built, `trials` coefficient draws are
/// made and the sup-error over `lag_grid` is summarized per pair count.
inline SweepReport modulation_approx_error(const FrequencyLineSet& ls, const TimeScale& ts,
                                           std::uint64_t coeff_sampler_seed, const std::vector<int>& pair_counts,
                                           const std::vector<double>& lag_grid, int trials = 200,
                                           const CoefficientSampler& sampler = {}) {
  if (pair_counts.empty()) throw std::invalid_argument("modulation_approx_error: no pair counts");
  for (std::size_t i = 1; i < pair_counts.size(); ++i) {
    if (pair_counts[i] <= pair_counts[i - 1]) {
      throw std::invalid_argument("modulation_approx_error: pair counts must be increasing");
    }
  }
  if (lag_grid.empty()) throw std::invalid_argument("modulation_approx_error: empty lag grid");
  if (trials < 1) throw std::invalid_argument("modulation_approx_error: trials must be >= 1");
  if (!(ls.base() > 1.0)) throw std::invalid_argument("modulation_approx_error: line set has no base");

  SweepReport rep;
  rep.axis_name = "pair_count";
  std::vector<double> med, mean, worst;
  for (std::size_t pi = 0; pi < pair_counts.size(); ++pi) {
    const int m = pair_counts[pi];
    const auto lines = make_lineset(m, ls.base());
    std::mt19937_64 rng(stats::derive_seed(coeff_sampler_seed, static_cast<std::uint64_t>(m)));
    std::vector<double> errs(static_cast<std::size_t>(trials));
    for (auto& e : errs) e = modulation_ratio_error(sampler(lines.pair_count(), rng), lines, ts, lag_grid);
    rep.axis_values.push_back(m);
    med.push_back(stats::median(errs));
    mean.push_back(stats::mean(errs));
    worst.push_back(*std::max_element(errs.begin(), errs.end()));
  }
  rep.add_metric("median_error", std::move(med));
  rep.add_metric("mean_error", std::move(mean));
  rep.add_metric("max_error", std::move(worst));
  rep.metadata = {{"base", ls.base()},
                  {"alpha", ts.alpha()},
                  {"seed", coeff_sampler_seed},
                  {"trials", trials},
                  {"lag_count", lag_grid.size()},
                  {"sampler", {{"re", {sampler.re_lo, sampler.re_hi}}, {"im", {sampler.im_lo, sampler.im_hi}}}}};
  return rep;
}

/// Least-squares slope of log(metric) against log(axis).
inline double loglog_slope(const SweepReport& rep, const std::string& metric) {
  const auto& y = rep.metric(metric);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (rep.axis_values[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(rep.axis_values[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  return stats::ols_slope(lx, ly);
}

}  // namespace pas
