// Windowed kernel observations, N-point DFT, fractional delays and the
// per-head magnitude invariance check.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pas/kernel.hpp"
#include "pas/pas_core.hpp"
#include "pas/ropespec.hpp"

namespace pas {

enum class WindowKind { rectangular, hann };

inline WindowKind window_kind_from_string(const std::string& s) {
  if (s == "rect" || s == "rectangular") return WindowKind::rectangular;
  if (s == "hann") return WindowKind::hann;
  throw std::invalid_argument("unknown window: " + s);
}

inline std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (kind == WindowKind::hann && n > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1)));
    }
  }
  return w;
}

/// x[n] = w[n] * m(n * sample_period + delay), n = 0 .. N-1.
struct WindowedObservation {
  std::vector<double> window;
  double sample_period = 1.0;
  double delay = 0.0;
  std::vector<cplx> samples;

  std::size_t size() const noexcept { return samples.size(); }

  /// Recomputes every sample from the kernel; largest absolute mismatch.
  double mismatch(const FrequencyLineSet& ls, const TimeScale& ts) const {
    double worst = 0.0;
    for (std::size_t n = 0; n < samples.size(); ++n) {
      const cplx expect = window[n] * kernel_value(ls, ts, static_cast<double>(n) * sample_period + delay);
      worst = std::max(worst, std::abs(samples[n] - expect));
    }
    return worst;
  }
};

inline WindowedObservation observe(const FrequencyLineSet& ls, const TimeScale& ts, double sample_period,
                                   std::size_t n_points, double delay, std::vector<double> window) {
  if (n_points < 2) throw std::invalid_argument("observe: need at least 2 points");
  if (window.size() != n_points) throw std::invalid_argument("observe: window length does not match n_points");
  if (!(sample_period > 0.0)) throw std::invalid_argument("observe: sample_period must be positive");
  bool any = false;
  for (double v : window) {
    if (!std::isfinite(v)) throw std::invalid_argument("observe: window values must be finite");
    any = any || v != 0.0;
  }
  if (!any) throw std::invalid_argument("observe: window is identically zero");
  WindowedObservation obs{std::move(window), sample_period, delay, {}};
  obs.samples.resize(n_points);
  for (std::size_t n = 0; n < n_points; ++n) {
    obs.samples[n] = obs.window[n] * kernel_value(ls, ts, static_cast<double>(n) * sample_period + delay);
  }
  return obs;
}

struct DftSpectrum {
  std::vector<cplx> bins;

  std::size_t size() const noexcept { return bins.size(); }

  std::vector<double> magnitudes() const {
    std::vector<double> m(bins.size());
    for (std::size_t k = 0; k < bins.size(); ++k) m[k] = std::abs(bins[k]);
    return m;
  }

  std::string to_csv() const {
    std::string out = "k,re,im,mag\n";
    for (std::size_t k = 0; k < bins.size(); ++k) {
      out += std::to_string(k) + "," + format_real(bins[k].real()) + "," + format_real(bins[k].imag()) + "," +
             format_real(std::abs(bins[k])) + "\n";
    }
    return out;
  }
};

namespace detail {
// Direct O(N^2) transform; sign = -1 forward, +1 inverse (unscaled).
inline std::vector<cplx> direct_transform(std::span<const cplx> x, int sign) {
  const std::size_t n = x.size();
  std::vector<cplx> twiddle(n);
  for (std::size_t i = 0; i < n; ++i) {
    twiddle[i] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{0.0, 0.0};
    std::size_t idx = 0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += x[t] * twiddle[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    out[k] = acc;
  }
  return out;
}
}  // namespace detail

/// X[k] = sum_n x[n] exp(-j 2 pi k n / N).
inline DftSpectrum dft(std::span<const cplx> x) {
  if (x.empty()) throw std::invalid_argument("dft: empty sequence");
  return DftSpectrum{detail::direct_transform(x, -1)};
}

inline DftSpectrum dft(const WindowedObservation& obs) { return dft(obs.samples); }

/// x[n] = (1/N) sum_k X[k] exp(+j 2 pi k n / N).
inline std::vector<cplx> idft(const DftSpectrum& spec) {
  if (spec.bins.empty()) throw std::invalid_argument("idft: empty spectrum");
  auto x = detail::direct_transform(spec.bins, +1);
  const double inv = 1.0 / static_cast<double>(x.size());
  for (auto& v : x) v *= inv;
  return x;
}

/// Signed frequency index of bin k (k - N for the upper half).
inline double signed_bin(std::size_t k, std::size_t n) {
  return k < (n + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
}

/// All-pass fractional advance by `shift_samples`: bin k is multiplied by
/// exp(j 2 pi k' shift / N) with k' the signed bin index; magnitudes unchanged.
inline std::vector<cplx> fractional_delay_allpass(std::span<const cplx> x, double shift_samples) {
  auto spec = dft(x);
  const std::size_t n = spec.size();
  for (std::size_t k = 0; k < n; ++k) {
    spec.bins[k] *= std::polar(1.0, 2.0 * std::numbers::pi * signed_bin(k, n) * shift_samples / static_cast<double>(n));
  }
  return idft(spec);
}

/// Circular shift y[n] = x[(n - s) mod N].
inline std::vector<cplx> circular_shift(std::span<const cplx> x, long s) {
  const auto n = static_cast<long>(x.size());
  std::vector<cplx> y(x.size());
  for (long i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(((i - s) % n + n) % n)];
  return y;
}

/// max_k | |A[k]| - |B[k]| | / max_k |B[k]|.
inline double max_relative_magnitude_deviation(const DftSpectrum& a, const DftSpectrum& b) {
  if (a.size() != b.size()) throw std::invalid_argument("spectra differ in length");
  double peak = 0.0, worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    peak = std::max(peak, std::abs(b.bins[k]));
    worst = std::max(worst, std::abs(std::abs(a.bins[k]) - std::abs(b.bins[k])));
  }
  return peak > 0.0 ? worst / peak : worst;
}

struct MagnitudeCheck {
  double max_rel_dev = 0.0;        // all-pass fractional delay of the unshifted observation
  double resampled_rel_dev = 0.0;  // kernel re-sampled at n * period + delay
  bool nyquist_ok = false;
};

/// Spectra of the unshifted observation against its delayed versions, built
/// by the all-pass phase ramp and by direct re-sampling of the kernel.
inline MagnitudeCheck magnitude_invariance_check(const FrequencyLineSet& ls, const TimeScale& ts,
                                                 double sample_period, std::size_t n_points, double delay,
                                                 const std::vector<double>& window) {
  const auto base_obs = observe(ls, ts, sample_period, n_points, 0.0, window);
  const auto base = dft(base_obs);
  MagnitudeCheck out;
  out.nyquist_ok = ts.alpha() * ls.max_line() < std::numbers::pi / sample_period;
  if (delay == 0.0) return out;
  const auto shifted_allpass = fractional_delay_allpass(base_obs.samples, delay / sample_period);
  out.max_rel_dev = max_relative_magnitude_deviation(dft(shifted_allpass), base);
  const auto shifted_obs = observe(ls, ts, sample_period, n_points, delay, window);
  out.resampled_rel_dev = max_relative_magnitude_deviation(dft(shifted_obs), base);
  return out;
}

/// True iff offsets spread no more than one sampling period, so no two bins
/// from different heads swap their discrete order.
inline bool order_preservation_check(const PhaseConfig& cfg, double sample_period) {
  if (!(sample_period > 0.0)) throw std::invalid_argument("order_preservation_check: period must be positive");
  return cfg.spread() <= sample_period;
}

}  // namespace pas
