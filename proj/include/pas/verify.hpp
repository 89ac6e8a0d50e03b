// Invariant suite behind `pas_cli verify`: every module's properties checked
// on seeded random inputs at modest sizes.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pas/attn_sim.hpp"
#include "pas/bench.hpp"
#include "pas/kernel.hpp"
#include "pas/pas_core.hpp"
#include "pas/ropespec.hpp"
#include "pas/spectral.hpp"
#include "pas/stats.hpp"

namespace pas {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline FrequencyLineSet random_lineset(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pairs(1, 96);
  std::uniform_real_distribution<double> lb(1.0, 6.0);
  return make_lineset(pairs(rng), std::pow(10.0, lb(rng)));
}

inline PhaseConfig random_phase_config(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kd(2, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int k = kd(rng);
  std::vector<double> off(k), w(k);
  double sum = 0.0;
  for (int g = 0; g < k; ++g) {
    off[g] = u(rng);
    w[g] = u(rng) + 1e-3;
    sum += w[g];
  }
  for (auto& v : w) v /= sum;
  double total = 0.0;
  for (int g = 0; g + 1 < k; ++g) total += w[g];
  w[k - 1] = 1.0 - total;
  return PhaseConfig(off, w);
}

inline PropertyResult lines_sorted(std::mt19937_64& rng) {
  for (int t = 0; t < 50; ++t) {
    const auto ls = random_lineset(rng);
    for (std::size_t i = 0; i < ls.pair_count(); ++i) {
      if (!(ls[i] > 0.0) || (i > 0 && !(ls[i] < ls[i - 1]))) return {"", false, "unsorted line set"};
    }
  }
  return {"", true, "50 line sets"};
}

inline PropertyResult nyquist_homogeneous(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(0.01, 10.0);
  for (int t = 0; t < 50; ++t) {
    const auto ls = random_lineset(rng);
    const TimeScale ts(a(rng));
    if (nyquist_period(ls, ts.scaled(2.0)) != nyquist_period(ls, ts) / 2.0) return {"", false, "not exact"};
  }
  return {"", true, "50 draws, exact"};
}

inline PropertyResult kernel_bounded(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto ls = random_lineset(rng);
    const TimeScale ts;
    worst = std::max(worst, std::abs(kernel_value(ls, ts, 0.0) - cplx{1.0, 0.0}));
    for (double lag : uniform_grid(-50.0, 50.0, 0.1)) {
      worst = std::max(worst, std::abs(kernel_value(ls, ts, lag)) - 1.0);
    }
  }
  return {"", worst <= 1e-12, "worst excess " + sci(worst)};
}

inline PropertyResult kernel_conjugate(std::mt19937_64& rng) {
  double worst = 0.0;
  const auto ls = random_lineset(rng);
  const TimeScale ts(1.3);
  for (double lag : uniform_grid(0.0, 40.0, 0.05)) {
    worst = std::max(worst, std::abs(kernel_value(ls, ts, -lag) - std::conj(kernel_value(ls, ts, lag))));
  }
  return {"", worst <= 1e-12, "max deviation " + sci(worst)};
}

inline PropertyResult lipschitz(std::mt19937_64& rng) {
  const auto ls = default_lineset();
  const TimeScale ts;
  std::uniform_real_distribution<double> u(-1.0, 1.0), lag(-100.0, 100.0);
  double worst = -1e300;
  for (int t = 0; t < 1000; ++t) {
    ComplexCoefficients c;
    for (std::size_t i = 0; i < ls.pair_count(); ++i) c.values.emplace_back(u(rng), u(rng));
    const double l = lag(rng), dt = 0.1 * u(rng);
    const double lhs = std::abs(rotated_logit(c, ls, ts, l + dt) - rotated_logit(c, ls, ts, l));
    worst = std::max(worst, lhs - exact_lipschitz_bound(c, ls, ts) * std::abs(dt));
  }
  return {"", worst <= 1e-9, "max slack violation " + sci(worst)};
}

inline PropertyResult approx_scaling(std::uint64_t seed) {
  const std::vector<int> ms{16, 32, 64, 128, 256, 512, 1024};
  const auto rep = modulation_approx_error(default_lineset(), TimeScale{}, seed, ms,
                                           uniform_grid(0.0, 20.0, 0.5), 40);
  const double slope = loglog_slope(rep, "median_error");
  return {"", slope >= -0.7 && slope <= -0.3, "slope " + sci(slope)};
}

inline PropertyResult gain_bounded(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto cfg = random_phase_config(rng);
    for (double w : uniform_grid(0.0, 20.0, 0.01)) {
      worst = std::max(worst, std::abs(aggregation_gain(cfg, TimeScale{}, w)) - 1.0);
    }
  }
  return {"", worst <= 1e-12, "worst excess " + sci(worst)};
}

inline PropertyResult single_line_gain(std::mt19937_64& rng) {
  const auto ls = FrequencyLineSet::from_lines({0.7}, 0.0);
  const TimeScale ts;
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    const auto cfg = random_phase_config(rng);
    const auto chk = check_smoothing_inequality(ls, ts, cfg, 0.25, 4000.0, 0.05);
    const double k2 = std::norm(aggregation_gain(cfg, ts, 0.7));
    if (k2 < 1e-3) continue;
    worst = std::max(worst, std::abs(chk.v_eff / (k2 * chk.v_base) - 1.0));
  }
  return {"", worst <= 0.01, "max relative mismatch " + sci(worst)};
}

inline PropertyResult smoothing_holds(std::mt19937_64& rng) {
  const auto ls = default_lineset();
  const TimeScale ts;
  int failed = 0;
  for (int t = 0; t < 100; ++t) {
    if (!check_smoothing_inequality(ls, ts, random_phase_config(rng), 0.25, 2000.0, 0.25).holds) ++failed;
  }
  return {"", failed == 0, std::to_string(failed) + " of 100 configs violate"};
}

inline PropertyResult permutation_symmetry(std::mt19937_64& rng) {
  const auto ls = default_lineset();
  const TimeScale ts;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto cfg = random_phase_config(rng);
    std::vector<double> off(cfg.offsets().rbegin(), cfg.offsets().rend());
    std::vector<double> w(cfg.weights().rbegin(), cfg.weights().rend());
    const PhaseConfig rev(off, w);
    for (double lag : {0.0, 0.37, 3.0, 11.5}) {
      worst = std::max(worst, std::abs(effective_kernel_value(ls, ts, cfg, lag) -
                                       effective_kernel_value(ls, ts, rev, lag)));
      worst = std::max(worst, std::abs(aggregation_gain(cfg, ts, lag) - aggregation_gain(rev, ts, lag)));
    }
  }
  return {"", worst <= 1e-12, "max deviation " + sci(worst)};
}

inline PropertyResult parseval(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<cplx> x(300);
  for (auto& v : x) v = {nd(rng), nd(rng)};
  const auto X = dft(x);
  double ex = 0.0, eX = 0.0;
  for (const auto& v : x) ex += std::norm(v);
  for (const auto& v : X.bins) eX += std::norm(v);
  eX /= static_cast<double>(x.size());
  const double rel = std::abs(ex - eX) / ex;
  return {"", rel <= 1e-10, "relative mismatch " + sci(rel)};
}

inline PropertyResult integer_shift(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<cplx> x(128);
  for (auto& v : x) v = {nd(rng), nd(rng)};
  const auto X = dft(x);
  double worst = 0.0;
  for (long s : {1L, 5L, 77L}) {
    const auto Y = dft(circular_shift(x, s));
    for (std::size_t k = 0; k < x.size(); ++k) {
      const cplx expect =
          X.bins[k] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) * s / 128.0);
      worst = std::max(worst, std::abs(Y.bins[k] - expect) / std::max(1.0, std::abs(X.bins[k])));
    }
  }
  return {"", worst <= 1e-10, "max deviation " + sci(worst)};
}

inline PropertyResult allpass_invariance() {
  const auto ls = default_lineset();
  const TimeScale ts;
  const double period = 0.5 * nyquist_period(ls, ts);
  double worst = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const auto chk = magnitude_invariance_check(ls, ts, period, 256, 0.1 * k * period,
                                                make_window(WindowKind::rectangular, 256));
    worst = std::max(worst, chk.max_rel_dev);
  }
  return {"", worst < 1e-9, "max relative deviation " + sci(worst)};
}

inline PropertyResult sub_nyquist_counterexample() {
  const auto ls = default_lineset();
  const TimeScale ts;
  const double period = 2.0 * nyquist_period(ls, ts);
  double worst = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const auto chk = magnitude_invariance_check(ls, ts, period, 256, 0.1 * k * period,
                                                make_window(WindowKind::rectangular, 256));
    worst = std::max(worst, chk.resampled_rel_dev);
  }
  return {"", worst > 1e-3, "max re-sampled deviation " + sci(worst)};
}

inline PropertyResult rope_norm(std::mt19937_64& rng) {
  const auto ls = default_lineset();
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> pos(-1000.0, 1000.0);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(2 * ls.pair_count() + 6);
    for (auto& x : v) x = nd(rng);
    const auto r = rope_rotate(v, pos(rng), ls, TimeScale{});
    double n0 = 0.0, n1 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      n0 += v[i] * v[i];
      n1 += r[i] * r[i];
    }
    worst = std::max(worst, std::abs(std::sqrt(n1) - std::sqrt(n0)) / std::sqrt(n0));
  }
  return {"", worst <= 1e-12, "max relative norm change " + sci(worst)};
}

inline PropertyResult logit_factorization() {
  const auto ls = default_lineset();
  const TimeScale ts;
  const double c = 0.8;
  const auto inst = uniform_coefficient_instance(2, ls, 0, 12, c, 5);
  const auto out = rotated_forward(inst, nullptr, ls, ts);
  const double scale = 1.0 / std::sqrt(static_cast<double>(inst.head_dim));
  double worst = 0.0;
  for (std::size_t i = 0; i < inst.token_count(); ++i) {
    for (std::size_t j = 0; j < inst.token_count(); ++j) {
      const double lag = inst.positions[i] - inst.positions[j];
      const double expect = static_cast<double>(ls.pair_count()) * c * c * kernel_value(ls, ts, lag).real() * scale;
      worst = std::max(worst, std::abs(out.logit(1, i, j) - expect));
    }
  }
  return {"", worst <= 1e-12, "max deviation " + sci(worst)};
}

inline PropertyResult pas_noop() {
  const auto ls = default_lineset();
  const TimeScale ts;
  const auto rot = apply_rope(random_instance(4, 2, 2 * ls.pair_count() + 4, 3, 9, 11), ls, ts);
  const auto out = pas_apply(rot, PhaseConfig::uniform({0.0, 0.0}), ls, ts);
  return {"", out == rot, out == rot ? "bit-identical" : "instance changed"};
}

inline PropertyResult text_isolation(std::mt19937_64& rng) {
  const auto ls = default_lineset();
  const TimeScale ts;
  const auto inst = random_instance(4, 4, 2 * ls.pair_count(), 5, 10, rng());
  const auto base = rotated_forward(inst, nullptr, ls, ts);
  for (int t = 0; t < 10; ++t) {
    const auto cfg = random_phase_config(rng);
    const auto out = rotated_forward(inst, &cfg, ls, ts);
    for (std::size_t h = 0; h < inst.head_count; ++h) {
      for (std::size_t i = 0; i < inst.token_count(); ++i) {
        if (inst.video_mask[i]) continue;
        for (std::size_t j = 0; j < inst.token_count(); ++j) {
          if (out.weight(h, i, j) != base.weight(h, i, j) || out.logit(h, i, j) != base.logit(h, i, j)) {
            return {"", false, "text row changed"};
          }
        }
      }
    }
  }
  return {"", true, "10 configs, bit-identical text rows"};
}

inline PropertyResult head_spectrum(std::mt19937_64& rng) {
  const auto ls = default_lineset();
  const TimeScale ts;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double period = 0.5 * nyquist_period(ls, ts);
  const std::size_t n = 256;
  double worst = 0.0;
  for (int t = 0; t < 4; ++t) {
    const double delta = u(rng);
    const auto base = observe(ls, ts, period, n, 0.0, make_window(WindowKind::rectangular, n));
    const auto shifted = fractional_delay_allpass(base.samples, delta / period);
    worst = std::max(worst, max_relative_magnitude_deviation(dft(shifted), dft(base)));
  }
  return {"", worst < 1e-9, "max relative deviation " + sci(worst)};
}

inline SyntheticTask small_task() {
  SyntheticTask t;
  t.total_frames = 256;
  t.sampling_ratio = 0.125;
  return t;
}

inline PropertyResult sweep_determinism(std::uint64_t seed) {
  const auto ls = make_lineset(16, 1e4);
  const std::vector<double> deltas{0.0, 0.5};
  const auto a = delta_scan(small_task(), ls, TimeScale{}, deltas, 10, seed, 4).to_csv();
  const auto b = delta_scan(small_task(), ls, TimeScale{}, deltas, 10, seed, 4).to_csv();
  return {"", a == b, a == b ? "byte-identical" : "reports differ"};
}

inline PropertyResult snr_monotone(std::uint64_t seed) {
  const auto ls = make_lineset(32, 1e4);
  double prev = -1.0;
  std::string trace;
  bool ok = true;
  for (double snr : {1.0, 3.0, 9.0}) {
    double sum = 0.0;
    for (std::size_t t = 0; t < 10; ++t) {
      auto task = sweep_task(small_task(), seed, t);
      task.content_snr = snr;
      sum += retrieval_metric(build_task(task, ls, TimeScale{}), nullptr, ls, task.jitter, 40, seed + t);
    }
    const double rate = sum / 10.0;
    trace += sci(rate) + " ";
    if (rate < prev - 0.05) ok = false;
    prev = std::max(prev, rate);
  }
  return {"", ok, "hit rates " + trace};
}

inline PropertyResult baseline_crosscheck(std::uint64_t seed) {
  const auto ls = make_lineset(16, 1e4);
  const auto tmpl = small_task();
  const int trials = 10, tasks = 4;
  const auto ds = delta_scan(tmpl, ls, TimeScale{}, {0.0}, trials, seed, tasks);
  const auto ss = sampling_scan(tmpl, ls, TimeScale{}, {tmpl.sampling_ratio}, trials, seed, tasks);
  double sum = 0.0;
  for (int t = 0; t < tasks; ++t) {
    const auto task = build_task(sweep_task(tmpl, seed, static_cast<std::size_t>(t)), ls, TimeScale{});
    sum += retrieval_metric(task, nullptr, ls, tmpl.jitter, trials,
                            stats::derive_seed(seed, 0x7219, static_cast<std::uint64_t>(t)));
  }
  const double indep = sum / tasks;
  const bool ok = ds.metric("pas_hit_rate")[0] == ds.metric("baseline_hit_rate")[0] &&
                  ds.metric("baseline_hit_rate")[0] == indep && ss.metric("baseline_hit_rate")[0] == indep;
  return {"", ok, "independent baseline " + sci(indep)};
}

}  // namespace detail

/// Runs every property; results in a fixed order.
inline std::vector<PropertyResult> run_invariant_suite(std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::string, std::function<PropertyResult()>>> props = {
      {"lineset.sorted_positive", [&] { return detail::lines_sorted(rng); }},
      {"lineset.nyquist_homogeneous", [&] { return detail::nyquist_homogeneous(rng); }},
      {"kernel.unit_bound", [&] { return detail::kernel_bounded(rng); }},
      {"kernel.conjugate_symmetry", [&] { return detail::kernel_conjugate(rng); }},
      {"kernel.lipschitz_bound", [&] { return detail::lipschitz(rng); }},
      {"kernel.approximation_scaling", [&] { return detail::approx_scaling(seed); }},
      {"phase.gain_bounded", [&] { return detail::gain_bounded(rng); }},
      {"phase.single_line_gain_consistency", [&] { return detail::single_line_gain(rng); }},
      {"phase.smoothing_holds", [&] { return detail::smoothing_holds(rng); }},
      {"phase.permutation_symmetry", [&] { return detail::permutation_symmetry(rng); }},
      {"spectral.parseval", [&] { return detail::parseval(rng); }},
      {"spectral.integer_shift", [&] { return detail::integer_shift(rng); }},
      {"spectral.allpass_invariance", [] { return detail::allpass_invariance(); }},
      {"spectral.sub_nyquist_counterexample", [] { return detail::sub_nyquist_counterexample(); }},
      {"attention.rope_norm", [&] { return detail::rope_norm(rng); }},
      {"attention.logit_factorization", [] { return detail::logit_factorization(); }},
      {"attention.pas_noop", [] { return detail::pas_noop(); }},
      {"attention.text_isolation", [&] { return detail::text_isolation(rng); }},
      {"attention.head_spectrum", [&] { return detail::head_spectrum(rng); }},
      {"bench.determinism", [&] { return detail::sweep_determinism(seed); }},
      {"bench.snr_monotone", [&] { return detail::snr_monotone(seed); }},
      {"bench.baseline_crosscheck", [&] { return detail::baseline_crosscheck(seed); }},
  };
  std::vector<PropertyResult> out;
  for (auto& [name, fn] : props) {
    PropertyResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {"", false, std::string("threw: ") + e.what()};
    }
    r.name = name;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace pas
