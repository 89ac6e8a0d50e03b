// Synthetic key-frame retrieval benchmark, offset and sampling-ratio sweeps,
// and the per-layer cost model of the phase operator.

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

#include <json.hpp>

#include "pas/attn_sim.hpp"
#include "pas/pas_core.hpp"
#include "pas/report.hpp"
#include "pas/ropespec.hpp"
#include "pas/stats.hpp"

namespace pas {

/// One retrieval scenario. Frames are sampled uniformly at `sampling_ratio`,
/// merged `frames_per_bin` at a time into video tokens at bin positions
/// 0, 1, ..., and a probe video token sits one bin after the last one. Per
/// head the probe query has unit-magnitude pairs with random phases; token k
/// carries the probe content scaled by neighbor_relevance^|k - key| plus
/// Gaussian noise, so the key token's content logit is content_snr and
/// distractor logits have standard deviation `noise`.
struct SyntheticTask {
  int total_frames = 1024;
  int key_frame_index = 0;
  double sampling_ratio = 0.0625;
  int frames_per_bin = 2;
  double content_snr = 3.0;
  std::uint64_t seed = 0;
  int head_count = 8;
  int kv_head_count = 8;
  int text_tokens = 4;
  int extra_dims = 0;
  double neighbor_relevance = 0.7;
  double noise = 0.15;
  double jitter = 0.5;  // timing noise, uniform on [-jitter, +jitter] bins

  int sampled_frames() const { return static_cast<int>(std::lround(sampling_ratio * total_frames)); }
  int video_tokens() const { return sampled_frames() / frames_per_bin; }

  void validate() const {
    if (total_frames < 2) throw std::invalid_argument("SyntheticTask: total_frames must be >= 2");
    if (key_frame_index < 0 || key_frame_index >= total_frames) {
      throw std::invalid_argument("SyntheticTask: key_frame_index out of range");
    }
    if (!(sampling_ratio > 0.0 && sampling_ratio <= 1.0)) {
      throw std::invalid_argument("SyntheticTask: sampling_ratio must lie in (0, 1]");
    }
    if (frames_per_bin < 1) throw std::invalid_argument("SyntheticTask: frames_per_bin must be >= 1");
    if (sampled_frames() < 2) throw std::invalid_argument("SyntheticTask: fewer than 2 sampled frames");
    if (video_tokens() < 2) throw std::invalid_argument("SyntheticTask: fewer than 2 video tokens");
    if (!(content_snr > 0.0)) throw std::invalid_argument("SyntheticTask: content_snr must be positive");
    if (head_count < 1 || kv_head_count < 1 || head_count % kv_head_count != 0) {
      throw std::invalid_argument("SyntheticTask: head_count must be a positive multiple of kv_head_count");
    }
    if (text_tokens < 0 || extra_dims < 0 || extra_dims % 2 != 0) {
      throw std::invalid_argument("SyntheticTask: text_tokens >= 0 and even extra_dims >= 0 required");
    }
    if (!(neighbor_relevance >= 0.0 && neighbor_relevance < 1.0)) {
      throw std::invalid_argument("SyntheticTask: neighbor_relevance must lie in [0, 1)");
    }
    if (!(noise >= 0.0) || !(jitter >= 0.0)) throw std::invalid_argument("SyntheticTask: noise, jitter >= 0");
  }
};

inline void to_json(nlohmann::json& j, const SyntheticTask& t) {
  j = nlohmann::json{{"total_frames", t.total_frames},
                     {"key_frame_index", t.key_frame_index},
                     {"sampling_ratio", t.sampling_ratio},
                     {"frames_per_bin", t.frames_per_bin},
                     {"content_snr", t.content_snr},
                     {"seed", t.seed},
                     {"head_count", t.head_count},
                     {"kv_head_count", t.kv_head_count},
                     {"text_tokens", t.text_tokens},
                     {"extra_dims", t.extra_dims},
                     {"neighbor_relevance", t.neighbor_relevance},
                     {"noise", t.noise},
                     {"jitter", t.jitter}};
}

struct BuiltTask {
  AttentionInstance instance;  // unrotated
  std::size_t key_token = 0;
  std::size_t probe_token = 0;
  TimeScale scale;  // per-bin scale at this sampling ratio
};

namespace detail {
// Head-mean softmax weights of the probe row from unrotated content only.
inline std::vector<double> content_only_weights(const AttentionInstance& a, std::size_t probe) {
  const std::size_t s = a.token_count(), d = a.head_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> agg(s, 0.0), row(s);
  for (std::size_t h = 0; h < a.head_count; ++h) {
    const double* q = a.query(h, probe);
    for (std::size_t j = 0; j < s; ++j) {
      const double* k = a.key(a.kv_head_of(h), j);
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += q[c] * k[c];
      row[j] = acc * scale;
    }
    softmax_inplace(row);
    for (std::size_t j = 0; j < s; ++j) agg[j] += row[j] / static_cast<double>(a.head_count);
  }
  return agg;
}

// Index of the largest candidate (video, non-probe) entry; first on ties.
inline std::size_t candidate_argmax(std::span<const double> w, const AttentionInstance& a, std::size_t probe) {
  std::size_t best = probe;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (!a.video_mask[j] || j == probe) continue;
    if (best == probe || w[j] > w[best]) best = j;
  }
  return best;
}
}  // namespace detail

/// Builds the retrieval instance. `ts` is the per-bin time scale at full
/// sampling; sparser sampling stretches each bin, so the task scale is
/// alpha / sampling_ratio. The key token's noise is redrawn until the
/// content-only head-mean attention of the probe peaks at the key.
inline BuiltTask build_task(const SyntheticTask& task, const FrequencyLineSet& ls, const TimeScale& ts) {
  task.validate();
  const std::size_t m = ls.pair_count();
  const std::size_t text = static_cast<std::size_t>(task.text_tokens);
  const std::size_t nv = static_cast<std::size_t>(task.video_tokens());
  const std::size_t s = text + nv + 1;
  const std::size_t d = 2 * m + static_cast<std::size_t>(task.extra_dims);
  const std::size_t hq = static_cast<std::size_t>(task.head_count);
  const std::size_t hkv = static_cast<std::size_t>(task.kv_head_count);

  const int ns = task.sampled_frames();
  const double frac = static_cast<double>(task.key_frame_index) * ns / task.total_frames;
  const long nearest = std::clamp(std::lround(frac), 0L, static_cast<long>(ns - 1));
  const std::size_t key_bin = std::min(static_cast<std::size_t>(nearest / task.frames_per_bin), nv - 1);

  BuiltTask out;
  out.key_token = text + key_bin;
  out.probe_token = s - 1;
  out.scale = ts.scaled(1.0 / task.sampling_ratio);

  AttentionInstance& a = out.instance;
  a.head_count = hq;
  a.kv_head_count = hkv;
  a.head_dim = d;
  for (std::size_t t = 0; t < s; ++t) {
    a.positions.push_back(static_cast<double>(t) - static_cast<double>(text));
    a.video_mask.push_back(t >= text);
  }
  a.queries.assign(hq * s * d, 0.0);
  a.keys.assign(hkv * s * d, 0.0);
  a.values.assign(hkv * s * d, 0.0);

  std::mt19937_64 rng(stats::derive_seed(task.seed, 0xb1));
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  // Probe content per kv head; query heads of a group share it.
  std::vector<double> z(hkv * 2 * m);
  for (std::size_t g = 0; g < hkv; ++g) {
    for (std::size_t i = 0; i < m; ++i) {
      const double ph = phase(rng);
      z[(g * m + i) * 2] = std::numbers::sqrt2 * std::cos(ph);
      z[(g * m + i) * 2 + 1] = std::numbers::sqrt2 * std::sin(ph);
    }
  }
  for (std::size_t h = 0; h < hq; ++h) {
    for (std::size_t t = 0; t < s; ++t) {
      double* q = a.query(h, t);
      if (t == out.probe_token) {
        std::copy_n(z.data() + a.kv_head_of(h) * 2 * m, 2 * m, q);
      } else {
        for (std::size_t c = 0; c < 2 * m; ++c) q[c] = nd(rng);
      }
    }
  }
  const double amp = task.content_snr / std::sqrt(2.0 * static_cast<double>(m));
  auto fill_key = [&](std::size_t g, std::size_t t) {
    double* k = a.key(g, t);
    double rel = 0.0;
    if (a.video_mask[t] && t != out.probe_token) {
      const double dist = std::abs(static_cast<double>(t) - static_cast<double>(out.key_token));
      rel = std::pow(task.neighbor_relevance, dist);
    }
    for (std::size_t c = 0; c < 2 * m; ++c) k[c] = rel * amp * z[g * 2 * m + c] + task.noise * nd(rng);
  };
  for (std::size_t g = 0; g < hkv; ++g) {
    for (std::size_t t = 0; t < s; ++t) {
      fill_key(g, t);
      double* v = a.values.data() + (g * s + t) * d;
      for (std::size_t c = 0; c < d; ++c) v[c] = nd(rng);
    }
  }
  constexpr int kMaxRedraws = 10000;
  int redraws = 0;
  while (detail::candidate_argmax(detail::content_only_weights(a, out.probe_token), a, out.probe_token) !=
         out.key_token) {
    if (++redraws > kMaxRedraws) throw std::invalid_argument("build_task: key content never dominates");
    for (std::size_t g = 0; g < hkv; ++g) fill_key(g, out.key_token);
  }
  a.validate();
  return out;
}

/// Probe-row logits for many phase configs under shared timing draws. The
/// unrotated probe/key pairs are folded into complex coefficients once, so
/// each config costs one complex multiply-add per (head, token, pair).
class ProbeEvaluator {
 public:
  ProbeEvaluator(const BuiltTask& task, const FrequencyLineSet& ls)
      : task_(task), ls_(ls), m_(ls.pair_count()), s_(task.instance.token_count()) {
    const auto& a = task.instance;
    a.validate();
    if (a.head_dim < 2 * m_) throw std::invalid_argument("ProbeEvaluator: head_dim too small");
    hn_ = a.head_count;
    coeff_.resize(hn_ * s_ * m_);
    extra_.assign(hn_ * s_, 0.0);
    for (std::size_t h = 0; h < hn_; ++h) {
      const double* q = a.query(h, task.probe_token);
      for (std::size_t t = 0; t < s_; ++t) {
        const double* k = a.key(a.kv_head_of(h), t);
        for (std::size_t i = 0; i < m_; ++i) {
          coeff_[(h * s_ + t) * m_ + i] = cplx{q[2 * i], q[2 * i + 1]} * std::conj(cplx{k[2 * i], k[2 * i + 1]});
        }
        double e = 0.0;
        for (std::size_t c = 2 * m_; c < a.head_dim; ++c) e += q[c] * k[c];
        extra_[h * s_ + t] = e;
      }
    }
    scale_ = 1.0 / std::sqrt(static_cast<double>(a.head_dim));
  }

  std::size_t head_count() const noexcept { return hn_; }

  /// Per-head offsets of a config (all zero for the baseline).
  std::vector<double> head_offsets(const PhaseConfig* cfg) const {
    std::vector<double> off(hn_, 0.0);
    if (cfg) {
      for (std::size_t h = 0; h < hn_; ++h) off[h] = cfg->offset_of_head(h, hn_);
    }
    return off;
  }

  /// Sets token positions for the next evaluations.
  void set_positions(std::span<const double> positions) {
    if (positions.size() != s_) throw std::invalid_argument("ProbeEvaluator: position count mismatch");
    phasor_.resize(s_ * m_);
    const double alpha = task_.scale.alpha();
    const double pp = positions[task_.probe_token];
    for (std::size_t t = 0; t < s_; ++t) {
      for (std::size_t i = 0; i < m_; ++i) {
        phasor_[t * m_ + i] = std::polar(1.0, ls_[i] * alpha * (pp - positions[t]));
      }
    }
    base_.assign(hn_ * s_, 0.0);
    for (std::size_t h = 0; h < hn_; ++h) {
      for (std::size_t t = 0; t < s_; ++t) base_[h * s_ + t] = head_logit(h, t, nullptr);
    }
  }

  /// Logit of head h toward token t with the probe advanced by its offset.
  double head_logit(std::size_t h, std::size_t t, const cplx* offset_phasor) const {
    const cplx* c = coeff_.data() + (h * s_ + t) * m_;
    const cplx* p = phasor_.data() + t * m_;
    double acc = 0.0;
    if (offset_phasor) {
      for (std::size_t i = 0; i < m_; ++i) acc += (c[i] * p[i] * offset_phasor[i]).real();
    } else {
      for (std::size_t i = 0; i < m_; ++i) acc += (c[i] * p[i]).real();
    }
    return (acc + extra_[h * s_ + t]) * scale_;
  }

  /// Probe-row logits [h][t] for the given per-head offsets. The probe is a
  /// video token, so its shifted query moves every logit of the row.
  std::vector<double> logits(std::span<const double> offsets) const {
    std::vector<double> out(base_);
    std::vector<cplx> rot(m_);
    for (std::size_t h = 0; h < hn_; ++h) {
      if (offsets[h] == 0.0) continue;
      for (std::size_t i = 0; i < m_; ++i) rot[i] = std::polar(1.0, ls_[i] * task_.scale.alpha() * offsets[h]);
      for (std::size_t t = 0; t < s_; ++t) out[h * s_ + t] = head_logit(h, t, rot.data());
    }
    return out;
  }

  /// Whether the head-mean attention argmax over candidates is the key token.
  bool hit(std::span<const double> offsets) const {
    auto lg = logits(offsets);
    std::vector<double> agg(s_, 0.0);
    for (std::size_t h = 0; h < hn_; ++h) {
      std::span<double> row(lg.data() + h * s_, s_);
      softmax_inplace(row);
      for (std::size_t t = 0; t < s_; ++t) agg[t] += row[t];
    }
    return detail::candidate_argmax(agg, task_.instance, task_.probe_token) == task_.key_token;
  }

 private:
  const BuiltTask& task_;
  const FrequencyLineSet& ls_;
  std::size_t m_, s_, hn_ = 0;
  double scale_ = 1.0;
  std::vector<cplx> coeff_;
  std::vector<double> extra_;
  std::vector<cplx> phasor_;
  std::vector<double> base_;
};

/// Token positions for trial `trial`: video tokens (probe included) move by
/// independent uniform noise on [-jitter, +jitter]; text tokens stay put.
inline std::vector<double> jittered_positions(const AttentionInstance& a, double jitter, std::uint64_t seed,
                                              std::uint64_t trial) {
  std::vector<double> pos = a.positions;
  if (jitter == 0.0) return pos;
  std::mt19937_64 rng(stats::derive_seed(seed, 0x7e1, trial));
  std::uniform_real_distribution<double> u(-jitter, jitter);
  for (std::size_t t = 0; t < pos.size(); ++t) {
    if (a.video_mask[t]) pos[t] += u(rng);
  }
  return pos;
}

/// Hit rates of several configs (nullptr = baseline) on shared timing draws.
inline std::vector<double> retrieval_hit_rates(const BuiltTask& task, std::span<const PhaseConfig* const> configs,
                                               const FrequencyLineSet& ls, double jitter, int trials,
                                               std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("retrieval: trials must be >= 1");
  if (!(jitter >= 0.0)) throw std::invalid_argument("retrieval: jitter must be >= 0");
  ProbeEvaluator ev(task, ls);
  std::vector<std::vector<double>> offsets;
  for (const auto* cfg : configs) offsets.push_back(ev.head_offsets(cfg));
  std::vector<double> hits(configs.size(), 0.0);
  for (int tr = 0; tr < trials; ++tr) {
    ev.set_positions(jittered_positions(task.instance, jitter, seed, static_cast<std::uint64_t>(tr)));
    for (std::size_t c = 0; c < configs.size(); ++c) hits[c] += ev.hit(offsets[c]) ? 1.0 : 0.0;
  }
  for (auto& h : hits) h /= trials;
  return hits;
}

/// Fraction of jittered trials in which the probe's head-mean attention
/// peaks at the key token. cfg == nullptr is the baseline.
inline double retrieval_metric(const BuiltTask& task, const PhaseConfig* cfg, const FrequencyLineSet& ls,
                               double jitter, int trials, std::uint64_t seed) {
  const PhaseConfig* cfgs[] = {cfg};
  return retrieval_hit_rates(task, cfgs, ls, jitter, trials, seed)[0];
}

/// Task `index` of a sweep: template fields with a derived seed and a key
/// frame drawn uniformly over the clip.
inline SyntheticTask sweep_task(const SyntheticTask& tmpl, std::uint64_t seed, std::size_t index) {
  SyntheticTask t = tmpl;
  t.seed = stats::derive_seed(seed, 0x7a5c, index);
  std::mt19937_64 rng(stats::derive_seed(seed, 0x4e7, index));
  t.key_frame_index = std::uniform_int_distribution<int>(0, tmpl.total_frames - 1)(rng);
  return t;
}

namespace detail {
inline nlohmann::json sweep_metadata(const SyntheticTask& tmpl, const FrequencyLineSet& ls, const TimeScale& ts,
                                     int trials, int tasks, std::uint64_t seed) {
  nlohmann::json tj;
  to_json(tj, tmpl);
  return nlohmann::json{{"task_template", tj}, {"pair_count", ls.pair_count()}, {"base", ls.base()},
                        {"alpha", ts.alpha()}, {"trials", trials},              {"tasks", tasks},
                        {"seed", seed}};
}
}  // namespace detail

/// Two groups with offsets (0, delta) and uniform weights for each delta; the
/// delta = 0 point is the single-phase baseline.
inline SweepReport delta_scan(const SyntheticTask& tmpl, const FrequencyLineSet& ls, const TimeScale& ts,
                              const std::vector<double>& deltas, int trials, std::uint64_t seed, int tasks = 50) {
  if (deltas.empty()) throw std::invalid_argument("delta_scan: no deltas");
  for (double d : deltas) {
    if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("delta_scan: deltas must lie in [0, 1]");
  }
  if (tasks < 1) throw std::invalid_argument("delta_scan: tasks must be >= 1");
  tmpl.validate();
  std::vector<PhaseConfig> cfgs;
  for (double d : deltas) cfgs.push_back(PhaseConfig::uniform({0.0, d}));
  std::vector<const PhaseConfig*> ptrs{nullptr};
  for (const auto& c : cfgs) ptrs.push_back(&c);

  const std::size_t nd = deltas.size();
  std::vector<std::vector<double>> gains(nd);
  std::vector<double> pas_sum(nd, 0.0), base_sum(nd, 0.0);
  for (int t = 0; t < tasks; ++t) {
    const auto task = build_task(sweep_task(tmpl, seed, static_cast<std::size_t>(t)), ls, ts);
    const auto rates = retrieval_hit_rates(task, ptrs, ls, tmpl.jitter, trials,
                                           stats::derive_seed(seed, 0x7219, static_cast<std::uint64_t>(t)));
    for (std::size_t k = 0; k < nd; ++k) {
      pas_sum[k] += rates[k + 1];
      base_sum[k] += rates[0];
      gains[k].push_back(rates[k + 1] - rates[0]);
    }
  }
  SweepReport rep;
  rep.axis_name = "delta";
  rep.axis_values = deltas;
  std::vector<double> pas, base, gain, se;
  for (std::size_t k = 0; k < nd; ++k) {
    pas.push_back(pas_sum[k] / tasks);
    base.push_back(base_sum[k] / tasks);
    gain.push_back(stats::mean(gains[k]));
    se.push_back(stats::std_error(gains[k]));
  }
  rep.add_metric("pas_hit_rate", std::move(pas));
  rep.add_metric("baseline_hit_rate", std::move(base));
  rep.add_metric("gain", std::move(gain));
  rep.add_metric("gain_se", std::move(se));
  rep.metadata = detail::sweep_metadata(tmpl, ls, ts, trials, tasks, seed);
  return rep;
}

/// Baseline and PAS (offsets (0, delta)) hit rates per sampling ratio. Task
/// index t uses the same seed and key frame at every ratio.
inline SweepReport sampling_scan(const SyntheticTask& tmpl, const FrequencyLineSet& ls, const TimeScale& ts,
                                 const std::vector<double>& ratios, int trials, std::uint64_t seed, int tasks = 50,
                                 double delta = 0.5) {
  if (ratios.empty()) throw std::invalid_argument("sampling_scan: no ratios");
  if (tasks < 1) throw std::invalid_argument("sampling_scan: tasks must be >= 1");
  const auto cfg = PhaseConfig::uniform({0.0, delta});
  const PhaseConfig* ptrs[] = {nullptr, &cfg};
  SweepReport rep;
  rep.axis_name = "sampling_ratio";
  std::vector<double> base, pas, gap, se;
  for (double r : ratios) {
    SyntheticTask tr = tmpl;
    tr.sampling_ratio = r;
    tr.validate();
    std::vector<double> gaps;
    double bs = 0.0, ps = 0.0;
    for (int t = 0; t < tasks; ++t) {
      const auto task = build_task(sweep_task(tr, seed, static_cast<std::size_t>(t)), ls, ts);
      const auto rates = retrieval_hit_rates(task, ptrs, ls, tr.jitter, trials,
                                             stats::derive_seed(seed, 0x7219, static_cast<std::uint64_t>(t)));
      bs += rates[0];
      ps += rates[1];
      gaps.push_back(rates[1] - rates[0]);
    }
    rep.axis_values.push_back(r);
    base.push_back(bs / tasks);
    pas.push_back(ps / tasks);
    gap.push_back(stats::mean(gaps));
    se.push_back(stats::std_error(gaps));
  }
  rep.add_metric("baseline_hit_rate", std::move(base));
  rep.add_metric("pas_hit_rate", std::move(pas));
  rep.add_metric("gap", std::move(gap));
  rep.add_metric("gap_se", std::move(se));
  rep.metadata = detail::sweep_metadata(tmpl, ls, ts, trials, tasks, seed);
  rep.metadata["delta"] = delta;
  return rep;
}

/// Batch, heads, sequence length, video tokens, head dim and the temporal
/// channel fraction of one attention layer.
struct CostModelInput {
  long long B = 1, H = 1, S = 1, S_v = 1, d_h = 2;
  double p_t = 0.5;

  void validate() const {
    if (B < 1 || H < 1 || S < 1 || S_v < 1 || d_h < 1) {
      throw std::invalid_argument("CostModelInput: B, H, S, S_v, d_h must be positive");
    }
    if (S_v > S) throw std::invalid_argument("CostModelInput: S_v must not exceed S");
    if (!(p_t > 0.0 && p_t < 1.0)) throw std::invalid_argument("CostModelInput: p_t must lie in (0, 1)");
    if (p_t * static_cast<double>(d_h) < 2.0) throw std::invalid_argument("CostModelInput: p_t * d_h must be >= 2");
  }
};

/// Phase-operator cost relative to attention: p_t * S_v / S^2.
inline double overhead_ratio(const CostModelInput& c) {
  c.validate();
  return c.p_t * static_cast<double>(c.S_v) / (static_cast<double>(c.S) * static_cast<double>(c.S));
}

struct MeasuredOverhead {
  std::uint64_t pas_flops = 0;
  std::uint64_t attn_flops = 0;
  double ratio = 0.0;
};

/// Multiply-accumulates executed by the phase operator and the attention core.
inline MeasuredOverhead measured_overhead(const AttentionInstance& unrotated, const PhaseConfig& cfg,
                                          const FrequencyLineSet& ls, const TimeScale& ts) {
  MacCounter mc;
  rotated_forward(unrotated, &cfg, ls, ts, &mc);
  return MeasuredOverhead{mc.pas, mc.attention,
                          mc.attention ? static_cast<double>(mc.pas) / static_cast<double>(mc.attention) : 0.0};
}

/// Cost-model inputs describing an instance (batch 1).
inline CostModelInput cost_input_of(const AttentionInstance& a, const FrequencyLineSet& ls) {
  CostModelInput c;
  c.B = 1;
  c.H = static_cast<long long>(a.head_count);
  c.S = static_cast<long long>(a.token_count());
  c.S_v = static_cast<long long>(a.video_count());
  c.d_h = static_cast<long long>(a.head_dim);
  c.p_t = 2.0 * static_cast<double>(ls.pair_count()) / static_cast<double>(a.head_dim);
  return c;
}

}  // namespace pas
