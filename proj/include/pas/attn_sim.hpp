// Toy multi-head attention with temporal rotary rotation and the query-stream
// phase operator. Single layer, no causal mask, uniform head averaging.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pas/kernel.hpp"
#include "pas/pas_core.hpp"
#include "pas/report.hpp"
#include "pas/ropespec.hpp"
#include "pas/stats.hpp"

namespace pas {

/// Multiply-accumulate tallies for the phase operator and the attention core.
struct MacCounter {
  std::uint64_t pas = 0;
  std::uint64_t attention = 0;
};

/// Per-head token vectors stored flat as [head][token][dim]. Query heads map to
/// key/value heads in contiguous groups (kv head = h / (H / H_kv)); H_kv = H is
/// plain multi-head attention. Temporal pairs occupy dims (2i, 2i+1).
struct AttentionInstance {
  std::size_t head_count = 0;
  std::size_t kv_head_count = 0;
  std::size_t head_dim = 0;
  std::vector<double> queries;
  std::vector<double> keys;
  std::vector<double> values;
  std::vector<double> positions;
  std::vector<bool> video_mask;
  bool rotated = false;

  std::size_t token_count() const noexcept { return positions.size(); }

  std::size_t kv_head_of(std::size_t h) const { return h / (head_count / kv_head_count); }

  double* query(std::size_t h, std::size_t t) { return queries.data() + (h * token_count() + t) * head_dim; }
  const double* query(std::size_t h, std::size_t t) const {
    return queries.data() + (h * token_count() + t) * head_dim;
  }
  double* key(std::size_t g, std::size_t t) { return keys.data() + (g * token_count() + t) * head_dim; }
  const double* key(std::size_t g, std::size_t t) const { return keys.data() + (g * token_count() + t) * head_dim; }
  const double* value(std::size_t g, std::size_t t) const {
    return values.data() + (g * token_count() + t) * head_dim;
  }

  std::size_t video_count() const {
    return static_cast<std::size_t>(std::count(video_mask.begin(), video_mask.end(), true));
  }

  void validate() const {
    if (head_count == 0 || kv_head_count == 0) throw std::invalid_argument("AttentionInstance: no heads");
    if (head_count % kv_head_count != 0) {
      throw std::invalid_argument("AttentionInstance: head_count must be a multiple of kv_head_count");
    }
    if (head_dim == 0 || head_dim % 2 != 0) throw std::invalid_argument("AttentionInstance: head_dim must be even");
    const std::size_t s = token_count();
    if (s == 0) throw std::invalid_argument("AttentionInstance: no tokens");
    if (video_mask.size() != s) throw std::invalid_argument("AttentionInstance: video_mask length mismatch");
    if (queries.size() != head_count * s * head_dim) throw std::invalid_argument("AttentionInstance: query shape");
    if (keys.size() != kv_head_count * s * head_dim) throw std::invalid_argument("AttentionInstance: key shape");
    if (values.size() != kv_head_count * s * head_dim) throw std::invalid_argument("AttentionInstance: value shape");
    for (double p : positions) {
      if (!std::isfinite(p)) throw std::invalid_argument("AttentionInstance: positions must be finite");
    }
  }

  bool operator==(const AttentionInstance&) const = default;
};

inline void to_json(nlohmann::json& j, const AttentionInstance& a) {
  j = nlohmann::json{{"head_count", a.head_count}, {"kv_head_count", a.kv_head_count},
                     {"head_dim", a.head_dim},     {"positions", a.positions},
                     {"video_mask", a.video_mask}, {"rotated", a.rotated},
                     {"queries", a.queries},       {"keys", a.keys},
                     {"values", a.values}};
}

inline AttentionInstance attention_instance_from_json(const nlohmann::json& j) {
  AttentionInstance a;
  a.head_count = j.at("head_count").get<std::size_t>();
  a.kv_head_count = j.at("kv_head_count").get<std::size_t>();
  a.head_dim = j.at("head_dim").get<std::size_t>();
  a.positions = j.at("positions").get<std::vector<double>>();
  a.video_mask = j.at("video_mask").get<std::vector<bool>>();
  a.rotated = j.value("rotated", false);
  a.queries = j.at("queries").get<std::vector<double>>();
  a.keys = j.at("keys").get<std::vector<double>>();
  a.values = j.at("values").get<std::vector<double>>();
  a.validate();
  return a;
}

namespace detail {
inline void rotate_pairs(double* v, std::size_t pair_count, const FrequencyLineSet& ls, double alpha, double pos) {
  for (std::size_t i = 0; i < pair_count; ++i) {
    const double ang = ls[i] * alpha * pos;
    const double c = std::cos(ang), s = std::sin(ang);
    const double x = v[2 * i], y = v[2 * i + 1];
    v[2 * i] = c * x - s * y;
    v[2 * i + 1] = s * x + c * y;
  }
}

inline void require_room(std::size_t dim, const FrequencyLineSet& ls) {
  if (dim < 2 * ls.pair_count()) {
    throw std::invalid_argument("vector of length " + std::to_string(dim) + " cannot hold " +
                                std::to_string(ls.pair_count()) + " temporal pairs");
  }
}
}  // namespace detail

/// Rotates pair i by w_i * alpha * position; other coordinates pass through.
inline std::vector<double> rope_rotate(std::vector<double> vec, double position, const FrequencyLineSet& ls,
                                       const TimeScale& ts) {
  detail::require_room(vec.size(), ls);
  detail::rotate_pairs(vec.data(), ls.pair_count(), ls, ts.alpha(), position);
  return vec;
}

/// Base rotation of every query and key at its token position.
inline AttentionInstance apply_rope(AttentionInstance inst, const FrequencyLineSet& ls, const TimeScale& ts) {
  inst.validate();
  if (inst.rotated) throw std::invalid_argument("apply_rope: instance is already rotated");
  detail::require_room(inst.head_dim, ls);
  const std::size_t s = inst.token_count();
  for (std::size_t h = 0; h < inst.head_count; ++h) {
    for (std::size_t t = 0; t < s; ++t) {
      detail::rotate_pairs(inst.query(h, t), ls.pair_count(), ls, ts.alpha(), inst.positions[t]);
    }
  }
  for (std::size_t g = 0; g < inst.kv_head_count; ++g) {
    for (std::size_t t = 0; t < s; ++t) {
      detail::rotate_pairs(inst.key(g, t), ls.pair_count(), ls, ts.alpha(), inst.positions[t]);
    }
  }
  inst.rotated = true;
  return inst;
}

/// Extra rotation of video-token query rows of each head by its group offset.
/// Must follow the base rotation. Heads whose offset is exactly zero are left
/// untouched, so zero-offset configs return the input bit for bit.
inline AttentionInstance pas_apply(AttentionInstance inst, const PhaseConfig& cfg, const FrequencyLineSet& ls,
                                   const TimeScale& ts, MacCounter* counter = nullptr) {
  inst.validate();
  if (!inst.rotated) throw std::invalid_argument("pas_apply: base rotation has not been applied");
  detail::require_room(inst.head_dim, ls);
  const std::size_t s = inst.token_count();
  std::vector<double> head_offsets(inst.head_count);
  for (std::size_t h = 0; h < inst.head_count; ++h) head_offsets[h] = cfg.offset_of_head(h, inst.head_count);
  for (std::size_t h = 0; h < inst.head_count; ++h) {
    const double delta = head_offsets[h];
    if (delta == 0.0) continue;
    std::vector<double> c(ls.pair_count()), sn(ls.pair_count());
    for (std::size_t i = 0; i < ls.pair_count(); ++i) {
      c[i] = std::cos(ls[i] * ts.alpha() * delta);
      sn[i] = std::sin(ls[i] * ts.alpha() * delta);
    }
    for (std::size_t t = 0; t < s; ++t) {
      if (!inst.video_mask[t]) continue;
      double* q = inst.query(h, t);
      for (std::size_t i = 0; i < ls.pair_count(); ++i) {
        const double x = q[2 * i], y = q[2 * i + 1];
        q[2 * i] = c[i] * x - sn[i] * y;
        q[2 * i + 1] = sn[i] * x + c[i] * y;
      }
      if (counter) counter->pas += 4 * ls.pair_count();
    }
  }
  return inst;
}

/// Per-head logits, softmax weights and outputs plus the head means.
struct AttentionOutput {
  std::size_t head_count = 0, token_count = 0, head_dim = 0;
  std::vector<double> logits;              // [h][i][j]
  std::vector<double> weights;             // [h][i][j]
  std::vector<double> outputs;             // [h][i][d]
  std::vector<double> aggregated_weights;  // [i][j], mean over heads
  std::vector<double> aggregated_outputs;  // [i][d], mean over heads

  double logit(std::size_t h, std::size_t i, std::size_t j) const {
    return logits[(h * token_count + i) * token_count + j];
  }
  double weight(std::size_t h, std::size_t i, std::size_t j) const {
    return weights[(h * token_count + i) * token_count + j];
  }
};

/// In-place numerically stable softmax.
inline void softmax_inplace(std::span<double> row) {
  const double mx = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double& v : row) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : row) v /= sum;
}

/// Scaled dot-product attention with 1/sqrt(head_dim) logits and uniform head mean.
inline AttentionOutput attention_forward(const AttentionInstance& inst, MacCounter* counter = nullptr) {
  inst.validate();
  const std::size_t hn = inst.head_count, s = inst.token_count(), d = inst.head_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  AttentionOutput out{hn, s, d, {}, {}, {}, {}, {}};
  out.logits.assign(hn * s * s, 0.0);
  out.outputs.assign(hn * s * d, 0.0);
  out.aggregated_weights.assign(s * s, 0.0);
  out.aggregated_outputs.assign(s * d, 0.0);
  for (std::size_t h = 0; h < hn; ++h) {
    const std::size_t g = inst.kv_head_of(h);
    for (std::size_t i = 0; i < s; ++i) {
      const double* q = inst.query(h, i);
      double* row = out.logits.data() + (h * s + i) * s;
      for (std::size_t j = 0; j < s; ++j) {
        const double* k = inst.key(g, j);
        double acc = 0.0;
        for (std::size_t c = 0; c < d; ++c) acc += q[c] * k[c];
        row[j] = acc * scale;
      }
    }
  }
  if (counter) counter->attention += 2 * static_cast<std::uint64_t>(hn) * s * s * d;
  out.weights = out.logits;
  const double inv_h = 1.0 / static_cast<double>(hn);
  for (std::size_t h = 0; h < hn; ++h) {
    const std::size_t g = inst.kv_head_of(h);
    for (std::size_t i = 0; i < s; ++i) {
      std::span<double> row(out.weights.data() + (h * s + i) * s, s);
      softmax_inplace(row);
      double* o = out.outputs.data() + (h * s + i) * d;
      for (std::size_t j = 0; j < s; ++j) {
        const double* v = inst.value(g, j);
        for (std::size_t c = 0; c < d; ++c) o[c] += row[j] * v[c];
        out.aggregated_weights[i * s + j] += row[j] * inv_h;
      }
      for (std::size_t c = 0; c < d; ++c) out.aggregated_outputs[i * d + c] += o[c] * inv_h;
    }
  }
  return out;
}

/// Base rotation, optional phase operator, forward pass.
inline AttentionOutput rotated_forward(const AttentionInstance& unrotated, const PhaseConfig* cfg,
                                       const FrequencyLineSet& ls, const TimeScale& ts,
                                       MacCounter* counter = nullptr) {
  auto inst = apply_rope(unrotated, ls, ts);
  if (cfg) inst = pas_apply(std::move(inst), *cfg, ls, ts, counter);
  return attention_forward(inst, counter);
}

/// Random content: standard normal queries, keys and values. Video tokens are
/// the trailing `video_count` tokens at positions 0, 1, ...; text tokens
/// precede them at negative positions.
inline AttentionInstance random_instance(std::size_t head_count, std::size_t kv_head_count, std::size_t head_dim,
                                         std::size_t text_count, std::size_t video_count, std::uint64_t seed) {
  AttentionInstance a;
  a.head_count = head_count;
  a.kv_head_count = kv_head_count;
  a.head_dim = head_dim;
  const std::size_t s = text_count + video_count;
  for (std::size_t t = 0; t < s; ++t) {
    a.positions.push_back(static_cast<double>(t) - static_cast<double>(text_count));
    a.video_mask.push_back(t >= text_count);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  a.queries.resize(head_count * s * head_dim);
  a.keys.resize(kv_head_count * s * head_dim);
  a.values.resize(kv_head_count * s * head_dim);
  for (auto& v : a.queries) v = nd(rng);
  for (auto& v : a.keys) v = nd(rng);
  for (auto& v : a.values) v = nd(rng);
  a.validate();
  return a;
}

/// Every temporal pair of every query and key equals (c, 0), so each pair
/// contributes the same coefficient C_i = c^2 and a head logit at lag L is
/// m * c^2 * Re{m(L)} / sqrt(head_dim). Values are random.
inline AttentionInstance uniform_coefficient_instance(std::size_t head_count, const FrequencyLineSet& ls,
                                                      std::size_t text_count, std::size_t video_count, double c,
                                                      std::uint64_t seed) {
  auto a = random_instance(head_count, head_count, 2 * ls.pair_count(), text_count, video_count, seed);
  for (std::size_t i = 0; i < a.queries.size(); ++i) a.queries[i] = (i % 2 == 0) ? c : 0.0;
  for (std::size_t i = 0; i < a.keys.size(); ++i) a.keys[i] = (i % 2 == 0) ? c : 0.0;
  return a;
}

/// Head-mean logit matrix after base rotation and the optional phase operator.
inline std::vector<double> aggregated_logits(const AttentionInstance& unrotated, const PhaseConfig* cfg,
                                             const FrequencyLineSet& ls, const TimeScale& ts) {
  const auto out = rotated_forward(unrotated, cfg, ls, ts);
  const std::size_t s = out.token_count;
  std::vector<double> agg(s * s, 0.0);
  const double inv_h = 1.0 / static_cast<double>(out.head_count);
  for (std::size_t h = 0; h < out.head_count; ++h) {
    for (std::size_t k = 0; k < s * s; ++k) agg[k] += out.logits[h * s * s + k] * inv_h;
  }
  return agg;
}

/// Logit swing under timing jitter. For each magnitude, every video-token
/// position moves by +/- magnitude (seeded random signs, same signs for every
/// magnitude) and the head-mean logits are compared against the unperturbed
/// ones. cfg == nullptr is the baseline.
inline SweepReport logit_jitter(const AttentionInstance& unrotated, const PhaseConfig* cfg,
                                const FrequencyLineSet& ls, const TimeScale& ts,
                                const std::vector<double>& jitter_magnitudes, std::uint64_t seed) {
  unrotated.validate();
  const auto ref = aggregated_logits(unrotated, cfg, ls, ts);
  std::mt19937_64 rng(stats::derive_seed(seed, 0x6a17));
  std::vector<double> signs(unrotated.token_count(), 0.0);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t t = 0; t < signs.size(); ++t) {
    const bool up = coin(rng);
    if (unrotated.video_mask[t]) signs[t] = up ? 1.0 : -1.0;
  }
  SweepReport rep;
  rep.axis_name = "jitter";
  std::vector<double> mx, mean;
  for (double j : jitter_magnitudes) {
    if (!std::isfinite(j) || j < 0.0) throw std::invalid_argument("logit_jitter: magnitudes must be >= 0");
    auto pert = unrotated;
    for (std::size_t t = 0; t < signs.size(); ++t) pert.positions[t] += signs[t] * j;
    const auto cur = aggregated_logits(pert, cfg, ls, ts);
    double worst = 0.0, sum = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      const double d = std::abs(cur[k] - ref[k]);
      worst = std::max(worst, d);
      sum += d;
    }
    rep.axis_values.push_back(j);
    mx.push_back(worst);
    mean.push_back(sum / static_cast<double>(ref.size()));
  }
  rep.add_metric("max_abs_change", std::move(mx));
  rep.add_metric("mean_abs_change", std::move(mean));
  nlohmann::json cfg_json = nullptr;
  if (cfg) to_json(cfg_json, *cfg);
  rep.metadata = {{"seed", seed}, {"alpha", ts.alpha()}, {"pair_count", ls.pair_count()}, {"config", cfg_json}};
  return rep;
}

}  // namespace pas
