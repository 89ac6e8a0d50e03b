#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "pas/pas_core.hpp"

using namespace pas;

TEST(PhaseConfig, Validation) {
  EXPECT_THROW(PhaseConfig({}, {}), std::invalid_argument);
  EXPECT_THROW(PhaseConfig({0.0, 0.5}, {1.0}), std::invalid_argument);
  EXPECT_THROW(PhaseConfig({0.0, 0.5}, {0.7, 0.7}), std::invalid_argument);
  EXPECT_THROW(PhaseConfig({0.0, 0.5}, {1.5, -0.5}), std::invalid_argument);
  EXPECT_THROW(PhaseConfig({0.0, NAN}, {0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(PhaseConfig({0.0, 0.5}, {0.5, 0.5}, std::vector<int>{0, 2}), std::invalid_argument);
  EXPECT_NO_THROW(PhaseConfig({0.0, 0.5}, {1.0, 0.0}));
}

TEST(PhaseConfig, DefaultsAndFlags) {
  const auto cfg = default_phase_config();
  EXPECT_EQ(cfg.group_count(), 2u);
  EXPECT_EQ(cfg.offsets(), (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(cfg.weights(), (std::vector<double>{0.5, 0.5}));
  EXPECT_TRUE(cfg.order_preserving());
  EXPECT_FALSE(PhaseConfig::uniform({0.0, 1.5}).order_preserving());
  EXPECT_TRUE(PhaseConfig::uniform({0.0, 0.0, 0.0}).all_offsets_zero());
}

TEST(PhaseConfig, BlockedAndExplicitAssignment) {
  const auto cfg = PhaseConfig::uniform({0.0, 0.5});
  EXPECT_EQ(cfg.group_of_head(0, 8), 0u);
  EXPECT_EQ(cfg.group_of_head(3, 8), 0u);
  EXPECT_EQ(cfg.group_of_head(4, 8), 1u);
  EXPECT_EQ(cfg.group_of_head(7, 8), 1u);
  EXPECT_THROW(cfg.group_of_head(8, 8), std::invalid_argument);
  const PhaseConfig exp({0.0, 0.5}, {0.5, 0.5}, std::vector<int>{1, 0, 1});
  EXPECT_EQ(exp.offset_of_head(0, 3), 0.5);
  EXPECT_EQ(exp.offset_of_head(1, 3), 0.0);
  EXPECT_THROW(exp.group_of_head(3, 4), std::invalid_argument);
}

TEST(PhaseConfig, JsonRoundTrip) {
  nlohmann::json j;
  to_json(j, default_phase_config());
  EXPECT_EQ(j.at("assignment"), "blocked");
  EXPECT_EQ(j.at("K"), 2);
  const auto back = phase_config_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.offsets(), default_phase_config().offsets());
  const PhaseConfig exp({0.0, 0.25}, {0.25, 0.75}, std::vector<int>{1, 1, 0});
  to_json(j, exp);
  const auto back2 = phase_config_from_json(j);
  ASSERT_TRUE(back2.assignment().has_value());
  EXPECT_EQ(*back2.assignment(), (std::vector<int>{1, 1, 0}));
  j["K"] = 3;
  EXPECT_THROW(phase_config_from_json(j), std::invalid_argument);
}

TEST(EffectiveKernel, ZeroOffsetsReproduceKernel) {
  const auto ls = default_lineset();
  const auto lags = uniform_grid(-5.0, 5.0, 0.25);
  const auto base = eval_kernel(ls, TimeScale{}, lags);
  const auto eff = effective_kernel(ls, TimeScale{}, PhaseConfig::uniform({0.0, 0.0, 0.0}), lags);
  for (std::size_t j = 0; j < lags.size(); ++j) EXPECT_NEAR(std::abs(eff.values[j] - base.values[j]), 0.0, 1e-15);
}

TEST(EffectiveKernel, TwoPhasorClosedForm) {
  const auto ls = FrequencyLineSet::from_lines({1.0});
  const auto eff = effective_kernel(ls, TimeScale{}, default_phase_config(), uniform_grid(-3.0, 3.0, 0.1));
  for (std::size_t j = 0; j < eff.size(); ++j) {
    const cplx expect = std::cos(0.25) * std::polar(1.0, eff.lags[j] + 0.25);
    EXPECT_NEAR(std::abs(eff.values[j] - expect), 0.0, 1e-15);
  }
}

TEST(EffectiveKernel, ZeroWeightIgnoresShift) {
  const auto ls = default_lineset();
  const PhaseConfig cfg({0.0, 0.77}, {1.0, 0.0});
  for (double lag : {0.0, 1.3, 8.0}) {
    EXPECT_EQ(effective_kernel_value(ls, TimeScale{}, cfg, lag), kernel_value(ls, TimeScale{}, lag));
  }
}

TEST(AggregationGain, ClosedForms) {
  const TimeScale ts(1.3);
  EXPECT_EQ(aggregation_gain(default_phase_config(), ts, 0.0), (cplx{1.0, 0.0}));
  for (double delta : {0.1, 0.5, 0.9}) {
    const auto cfg = PhaseConfig::uniform({0.0, delta});
    for (double w : uniform_grid(0.0, 10.0, 0.01)) {
      EXPECT_NEAR(std::abs(aggregation_gain(cfg, ts, w)), std::abs(std::cos(w * ts.alpha() * delta / 2.0)), 1e-12);
    }
  }
  const auto cfg = PhaseConfig::uniform({0.0, 0.5});
  EXPECT_NEAR(std::abs(aggregation_gain(cfg, TimeScale{}, 2.0 * std::numbers::pi)), 0.0, 1e-15);
}

TEST(AggregationGain, ConvexCombinationBound) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> off{u(rng), u(rng), u(rng)}, w{u(rng), u(rng), 0.0};
    w[2] = std::max(0.0, 2.0 - w[0] - w[1]);
    const double s = w[0] + w[1] + w[2];
    for (auto& v : w) v /= s;
    w[2] = 1.0 - w[0] - w[1];
    const PhaseConfig cfg(off, w);
    for (double om : uniform_grid(0.0, 50.0, 0.37)) EXPECT_LE(std::abs(aggregation_gain(cfg, TimeScale{}, om)), 1.0 + 1e-12);
  }
}

TEST(Variation, ConstantAndZeroEpsilon) {
  const std::vector<double> c(100, 3.0);
  EXPECT_EQ(variation(c, 0.1, 0.5), 0.0);
  std::vector<double> r(100);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sin(0.3 * static_cast<double>(i));
  EXPECT_EQ(variation(r, 0.1, 0.0), 0.0);
}

TEST(Variation, CosineClosedForm) {
  const double step = 0.01, eps = 0.5;
  const double horizon = 100.0 * 2.0 * std::numbers::pi;
  const auto n = static_cast<std::size_t>((horizon + eps) / step) + 1;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = std::cos(step * static_cast<double>(i));
  const double v = variation(f, step, eps);
  EXPECT_NEAR(v / (1.0 - std::cos(eps)), 1.0, 0.01);
}

TEST(Variation, RejectsOffGridEpsilon) {
  const std::vector<double> f(50, 1.0);
  EXPECT_THROW(variation(f, 0.1, 0.15), std::invalid_argument);
  EXPECT_THROW(variation(f, 0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(variation(std::vector<double>(5, 1.0), 0.1, 0.4), std::invalid_argument);
}

TEST(SampledKernel, MatchesDirectEvaluation) {
  const auto ls = default_lineset();
  const TimeScale ts(0.9);
  const std::vector<double> off{0.0, 0.3}, w{0.25, 0.75};
  const auto s = sample_shifted_kernel_re(ls, ts, off, w, 0.25, 3000);
  const PhaseConfig cfg(off, w);
  for (std::size_t k : {0u, 1u, 255u, 256u, 257u, 1999u, 2999u}) {
    EXPECT_NEAR(s[k], effective_kernel_value(ls, ts, cfg, 0.25 * static_cast<double>(k)).real(), 1e-12);
  }
}

TEST(Smoothing, EqualOffsetsAreNotStrict) {
  const auto ls = default_lineset();
  const auto same = check_smoothing_inequality(ls, TimeScale{}, PhaseConfig::uniform({0.0, 0.0}), 0.25, 2000.0, 0.25);
  EXPECT_TRUE(same.holds);
  EXPECT_FALSE(same.strict);
  EXPECT_EQ(same.v_eff, same.v_base);
  const auto shifted = check_smoothing_inequality(ls, TimeScale{}, PhaseConfig::uniform({0.3, 0.3}), 0.25, 2000.0, 0.25);
  EXPECT_TRUE(shifted.holds);
  EXPECT_FALSE(shifted.strict);
  EXPECT_NEAR(shifted.v_eff / shifted.v_base, 1.0, 1e-12);
}

TEST(Smoothing, SinglePositiveWeightIsNotStrict) {
  const auto chk = check_smoothing_inequality(default_lineset(), TimeScale{}, PhaseConfig({0.0, 0.5}, {0.0, 1.0}),
                                              0.25, 2000.0, 0.25);
  EXPECT_TRUE(chk.holds);
  EXPECT_FALSE(chk.strict);
}

TEST(Smoothing, DefaultConfigIsStrict) {
  const auto chk = check_smoothing_inequality(default_lineset(), TimeScale{}, default_phase_config(), 0.25,
                                              20000.0, 0.25);
  EXPECT_TRUE(chk.holds);
  EXPECT_TRUE(chk.strict);
  EXPECT_GT(chk.relative_reduction(), 0.01);
}

TEST(Smoothing, SingleLineFollowsGainSquared) {
  const auto ls = FrequencyLineSet::from_lines({0.8});
  const TimeScale ts;
  for (double delta : {0.3, 0.6, 1.0}) {
    const auto cfg = PhaseConfig::uniform({0.0, delta});
    const auto chk = check_smoothing_inequality(ls, ts, cfg, 0.25, 5000.0, 0.05);
    EXPECT_NEAR(chk.v_eff / chk.v_base, std::norm(aggregation_gain(cfg, ts, 0.8)), 0.01);
  }
}

TEST(Smoothing, PermutationSymmetric) {
  const auto ls = default_lineset();
  const PhaseConfig a({0.0, 0.2, 0.9}, {0.2, 0.3, 0.5});
  const PhaseConfig b({0.9, 0.0, 0.2}, {0.5, 0.2, 0.3});
  for (double lag : {0.0, 0.4, 7.0}) {
    EXPECT_NEAR(std::abs(effective_kernel_value(ls, TimeScale{}, a, lag) - effective_kernel_value(ls, TimeScale{}, b, lag)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(aggregation_gain(a, TimeScale{}, lag) - aggregation_gain(b, TimeScale{}, lag)), 0.0, 1e-15);
  }
}

TEST(Smoothing, HoldsForNearlyEqualOffsets) {
  const auto ls = default_lineset();
  for (double gap : {1e-4, 1e-3, 1e-2}) {
    const auto chk = check_smoothing_inequality(ls, TimeScale{}, PhaseConfig({0.4, 0.4 + gap}, {0.3, 0.7}), 0.25,
                                                2000.0, 0.25, 0.0, 0.0);
    EXPECT_TRUE(chk.holds) << gap;
    EXPECT_GT(chk.relative_reduction(), 0.0) << gap;
  }
}
