// Command-line front end: kernel dumps, sweeps, the cost model and the
// invariant suite. Every artifact command writes <out>.csv and <out>.json.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pas/pas.hpp"

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

struct LineOptions {
  int pairs = 64;
  double base = 10000.0;
  double alpha = 1.0;

  void add(CLI::App* app) {
    app->add_option("--pairs", pairs, "temporal rotary pairs")->capture_default_str();
    app->add_option("--base", base, "rotary base")->capture_default_str();
    app->add_option("--alpha", alpha, "position units per bin")->capture_default_str();
  }
  pas::FrequencyLineSet lines() const { return pas::make_lineset(pairs, base); }
  pas::TimeScale scale() const { return pas::TimeScale(alpha); }
  json to_json() const { return {{"pairs", pairs}, {"base", base}, {"alpha", alpha}}; }
};

struct TaskOptions {
  pas::SyntheticTask t;

  void add(CLI::App* app) {
    app->add_option("--frames", t.total_frames, "total frames in the clip")->capture_default_str();
    app->add_option("--ratio", t.sampling_ratio, "sampling ratio")->capture_default_str();
    app->add_option("--frames-per-bin", t.frames_per_bin)->capture_default_str();
    app->add_option("--snr", t.content_snr, "key content logit")->capture_default_str();
    app->add_option("--heads", t.head_count)->capture_default_str();
    app->add_option("--kv-heads", t.kv_head_count)->capture_default_str();
    app->add_option("--text-tokens", t.text_tokens)->capture_default_str();
    app->add_option("--relevance", t.neighbor_relevance, "neighbor relevance decay per bin")->capture_default_str();
    app->add_option("--noise", t.noise, "distractor content noise")->capture_default_str();
    app->add_option("--jitter", t.jitter, "timing jitter half-width in bins")->capture_default_str();
  }
  json to_json() const {
    json j;
    pas::to_json(j, t);
    j.erase("seed");
    j.erase("key_frame_index");
    return j;
  }
};

void write_artifacts(const std::string& out, const std::string& command, const json& params, std::uint64_t seed,
                     const std::string& csv, const json& extra = json::object()) {
  json side = {{"schema_version", kSchemaVersion}, {"command", command}, {"params", params}, {"seed", seed}};
  for (auto it = extra.begin(); it != extra.end(); ++it) side[it.key()] = it.value();
  pas::write_text_file(out + ".csv", csv);
  pas::write_text_file(out + ".json", side.dump(2) + "\n");
  std::cout << "wrote " << out << ".csv and " << out << ".json\n";
}

std::vector<double> delta_grid() { return pas::uniform_grid(0.0, 1.0, 0.1); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-aggregated temporal rotary toolkit"};
  app.require_subcommand(1);
  int status = 0;

  // kernel
  auto* kernel = app.add_subcommand("kernel", "dump the time kernel m(lag)");
  LineOptions k_lines;
  k_lines.add(kernel);
  double k_min = 0.0, k_max = 20.0, k_step = 0.05;
  std::string k_out = "kernel";
  kernel->add_option("--lag-min", k_min)->capture_default_str();
  kernel->add_option("--lag-max", k_max)->capture_default_str();
  kernel->add_option("--step", k_step)->capture_default_str();
  kernel->add_option("--out", k_out, "output prefix")->capture_default_str();
  kernel->callback([&] {
    const auto g = pas::eval_kernel(k_lines.lines(), k_lines.scale(), pas::uniform_grid(k_min, k_max, k_step));
    json params = k_lines.to_json();
    params.update({{"lag_min", k_min}, {"lag_max", k_max}, {"step", k_step}});
    write_artifacts(k_out, "kernel", params, 0, g.to_csv());
  });

  // smooth
  auto* smooth = app.add_subcommand("smooth", "variation of the single and aggregated kernels");
  LineOptions s_lines;
  s_lines.add(smooth);
  std::vector<double> s_offsets{0.0, 0.5}, s_weights, s_eps{0.25};
  double s_horizon = 0.0, s_step = 0.25;
  std::string s_out = "smooth";
  smooth->add_option("--offsets", s_offsets, "group offsets in bins")->delimiter(',')->capture_default_str();
  smooth->add_option("--weights", s_weights, "group weights (default uniform)")->delimiter(',');
  smooth->add_option("--eps", s_eps, "variation increments")->delimiter(',')->capture_default_str();
  smooth->add_option("--horizon", s_horizon, "averaging horizon (0 = 64 slowest periods)");
  smooth->add_option("--step", s_step, "grid step")->capture_default_str();
  smooth->add_option("--out", s_out)->capture_default_str();
  smooth->callback([&] {
    const auto ls = s_lines.lines();
    const auto ts = s_lines.scale();
    const auto cfg = s_weights.empty() ? pas::PhaseConfig::uniform(s_offsets) : pas::PhaseConfig(s_offsets, s_weights);
    const double horizon = s_horizon > 0.0 ? s_horizon : pas::default_variation_horizon(ls, ts);
    pas::SweepReport rep;
    rep.axis_name = "epsilon";
    std::vector<double> vb, ve, red, holds;
    for (double e : s_eps) {
      const auto chk = pas::check_smoothing_inequality(ls, ts, cfg, e, horizon, s_step);
      rep.axis_values.push_back(e);
      vb.push_back(chk.v_base);
      ve.push_back(chk.v_eff);
      red.push_back(chk.relative_reduction());
      holds.push_back(chk.holds ? 1.0 : 0.0);
    }
    rep.add_metric("v_base", vb);
    rep.add_metric("v_eff", ve);
    rep.add_metric("relative_reduction", red);
    rep.add_metric("holds", holds);
    json params = s_lines.to_json();
    json cj;
    pas::to_json(cj, cfg);
    params.update({{"config", cj}, {"eps", s_eps}, {"horizon", horizon}, {"step", s_step}});
    write_artifacts(s_out, "smooth", params, 0, rep.to_csv());
  });

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "DFT of a windowed kernel observation");
  LineOptions p_lines;
  p_lines.add(spectrum);
  double p_period = 0.0, p_delay = 0.3;
  std::size_t p_n = 256;
  std::string p_window = "rect", p_out = "spectrum";
  spectrum->add_option("--period", p_period, "sampling period (0 = half the Nyquist period)");
  spectrum->add_option("--n", p_n, "transform length")->capture_default_str();
  spectrum->add_option("--delay", p_delay, "delay in sampling periods")->capture_default_str();
  spectrum->add_option("--window", p_window, "rect or hann")->capture_default_str();
  spectrum->add_option("--out", p_out)->capture_default_str();
  spectrum->callback([&] {
    const auto ls = p_lines.lines();
    const auto ts = p_lines.scale();
    const double period = p_period > 0.0 ? p_period : 0.5 * pas::nyquist_period(ls, ts);
    const auto window = pas::make_window(pas::window_kind_from_string(p_window), p_n);
    const auto obs = pas::observe(ls, ts, period, p_n, p_delay * period, window);
    const auto chk = pas::magnitude_invariance_check(ls, ts, period, p_n, p_delay * period, window);
    json params = p_lines.to_json();
    params.update({{"period", period}, {"n", p_n}, {"delay", p_delay}, {"window", p_window}});
    json extra = {{"check",
                   {{"max_rel_dev", chk.max_rel_dev},
                    {"resampled_rel_dev", chk.resampled_rel_dev},
                    {"nyquist_ok", chk.nyquist_ok}}}};
    write_artifacts(p_out, "spectrum", params, 0, pas::dft(obs).to_csv(), extra);
  });

  // jitter
  auto* jitter = app.add_subcommand("jitter", "logit swing under timing jitter, baseline vs phase groups");
  LineOptions j_lines;
  j_lines.add(jitter);
  std::vector<double> j_offsets{0.0, 0.5}, j_mags{0.0, 0.01, 0.02, 0.05, 0.1};
  std::size_t j_heads = 8, j_video = 32, j_text = 4;
  std::uint64_t j_seed = 0;
  std::string j_out = "jitter";
  jitter->add_option("--offsets", j_offsets)->delimiter(',')->capture_default_str();
  jitter->add_option("--magnitudes", j_mags)->delimiter(',')->capture_default_str();
  jitter->add_option("--heads", j_heads)->capture_default_str();
  jitter->add_option("--video-tokens", j_video)->capture_default_str();
  jitter->add_option("--text-tokens", j_text)->capture_default_str();
  jitter->add_option("--seed", j_seed)->capture_default_str();
  jitter->add_option("--out", j_out)->capture_default_str();
  jitter->callback([&] {
    const auto ls = j_lines.lines();
    const auto ts = j_lines.scale();
    const auto cfg = pas::PhaseConfig::uniform(j_offsets);
    const auto inst = pas::uniform_coefficient_instance(j_heads, ls, j_text, j_video, 1.0, j_seed);
    const auto base = pas::logit_jitter(inst, nullptr, ls, ts, j_mags, j_seed);
    const auto withp = pas::logit_jitter(inst, &cfg, ls, ts, j_mags, j_seed);
    pas::SweepReport rep;
    rep.axis_name = "jitter";
    rep.axis_values = j_mags;
    rep.add_metric("baseline_max_abs_change", base.metric("max_abs_change"));
    rep.add_metric("baseline_mean_abs_change", base.metric("mean_abs_change"));
    rep.add_metric("pas_max_abs_change", withp.metric("max_abs_change"));
    rep.add_metric("pas_mean_abs_change", withp.metric("mean_abs_change"));
    json params = j_lines.to_json();
    params.update({{"offsets", j_offsets}, {"heads", j_heads}, {"video_tokens", j_video}, {"text_tokens", j_text}});
    write_artifacts(j_out, "jitter", params, j_seed, rep.to_csv());
  });

  // delta-scan
  auto* dscan = app.add_subcommand("delta-scan", "retrieval hit rate over the offset magnitude");
  LineOptions d_lines;
  d_lines.add(dscan);
  TaskOptions d_task;
  d_task.add(dscan);
  std::vector<double> d_deltas = delta_grid();
  int d_trials = 100, d_tasks = 50;
  std::uint64_t d_seed = 0;
  std::string d_out = "delta_scan";
  dscan->add_option("--deltas", d_deltas, "offset magnitudes in [0, 1]")->delimiter(',');
  dscan->add_option("--trials", d_trials, "jitter trials per task")->capture_default_str();
  dscan->add_option("--tasks", d_tasks, "tasks")->capture_default_str();
  dscan->add_option("--seed", d_seed)->capture_default_str();
  dscan->add_option("--out", d_out)->capture_default_str();
  dscan->callback([&] {
    const auto rep =
        pas::delta_scan(d_task.t, d_lines.lines(), d_lines.scale(), d_deltas, d_trials, d_seed, d_tasks);
    json params = d_lines.to_json();
    params.update({{"task", d_task.to_json()}, {"deltas", d_deltas}, {"trials", d_trials}, {"tasks", d_tasks}});
    write_artifacts(d_out, "delta-scan", params, d_seed, rep.to_csv());
  });

  // sampling-scan
  auto* sscan = app.add_subcommand("sampling-scan", "baseline and phase-group hit rates over the sampling ratio");
  LineOptions r_lines;
  r_lines.add(sscan);
  TaskOptions r_task;
  r_task.add(sscan);
  std::vector<double> r_ratios{0.03125, 0.0625, 0.125, 0.25, 0.5, 1.0};
  double r_delta = 0.5;
  int r_trials = 100, r_tasks = 50;
  std::uint64_t r_seed = 0;
  std::string r_out = "sampling_scan";
  sscan->add_option("--ratios", r_ratios)->delimiter(',')->capture_default_str();
  sscan->add_option("--delta", r_delta, "offset of the second group")->capture_default_str();
  sscan->add_option("--trials", r_trials)->capture_default_str();
  sscan->add_option("--tasks", r_tasks)->capture_default_str();
  sscan->add_option("--seed", r_seed)->capture_default_str();
  sscan->add_option("--out", r_out)->capture_default_str();
  sscan->callback([&] {
    const auto rep = pas::sampling_scan(r_task.t, r_lines.lines(), r_lines.scale(), r_ratios, r_trials, r_seed,
                                        r_tasks, r_delta);
    json params = r_lines.to_json();
    params.update({{"task", r_task.to_json()},
                   {"ratios", r_ratios},
                   {"delta", r_delta},
                   {"trials", r_trials},
                   {"tasks", r_tasks}});
    write_artifacts(r_out, "sampling-scan", params, r_seed, rep.to_csv());
  });

  // cost
  auto* cost = app.add_subcommand("cost", "predicted and counted phase-operator overhead");
  LineOptions c_lines;
  c_lines.pairs = 16;
  c_lines.add(cost);
  std::vector<std::size_t> c_tokens{64, 128, 256};
  std::size_t c_video = 32, c_heads = 4, c_extra = 32;
  std::vector<double> c_offsets{0.0, 0.5};
  std::uint64_t c_seed = 0;
  std::string c_out = "cost";
  cost->add_option("--tokens", c_tokens, "sequence lengths S")->delimiter(',')->capture_default_str();
  cost->add_option("--video-tokens", c_video, "video tokens S_v")->capture_default_str();
  cost->add_option("--heads", c_heads)->capture_default_str();
  cost->add_option("--extra-dims", c_extra, "non-temporal channels per head")->capture_default_str();
  cost->add_option("--offsets", c_offsets)->delimiter(',')->capture_default_str();
  cost->add_option("--seed", c_seed)->capture_default_str();
  cost->add_option("--out", c_out)->capture_default_str();
  cost->callback([&] {
    const auto ls = c_lines.lines();
    const auto ts = c_lines.scale();
    const auto cfg = pas::PhaseConfig::uniform(c_offsets);
    pas::SweepReport rep;
    rep.axis_name = "S";
    std::vector<double> pred, meas, pf, af;
    for (std::size_t s : c_tokens) {
      if (s < c_video) throw std::invalid_argument("cost: every S must be at least --video-tokens");
      const auto inst = pas::random_instance(c_heads, c_heads, 2 * ls.pair_count() + c_extra, s - c_video, c_video,
                                             c_seed);
      const auto m = pas::measured_overhead(inst, cfg, ls, ts);
      rep.axis_values.push_back(static_cast<double>(s));
      pred.push_back(pas::overhead_ratio(pas::cost_input_of(inst, ls)));
      meas.push_back(m.ratio);
      pf.push_back(static_cast<double>(m.pas_flops));
      af.push_back(static_cast<double>(m.attn_flops));
    }
    rep.add_metric("predicted_ratio", pred);
    rep.add_metric("measured_ratio", meas);
    rep.add_metric("pas_macs", pf);
    rep.add_metric("attn_macs", af);
    json params = c_lines.to_json();
    params.update({{"tokens", c_tokens},
                   {"video_tokens", c_video},
                   {"heads", c_heads},
                   {"extra_dims", c_extra},
                   {"offsets", c_offsets}});
    write_artifacts(c_out, "cost", params, c_seed, rep.to_csv());
  });

  // verify
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  std::uint64_t v_seed = 1;
  verify->add_option("--seed", v_seed)->capture_default_str();
  verify->callback([&] {
    for (const auto& r : pas::run_invariant_suite(v_seed)) {
      std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "\n";
      if (!r.passed) {
        std::cerr << "invariant failed: " << r.name << "\n";
        status = 1;
      }
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return status;
}
