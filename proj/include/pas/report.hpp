// Sweep reports and the CSV/JSON writers shared by every pipeline.

#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace pas {

/// Fixed-format real for CSV output; identical inputs give identical bytes.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

/// One axis of parameter values with named per-point metrics.
struct SweepReport {
  std::string axis_name;
  std::vector<double> axis_values;
  std::vector<std::pair<std::string, std::vector<double>>> metrics;
  nlohmann::json metadata = nlohmann::json::object();

  void add_metric(std::string name, std::vector<double> values) {
    if (values.size() != axis_values.size()) {
      throw std::invalid_argument("SweepReport: metric '" + name + "' has " + std::to_string(values.size()) +
                                  " values for an axis of length " + std::to_string(axis_values.size()));
    }
    if (has_metric(name)) {
      throw std::invalid_argument("SweepReport: duplicate metric '" + name + "'");
    }
    metrics.emplace_back(std::move(name), std::move(values));
  }

  bool has_metric(const std::string& name) const {
    return std::any_of(metrics.begin(), metrics.end(), [&](const auto& m) { return m.first == name; });
  }

  const std::vector<double>& metric(const std::string& name) const {
    for (const auto& [n, v] : metrics) {
      if (n == name) return v;
    }
    throw std::out_of_range("SweepReport: no metric named '" + name + "'");
  }

  std::string to_csv() const {
    std::string out = axis_name;
    for (const auto& m : metrics) out += "," + m.first;
    out += "\n";
    for (std::size_t i = 0; i < axis_values.size(); ++i) {
      out += format_real(axis_values[i]);
      for (const auto& m : metrics) out += "," + format_real(m.second[i]);
      out += "\n";
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json mj = nlohmann::json::object();
    for (const auto& [n, v] : metrics) mj[n] = v;
    return nlohmann::json{{"axis_name", axis_name}, {"axis_values", axis_values}, {"metrics", mj},
                          {"metric_order", metric_names()}, {"metadata", metadata}};
  }

  static SweepReport from_json(const nlohmann::json& j) {
    SweepReport r;
    r.axis_name = j.at("axis_name").get<std::string>();
    r.axis_values = j.at("axis_values").get<std::vector<double>>();
    for (const auto& name : j.at("metric_order").get<std::vector<std::string>>()) {
      r.add_metric(name, j.at("metrics").at(name).get<std::vector<double>>());
    }
    r.metadata = j.value("metadata", nlohmann::json::object());
    return r;
  }

  std::vector<std::string> metric_names() const {
    std::vector<std::string> names;
    for (const auto& m : metrics) names.push_back(m.first);
    return names;
  }
};

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace pas
