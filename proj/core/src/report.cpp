#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <tuple>

#include "robcov/errors.hpp"
#include "robcov/harness.hpp"
#include "robcov/text_format.hpp"

namespace robcov {

const Aggregate* ExperimentReport::find(Index N, Index n, const std::string& metric) const {
  for (const auto& a : aggregates)
    if (a.N == N && a.n == n && a.metric_name == metric) return &a;
  return nullptr;
}

std::vector<double> ExperimentReport::values(Index N, Index n, const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.N == N && r.n == n && r.metric_name == metric) out.push_back(r.value);
  return out;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("quantile of empty data");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: p must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<Aggregate> aggregate_rows(const std::vector<ReportRow>& rows) {
  using Key = std::tuple<Index, Index, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : rows) {
    Key key{r.N, r.n, r.metric_name};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r.value);
  }
  std::vector<Aggregate> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    const auto& v = groups.at(key);
    Aggregate a;
    a.N = std::get<0>(key);
    a.n = std::get<1>(key);
    a.metric_name = std::get<2>(key);
    a.median = quantile(v, 0.5);
    a.p05 = quantile(v, 0.05);
    a.p95 = quantile(v, 0.95);
    a.count = static_cast<int>(v.size());
    out.push_back(std::move(a));
  }
  return out;
}

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw ConfigError("unknown report format '" + name + "' (expected csv or json)");
}

nlohmann::json report_to_json(const ExperimentReport& r, bool include_timing) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"experiment", row.experiment},
                    {"N", row.N},
                    {"n", row.n},
                    {"trial", row.trial},
                    {"metric_name", row.metric_name},
                    {"value", row.value}});
  }
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& a : r.aggregates) {
    aggs.push_back({{"N", a.N},
                    {"n", a.n},
                    {"metric_name", a.metric_name},
                    {"median", a.median},
                    {"p05", a.p05},
                    {"p95", a.p95},
                    {"count", a.count}});
  }
  nlohmann::json j{{"config", r.config_echo}, {"rows", rows}, {"aggregates", aggs}};
  if (include_timing) j["runtime_seconds"] = r.runtime_seconds;
  return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport r;
  try {
    r.config_echo = j.value("config", nlohmann::json::object());
    for (const auto& row : j.at("rows")) {
      r.rows.push_back(ReportRow{row.at("experiment").get<std::string>(), row.at("N").get<Index>(),
                                 row.at("n").get<Index>(), row.at("trial").get<int>(),
                                 row.at("metric_name").get<std::string>(),
                                 row.at("value").get<double>()});
    }
    for (const auto& a : j.at("aggregates")) {
      r.aggregates.push_back(Aggregate{a.at("N").get<Index>(), a.at("n").get<Index>(),
                                       a.at("metric_name").get<std::string>(),
                                       a.at("median").get<double>(), a.at("p05").get<double>(),
                                       a.at("p95").get<double>(), a.at("count").get<int>()});
    }
    r.runtime_seconds = j.value("runtime_seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("report json: ") + e.what());
  }
  return r;
}

void emit_report(const ExperimentReport& r, std::ostream& os, ReportFormat format,
                 bool include_timing) {
  if (format == ReportFormat::Json) {
    os << report_to_json(r, include_timing).dump(2) << '\n';
    return;
  }
  os << "experiment,N,n,trial,metric_name,value\n";
  for (const auto& row : r.rows) {
    os << row.experiment << ',' << row.N << ',' << row.n << ',' << row.trial << ','
       << row.metric_name << ',' << format_double(row.value) << '\n';
  }
}

void emit_report(const ExperimentReport& r, const std::string& path, ReportFormat format,
                 bool include_timing) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  emit_report(r, os, format, include_timing);
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

double binomial_upper_tail(int k, int trials) {
  if (trials < 0) throw DomainError("binomial_upper_tail: trials must be >= 0");
  if (k <= 0) return 1.0;
  if (k > trials) return 0.0;
  // Sum of C(trials, i) 2^-trials in log space.
  double acc = 0.0;
  for (int i = k; i <= trials; ++i) {
    const double log_term = std::lgamma(trials + 1.0) - std::lgamma(i + 1.0) -
                            std::lgamma(trials - i + 1.0) - trials * std::log(2.0);
    acc += std::exp(log_term);
  }
  return std::min(1.0, acc);
}

}  // namespace robcov
