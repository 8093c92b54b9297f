#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "detcurve/lab.hpp"

namespace detcurve {
namespace {

// JSON has no infinities; they travel as strings.
Json encode(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double decode(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::nan("");
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("report: unexpected string '" + s + "' in a numeric field");
  }
  return j.get<double>();
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Check make_check(std::string name, std::string relation, double lhs, double rhs, std::string note) {
  Check c;
  c.name = std::move(name);
  c.relation = std::move(relation);
  c.lhs = lhs;
  c.rhs = rhs;
  c.note = std::move(note);
  if (c.relation == "<=") {
    c.passed = lhs <= rhs;
    c.margin = rhs - lhs;
  } else if (c.relation == "<") {
    c.passed = lhs < rhs;
    c.margin = rhs - lhs;
  } else if (c.relation == ">=") {
    c.passed = lhs >= rhs;
    c.margin = lhs - rhs;
  } else {
    throw std::invalid_argument("make_check: unknown relation '" + c.relation + "'");
  }
  if (std::isnan(c.margin)) c.margin = 0.0;
  c.ratio = rhs != 0.0 ? lhs / rhs : (lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return c;
}

void Section::append(const Section& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  for (const auto& [key, value] : other.measured) measured[key] = value;
}

bool ScenarioReport::ok() const {
  for (const auto& c : checks) {
    if (c.passed == c.expected_fail) return false;
  }
  return true;
}

Json report_to_json(const ScenarioReport& report) {
  Json j;
  j["version"] = report.version;
  j["config"] = report.config;
  Json measured = Json::object();
  for (const auto& [key, value] : report.measured) measured[key] = encode(value);
  j["measured"] = measured;
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"relation", c.relation},
                      {"lhs", encode(c.lhs)},
                      {"rhs", encode(c.rhs)},
                      {"margin", encode(c.margin)},
                      {"ratio", encode(c.ratio)},
                      {"passed", c.passed},
                      {"expected_fail", c.expected_fail},
                      {"note", c.note}});
  }
  j["checks"] = checks;
  j["ok"] = report.ok();
  if (report.timings) {
    Json t = Json::object();
    for (const auto& [key, value] : *report.timings) t[key] = encode(value);
    j["timings"] = t;
  }
  return j;
}

ScenarioReport report_from_json(const Json& j) {
  ScenarioReport r;
  r.version = j.value("version", std::string{});
  r.config = j.value("config", Json{});
  if (j.contains("measured")) {
    for (const auto& [key, value] : j.at("measured").items()) r.measured[key] = decode(value);
  }
  if (j.contains("checks")) {
    for (const auto& c : j.at("checks")) {
      Check check;
      check.name = c.at("name").get<std::string>();
      check.relation = c.at("relation").get<std::string>();
      check.lhs = decode(c.at("lhs"));
      check.rhs = decode(c.at("rhs"));
      check.margin = decode(c.at("margin"));
      check.ratio = decode(c.at("ratio"));
      check.passed = c.at("passed").get<bool>();
      check.expected_fail = c.at("expected_fail").get<bool>();
      check.note = c.value("note", std::string{});
      r.checks.push_back(std::move(check));
    }
  }
  if (j.contains("timings")) {
    std::map<std::string, double> t;
    for (const auto& [key, value] : j.at("timings").items()) t[key] = decode(value);
    r.timings = std::move(t);
  }
  return r;
}

std::string report_to_csv(const ScenarioReport& report) {
  std::ostringstream out;
  out << "name,relation,lhs,rhs,margin,ratio,passed,expected_fail,note\n";
  for (const auto& c : report.checks) {
    out << csv_field(c.name) << ',' << csv_field(c.relation) << ',' << format_double(c.lhs) << ','
        << format_double(c.rhs) << ',' << format_double(c.margin) << ',' << format_double(c.ratio) << ','
        << (c.passed ? "true" : "false") << ',' << (c.expected_fail ? "true" : "false") << ','
        << csv_field(c.note) << '\n';
  }
  return out.str();
}

void emit_report(const ScenarioReport& report, const std::string& format, const std::string& path) {
  std::string text;
  if (format == "json") {
    text = report_to_json(report).dump(2) + "\n";
  } else if (format == "csv") {
    text = report_to_csv(report);
  } else {
    throw ConfigError("unknown report format '" + format + "'");
  }
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace detcurve
