#include "robcov/weights.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "robcov/errors.hpp"

namespace robcov {

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_nonnegative(double s) {
  if (!(s >= 0.0)) {
    throw DomainError("weight function evaluated at negative or NaN argument s=" + format_number(s));
  }
}

}  // namespace

WeightFunction::WeightFunction(WeightFamily family, double phi_inf, double param, std::string name,
                               std::function<double(double)> custom_u)
    : family_(family),
      phi_inf_(phi_inf),
      param_(param),
      name_(std::move(name)),
      custom_u_(std::move(custom_u)) {}

WeightFunction WeightFunction::huber(double phi_inf) {
  if (!(phi_inf > 1.0) || !std::isfinite(phi_inf)) {
    throw DomainError("huber: phi_inf must be finite and > 1, got " + format_number(phi_inf));
  }
  return WeightFunction(WeightFamily::Huber, phi_inf, phi_inf, "huber", {});
}

WeightFunction WeightFunction::student_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("student_t: t must be finite and > 0, got " + format_number(t));
  }
  return WeightFunction(WeightFamily::StudentT, 1.0 + t, t, "student_t", {});
}

WeightFunction WeightFunction::custom(std::string name, std::function<double(double)> u,
                                      double phi_inf) {
  if (!u) throw DomainError("custom weight: empty u");
  if (!std::isfinite(phi_inf) || !(phi_inf > 0.0)) {
    throw DomainError("custom weight: phi_inf must be finite and positive");
  }
  return WeightFunction(WeightFamily::Custom, phi_inf, phi_inf, std::move(name), std::move(u));
}

double WeightFunction::u(double s) const {
  require_nonnegative(s);
  switch (family_) {
    case WeightFamily::Huber: {
      const double knee = phi_inf_ - 1.0;
      // Constant branch includes s = 0 by continuity.
      return s <= knee ? phi_inf_ / knee : phi_inf_ / s;
    }
    case WeightFamily::StudentT:
      return (1.0 + param_) / (param_ + s);
    case WeightFamily::Custom:
      return custom_u_(s);
  }
  return 0.0;
}

double WeightFunction::phi(double s) const {
  require_nonnegative(s);
  switch (family_) {
    case WeightFamily::Huber: {
      const double knee = phi_inf_ - 1.0;
      return s <= knee ? phi_inf_ * s / knee : phi_inf_;
    }
    case WeightFamily::StudentT:
      return (1.0 + param_) * s / (param_ + s);
    case WeightFamily::Custom:
      return s * custom_u_(s);
  }
  return 0.0;
}

double WeightFunction::phi_inverse(double y) const {
  if (!(y > 0.0) || !(y < phi_inf_)) {
    throw OutOfRangeError("phi_inverse: y=" + format_number(y) + " outside (0, phi_inf=" +
                          format_number(phi_inf_) + ")");
  }
  switch (family_) {
    case WeightFamily::Huber:
      return y * (phi_inf_ - 1.0) / phi_inf_;
    case WeightFamily::StudentT:
      // (1+t)s/(t+s) = y  =>  s = t y / (1 + t - y)
      return param_ * y / (1.0 + param_ - y);
    case WeightFamily::Custom:
      return phi_inverse_bisect(y);
  }
  return 0.0;
}

double WeightFunction::phi_inverse_bisect(double y) const {
  double lo = 0.0;
  double hi = 1.0;
  int expansions = 0;
  while (phi(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 1100) {
      throw OutOfRangeError("phi_inverse: phi never reaches y=" + format_number(y));
    }
  }
  // Smallest s with phi(s) >= y; phi is strictly increasing below phi_inf.
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (phi(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

std::string WeightFunction::descriptor() const {
  return name_ + ":" + format_number(param_);
}

double eval_u(const WeightFunction& w, double s) { return w.u(s); }
double eval_phi(const WeightFunction& w, double s) { return w.phi(s); }
double phi_inverse(const WeightFunction& w, double y) { return w.phi_inverse(y); }

ValidationReport validate(const WeightFunction& w, std::span<const double> grid) {
  if (grid.empty()) throw DomainError("validate: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw DomainError("validate: grid must be nonnegative and strictly increasing");
    }
  }

  ValidationReport report;
  report.phi_inf = w.phi_inf();

  auto fail = [&report](std::string condition, double s, double value) {
    if (report.valid) {
      report.valid = false;
      report.first_violation = WeightViolation{std::move(condition), s, value};
    }
  };

  if (!(w.phi_inf() > 1.0)) fail("phi_inf > 1", 0.0, w.phi_inf());

  // Slack for rounding in the closed-form evaluations.
  constexpr double kSlack = 1e-12;
  double prev_u = std::numeric_limits<double>::infinity();
  double prev_phi = -std::numeric_limits<double>::infinity();
  for (double s : grid) {
    const double u = w.u(s);
    const double phi = s * u;
    if (!std::isfinite(u) || u < 0.0) fail("u nonnegative and finite", s, u);
    if (u > prev_u * (1.0 + kSlack) + kSlack) fail("u nonincreasing", s, u);
    if (phi < prev_phi * (1.0 - kSlack) - kSlack) fail("phi nondecreasing", s, phi);
    if (phi > w.phi_inf() * (1.0 + kSlack)) fail("phi <= phi_inf", s, phi);
    report.max_phi_on_grid = std::max(report.max_phi_on_grid, phi);
    prev_u = u;
    prev_phi = phi;
  }
  return report;
}

std::vector<double> default_validation_grid() {
  std::vector<double> grid;
  grid.reserve(1001);
  for (int i = 0; i <= 1000; ++i) grid.push_back(0.01 * i);
  return grid;
}

WeightFunction parse_weight_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("weight spec must look like family:value, got '" + spec + "'");
  }
  const std::string family = spec.substr(0, colon);
  const std::string value_text = spec.substr(colon + 1);
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(value_text, &used);
    if (used != value_text.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw ConfigError("weight spec '" + spec + "': cannot parse numeric value");
  }
  try {
    if (family == "huber") return WeightFunction::huber(value);
    if (family == "student_t") return WeightFunction::student_t(value);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown weight family '" + family + "' (expected huber or student_t)");
}

WeightFunction weight_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family")) {
    throw ConfigError("weight: expected object with a \"family\" field");
  }
  const auto family = j.at("family").get<std::string>();
  try {
    if (family == "huber") {
      if (!j.contains("phi_inf")) throw ConfigError("weight huber: missing phi_inf");
      return WeightFunction::huber(j.at("phi_inf").get<double>());
    }
    if (family == "student_t") {
      if (!j.contains("t")) throw ConfigError("weight student_t: missing t");
      return WeightFunction::student_t(j.at("t").get<double>());
    }
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("weight: ") + e.what());
  }
  throw ConfigError("unknown weight family '" + family + "'");
}

nlohmann::json weight_to_json(const WeightFunction& w) {
  switch (w.family()) {
    case WeightFamily::Huber:
      return {{"family", "huber"}, {"phi_inf", w.phi_inf()}};
    case WeightFamily::StudentT:
      return {{"family", "student_t"}, {"t", w.parameter()}};
    case WeightFamily::Custom:
      break;
  }
  return {{"family", w.name()}, {"phi_inf", w.phi_inf()}};
}

}  // namespace robcov
