#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace robcov {

enum class WeightFamily { Huber, StudentT, Custom };

/// Weight function u of a Maronna M-estimator of scatter, with
/// phi(s) = s u(s) bounded by phi_inf > 1.
///
/// Huber:    u(s) = phi_inf / (phi_inf - 1)  for s <= phi_inf - 1, phi_inf / s beyond.
/// StudentT: u(s) = (1 + t) / (t + s), so phi_inf = 1 + t.
/// Custom:   caller-provided u; must pass validate() before being handed to a solver.
///
/// Immutable after construction and safe to share between threads.
class WeightFunction {
 public:
  static WeightFunction huber(double phi_inf);
  static WeightFunction student_t(double t);
  /// No checks beyond phi_inf being finite; see validate().
  static WeightFunction custom(std::string name, std::function<double(double)> u, double phi_inf);

  WeightFamily family() const noexcept { return family_; }
  double phi_inf() const noexcept { return phi_inf_; }
  /// Huber: phi_inf. StudentT: t. Custom: phi_inf.
  double parameter() const noexcept { return param_; }
  const std::string& name() const noexcept { return name_; }

  double u(double s) const;
  double phi(double s) const;
  /// Unique s on the increasing branch with phi(s) = y, for 0 < y < phi_inf.
  double phi_inverse(double y) const;

  /// "huber:2", "student_t:1".
  std::string descriptor() const;

 private:
  WeightFunction(WeightFamily family, double phi_inf, double param, std::string name,
                 std::function<double(double)> custom_u);

  double phi_inverse_bisect(double y) const;

  WeightFamily family_;
  double phi_inf_;
  double param_;
  std::string name_;
  std::function<double(double)> custom_u_;
};

double eval_u(const WeightFunction& w, double s);
double eval_phi(const WeightFunction& w, double s);
double phi_inverse(const WeightFunction& w, double y);

struct WeightViolation {
  std::string condition;
  double s = 0.0;
  double value = 0.0;
};

struct ValidationReport {
  bool valid = true;
  double phi_inf = 0.0;
  double max_phi_on_grid = 0.0;
  std::optional<WeightViolation> first_violation;
};

/// Checks u nonincreasing, phi nondecreasing, phi <= phi_inf and phi_inf > 1 on the grid.
/// The grid must be nonempty and strictly increasing (DomainError otherwise).
ValidationReport validate(const WeightFunction& w, std::span<const double> grid);

/// 0, 0.01, ..., 10.
std::vector<double> default_validation_grid();

/// Parses "huber:2.0" / "student_t:1.0".
WeightFunction parse_weight_spec(const std::string& spec);

/// {"family":"huber","phi_inf":2.0} or {"family":"student_t","t":1.0}.
WeightFunction weight_from_json(const nlohmann::json& j);
nlohmann::json weight_to_json(const WeightFunction& w);

}  // namespace robcov
