#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace osn {

/// Values of a scalar field at the interior nodes of a grid, lexicographic
/// order (x fastest).
using GridFunction = std::vector<double>;

/// Symmetric control bound |u| <= ubar. An unbounded control is a distinct
/// state, not a large number: every clamping term is skipped analytically.
class ControlBound {
 public:
  static ControlBound unbounded() { return ControlBound{}; }

  /// Throws std::invalid_argument unless value > 0. +inf maps to unbounded().
  explicit ControlBound(double value);

  bool bounded() const { return bounded_; }
  /// +inf when unbounded.
  double value() const { return value_; }

  /// "inf" or the shortest round-trip decimal of the bound.
  std::string str() const;

  /// Accepts "inf"/"infinity" (any case) or a positive number.
  static ControlBound parse(const std::string& text);

  friend bool operator==(const ControlBound&, const ControlBound&) = default;

 private:
  ControlBound() = default;

  double value_ = std::numeric_limits<double>::infinity();
  bool bounded_ = false;
};

/// Pointwise reaction phi together with its first two derivatives.
struct NonlinearReaction {
  std::string name;
  std::function<double(double)> eval;
  std::function<double(double)> d1;
  std::function<double(double)> d2;

  /// phi == 0; used whenever b == 0.
  static NonlinearReaction zero();
  /// phi(y) = y + exp(y).
  static NonlinearReaction linear_plus_exp();
};

/// All data of the distributed control problem on the rectangle
/// (0, width) x (0, height) discretized with nx x ny interior nodes.
struct ProblemSpec {
  double width = 1.0;
  double height = 1.0;
  double nu = 1e-3;
  double beta = 0.0;
  double b = 0.0;
  double c = 1.0;
  ControlBound ubar = ControlBound::unbounded();
  double q = 10.0;
  int nx = 0;
  int ny = 0;
  GridFunction f;
  GridFunction y_d;
  NonlinearReaction reaction = NonlinearReaction::zero();

  /// Throws std::invalid_argument when a positivity constraint or a field
  /// size is violated.
  void validate() const;
};

/// Parameters of the pointwise control law u = mu(p).
class ControlLaw {
 public:
  ControlLaw(double nu, double beta, ControlBound ubar);
  explicit ControlLaw(const ProblemSpec& spec)
      : ControlLaw(spec.nu, spec.beta, spec.ubar) {}

  double nu() const { return nu_; }
  double beta() const { return beta_; }
  const ControlBound& ubar() const { return ubar_; }

  /// Same law with a different Tikhonov weight (continuation in nu).
  ControlLaw with_nu(double nu) const { return ControlLaw(nu, beta_, ubar_); }

 private:
  double nu_;
  double beta_;
  ControlBound ubar_;
};

double mu(const ControlLaw& law, double p);
GridFunction mu(const ControlLaw& law, std::span<const double> p);

/// Clamp of -p/nu to [-ubar, ubar]. Only defined for beta == 0; throws
/// std::invalid_argument otherwise. Test oracle for mu.
double mu_projection_reference(const ControlLaw& law, double p);
GridFunction mu_projection_reference(const ControlLaw& law, std::span<const double> p);

/// Multiplier m with D mu(p)(dp) = m * dp, built from the indicator
/// functions G_max (1 iff v > 0) and G_min (1 iff v <= 0).
double dmu_multiplier(const ControlLaw& law, double p);
GridFunction dmu_multiplier(const ControlLaw& law, std::span<const double> p);

}  // namespace osn
