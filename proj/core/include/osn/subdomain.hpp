#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osn/grid.hpp"
#include "osn/model.hpp"
#include "osn/sparse.hpp"

namespace osn {

struct InnerSolverConfig {
  /// Absolute stopping tolerance on the scaled residual norm.
  double tolerance = 1e-10;
  int max_iterations = 50;
  bool damping = true;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 30;

  /// Fallback when the direct iteration stalls at nu < homotopy_start:
  /// restart from zero and walk nu down from homotopy_start by
  /// homotopy_factor, solving every intermediate problem to
  /// homotopy_tolerance.
  bool homotopy = true;
  /// Direct iterations allowed before switching to the fallback.
  int homotopy_trigger = 20;
  double homotopy_start = 0.1;
  double homotopy_factor = 0.1;
  double homotopy_tolerance = 1e-6;

  void validate() const;
};

/// Coupled state/adjoint problem on one strip: Dirichlet data on the outer
/// boundary, Robin data on the sides that border another strip.
///
/// Unknowns are interleaved per node, (y_0, p_0, y_1, p_1, ...), nodes in
/// the strip's lexicographic order; residuals and Jacobians use the same
/// layout.
struct SubproblemData {
  SubproblemData(const ProblemSpec& spec, const Decomposition& dec, int j, ControlLaw law,
                 std::optional<RobinTrace> left = std::nullopt, std::optional<RobinTrace> right = std::nullopt);

  /// Single-domain problem on the whole grid (no Robin sides).
  SubproblemData(const ProblemSpec& spec, const Grid& grid, ControlLaw law);

  int index = 0;
  Grid grid;
  bool robin_left = false;
  bool robin_right = false;
  GridFunction f;
  GridFunction y_d;
  /// Incoming q v - dv/dx data on the left side, present iff robin_left.
  std::optional<RobinTrace> left;
  /// Incoming q v + dv/dx data on the right side, present iff robin_right.
  std::optional<RobinTrace> right;
  const ProblemSpec* spec = nullptr;
  ControlLaw law;

  std::size_t unknowns() const { return 2 * grid.size(); }
  /// Throws std::invalid_argument when traces and Robin sides disagree.
  void validate() const;
};

std::vector<double> subdomain_residual(const SubproblemData& data, const PairField& v);

/// Generalized Jacobian of subdomain_residual at v: the Dmu multiplier
/// replaces the derivative of the control law.
SparseMatrix subdomain_jacobian(const SubproblemData& data, const PairField& v);

struct SubdomainSolution {
  PairField v;
  int iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;
  std::string message;
};

/// Semismooth Newton on subdomain_residual, optionally damped by backtracking
/// on the residual norm, with the nu homotopy of InnerSolverConfig as a
/// fallback. `iterations` counts every Newton step taken, fallback included.
/// Never throws on non-convergence (converged == false); a singular Jacobian
/// raises SingularMatrixError.
SubdomainSolution solve_subdomain(const SubproblemData& data, const PairField& init, const InnerSolverConfig& cfg);

/// Factorized linearization of one subproblem around `base`. solve() returns
/// the response of the strip solution to perturbed Robin data.
class LinearizedSubdomain {
 public:
  LinearizedSubdomain(const SubproblemData& data, const PairField& base);

  /// dl / dr are perturbations of the left / right incoming Robin data; a
  /// missing one means zero.
  PairField solve(const RobinTrace* dl, const RobinTrace* dr) const;

 private:
  Grid grid_;
  bool robin_left_;
  bool robin_right_;
  BandedLU lu_;
};

/// One-shot form of LinearizedSubdomain.
PairField solve_linearized_subdomain(const SubproblemData& data, const PairField& base, const RobinTrace* dl,
                                     const RobinTrace* dr);

/// Interleave (y, p) into the solver layout and back.
std::vector<double> interleave(const PairField& v);
PairField deinterleave(std::span<const double> x);

}  // namespace osn
