#pragma once

#include <functional>
#include <span>
#include <vector>

namespace osn {

struct KrylovConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_iterations = 500;
  /// Krylov basis size before restarting; 0 keeps the full basis.
  int restart = 0;

  /// Throws std::invalid_argument on nonpositive tolerances or max_iterations < 1.
  void validate() const;
};

/// y = A x
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct GmresResult {
  std::vector<double> x;
  int iterations = 0;
  bool converged = false;
  /// ||b - A x_k||_2 for k = 0..iterations (Givens estimate).
  std::vector<double> residual_history;
};

/// GMRES with modified Gram-Schmidt Arnoldi and Givens rotations. Stops when
/// ||b - A x|| <= max(rel_tol ||b||, abs_tol); a lucky breakdown counts as
/// convergence. On max_iterations the best iterate is returned with
/// converged == false.
GmresResult gmres(const LinearOperator& apply, std::span<const double> rhs, std::span<const double> x0,
                  const KrylovConfig& cfg);

}  // namespace osn
