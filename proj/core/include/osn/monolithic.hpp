#pragma once

#include <span>
#include <vector>

#include "osn/grid.hpp"
#include "osn/model.hpp"
#include "osn/schwarz.hpp"
#include "osn/sparse.hpp"
#include "osn/subdomain.hpp"

namespace osn {

/// The full discrete optimality system on the undecomposed grid, 2 nx ny
/// unknowns interleaved per node as (y, p).
class MonolithicSystem {
 public:
  explicit MonolithicSystem(const ProblemSpec& spec);

  const Grid& grid() const { return grid_; }
  const ProblemSpec& spec() const { return *spec_; }
  std::size_t unknowns() const { return 2 * grid_.size(); }

 private:
  const ProblemSpec* spec_;
  Grid grid_;
};

/// State and adjoint residuals with homogeneous Dirichlet data, interleaved.
std::vector<double> monolithic_residual(const MonolithicSystem& sys, const PairField& v);
SparseMatrix monolithic_jacobian(const MonolithicSystem& sys, const PairField& v);

struct BaselineConfig {
  double tolerance = 1e-8;
  int max_iterations = 100;
  InnerSolverConfig line_search;

  void validate() const;
};

struct BaselineResult {
  PairField solution;
  IterationReport report;
};

/// Semismooth Newton with backtracking on the residual norm applied to the
/// full system. Never reads q. A failed line search or the iteration limit
/// ends the run unconverged.
BaselineResult damped_ssn(const MonolithicSystem& sys, const PairField& init, const BaselineConfig& cfg);

/// i.i.d. uniform [0, 1] initial guess on the global grid.
PairField random_pair(const Grid& grid, std::uint64_t seed);

}  // namespace osn
