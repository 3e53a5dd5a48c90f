#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "osn/gmres.hpp"
#include "osn/grid.hpp"
#include "osn/model.hpp"
#include "osn/subdomain.hpp"

namespace osn {

/// One PairField per strip, interface columns duplicated. Flattened layout:
/// strip by strip, each as (y..., p...).
struct GlobalState {
  std::vector<PairField> parts;

  std::size_t total_size() const;
  std::vector<double> flatten() const;
  static GlobalState unflatten(const Decomposition& dec, std::span<const double> x);
};

GlobalState zero_state(const Decomposition& dec);
/// i.i.d. uniform [0, 1] entries from a seeded generator.
GlobalState random_state(const Decomposition& dec, std::uint64_t seed);
GlobalState restrict_state(const Decomposition& dec, const PairField& global);

/// sqrt(hx hy) * ||x||_2 over all stacked strip unknowns.
double state_norm(const Decomposition& dec, std::span<const double> x);

class SubdomainFailure : public std::runtime_error {
 public:
  SubdomainFailure(int index, const std::string& what)
      : std::runtime_error("subdomain " + std::to_string(index) + ": " + what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

struct OuterConfig {
  double tolerance = 1e-8;
  /// k_max: at most this many Newton updates (or OSM sweeps).
  int max_iterations = 100;
  /// Newton steps are solved to a relative residual of 1e-6.
  KrylovConfig krylov{.rel_tol = 1e-6};
  InnerSolverConfig inner;
  bool continuation = false;
  double continuation_start = 0.1;
  double continuation_factor = 0.25;
  std::uint64_t seed = 1;
  /// Abort once ||F|| exceeds this multiple of its initial value.
  double divergence_factor = 1e6;
  /// Threads for the per-strip solves; 0 = hardware concurrency.
  int workers = 1;

  void validate() const;
};

struct IterationReport {
  bool converged = false;
  int outer_iterations = 0;
  /// Inner iteration counts, one row per residual evaluation, one entry per strip.
  std::vector<std::vector<int>> inner_counts;
  std::vector<int> gmres_counts;
  std::vector<double> residual_history;
  /// Tikhonov weight used at each residual evaluation.
  std::vector<double> nu_history;
  /// sum over evaluations of the max over strips of the inner counts
  int parallel_inner_total = 0;
  std::string failure;

  int gmres_total() const;
  void record_inner(std::vector<int> counts);
};

/// nu used at residual evaluation k (0-based): max(start * factor^k, target).
double continuation_nu(int k, double target, double start, double factor);

/// Problem on strip j with Robin data taken from the neighbors in `state`.
SubproblemData make_subproblem(const ProblemSpec& spec, const Decomposition& dec, int j, const GlobalState& state,
                               const ControlLaw& law);

struct FPEvaluation {
  /// Flattened y - S(y).
  std::vector<double> residual;
  /// S_j outputs; the linearization points of the Jacobian.
  std::vector<PairField> solutions;
  std::vector<int> inner_counts;
};

/// F_P(y) = y - S(y): every strip solved (warm-started from its own part of
/// `state`) against its neighbors' traces. Throws SubdomainFailure if an
/// inner solve does not converge.
FPEvaluation residual_FP(const ProblemSpec& spec, const Decomposition& dec, const GlobalState& state,
                         const ControlLaw& law, const InnerSolverConfig& inner, int workers = 1);

/// Matrix-free D F_P(y): d -> d - ytilde(d), one factorization per strip.
class FPJacobian {
 public:
  FPJacobian(const ProblemSpec& spec, const Decomposition& dec, const GlobalState& state,
             const FPEvaluation& eval, const ControlLaw& law, int workers = 1);

  std::size_t size() const { return size_; }
  void apply(std::span<const double> d, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> d) const;

 private:
  const Decomposition* dec_;
  double q_;
  int workers_;
  std::size_t size_;
  std::vector<LinearizedSubdomain> strips_;
};

std::vector<double> jacobian_apply_FP(const ProblemSpec& spec, const Decomposition& dec, const GlobalState& state,
                                      const FPEvaluation& eval, const ControlLaw& law, std::span<const double> d);

struct OuterResult {
  GlobalState state;
  IterationReport report;
};

/// Matrix-free preconditioned generalized Newton on F_P(y) = 0, undamped.
/// Honors cfg.continuation (nu schedule per outer iteration).
OuterResult preconditioned_newton(const ProblemSpec& spec, const Decomposition& dec, const GlobalState& init,
                                  const OuterConfig& cfg);

/// preconditioned_newton with the continuation schedule forced on.
OuterResult preconditioned_newton_continuation(const ProblemSpec& spec, const Decomposition& dec,
                                               const GlobalState& init, const OuterConfig& cfg);

/// Parallel optimized Schwarz sweeps y^k = S(y^{k-1}) until
/// ||y^k - y^{k-1}|| <= tolerance.
OuterResult osm_fixed_point(const ProblemSpec& spec, const Decomposition& dec, const GlobalState& init,
                            const OuterConfig& cfg);

}  // namespace osn
