#include "osn/monolithic.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace osn {

MonolithicSystem::MonolithicSystem(const ProblemSpec& spec)
    : spec_(&spec), grid_(spec.nx, spec.ny, spec.width, spec.height) {
  spec.validate();
}

std::vector<double> monolithic_residual(const MonolithicSystem& sys, const PairField& v) {
  const Grid& g = sys.grid();
  if (v.size() != g.size()) throw std::invalid_argument("monolithic_residual: size mismatch");
  const ProblemSpec& spec = sys.spec();
  const ControlLaw law(spec);
  const GridFunction ly = laplacian_apply(g, v.y);
  const GridFunction lp = laplacian_apply(g, v.p);
  const GridFunction u = mu(law, v.p);
  std::vector<double> res(2 * g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    double phi = 0.0, dphi = 0.0;
    if (spec.b != 0.0) {
      phi = spec.reaction.eval(v.y[k]);
      dphi = spec.reaction.d1(v.y[k]);
    }
    res[2 * k] = ly[k] + spec.c * v.y[k] + spec.b * phi - spec.f[k] - u[k];
    res[2 * k + 1] = lp[k] + spec.c * v.p[k] + spec.b * dphi * v.p[k] - (v.y[k] - spec.y_d[k]);
  }
  return res;
}

SparseMatrix monolithic_jacobian(const MonolithicSystem& sys, const PairField& v) {
  const Grid& g = sys.grid();
  if (v.size() != g.size()) throw std::invalid_argument("monolithic_jacobian: size mismatch");
  const ProblemSpec& spec = sys.spec();
  const ControlLaw law(spec);
  const double ax = 1.0 / (g.hx() * g.hx());
  const double ay = 1.0 / (g.hy() * g.hy());
  SparseMatrix::Builder builder(2 * g.size());
  builder.reserve(12 * g.size());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const std::size_t ys = 2 * k;
      const std::size_t ps = 2 * k + 1;
      double dphi = 0.0, d2phi = 0.0;
      if (spec.b != 0.0) {
        dphi = spec.reaction.d1(v.y[k]);
        d2phi = spec.reaction.d2(v.y[k]);
      }
      const double diag = 2.0 * ax + 2.0 * ay + spec.c + spec.b * dphi;
      builder.add(ys, ys, diag);
      builder.add(ps, ps, diag);
      builder.add(ys, ps, -dmu_multiplier(law, v.p[k]));
      builder.add(ps, ys, spec.b * d2phi * v.p[k] - 1.0);
      auto couple = [&](std::size_t nb, double a) {
        builder.add(ys, 2 * nb, -a);
        builder.add(ps, 2 * nb + 1, -a);
      };
      if (i > 0) couple(g.index(i - 1, j), ax);
      if (i + 1 < g.nx()) couple(g.index(i + 1, j), ax);
      if (j > 0) couple(g.index(i, j - 1), ay);
      if (j + 1 < g.ny()) couple(g.index(i, j + 1), ay);
    }
  }
  return std::move(builder).build();
}

void BaselineConfig::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("baseline tolerance must be positive");
  if (max_iterations < 0) throw std::invalid_argument("baseline max_iterations must be >= 0");
  line_search.validate();
}

BaselineResult damped_ssn(const MonolithicSystem& sys, const PairField& init, const BaselineConfig& cfg) {
  cfg.validate();
  const Grid& g = sys.grid();
  if (init.size() != g.size()) throw std::invalid_argument("damped_ssn: init has wrong size");
  const InnerSolverConfig& ls = cfg.line_search;

  BaselineResult out{init, {}};
  IterationReport& rep = out.report;
  std::vector<double> res = monolithic_residual(sys, out.solution);
  double norm = g.scaled_norm(res);
  rep.residual_history.push_back(norm);
  rep.nu_history.push_back(sys.spec().nu);

  int k = 0;
  try {
    while (true) {
      if (!std::isfinite(norm)) {
        rep.failure = "non-finite residual";
        break;
      }
      if (norm <= cfg.tolerance) {
        rep.converged = true;
        break;
      }
      if (k >= cfg.max_iterations) {
        rep.failure = "iteration limit reached";
        break;
      }
      std::vector<double> step(res);
      for (double& s : step) s = -s;
      BandedLU(monolithic_jacobian(sys, out.solution)).solve_in_place(step);
      ++k;

      double t = 1.0;
      bool accepted = false;
      const int tries = ls.damping ? ls.max_backtracks + 1 : 1;
      for (int attempt = 0; attempt < tries && !accepted; ++attempt, t *= ls.shrink) {
        PairField trial(out.solution);
        for (std::size_t i = 0; i < g.size(); ++i) {
          trial.y[i] += t * step[2 * i];
          trial.p[i] += t * step[2 * i + 1];
        }
        std::vector<double> trial_res = monolithic_residual(sys, trial);
        const double trial_norm = g.scaled_norm(trial_res);
        if (!ls.damping || (std::isfinite(trial_norm) && trial_norm <= (1.0 - ls.sufficient_decrease * t) * norm)) {
          out.solution = std::move(trial);
          res = std::move(trial_res);
          norm = trial_norm;
          accepted = true;
        }
      }
      rep.residual_history.push_back(norm);
      rep.nu_history.push_back(sys.spec().nu);
      rep.gmres_counts.push_back(0);
      if (!accepted) {
        rep.failure = "line search failed";
        break;
      }
    }
  } catch (const SingularMatrixError& e) {
    rep.failure = e.what();
  }
  rep.outer_iterations = k;
  return out;
}

PairField random_pair(const Grid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PairField v(grid.size());
  for (double& x : v.y) x = unit(rng);
  for (double& x : v.p) x = unit(rng);
  return v;
}

}  // namespace osn
