#include "osn/subdomain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace osn {

void InnerSolverConfig::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("inner tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("inner max_iterations must be >= 1");
  if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("backtracking shrink must lie in (0, 1)");
  if (!(sufficient_decrease >= 0.0 && sufficient_decrease < 1.0)) {
    throw std::invalid_argument("sufficient decrease factor must lie in [0, 1)");
  }
  if (max_backtracks < 0) throw std::invalid_argument("max_backtracks must be >= 0");
  if (homotopy_trigger < 1) throw std::invalid_argument("homotopy_trigger must be >= 1");
  if (!(homotopy_start > 0.0)) throw std::invalid_argument("homotopy_start must be positive");
  if (!(homotopy_factor > 0.0 && homotopy_factor < 1.0)) {
    throw std::invalid_argument("homotopy_factor must lie in (0, 1)");
  }
  if (!(homotopy_tolerance > 0.0)) throw std::invalid_argument("homotopy_tolerance must be positive");
}

SubproblemData::SubproblemData(const ProblemSpec& spec_, const Decomposition& dec, int j, ControlLaw law_,
                               std::optional<RobinTrace> left_, std::optional<RobinTrace> right_)
    : index(j),
      grid(dec.strip(j).grid),
      robin_left(dec.strip(j).has_left),
      robin_right(dec.strip(j).has_right),
      f(dec.restrict_to(j, spec_.f)),
      y_d(dec.restrict_to(j, spec_.y_d)),
      left(std::move(left_)),
      right(std::move(right_)),
      spec(&spec_),
      law(law_) {
  validate();
}

SubproblemData::SubproblemData(const ProblemSpec& spec_, const Grid& grid_, ControlLaw law_)
    : grid(grid_), f(spec_.f), y_d(spec_.y_d), spec(&spec_), law(law_) {
  validate();
}

void SubproblemData::validate() const {
  if (spec == nullptr) throw std::invalid_argument("subproblem without problem data");
  if (f.size() != grid.size() || y_d.size() != grid.size()) {
    throw std::invalid_argument("subproblem data has wrong size");
  }
  if (robin_left != left.has_value() || robin_right != right.has_value()) {
    throw std::invalid_argument("subproblem " + std::to_string(index) +
                                ": Robin traces must be present exactly on sides with neighbors");
  }
  const auto ny = static_cast<std::size_t>(grid.ny());
  for (const auto* t : {left ? &*left : nullptr, right ? &*right : nullptr}) {
    if (t != nullptr && (t->gy.size() != ny || t->gp.size() != ny)) {
      throw std::invalid_argument("Robin trace length does not match the interface");
    }
  }
}

namespace {

/// Visits the Robin-aware 5-point -Laplacian of a strip: fn(row_node,
/// col_node, coefficient). Ghost nodes across a Robin side are eliminated
/// through q v -/+ (v_ghost - v)/h = g, leaving (1 - q h) v on the diagonal
/// side and the trace term handled by robin_trace_terms().
template <class Fn>
void for_each_stencil_entry(const Grid& g, bool robin_left, bool robin_right, double q, Fn&& fn) {
  const int nx = g.nx();
  const int ny = g.ny();
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  const double ghost = (1.0 - q * g.hx()) * ihx2;
  const auto snx = static_cast<std::size_t>(nx);
  for (int r = 0; r < ny; ++r) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = g.index(i, r);
      double diag = 2.0 * ihx2 + 2.0 * ihy2;
      if (i > 0) {
        fn(k, k - 1, -ihx2);
      } else if (robin_left) {
        diag -= ghost;
      }
      if (i + 1 < nx) {
        fn(k, k + 1, -ihx2);
      } else if (robin_right) {
        diag -= ghost;
      }
      if (r > 0) fn(k, k - snx, -ihy2);
      if (r + 1 < ny) fn(k, k + snx, -ihy2);
      fn(k, k, diag);
    }
  }
}

/// Adds the constant Robin contribution -g/hx on the boundary columns to a
/// per-node array (stride 2, offset 0 for y and 1 for p).
void add_trace_terms(const Grid& g, const RobinTrace* left, const RobinTrace* right, std::span<double> out,
                     double sign) {
  const double s = sign / g.hx();
  for (int r = 0; r < g.ny(); ++r) {
    const auto rr = static_cast<std::size_t>(r);
    if (left != nullptr) {
      const std::size_t k = g.index(0, r);
      out[2 * k] -= s * left->gy[rr];
      out[2 * k + 1] -= s * left->gp[rr];
    }
    if (right != nullptr) {
      const std::size_t k = g.index(g.nx() - 1, r);
      out[2 * k] -= s * right->gy[rr];
      out[2 * k + 1] -= s * right->gp[rr];
    }
  }
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

std::vector<double> interleave(const PairField& v) {
  std::vector<double> x(2 * v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    x[2 * k] = v.y[k];
    x[2 * k + 1] = v.p[k];
  }
  return x;
}

PairField deinterleave(std::span<const double> x) {
  PairField v(x.size() / 2);
  for (std::size_t k = 0; k < v.size(); ++k) {
    v.y[k] = x[2 * k];
    v.p[k] = x[2 * k + 1];
  }
  return v;
}

std::vector<double> subdomain_residual(const SubproblemData& data, const PairField& v) {
  const Grid& g = data.grid;
  if (v.size() != g.size()) throw std::invalid_argument("subdomain_residual: size mismatch");
  const ProblemSpec& spec = *data.spec;
  std::vector<double> res(2 * g.size(), 0.0);
  for_each_stencil_entry(g, data.robin_left, data.robin_right, spec.q,
                         [&](std::size_t row, std::size_t col, double a) {
                           res[2 * row] += a * v.y[col];
                           res[2 * row + 1] += a * v.p[col];
                         });
  add_trace_terms(g, data.left ? &*data.left : nullptr, data.right ? &*data.right : nullptr, res, 1.0);
  const bool reactive = spec.b != 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double y = v.y[k];
    const double p = v.p[k];
    double state = spec.c * y - data.f[k] - mu(data.law, p);
    double adjoint = spec.c * p - y + data.y_d[k];
    if (reactive) {
      state += spec.b * spec.reaction.eval(y);
      adjoint += spec.b * spec.reaction.d1(y) * p;
    }
    res[2 * k] += state;
    res[2 * k + 1] += adjoint;
  }
  return res;
}

SparseMatrix subdomain_jacobian(const SubproblemData& data, const PairField& v) {
  const Grid& g = data.grid;
  if (v.size() != g.size()) throw std::invalid_argument("subdomain_jacobian: size mismatch");
  const ProblemSpec& spec = *data.spec;
  SparseMatrix::Builder builder(2 * g.size());
  builder.reserve(14 * g.size());
  for_each_stencil_entry(g, data.robin_left, data.robin_right, spec.q,
                         [&](std::size_t row, std::size_t col, double a) {
                           builder.add(2 * row, 2 * col, a);
                           builder.add(2 * row + 1, 2 * col + 1, a);
                         });
  const bool reactive = spec.b != 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double y = v.y[k];
    const double p = v.p[k];
    double diag = spec.c;
    double cross = -1.0;  // d(adjoint)/dy
    if (reactive) {
      diag += spec.b * spec.reaction.d1(y);
      cross += spec.b * spec.reaction.d2(y) * p;
    }
    builder.add(2 * k, 2 * k, diag);
    builder.add(2 * k, 2 * k + 1, -dmu_multiplier(data.law, p));
    builder.add(2 * k + 1, 2 * k, cross);
    builder.add(2 * k + 1, 2 * k + 1, diag);
  }
  return std::move(builder).build();
}

namespace {

/// Newton iteration from out.v until tolerance or `budget` further steps.
/// Returns false on stagnation (failed line search or budget exhausted).
bool newton_run(const SubproblemData& data, const InnerSolverConfig& cfg, double tolerance, int budget,
                SubdomainSolution& out) {
  const Grid& g = data.grid;
  std::vector<double> res = subdomain_residual(data, out.v);
  double norm = g.scaled_norm(res);
  out.residual_norm = norm;
  if (!std::isfinite(norm)) {
    out.message = "non-finite residual";
    return false;
  }
  for (int used = 0;; ++used) {
    if (norm <= tolerance) return true;
    if (used >= budget) {
      out.message = "inner iteration limit reached";
      return false;
    }
    const SparseMatrix jac = subdomain_jacobian(data, out.v);
    std::vector<double> step(res);
    for (double& s : step) s = -s;
    BandedLU(jac).solve_in_place(step);
    ++out.iterations;

    const std::vector<double> x0 = interleave(out.v);
    std::vector<double> trial_x(x0.size());
    double t = 1.0;
    bool accepted = false;
    const int tries = cfg.damping ? cfg.max_backtracks + 1 : 1;
    for (int attempt = 0; attempt < tries; ++attempt) {
      for (std::size_t i = 0; i < x0.size(); ++i) trial_x[i] = x0[i] + t * step[i];
      PairField trial = deinterleave(trial_x);
      std::vector<double> trial_res = subdomain_residual(data, trial);
      const double trial_norm = g.scaled_norm(trial_res);
      const bool finite = std::isfinite(trial_norm) && all_finite(trial_x);
      if (!cfg.damping || (finite && trial_norm <= (1.0 - cfg.sufficient_decrease * t) * norm)) {
        out.v = std::move(trial);
        res = std::move(trial_res);
        norm = trial_norm;
        out.residual_norm = norm;
        accepted = finite;
        break;
      }
      t *= cfg.shrink;
    }
    if (!accepted) {
      out.message = cfg.damping ? "line search failed" : "non-finite iterate";
      return false;
    }
  }
}

}  // namespace

SubdomainSolution solve_subdomain(const SubproblemData& data, const PairField& init, const InnerSolverConfig& cfg) {
  cfg.validate();
  if (init.size() != data.grid.size()) throw std::invalid_argument("solve_subdomain: init has wrong size");

  SubdomainSolution out;
  out.v = init;
  const double nu = data.law.nu();
  const bool fallback = cfg.homotopy && nu < cfg.homotopy_start;
  const int direct = fallback ? std::min(cfg.homotopy_trigger, cfg.max_iterations) : cfg.max_iterations;
  if (newton_run(data, cfg, cfg.tolerance, direct, out)) {
    out.converged = true;
    out.message.clear();
    return out;
  }
  if (!fallback) return out;

  out.v = PairField(init.size());
  SubproblemData stage = data;
  for (double s = cfg.homotopy_start;; s = std::max(s * cfg.homotopy_factor, nu)) {
    const bool last = s <= nu;
    stage.law = data.law.with_nu(last ? nu : s);
    if (!newton_run(stage, cfg, last ? cfg.tolerance : cfg.homotopy_tolerance, cfg.max_iterations, out)) {
      return out;
    }
    if (last) break;
  }
  out.converged = true;
  out.message.clear();
  return out;
}

LinearizedSubdomain::LinearizedSubdomain(const SubproblemData& data, const PairField& base)
    : grid_(data.grid),
      robin_left_(data.robin_left),
      robin_right_(data.robin_right),
      lu_(subdomain_jacobian(data, base)) {}

PairField LinearizedSubdomain::solve(const RobinTrace* dl, const RobinTrace* dr) const {
  if ((dl != nullptr && !robin_left_) || (dr != nullptr && !robin_right_)) {
    throw std::invalid_argument("Robin perturbation on a side without a neighbor");
  }
  std::vector<double> rhs(2 * grid_.size(), 0.0);
  // J dv = -(d residual / d traces) dg; the trace enters the residual as -g/hx.
  add_trace_terms(grid_, dl, dr, rhs, -1.0);
  lu_.solve_in_place(rhs);
  return deinterleave(rhs);
}

PairField solve_linearized_subdomain(const SubproblemData& data, const PairField& base, const RobinTrace* dl,
                                     const RobinTrace* dr) {
  return LinearizedSubdomain(data, base).solve(dl, dr);
}

}  // namespace osn
