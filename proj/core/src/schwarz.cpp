#include "osn/schwarz.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "osn/parallel.hpp"

namespace osn {

std::size_t GlobalState::total_size() const {
  std::size_t n = 0;
  for (const auto& part : parts) n += 2 * part.size();
  return n;
}

std::vector<double> GlobalState::flatten() const {
  std::vector<double> x;
  x.reserve(total_size());
  for (const auto& part : parts) {
    x.insert(x.end(), part.y.begin(), part.y.end());
    x.insert(x.end(), part.p.begin(), part.p.end());
  }
  return x;
}

GlobalState GlobalState::unflatten(const Decomposition& dec, std::span<const double> x) {
  GlobalState s;
  s.parts.reserve(static_cast<std::size_t>(dec.size()));
  std::size_t offset = 0;
  for (int j = 0; j < dec.size(); ++j) {
    const std::size_t n = dec.strip(j).grid.size();
    if (offset + 2 * n > x.size()) throw std::invalid_argument("GlobalState::unflatten: vector too short");
    const auto base = x.begin() + static_cast<std::ptrdiff_t>(offset);
    const auto mid = base + static_cast<std::ptrdiff_t>(n);
    s.parts.emplace_back(GridFunction(base, mid), GridFunction(mid, mid + static_cast<std::ptrdiff_t>(n)));
    offset += 2 * n;
  }
  if (offset != x.size()) throw std::invalid_argument("GlobalState::unflatten: vector too long");
  return s;
}

GlobalState zero_state(const Decomposition& dec) {
  GlobalState s;
  for (int j = 0; j < dec.size(); ++j) s.parts.emplace_back(dec.strip(j).grid.size());
  return s;
}

GlobalState random_state(const Decomposition& dec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GlobalState s = zero_state(dec);
  for (auto& part : s.parts) {
    for (double& v : part.y) v = unit(rng);
    for (double& v : part.p) v = unit(rng);
  }
  return s;
}

GlobalState restrict_state(const Decomposition& dec, const PairField& global) {
  GlobalState s;
  for (int j = 0; j < dec.size(); ++j) s.parts.push_back(dec.restrict_to(j, global));
  return s;
}

double state_norm(const Decomposition& dec, std::span<const double> x) {
  return scaled_norm(x, dec.global().hx(), dec.global().hy());
}

void OuterConfig::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("outer tolerance must be positive");
  if (max_iterations < 0) throw std::invalid_argument("outer max_iterations must be >= 0");
  if (!(continuation_factor > 0.0 && continuation_factor < 1.0)) {
    throw std::invalid_argument("continuation factor must lie in (0, 1)");
  }
  if (!(continuation_start > 0.0)) throw std::invalid_argument("continuation start must be positive");
  if (!(divergence_factor > 1.0)) throw std::invalid_argument("divergence factor must exceed 1");
  krylov.validate();
  inner.validate();
}

int IterationReport::gmres_total() const {
  int total = 0;
  for (int g : gmres_counts) total += g;
  return total;
}

void IterationReport::record_inner(std::vector<int> counts) {
  if (!counts.empty()) parallel_inner_total += *std::max_element(counts.begin(), counts.end());
  inner_counts.push_back(std::move(counts));
}

double continuation_nu(int k, double target, double start, double factor) {
  return std::max(start * std::pow(factor, k), target);
}

SubproblemData make_subproblem(const ProblemSpec& spec, const Decomposition& dec, int j, const GlobalState& state,
                               const ControlLaw& law) {
  std::optional<RobinTrace> left, right;
  const auto uj = static_cast<std::size_t>(j);
  if (dec.strip(j).has_left) left = extract_trace(dec, j - 1, Side::Right, state.parts[uj - 1], spec.q);
  if (dec.strip(j).has_right) right = extract_trace(dec, j + 1, Side::Left, state.parts[uj + 1], spec.q);
  return SubproblemData(spec, dec, j, law, std::move(left), std::move(right));
}

FPEvaluation residual_FP(const ProblemSpec& spec, const Decomposition& dec, const GlobalState& state,
                         const ControlLaw& law, const InnerSolverConfig& inner, int workers) {
  const int n = dec.size();
  if (static_cast<int>(state.parts.size()) != n) throw std::invalid_argument("residual_FP: state has wrong shape");
  FPEvaluation eval;
  eval.solutions.resize(static_cast<std::size_t>(n));
  eval.inner_counts.assign(static_cast<std::size_t>(n), 0);
  parallel_for(n, workers, [&](int j) {
    const auto uj = static_cast<std::size_t>(j);
    const SubproblemData data = make_subproblem(spec, dec, j, state, law);
    SubdomainSolution sol = solve_subdomain(data, state.parts[uj], inner);
    eval.inner_counts[uj] = sol.iterations;
    if (!sol.converged) throw SubdomainFailure(j, sol.message);
    eval.solutions[uj] = std::move(sol.v);
  });
  eval.residual = state.flatten();
  std::size_t offset = 0;
  for (const auto& s : eval.solutions) {
    for (double v : s.y) eval.residual[offset++] -= v;
    for (double v : s.p) eval.residual[offset++] -= v;
  }
  return eval;
}

FPJacobian::FPJacobian(const ProblemSpec& spec, const Decomposition& dec, const GlobalState& state,
                       const FPEvaluation& eval, const ControlLaw& law, int workers)
    : dec_(&dec), q_(spec.q), workers_(workers), size_(state.total_size()) {
  const int n = dec.size();
  std::vector<std::optional<LinearizedSubdomain>> built(static_cast<std::size_t>(n));
  parallel_for(n, workers, [&](int j) {
    const auto uj = static_cast<std::size_t>(j);
    const SubproblemData data = make_subproblem(spec, dec, j, state, law);
    built[uj].emplace(data, eval.solutions[uj]);
  });
  strips_.reserve(built.size());
  for (auto& b : built) strips_.push_back(std::move(*b));
}

void FPJacobian::apply(std::span<const double> d, std::span<double> out) const {
  if (d.size() != size_ || out.size() != size_) throw std::invalid_argument("FPJacobian::apply: size mismatch");
  const Decomposition& dec = *dec_;
  const GlobalState dir = GlobalState::unflatten(dec, d);
  const int n = dec.size();
  std::vector<PairField> response(static_cast<std::size_t>(n));
  parallel_for(n, workers_, [&](int j) {
    const auto uj = static_cast<std::size_t>(j);
    std::optional<RobinTrace> dl, dr;
    if (dec.strip(j).has_left) dl = extract_trace(dec, j - 1, Side::Right, dir.parts[uj - 1], q_);
    if (dec.strip(j).has_right) dr = extract_trace(dec, j + 1, Side::Left, dir.parts[uj + 1], q_);
    response[uj] = strips_[uj].solve(dl ? &*dl : nullptr, dr ? &*dr : nullptr);
  });
  std::size_t offset = 0;
  for (const auto& r : response) {
    for (double v : r.y) {
      out[offset] = d[offset] - v;
      ++offset;
    }
    for (double v : r.p) {
      out[offset] = d[offset] - v;
      ++offset;
    }
  }
}

std::vector<double> FPJacobian::apply(std::span<const double> d) const {
  std::vector<double> out(size_);
  apply(d, out);
  return out;
}

std::vector<double> jacobian_apply_FP(const ProblemSpec& spec, const Decomposition& dec, const GlobalState& state,
                                      const FPEvaluation& eval, const ControlLaw& law, std::span<const double> d) {
  return FPJacobian(spec, dec, state, eval, law).apply(d);
}

namespace {

bool finite(double v) { return std::isfinite(v); }

OuterResult newton_loop(const ProblemSpec& spec, const Decomposition& dec, const GlobalState& init,
                        const OuterConfig& cfg, bool continuation) {
  spec.validate();
  cfg.validate();
  OuterResult out{init, {}};
  IterationReport& rep = out.report;
  auto nu_at = [&](int k) {
    return continuation ? continuation_nu(k, spec.nu, cfg.continuation_start, cfg.continuation_factor) : spec.nu;
  };
  const ControlLaw base_law(spec);

  int k = 0;
  try {
    ControlLaw law = base_law.with_nu(nu_at(0));
    FPEvaluation eval = residual_FP(spec, dec, out.state, law, cfg.inner, cfg.workers);
    double norm = state_norm(dec, eval.residual);
    const double initial = norm;
    rep.residual_history.push_back(norm);
    rep.nu_history.push_back(law.nu());
    rep.record_inner(eval.inner_counts);

    while (true) {
      if (!finite(norm)) {
        rep.failure = "non-finite residual";
        break;
      }
      if (norm < cfg.tolerance && law.nu() == spec.nu) {
        rep.converged = true;
        break;
      }
      if (k >= cfg.max_iterations) {
        rep.failure = "outer iteration limit reached";
        break;
      }
      if (norm > cfg.divergence_factor * initial) {
        rep.failure = "diverged";
        break;
      }

      const FPJacobian jac(spec, dec, out.state, eval, law, cfg.workers);
      std::vector<double> rhs(eval.residual);
      for (double& v : rhs) v = -v;
      const std::vector<double> zero(rhs.size(), 0.0);
      const GmresResult step = gmres(
          [&jac](std::span<const double> x, std::span<double> y) { jac.apply(x, y); }, rhs, zero, cfg.krylov);
      rep.gmres_counts.push_back(step.iterations);

      std::vector<double> x = out.state.flatten();
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += step.x[i];
      out.state = GlobalState::unflatten(dec, x);
      ++k;

      law = base_law.with_nu(nu_at(k));
      eval = residual_FP(spec, dec, out.state, law, cfg.inner, cfg.workers);
      norm = state_norm(dec, eval.residual);
      rep.residual_history.push_back(norm);
      rep.nu_history.push_back(law.nu());
      rep.record_inner(eval.inner_counts);
    }
  } catch (const SubdomainFailure& e) {
    rep.failure = e.what();
  } catch (const SingularMatrixError& e) {
    rep.failure = e.what();
  }
  rep.outer_iterations = k;
  return out;
}

}  // namespace

OuterResult preconditioned_newton(const ProblemSpec& spec, const Decomposition& dec, const GlobalState& init,
                                  const OuterConfig& cfg) {
  return newton_loop(spec, dec, init, cfg, cfg.continuation);
}

OuterResult preconditioned_newton_continuation(const ProblemSpec& spec, const Decomposition& dec,
                                               const GlobalState& init, const OuterConfig& cfg) {
  return newton_loop(spec, dec, init, cfg, true);
}

OuterResult osm_fixed_point(const ProblemSpec& spec, const Decomposition& dec, const GlobalState& init,
                            const OuterConfig& cfg) {
  spec.validate();
  cfg.validate();
  OuterResult out{init, {}};
  IterationReport& rep = out.report;
  const ControlLaw law(spec);
  int k = 0;
  try {
    double initial = -1.0;
    while (true) {
      if (k >= cfg.max_iterations) {
        rep.failure = "sweep limit reached";
        break;
      }
      FPEvaluation eval = residual_FP(spec, dec, out.state, law, cfg.inner, cfg.workers);
      const double change = state_norm(dec, eval.residual);
      rep.residual_history.push_back(change);
      rep.nu_history.push_back(law.nu());
      rep.record_inner(eval.inner_counts);
      out.state.parts = std::move(eval.solutions);
      ++k;
      if (initial < 0.0) initial = change;
      if (!finite(change)) {
        rep.failure = "non-finite update";
        break;
      }
      if (change <= cfg.tolerance) {
        rep.converged = true;
        break;
      }
      if (change > cfg.divergence_factor * initial) {
        rep.failure = "diverged";
        break;
      }
    }
  } catch (const SubdomainFailure& e) {
    rep.failure = e.what();
  } catch (const SingularMatrixError& e) {
    rep.failure = e.what();
  }
  rep.outer_iterations = k;
  return out;
}

}  // namespace osn
