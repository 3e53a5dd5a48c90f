#include "osn/gmres.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "osn/sparse.hpp"

namespace osn {

void KrylovConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("Krylov tolerances must be positive");
  if (max_iterations < 1) throw std::invalid_argument("Krylov max_iterations must be >= 1");
  if (restart < 0) throw std::invalid_argument("Krylov restart must be >= 0");
}

namespace {

void residual(const LinearOperator& apply, std::span<const double> b, std::span<const double> x,
              std::vector<double>& r) {
  r.resize(b.size());
  apply(x, r);
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - r[i];
}

}  // namespace

GmresResult gmres(const LinearOperator& apply, std::span<const double> rhs, std::span<const double> x0,
                  const KrylovConfig& cfg) {
  cfg.validate();
  const std::size_t n = rhs.size();
  if (x0.size() != n) throw std::invalid_argument("gmres: x0 size mismatch");

  GmresResult out;
  out.x.assign(x0.begin(), x0.end());
  std::vector<double> r;
  residual(apply, rhs, out.x, r);
  double beta = norm2(r);
  const double target = std::max(cfg.rel_tol * norm2(rhs), cfg.abs_tol);
  out.residual_history.push_back(beta);
  if (beta <= target) {
    out.converged = true;
    return out;
  }

  const int m = cfg.restart > 0 ? std::min(cfg.restart, cfg.max_iterations) : cfg.max_iterations;
  const auto mm = static_cast<std::size_t>(m);
  std::vector<std::vector<double>> basis;
  basis.reserve(mm + 1);
  std::vector<double> h((mm + 1) * mm, 0.0);  // column-major, leading dim m+1
  auto H = [&](std::size_t i, std::size_t k) -> double& { return h[k * (mm + 1) + i]; };
  std::vector<double> cs(mm), sn(mm), g(mm + 1), w(n);

  while (true) {
    basis.clear();
    std::fill(h.begin(), h.end(), 0.0);
    std::fill(g.begin(), g.end(), 0.0);
    basis.emplace_back(r);
    for (double& v : basis[0]) v /= beta;
    g[0] = beta;

    std::size_t cols = 0;
    bool done = false;
    for (std::size_t k = 0; k < mm && out.iterations < cfg.max_iterations; ++k) {
      apply(basis[k], w);
      const double w_norm0 = norm2(w);
      // Modified Gram-Schmidt with one reorthogonalization sweep.
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i <= k; ++i) {
          const double hik = dot(w, basis[i]);
          H(i, k) += hik;
          for (std::size_t t = 0; t < n; ++t) w[t] -= hik * basis[i][t];
        }
      }
      const double hnext = norm2(w);
      H(k + 1, k) = hnext;

      for (std::size_t i = 0; i < k; ++i) {
        const double a = H(i, k);
        const double bb = H(i + 1, k);
        H(i, k) = cs[i] * a + sn[i] * bb;
        H(i + 1, k) = -sn[i] * a + cs[i] * bb;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = denom == 0.0 ? 1.0 : H(k, k) / denom;
      sn[k] = denom == 0.0 ? 0.0 : H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];

      ++out.iterations;
      cols = k + 1;
      const double res = std::abs(g[k + 1]);
      out.residual_history.push_back(res);

      const bool breakdown = hnext <= 1e-14 * w_norm0;
      if (res <= target || breakdown) {
        done = true;
        break;
      }
      basis.emplace_back(w);
      for (double& v : basis.back()) v /= hnext;
    }

    // Back substitution on the triangularized Hessenberg system.
    std::vector<double> y(cols);
    for (std::size_t ii = cols; ii-- > 0;) {
      double s = g[ii];
      for (std::size_t jj = ii + 1; jj < cols; ++jj) s -= H(ii, jj) * y[jj];
      y[ii] = H(ii, ii) == 0.0 ? 0.0 : s / H(ii, ii);
    }
    for (std::size_t jj = 0; jj < cols; ++jj) {
      for (std::size_t t = 0; t < n; ++t) out.x[t] += y[jj] * basis[jj][t];
    }

    if (done) {
      out.converged = true;
      return out;
    }
    if (out.iterations >= cfg.max_iterations) return out;

    residual(apply, rhs, out.x, r);
    beta = norm2(r);
    if (beta <= target) {
      out.converged = true;
      return out;
    }
  }
}

}  // namespace osn
