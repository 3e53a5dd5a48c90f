#include "osn/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace osn {

void SparseMatrix::Builder::add(std::size_t row, std::size_t col, double value) {
  if (row >= n_ || col >= n_) throw std::out_of_range("SparseMatrix::Builder::add: index out of range");
  entries_.push_back({row, col, value});
}

SparseMatrix SparseMatrix::Builder::build() && {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.n_ = n_;
  m.row_offsets_.assign(n_ + 1, 0);
  m.columns_.reserve(entries_.size());
  m.values_.reserve(entries_.size());
  std::size_t i = 0;
  while (i < entries_.size()) {
    const std::size_t row = entries_[i].row;
    const std::size_t col = entries_[i].col;
    double v = 0.0;
    while (i < entries_.size() && entries_[i].row == row && entries_[i].col == col) {
      v += entries_[i].value;
      ++i;
    }
    m.columns_.push_back(col);
    m.values_.push_back(v);
    ++m.row_offsets_[row + 1];
  }
  for (std::size_t r = 0; r < n_; ++r) m.row_offsets_[r + 1] += m.row_offsets_[r];
  entries_.clear();
  return m;
}

double SparseMatrix::coefficient(std::size_t row, std::size_t col) const {
  if (row >= n_ || col >= n_) throw std::out_of_range("SparseMatrix::coefficient: index out of range");
  const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[row]);
  const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[row + 1]);
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - columns_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) throw std::invalid_argument("SparseMatrix::multiply: size mismatch");
  for (std::size_t r = 0; r < n_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) s += values_[k] * x[columns_[k]];
    y[r] = s;
  }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

std::size_t SparseMatrix::lower_bandwidth() const {
  std::size_t kl = 0;
  for (std::size_t r = 0; r < n_; ++r) {
    if (row_offsets_[r] != row_offsets_[r + 1]) {
      const std::size_t c = columns_[row_offsets_[r]];
      if (c < r) kl = std::max(kl, r - c);
    }
  }
  return kl;
}

std::size_t SparseMatrix::upper_bandwidth() const {
  std::size_t ku = 0;
  for (std::size_t r = 0; r < n_; ++r) {
    if (row_offsets_[r] != row_offsets_[r + 1]) {
      const std::size_t c = columns_[row_offsets_[r + 1] - 1];
      if (c > r) ku = std::max(ku, c - r);
    }
  }
  return ku;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

BandedLU::BandedLU(const SparseMatrix& a)
    : n_(a.size()), kl_(a.lower_bandwidth()), ku_(a.upper_bandwidth()) {
  // Row interchanges can push U up to kl + ku above the diagonal.
  kv_ = kl_ + ku_;
  ld_ = 2 * kl_ + ku_ + 1;
  ab_.assign(ld_ * n_, 0.0);
  pivots_.resize(n_);

  const auto offsets = a.row_offsets();
  const auto cols = a.columns();
  const auto vals = a.values();
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) at(r, cols[k]) = vals[k];
  }

  std::size_t ju = 0;  // last column touched by U so far
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t km = std::min(kl_, n_ - 1 - j);
    double* col = &ab_[j * ld_ + kv_];  // col[t] = A(j + t, j)
    std::size_t jp = 0;
    double best = std::abs(col[0]);
    for (std::size_t t = 1; t <= km; ++t) {
      const double v = std::abs(col[t]);
      if (v > best) {
        best = v;
        jp = t;
      }
    }
    pivots_[j] = j + jp;
    if (best == 0.0 || !std::isfinite(best)) throw SingularMatrixError(j);

    ju = std::max(ju, std::min(j + ku_ + jp, n_ - 1));
    if (jp != 0) {
      for (std::size_t c = j; c <= ju; ++c) std::swap(at(j + jp, c), at(j, c));
    }
    if (km > 0) {
      const double inv = 1.0 / col[0];
      for (std::size_t t = 1; t <= km; ++t) col[t] *= inv;
      for (std::size_t c = j + 1; c <= ju; ++c) {
        double* target = &ab_[c * ld_ + kv_ + j - c];  // target[t] = A(j + t, c)
        const double pivot_row = target[0];
        if (pivot_row == 0.0) continue;
        for (std::size_t t = 1; t <= km; ++t) target[t] -= col[t] * pivot_row;
      }
    }
  }
}

void BandedLU::solve_in_place(std::span<double> b) const {
  if (b.size() != n_) throw std::invalid_argument("BandedLU::solve: size mismatch");
  if (n_ == 0) return;
  // L y = P b
  for (std::size_t j = 0; j + 1 < n_; ++j) {
    const std::size_t km = std::min(kl_, n_ - 1 - j);
    const std::size_t l = pivots_[j];
    if (l != j) std::swap(b[l], b[j]);
    const double bj = b[j];
    if (bj == 0.0) continue;
    const double* col = &ab_[j * ld_ + kv_];
    for (std::size_t t = 1; t <= km; ++t) b[j + t] -= col[t] * bj;
  }
  // U x = y
  for (std::size_t jj = n_; jj-- > 0;) {
    const double* col = &ab_[jj * ld_];
    b[jj] /= col[kv_];
    const double bj = b[jj];
    if (bj == 0.0) continue;
    const std::size_t i0 = jj > kv_ ? jj - kv_ : 0;
    for (std::size_t i = i0; i < jj; ++i) b[i] -= col[kv_ + i - jj] * bj;
  }
}

std::vector<double> BandedLU::solve(std::span<const double> rhs) const {
  std::vector<double> x(rhs.begin(), rhs.end());
  solve_in_place(x);
  return x;
}

std::vector<double> direct_solve(const SparseMatrix& a, std::span<const double> rhs) {
  return BandedLU(a).solve(rhs);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace osn
