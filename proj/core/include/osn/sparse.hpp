#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace osn {

/// Raised when a direct factorization meets an exactly zero or non-finite
/// pivot. For the linearized optimality systems this signals an ill-posed
/// Newton step.
class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(std::size_t column)
      : std::runtime_error("singular matrix: zero pivot in column " + std::to_string(column)),
        column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Square CSR matrix. Immutable once built; duplicate entries are summed
/// during assembly.
class SparseMatrix {
 public:
  class Builder {
   public:
    explicit Builder(std::size_t n) : n_(n) {}
    void reserve(std::size_t nnz) { entries_.reserve(nnz); }
    void add(std::size_t row, std::size_t col, double value);
    SparseMatrix build() &&;

   private:
    struct Entry {
      std::size_t row;
      std::size_t col;
      double value;
    };
    std::size_t n_;
    std::vector<Entry> entries_;
  };

  SparseMatrix() = default;

  std::size_t size() const { return n_; }
  std::size_t nonzeros() const { return values_.size(); }
  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::size_t> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }

  /// Stored coefficient, 0 for structural zeros.
  double coefficient(std::size_t row, std::size_t col) const;
  std::vector<double> multiply(std::span<const double> x) const;
  void multiply(std::span<const double> x, std::span<double> y) const;

  std::size_t lower_bandwidth() const;
  std::size_t upper_bandwidth() const;
  /// max |a_ij|
  double max_abs() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> columns_;
  std::vector<double> values_;
};

/// LU factorization with partial pivoting in band storage (the LAPACK
/// gbtrf layout). Factor once, solve many right-hand sides.
class BandedLU {
 public:
  /// Throws SingularMatrixError on a zero pivot.
  explicit BandedLU(const SparseMatrix& a);

  std::size_t size() const { return n_; }
  std::size_t lower_bandwidth() const { return kl_; }
  std::size_t upper_bandwidth() const { return ku_; }

  void solve_in_place(std::span<double> rhs) const;
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  double& at(std::size_t row, std::size_t col) { return ab_[col * ld_ + kv_ + row - col]; }

  std::size_t n_ = 0;
  std::size_t kl_ = 0;
  std::size_t ku_ = 0;
  std::size_t kv_ = 0;
  std::size_t ld_ = 0;
  std::vector<double> ab_;
  std::vector<std::size_t> pivots_;
};

/// One-shot banded LU solve of A x = rhs.
std::vector<double> direct_solve(const SparseMatrix& a, std::span<const double> rhs);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace osn
