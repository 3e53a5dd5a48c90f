#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "osn/model.hpp"

namespace osn {

/// Uniform grid of nx x ny interior nodes. Node (i, j), 0-based, sits at
/// (x0 + (i+1) hx, (j+1) hy); everything outside the interior carries
/// homogeneous Dirichlet values unless a strip boundary says otherwise.
class Grid {
 public:
  Grid() = default;
  Grid(int nx, int ny, double width, double height);

  /// Grid with prescribed spacing; x0 shifts the node coordinates so that a
  /// strip keeps the global x positions of its columns.
  static Grid with_spacing(int nx, int ny, double hx, double hy, double x0 = 0.0);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx_) * static_cast<std::size_t>(j);
  }
  double x(int i) const { return x0_ + (i + 1) * hx_; }
  double y(int j) const { return (j + 1) * hy_; }

  /// sqrt(hx hy) * ||v||_2, the discrete L2 norm used by all stopping tests.
  double scaled_norm(std::span<const double> v) const;

  template <class Fn>
  GridFunction sample(Fn fn) const {
    GridFunction out(size());
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        out[index(i, j)] = fn(x(i), y(j));
      }
    }
    return out;
  }

 private:
  int nx_ = 0;
  int ny_ = 0;
  double hx_ = 0.0;
  double hy_ = 0.0;
  double x0_ = 0.0;
};

double scaled_norm(std::span<const double> v, double hx, double hy);

/// 5-point -Laplacian with homogeneous Dirichlet data outside the grid.
/// Throws std::invalid_argument on a size mismatch.
GridFunction laplacian_apply(const Grid& grid, std::span<const double> v);

enum class Side { Left, Right };

/// State/adjoint pair on one (sub)grid.
struct PairField {
  GridFunction y;
  GridFunction p;

  PairField() = default;
  explicit PairField(std::size_t n) : y(n, 0.0), p(n, 0.0) {}
  PairField(GridFunction y_, GridFunction p_);

  std::size_t size() const { return y.size(); }
};

/// Robin data q v -/+ dv/dx on one interface, one value per grid row for
/// each of the state and adjoint components. `side` names the boundary of
/// the subdomain the data was taken from.
struct RobinTrace {
  Side side = Side::Left;
  std::vector<double> gy;
  std::vector<double> gp;
};

/// Vertical strip of the global grid. Columns are global 0-based indices,
/// inclusive on both ends; an interface column is owned by both neighbors.
struct Strip {
  int first_col = 0;
  int last_col = 0;
  bool has_left = false;
  bool has_right = false;
  Grid grid;

  int ncols() const { return last_col - first_col + 1; }
};

/// Left-to-right strip partition with duplicated interface columns.
class Decomposition {
 public:
  /// Throws std::invalid_argument unless 1 <= n_sub and the grid has at
  /// least 2 n_sub - 1 interior columns.
  Decomposition(const Grid& global, int n_sub);

  int size() const { return static_cast<int>(strips_.size()); }
  const Grid& global() const { return global_; }
  const Strip& strip(int j) const { return strips_.at(static_cast<std::size_t>(j)); }
  /// Global column of interface j (between strips j and j+1).
  int interface_column(int j) const { return strips_.at(static_cast<std::size_t>(j)).last_col; }
  std::vector<int> interface_columns() const;

  GridFunction restrict_to(int j, std::span<const double> global_values) const;
  PairField restrict_to(int j, const PairField& global_values) const;

  /// Global field from strip fields; duplicated interface columns are averaged.
  GridFunction glue(std::span<const GridFunction> parts) const;
  PairField glue(std::span<const PairField> parts) const;

 private:
  Grid global_;
  std::vector<Strip> strips_;
};

Decomposition make_decomposition(const Grid& grid, int n_sub);

/// Robin data that strip j sends to the neighbor on `side`.
///   Side::Left:  q v + dv/dx at the strip's first column (feeds the left
///                neighbor's right boundary).
///   Side::Right: q v - dv/dx at the strip's last column (feeds the right
///                neighbor's left boundary).
/// dv/dx is the first difference between the interface column and the
/// adjacent column inside the strip. The receiving strip eliminates its
/// ghost with the matching first difference across the interface, so the
/// ghost value reproduces the sender's interior neighbor exactly and the
/// restriction of a monolithic solution is a fixed point.
/// Throws std::invalid_argument when j has no neighbor on that side.
RobinTrace extract_trace(const Decomposition& dec, int j, Side side, const PairField& v, double q);

/// Row-major CSV, one grid row (constant y) per line, bottom row first.
void write_csv_matrix(std::ostream& os, const Grid& grid, std::span<const double> values);

}  // namespace osn
