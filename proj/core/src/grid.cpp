#include "osn/grid.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace osn {

Grid::Grid(int nx, int ny, double width, double height)
    : nx_(nx), ny_(ny), hx_(width / (nx + 1)), hy_(height / (ny + 1)) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid needs at least one interior node per direction");
  if (!(width > 0.0) || !(height > 0.0)) throw std::invalid_argument("grid extents must be positive");
}

Grid Grid::with_spacing(int nx, int ny, double hx, double hy, double x0) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid needs at least one interior node per direction");
  if (!(hx > 0.0) || !(hy > 0.0)) throw std::invalid_argument("mesh widths must be positive");
  Grid g;
  g.nx_ = nx;
  g.ny_ = ny;
  g.hx_ = hx;
  g.hy_ = hy;
  g.x0_ = x0;
  return g;
}

double scaled_norm(std::span<const double> v, double hx, double hy) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(hx * hy * s);
}

double Grid::scaled_norm(std::span<const double> v) const { return osn::scaled_norm(v, hx_, hy_); }

GridFunction laplacian_apply(const Grid& grid, std::span<const double> v) {
  if (v.size() != grid.size()) throw std::invalid_argument("laplacian_apply: size mismatch");
  const int nx = grid.nx();
  const int ny = grid.ny();
  const double ihx2 = 1.0 / (grid.hx() * grid.hx());
  const double ihy2 = 1.0 / (grid.hy() * grid.hy());
  GridFunction out(v.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = grid.index(i, j);
      const double w = i > 0 ? v[k - 1] : 0.0;
      const double e = i + 1 < nx ? v[k + 1] : 0.0;
      const double s = j > 0 ? v[k - static_cast<std::size_t>(nx)] : 0.0;
      const double n = j + 1 < ny ? v[k + static_cast<std::size_t>(nx)] : 0.0;
      out[k] = (2.0 * v[k] - w - e) * ihx2 + (2.0 * v[k] - s - n) * ihy2;
    }
  }
  return out;
}

PairField::PairField(GridFunction y_, GridFunction p_) : y(std::move(y_)), p(std::move(p_)) {
  if (y.size() != p.size()) throw std::invalid_argument("PairField: y and p differ in length");
}

Decomposition::Decomposition(const Grid& global, int n_sub) : global_(global) {
  if (n_sub < 1) throw std::invalid_argument("need at least one subdomain");
  const int nx = global.nx();
  if (nx < 2 * n_sub - 1) {
    throw std::invalid_argument("grid has " + std::to_string(nx) + " interior columns, too few for " +
                                std::to_string(n_sub) + " strips");
  }
  // Interface columns are counted twice, so the strips share nx + N - 1 columns.
  const int total = nx + n_sub - 1;
  const int base = total / n_sub;
  const int extra = total % n_sub;
  int first = 0;
  strips_.reserve(static_cast<std::size_t>(n_sub));
  for (int j = 0; j < n_sub; ++j) {
    const int count = base + (j < extra ? 1 : 0);
    Strip s;
    s.first_col = first;
    s.last_col = first + count - 1;
    s.has_left = j > 0;
    s.has_right = j + 1 < n_sub;
    s.grid = Grid::with_spacing(count, global.ny(), global.hx(), global.hy(), first * global.hx());
    strips_.push_back(s);
    first = s.last_col;
  }
}

Decomposition make_decomposition(const Grid& grid, int n_sub) { return Decomposition(grid, n_sub); }

std::vector<int> Decomposition::interface_columns() const {
  std::vector<int> cols;
  for (int j = 0; j + 1 < size(); ++j) cols.push_back(interface_column(j));
  return cols;
}

GridFunction Decomposition::restrict_to(int j, std::span<const double> global_values) const {
  if (global_values.size() != global_.size()) throw std::invalid_argument("restrict_to: size mismatch");
  const Strip& s = strip(j);
  GridFunction out(s.grid.size());
  for (int r = 0; r < global_.ny(); ++r) {
    for (int i = 0; i < s.ncols(); ++i) {
      out[s.grid.index(i, r)] = global_values[global_.index(s.first_col + i, r)];
    }
  }
  return out;
}

PairField Decomposition::restrict_to(int j, const PairField& global_values) const {
  return PairField(restrict_to(j, global_values.y), restrict_to(j, global_values.p));
}

GridFunction Decomposition::glue(std::span<const GridFunction> parts) const {
  if (static_cast<int>(parts.size()) != size()) throw std::invalid_argument("glue: wrong number of parts");
  GridFunction out(global_.size(), 0.0);
  std::vector<int> owners(global_.size(), 0);
  for (int j = 0; j < size(); ++j) {
    const Strip& s = strip(j);
    if (parts[static_cast<std::size_t>(j)].size() != s.grid.size()) {
      throw std::invalid_argument("glue: part size mismatch");
    }
    for (int r = 0; r < global_.ny(); ++r) {
      for (int i = 0; i < s.ncols(); ++i) {
        const std::size_t k = global_.index(s.first_col + i, r);
        out[k] += parts[static_cast<std::size_t>(j)][s.grid.index(i, r)];
        ++owners[k];
      }
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k] /= owners[k];
  return out;
}

PairField Decomposition::glue(std::span<const PairField> parts) const {
  std::vector<GridFunction> ys, ps;
  ys.reserve(parts.size());
  ps.reserve(parts.size());
  for (const auto& part : parts) {
    ys.push_back(part.y);
    ps.push_back(part.p);
  }
  return PairField(glue(ys), glue(ps));
}

RobinTrace extract_trace(const Decomposition& dec, int j, Side side, const PairField& v, double q) {
  if (j < 0 || j >= dec.size()) throw std::invalid_argument("extract_trace: subdomain index out of range");
  const Strip& s = dec.strip(j);
  if ((side == Side::Left && !s.has_left) || (side == Side::Right && !s.has_right)) {
    throw std::invalid_argument("extract_trace: subdomain " + std::to_string(j) + " has no neighbor on that side");
  }
  const Grid& g = s.grid;
  if (v.size() != g.size()) throw std::invalid_argument("extract_trace: field size mismatch");
  const double ihx = 1.0 / g.hx();
  RobinTrace t;
  t.side = side;
  t.gy.resize(static_cast<std::size_t>(g.ny()));
  t.gp.resize(static_cast<std::size_t>(g.ny()));
  const int edge = side == Side::Left ? 0 : g.nx() - 1;
  const int inner = side == Side::Left ? 1 : g.nx() - 2;
  for (int r = 0; r < g.ny(); ++r) {
    const std::size_t ke = g.index(edge, r);
    const std::size_t ki = g.index(inner, r);
    const auto rr = static_cast<std::size_t>(r);
    // (v_inner - v_edge)/hx is +dv/dx on the left edge and -dv/dx on the right edge.
    t.gy[rr] = q * v.y[ke] + (v.y[ki] - v.y[ke]) * ihx;
    t.gp[rr] = q * v.p[ke] + (v.p[ki] - v.p[ke]) * ihx;
  }
  return t;
}

void write_csv_matrix(std::ostream& os, const Grid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) throw std::invalid_argument("write_csv_matrix: size mismatch");
  char buf[64];
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      if (i > 0) os << ',';
      auto res = std::to_chars(buf, buf + sizeof(buf), values[grid.index(i, j)]);
      os.write(buf, res.ptr - buf);
    }
    os << '\n';
  }
}

}  // namespace osn
