#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "osn/grid.hpp"
#include "osn/model.hpp"
#include "osn/schwarz.hpp"

namespace osn {

/// Unit-square benchmark: y_d = 10 sin(4 pi x) sin(3 pi y), f = 0, c = 1,
/// phi(y) = y + exp(y) when b > 0.
ProblemSpec make_benchmark_spec(int n_interior, double q, double b, double beta, double nu, ControlBound ubar);

enum class Method { Preconditioned, Continuation, Baseline, Osm };

std::string_view method_name(Method m);
/// Accepts the names returned by method_name().
Method parse_method(std::string_view name);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int grid = 51;
  std::vector<int> nsub;
  std::vector<double> q;
  std::vector<double> b;
  std::vector<double> beta;
  std::vector<double> nu;
  std::vector<ControlBound> ubar;
  std::vector<Method> methods;
  double tolerance = 1e-8;
  int kmax = 100;
  std::uint64_t seed = 1;
  std::filesystem::path out = "results";
  /// Tuples solved concurrently.
  int workers = 1;
  /// Record wall times; off gives byte-identical CSV across runs.
  bool timing = true;
  /// Relative GMRES tolerance of the outer Newton steps.
  double gmres_rtol = OuterConfig{}.krylov.rel_tol;

  void validate() const;
  std::size_t tuple_count() const;

  /// Flat `key = value` lines; list keys may repeat, '#' starts a comment.
  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig load(const std::filesystem::path& file);
};

struct Tuple {
  double q = 0.0;
  int nsub = 1;
  double b = 0.0;
  double beta = 0.0;
  double nu = 0.0;
  ControlBound ubar = ControlBound::unbounded();
};

/// Cartesian product in the order beta, b, q, nsub, ubar, nu.
std::vector<Tuple> expand_tuples(const ExperimentConfig& cfg);

struct ResultRow {
  Method method = Method::Preconditioned;
  Tuple tuple;
  /// Outer iterations (baseline: Newton steps, osm: sweeps).
  int outer = 0;
  /// Sum over outer iterations of the max over strips of the inner counts;
  /// 0 for the baseline.
  int inner_total = 0;
  int gmres_total = 0;
  bool converged = false;
  double seconds = 0.0;
};

struct RunOutcome {
  ResultRow row;
  /// Glued global solution (the last iterate if not converged).
  PairField solution;
  std::string failure;
};

OuterConfig outer_config(const ExperimentConfig& cfg);

/// One method on one tuple from the seeded random initial guess.
RunOutcome run_single(const ExperimentConfig& cfg, const Tuple& t, Method m);

/// Every tuple with every method. Failed runs become rows with
/// converged == false; `log`, if given, receives one line per run.
std::vector<ResultRow> run_experiments(const ExperimentConfig& cfg, std::ostream* log = nullptr);

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& is);

struct Tables {
  std::string outer;
  std::string inner;
};

/// Markdown tables: one block per beta, rows (b, q, N), columns (ubar, nu),
/// cells "a - b - c" in method order with x for failures.
Tables format_tables(const std::vector<ResultRow>& rows);

/// Writes results.csv, outer.md and inner.md into `dir`.
void emit_tables(const std::vector<ResultRow>& rows, const std::filesystem::path& dir);

/// Writes y_d.csv, y.csv, p.csv and u.csv (u = mu(p)) into `dir`.
void dump_fields(const ProblemSpec& spec, const PairField& solution, const std::filesystem::path& dir);

std::string format_number(double v);

}  // namespace osn
