#include "osn/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

#include "osn/monolithic.hpp"
#include "osn/parallel.hpp"

namespace osn {

ProblemSpec make_benchmark_spec(int n_interior, double q, double b, double beta, double nu, ControlBound ubar) {
  ProblemSpec spec;
  spec.width = 1.0;
  spec.height = 1.0;
  spec.nx = n_interior;
  spec.ny = n_interior;
  spec.q = q;
  spec.b = b;
  spec.beta = beta;
  spec.nu = nu;
  spec.c = 1.0;
  spec.ubar = ubar;
  const Grid grid(n_interior, n_interior, 1.0, 1.0);
  constexpr double pi = std::numbers::pi;
  spec.y_d = grid.sample([](double x, double y) { return 10.0 * std::sin(4.0 * pi * x) * std::sin(3.0 * pi * y); });
  spec.f.assign(grid.size(), 0.0);
  spec.reaction = b > 0.0 ? NonlinearReaction::linear_plus_exp() : NonlinearReaction::zero();
  spec.validate();
  return spec;
}

namespace {

constexpr Method kAllMethods[] = {Method::Preconditioned, Method::Continuation, Method::Baseline, Method::Osm};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_number(const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw ConfigError("not a number: '" + text + "'");
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "on" || text == "1") return true;
  if (text == "false" || text == "off" || text == "0") return false;
  throw ConfigError("not a boolean: '" + text + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Preconditioned:
      return "preconditioned";
    case Method::Continuation:
      return "continuation";
    case Method::Baseline:
      return "baseline";
    case Method::Osm:
      return "osm";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(grid >= 1, "grid must be >= 1");
  require(!nsub.empty() && !q.empty() && !b.empty() && !beta.empty() && !nu.empty() && !ubar.empty(),
          "every parameter list (nsub, q, b, beta, nu, ubar) needs at least one value");
  require(!methods.empty(), "no method selected");
  for (int n : nsub) require(n >= 1 && grid >= 2 * n - 1, "nsub " + std::to_string(n) + " does not fit the grid");
  for (double v : q) require(v > 0.0 && std::isfinite(v), "q must be positive");
  for (double v : b) require(v >= 0.0 && std::isfinite(v), "b must be >= 0");
  for (double v : beta) require(v >= 0.0 && std::isfinite(v), "beta must be >= 0");
  for (double v : nu) require(v > 0.0 && std::isfinite(v), "nu must be positive");
  require(tolerance > 0.0, "tolerance must be positive");
  require(kmax >= 0, "kmax must be >= 0");
  require(workers >= 1, "workers must be >= 1");
  require(gmres_rtol > 0.0 && gmres_rtol < 1.0, "gmres_rtol must lie in (0, 1)");
}

std::size_t ExperimentConfig::tuple_count() const {
  return nsub.size() * q.size() * b.size() * beta.size() * nu.size() * ubar.size();
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(std::string_view(raw).substr(0, raw.find('#')));
    if (line.empty()) continue;
    try {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value'");
      const std::string key = trim(std::string_view(line).substr(0, eq));
      const std::string value = trim(std::string_view(line).substr(eq + 1));
      if (key.empty() || value.empty()) throw ConfigError("expected 'key = value'");

      if (key == "nsub") {
        cfg.nsub.push_back(parse_number<int>(value));
      } else if (key == "q") {
        cfg.q.push_back(parse_number<double>(value));
      } else if (key == "b") {
        cfg.b.push_back(parse_number<double>(value));
      } else if (key == "beta") {
        cfg.beta.push_back(parse_number<double>(value));
      } else if (key == "nu") {
        cfg.nu.push_back(parse_number<double>(value));
      } else if (key == "ubar") {
        try {
          cfg.ubar.push_back(ControlBound::parse(value));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      } else if (key == "method") {
        cfg.methods.push_back(parse_method(value));
      } else {
        if (!seen.insert(key).second) throw ConfigError("'" + key + "' given twice");
        if (key == "grid") {
          cfg.grid = parse_number<int>(value);
        } else if (key == "tolerance") {
          cfg.tolerance = parse_number<double>(value);
        } else if (key == "kmax") {
          cfg.kmax = parse_number<int>(value);
        } else if (key == "seed") {
          cfg.seed = parse_number<std::uint64_t>(value);
        } else if (key == "out") {
          cfg.out = value;
        } else if (key == "workers") {
          cfg.workers = parse_number<int>(value);
        } else if (key == "timing") {
          cfg.timing = parse_bool(value);
        } else if (key == "gmres_rtol") {
          cfg.gmres_rtol = parse_number<double>(value);
        } else {
          throw ConfigError("unknown key '" + key + "'");
        }
      }
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file.string());
  return parse(in);
}

std::vector<Tuple> expand_tuples(const ExperimentConfig& cfg) {
  std::vector<Tuple> out;
  out.reserve(cfg.tuple_count());
  for (double beta : cfg.beta)
    for (double b : cfg.b)
      for (double q : cfg.q)
        for (int n : cfg.nsub)
          for (const ControlBound& ubar : cfg.ubar)
            for (double nu : cfg.nu) out.push_back(Tuple{q, n, b, beta, nu, ubar});
  return out;
}

OuterConfig outer_config(const ExperimentConfig& cfg) {
  OuterConfig oc;
  oc.tolerance = cfg.tolerance;
  oc.max_iterations = cfg.kmax;
  oc.seed = cfg.seed;
  oc.krylov.rel_tol = cfg.gmres_rtol;
  return oc;
}

RunOutcome run_single(const ExperimentConfig& cfg, const Tuple& t, Method m) {
  const ProblemSpec spec = make_benchmark_spec(cfg.grid, t.q, t.b, t.beta, t.nu, t.ubar);
  const Grid grid(cfg.grid, cfg.grid, 1.0, 1.0);
  const auto start = std::chrono::steady_clock::now();

  RunOutcome out;
  IterationReport rep;
  if (m == Method::Baseline) {
    BaselineConfig bc;
    bc.tolerance = cfg.tolerance;
    bc.max_iterations = cfg.kmax;
    const MonolithicSystem sys(spec);
    BaselineResult r = damped_ssn(sys, random_pair(grid, cfg.seed), bc);
    out.solution = std::move(r.solution);
    rep = std::move(r.report);
  } else {
    const Decomposition dec(grid, t.nsub);
    const OuterConfig oc = outer_config(cfg);
    const GlobalState init = random_state(dec, cfg.seed);
    OuterResult r = m == Method::Preconditioned  ? preconditioned_newton(spec, dec, init, oc)
                    : m == Method::Continuation ? preconditioned_newton_continuation(spec, dec, init, oc)
                                                : osm_fixed_point(spec, dec, init, oc);
    out.solution = dec.glue(r.state.parts);
    rep = std::move(r.report);
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  out.row.method = m;
  out.row.tuple = t;
  out.row.outer = rep.outer_iterations;
  out.row.inner_total = m == Method::Baseline ? 0 : rep.parallel_inner_total;
  out.row.gmres_total = rep.gmres_total();
  out.row.converged = rep.converged;
  out.row.seconds = cfg.timing ? elapsed.count() : 0.0;
  out.failure = rep.failure;
  return out;
}

std::vector<ResultRow> run_experiments(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  const std::vector<Tuple> tuples = expand_tuples(cfg);

  struct Task {
    std::size_t tuple;
    Method method;
    /// Baseline runs ignore q and N; repeated ones copy this task's result.
    std::size_t source;
  };
  std::vector<Task> tasks;
  std::map<std::tuple<double, double, double, double>, std::size_t> baseline_source;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    for (Method m : cfg.methods) {
      const std::size_t id = tasks.size();
      std::size_t source = id;
      if (m == Method::Baseline) {
        const auto key = std::make_tuple(tuples[i].b, tuples[i].beta, tuples[i].nu, tuples[i].ubar.value());
        source = baseline_source.try_emplace(key, id).first->second;
      }
      tasks.push_back(Task{i, m, source});
    }
  }

  std::vector<ResultRow> rows(tasks.size());
  std::mutex log_mutex;
  std::vector<std::size_t> primary;
  for (std::size_t id = 0; id < tasks.size(); ++id) {
    if (tasks[id].source == id) primary.push_back(id);
  }
  parallel_for(static_cast<int>(primary.size()), cfg.workers, [&](int k) {
    const Task& task = tasks[primary[static_cast<std::size_t>(k)]];
    const Tuple& t = tuples[task.tuple];
    RunOutcome r = run_single(cfg, t, task.method);
    if (log != nullptr) {
      const std::lock_guard lock(log_mutex);
      *log << method_name(task.method) << " q=" << format_number(t.q) << " N=" << t.nsub
           << " b=" << format_number(t.b) << " beta=" << format_number(t.beta) << " nu=" << format_number(t.nu)
           << " ubar=" << t.ubar.str() << ": "
           << (r.row.converged ? std::to_string(r.row.outer) + " iterations" : "x (" + r.failure + ")") << '\n';
    }
    rows[primary[static_cast<std::size_t>(k)]] = r.row;
  });
  for (std::size_t id = 0; id < tasks.size(); ++id) {
    if (tasks[id].source != id) {
      rows[id] = rows[tasks[id].source];
      rows[id].tuple = tuples[tasks[id].tuple];
    }
  }
  return rows;
}

namespace {
constexpr std::string_view kCsvHeader = "method,q,N,b,beta,nu,ubar,outer,inner_total,gmres_total,converged,seconds";
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    char secs[32];
    std::snprintf(secs, sizeof(secs), "%.3f", r.seconds);
    os << method_name(r.method) << ',' << format_number(r.tuple.q) << ',' << r.tuple.nsub << ','
       << format_number(r.tuple.b) << ',' << format_number(r.tuple.beta) << ',' << format_number(r.tuple.nu) << ','
       << r.tuple.ubar.str() << ',' << r.outer << ',' << r.inner_total << ',' << r.gmres_total << ','
       << (r.converged ? 1 : 0) << ',' << secs << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != kCsvHeader) throw ConfigError("CSV header mismatch");
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const std::vector<std::string> f = split(trim(line), ',');
      if (f.size() != 12) throw ConfigError("expected 12 fields");
      ResultRow r;
      r.method = parse_method(f[0]);
      r.tuple.q = parse_number<double>(f[1]);
      r.tuple.nsub = parse_number<int>(f[2]);
      r.tuple.b = parse_number<double>(f[3]);
      r.tuple.beta = parse_number<double>(f[4]);
      r.tuple.nu = parse_number<double>(f[5]);
      try {
        r.tuple.ubar = ControlBound::parse(f[6]);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      r.outer = parse_number<int>(f[7]);
      r.inner_total = parse_number<int>(f[8]);
      r.gmres_total = parse_number<int>(f[9]);
      r.converged = parse_bool(f[10]);
      r.seconds = parse_number<double>(f[11]);
      rows.push_back(r);
    } catch (const ConfigError& e) {
      throw ConfigError("CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

namespace {

std::string render_table(const std::vector<ResultRow>& rows, const std::vector<Method>& methods,
                         const std::string& title, int ResultRow::*value) {
  using RowKey = std::tuple<double, double, int>;  // b, q, N
  using ColKey = std::pair<double, double>;         // ubar, -nu
  std::set<double> betas;
  std::set<RowKey> row_keys;
  std::set<ColKey> col_keys;
  std::map<std::tuple<double, RowKey, ColKey, Method>, const ResultRow*> cells;
  for (const ResultRow& r : rows) {
    const RowKey rk{r.tuple.b, r.tuple.q, r.tuple.nsub};
    const ColKey ck{r.tuple.ubar.value(), -r.tuple.nu};
    betas.insert(r.tuple.beta);
    row_keys.insert(rk);
    col_keys.insert(ck);
    cells[{r.tuple.beta, rk, ck, r.method}] = &r;
  }

  std::ostringstream os;
  os << "# " << title << "\n\nCell order:";
  for (std::size_t i = 0; i < methods.size(); ++i) os << (i ? " - " : " ") << method_name(methods[i]);
  os << " (x = not converged)\n";
  for (double beta : betas) {
    os << "\n## beta = " << format_number(beta) << "\n\n| q | N | b |";
    for (const auto& [ubar, neg_nu] : col_keys) {
      os << " ubar=" << (std::isinf(ubar) ? std::string("inf") : format_number(ubar))
         << ", nu=" << format_number(-neg_nu) << " |";
    }
    os << "\n|---|---|---|";
    for (std::size_t i = 0; i < col_keys.size(); ++i) os << "---|";
    os << '\n';
    for (const RowKey& rk : row_keys) {
      os << "| " << format_number(std::get<1>(rk)) << " | " << std::get<2>(rk) << " | "
         << format_number(std::get<0>(rk)) << " |";
      for (const ColKey& ck : col_keys) {
        os << ' ';
        for (std::size_t i = 0; i < methods.size(); ++i) {
          if (i) os << " - ";
          const auto it = cells.find({beta, rk, ck, methods[i]});
          if (it == cells.end()) {
            os << "n/a";
          } else if (!it->second->converged) {
            os << "×";
          } else {
            os << it->second->*value;
          }
        }
        os << " |";
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace

Tables format_tables(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("format_tables: no rows");
  std::vector<Method> methods, inner_methods;
  for (Method m : kAllMethods) {
    if (std::any_of(rows.begin(), rows.end(), [m](const ResultRow& r) { return r.method == m; })) {
      methods.push_back(m);
      if (m != Method::Baseline) inner_methods.push_back(m);
    }
  }
  Tables t;
  t.outer = render_table(rows, methods, "Outer iterations", &ResultRow::outer);
  if (inner_methods.empty()) {
    t.inner = "# Inner iterations\n\nNo decomposition-based method in the input.\n";
  } else {
    t.inner = render_table(rows, inner_methods, "Inner iterations (sum over outer steps of the max over strips)",
                           &ResultRow::inner_total);
  }
  return t;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

void emit_tables(const std::vector<ResultRow>& rows, const std::filesystem::path& dir) {
  const Tables t = format_tables(rows);
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  write_csv(csv, rows);
  write_file(dir / "results.csv", csv.str());
  write_file(dir / "outer.md", t.outer);
  write_file(dir / "inner.md", t.inner);
}

void dump_fields(const ProblemSpec& spec, const PairField& solution, const std::filesystem::path& dir) {
  const Grid grid(spec.nx, spec.ny, spec.width, spec.height);
  if (solution.size() != grid.size()) throw std::invalid_argument("dump_fields: solution has wrong size");
  std::filesystem::create_directories(dir);
  const GridFunction u = mu(ControlLaw(spec), solution.p);
  const std::pair<const char*, const GridFunction*> fields[] = {
      {"y_d.csv", &spec.y_d}, {"y.csv", &solution.y}, {"p.csv", &solution.p}, {"u.csv", &u}};
  for (const auto& [name, values] : fields) {
    std::ostringstream os;
    write_csv_matrix(os, grid, *values);
    write_file(dir / name, os.str());
  }
}

}  // namespace osn
