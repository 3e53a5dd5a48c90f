#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <fstream>
#include <sstream>

#include "osn/experiment.hpp"

using osn::ConfigError;
using osn::ControlBound;
using osn::ExperimentConfig;
using osn::Method;
using osn::ResultRow;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream is(text);
  return ExperimentConfig::parse(is);
}

ResultRow row(Method m, double q, double nu, ControlBound ubar, int outer, bool ok) {
  ResultRow r;
  r.method = m;
  r.tuple = {q, 2, 10.0, 0.0, nu, ubar};
  r.outer = outer;
  r.inner_total = 3 * outer;
  r.gmres_total = 7;
  r.converged = ok;
  r.seconds = 0.25;
  return r;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("osn_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, ParsesListsAndScalars) {
  const auto cfg = parse(
      "# comment\n"
      "grid = 21\n"
      "nsub = 2\nnsub = 4\n"
      "q = 10   # trailing\n"
      "b = 0\nbeta = 0.01\nnu = 1e-5\nubar = inf\nubar = 1e3\n"
      "method = continuation\nmethod = baseline\n"
      "tolerance = 1e-9\nkmax = 7\nseed = 42\nworkers = 2\ntiming = off\n");
  EXPECT_EQ(cfg.grid, 21);
  EXPECT_EQ(cfg.nsub, (std::vector<int>{2, 4}));
  EXPECT_EQ(cfg.ubar.size(), 2u);
  EXPECT_FALSE(cfg.ubar[0].bounded());
  EXPECT_EQ(cfg.methods, (std::vector<Method>{Method::Continuation, Method::Baseline}));
  EXPECT_EQ(cfg.tolerance, 1e-9);
  EXPECT_EQ(cfg.kmax, 7);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_FALSE(cfg.timing);
  EXPECT_EQ(cfg.tuple_count(), 4u);
  EXPECT_NO_THROW(cfg.validate());
  const auto tuples = osn::expand_tuples(cfg);
  ASSERT_EQ(tuples.size(), 4u);
  EXPECT_EQ(tuples[0].nsub, 2);
  EXPECT_FALSE(tuples[0].ubar.bounded());
  EXPECT_EQ(tuples[3].nsub, 4);
  EXPECT_EQ(tuples[3].ubar.value(), 1000.0);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse("grid 21\n"), ConfigError);
  EXPECT_THROW(parse("grid = 21\ngrid = 31\n"), ConfigError);
  EXPECT_THROW(parse("colour = red\n"), ConfigError);
  EXPECT_THROW(parse("q = ten\n"), ConfigError);
  EXPECT_THROW(parse("ubar = -1\n"), ConfigError);
  EXPECT_THROW(parse("method = magic\n"), ConfigError);
  EXPECT_THROW(parse("timing = maybe\n"), ConfigError);
  try {
    parse("grid = 5\n\nkmax = x\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Config, ValidateRejectsInconsistentValues) {
  auto cfg = parse("nsub = 2\nq = 1\nb = 0\nbeta = 0\nnu = 1e-3\nubar = inf\nmethod = osm\n");
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.nsub = {30};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.q = {0.0};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.methods.clear();
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.nu.clear();
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/osn.conf"), ConfigError);
}

TEST(Methods, NamesRoundTrip) {
  for (Method m : {Method::Preconditioned, Method::Continuation, Method::Baseline, Method::Osm}) {
    EXPECT_EQ(osn::parse_method(osn::method_name(m)), m);
  }
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(osn::format_number(1e-7), "1e-07");
  EXPECT_EQ(osn::format_number(0.01), "0.01");
  EXPECT_EQ(osn::format_number(1000.0), "1000");
  EXPECT_EQ(osn::format_number(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Csv, RoundTrip) {
  const std::vector<ResultRow> rows{row(Method::Preconditioned, 1.0, 1e-7, ControlBound(1e3), 4, true),
                                    row(Method::Baseline, 100.0, 1e-3, ControlBound::unbounded(), 9, false)};
  std::stringstream ss;
  osn::write_csv(ss, rows);
  const auto back = osn::read_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].method, rows[i].method);
    EXPECT_EQ(back[i].tuple.q, rows[i].tuple.q);
    EXPECT_EQ(back[i].tuple.nu, rows[i].tuple.nu);
    EXPECT_EQ(back[i].tuple.ubar, rows[i].tuple.ubar);
    EXPECT_EQ(back[i].outer, rows[i].outer);
    EXPECT_EQ(back[i].inner_total, rows[i].inner_total);
    EXPECT_EQ(back[i].converged, rows[i].converged);
    EXPECT_EQ(back[i].seconds, rows[i].seconds);
  }
  std::istringstream bad("method,q\n");
  EXPECT_THROW(osn::read_csv(bad), ConfigError);
  std::istringstream short_line(
      "method,q,N,b,beta,nu,ubar,outer,inner_total,gmres_total,converged,seconds\nbaseline,1,2\n");
  EXPECT_THROW(osn::read_csv(short_line), ConfigError);
}

TEST(Tables, CellsJoinMethodsInCanonicalOrder) {
  const ControlBound ub(1e3);
  const std::vector<ResultRow> rows{row(Method::Baseline, 1.0, 1e-3, ub, 7, false),
                                    row(Method::Continuation, 1.0, 1e-3, ub, 5, true),
                                    row(Method::Preconditioned, 1.0, 1e-3, ub, 4, true),
                                    row(Method::Preconditioned, 1.0, 1e-5, ub, 6, true)};
  const auto t = osn::format_tables(rows);
  EXPECT_NE(t.outer.find("| 1 | 2 | 10 | 4 - 5 - × | 6 - n/a - n/a |"), std::string::npos) << t.outer;
  EXPECT_NE(t.outer.find("## beta = 0"), std::string::npos);
  EXPECT_NE(t.outer.find("ubar=1000, nu=0.001 | ubar=1000, nu=1e-05 |"), std::string::npos);
  EXPECT_NE(t.inner.find("| 12 - 15 |"), std::string::npos) << t.inner;
  EXPECT_EQ(t.inner.find("baseline"), std::string::npos);
  EXPECT_THROW(osn::format_tables({}), std::invalid_argument);
}

TEST(Tables, EmitWritesAllFiles) {
  const auto dir = temp_dir("emit");
  osn::emit_tables({row(Method::Osm, 10.0, 1e-3, ControlBound::unbounded(), 3, true)}, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "results.csv"));
  EXPECT_NE(slurp(dir / "outer.md").find("| 3 |"), std::string::npos);
  EXPECT_NE(slurp(dir / "inner.md").find("| 9 |"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(DumpFields, ZeroSolution) {
  const auto spec = osn::make_benchmark_spec(3, 10.0, 0.0, 0.0, 1e-3, ControlBound::unbounded());
  const auto dir = temp_dir("fields");
  osn::dump_fields(spec, osn::PairField(9), dir);
  EXPECT_EQ(slurp(dir / "u.csv"), "0,0,0\n0,0,0\n0,0,0\n");
  EXPECT_EQ(slurp(dir / "y.csv"), "0,0,0\n0,0,0\n0,0,0\n");
  EXPECT_NE(slurp(dir / "y_d.csv"), slurp(dir / "y.csv"));
  EXPECT_THROW(osn::dump_fields(spec, osn::PairField(4), dir), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST(BenchmarkSpec, TargetIsTheFourThreeMode) {
  const auto spec = osn::make_benchmark_spec(51, 10.0, 10.0, 0.0, 1e-3, ControlBound::unbounded());
  const osn::Grid g(51, 51, 1.0, 1.0);
  EXPECT_NEAR(spec.y_d[g.index(5, 7)], 10.0 * std::sin(4 * std::numbers::pi * g.x(5)) * std::sin(3 * std::numbers::pi * g.y(7)), 1e-12);
  EXPECT_EQ(spec.reaction.name, osn::NonlinearReaction::linear_plus_exp().name);
}

TEST(RunExperiments, SmallSweepAndBaselineReuse) {
  auto cfg = parse(
      "grid = 9\nnsub = 2\nq = 1\nq = 100\nb = 0\nbeta = 0\nnu = 1e-3\nubar = inf\n"
      "method = preconditioned\nmethod = baseline\ntiming = off\n");
  std::ostringstream log;
  const auto rows = osn::run_experiments(cfg, &log);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_TRUE(r.converged);
  EXPECT_EQ(rows[1].method, Method::Baseline);
  EXPECT_EQ(rows[3].tuple.q, 100.0);
  EXPECT_EQ(rows[1].outer, rows[3].outer);
  EXPECT_EQ(rows[1].inner_total, 0);
  EXPECT_EQ(rows[0].seconds, 0.0);
  // one baseline line only: the q = 100 copy is reused
  const std::string text = log.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}
