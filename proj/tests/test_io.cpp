#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "tolreg/io.hpp"

using namespace tolreg;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "tolreg_io_tests";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("g17 round-trips doubles exactly") {
  const double cases[] = {0.0,    1.0,         -1.0,   0.1,   std::acos(-1.0),
                          1e300,  -1e300,      1e-308, 2.5e-320,
                          1.0 / 3.0, 123456789.123456789};
  for (const double x : cases) {
    const std::string text = g17(x);
    CHECK(std::strtod(text.c_str(), nullptr) == x);
    CHECK(text.find(',') == std::string::npos);
  }
}

TEST_CASE("signal csv round-trip is bit-exact") {
  const auto dir = scratch_dir();
  const auto g = make_grid<double>(37, -0.5, 2.0);
  const auto s = make_signal(g, oracle::random_vector(g.n, 77, -10, 10));
  const auto path = dir / "roundtrip.csv";
  write_signal_csv(path, s);

  const std::string text = read_text(path);
  CHECK(text.rfind("x,value\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.back() == '\n');

  const auto back = read_signal_csv(path);
  REQUIRE(back.grid.n == g.n);
  CHECK((back.values - s.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.grid.a == doctest::Approx(g.a).epsilon(1e-12));
  CHECK(back.grid.b == doctest::Approx(g.b).epsilon(1e-12));
  for (Index i = 0; i < g.n; ++i)
    CHECK(back.grid.nodes[i] == doctest::Approx(g.nodes[i]).epsilon(1e-12));
}

TEST_CASE("signal csv rejects malformed files") {
  const auto dir = scratch_dir();

  const auto uneven = dir / "uneven.csv";
  write_text(uneven, "x,value\n0.1,1\n0.2,2\n0.35,3\n");
  CHECK_THROWS_AS(read_signal_csv(uneven), std::runtime_error);

  const auto single = dir / "single.csv";
  write_text(single, "x,value\n0.5,1\n");
  CHECK_THROWS_AS(read_signal_csv(single), std::runtime_error);

  const auto header = dir / "header.csv";
  write_text(header, "time,value\n0.1,1\n0.3,2\n");
  CHECK_THROWS_AS(read_signal_csv(header), std::runtime_error);

  const auto garbage = dir / "garbage.csv";
  write_text(garbage, "x,value\n0.1,1\n0.3,two\n");
  CHECK_THROWS_AS(read_signal_csv(garbage), std::runtime_error);

  CHECK_THROWS(read_signal_csv(dir / "missing.csv"));
}

TEST_CASE("history csv layout") {
  const auto dir = scratch_dir();
  SolveResult<double> result;
  const auto g = make_grid<double>(3, 0.0, 1.0);
  result.solution = make_signal(g, Vector<double>::Zero(3));
  result.objective_history = {3.0, 2.0, 1.5};
  result.residual_history = {0.9, 0.8, 0.7};
  result.penalty_history = {0.1, 0.05, 0.0};
  const auto path = dir / "history.csv";
  write_history_csv(path, result);

  const std::string text = read_text(path);
  CHECK(text.rfind("iter,objective,residual,penalty\n", 0) == 0);
  std::size_t lines = 0;
  for (const char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 4);
  CHECK(text.find("\n0,3,") != std::string::npos);
  CHECK(text.find("\n2,1.5,") != std::string::npos);
}

TEST_CASE("parameter-choice csv layouts") {
  const auto dir = scratch_dir();

  // Dyadic values print without a 17-digit tail, keeping the expectations
  // readable.
  LCurveResult<double> curve;
  curve.points.push_back({0.25, 0.5, 2.0});
  curve.points.push_back({0.5, 0.75, 1.0});
  const auto lpath = dir / "lcurve.csv";
  write_lcurve_csv(lpath, curve);
  const std::string ltext = read_text(lpath);
  CHECK(ltext.rfind("alpha,residual,penalty\n", 0) == 0);
  CHECK(ltext.find("0.25,0.5,2\n") != std::string::npos);
  CHECK(ltext.find("0.5,0.75,1\n") != std::string::npos);

  DiscrepancyReport<double> report;
  Vector<double> alphas(2);
  alphas << 0.25, 0.5;
  report.alpha_grid = make_alpha_grid(alphas);
  report.g_values.resize(2);
  report.g_values << 0.125, 0.375;
  report.threshold = 0.25;
  const auto mpath = dir / "morozov.csv";
  write_morozov_csv(mpath, report);
  const std::string mtext = read_text(mpath);
  CHECK(mtext.rfind("alpha,G,threshold,feasible\n", 0) == 0);
  CHECK(mtext.find("0.25,0.125,0.25,1\n") != std::string::npos);
  CHECK(mtext.find("0.5,0.375,0.25,0\n") != std::string::npos);
}

TEST_CASE("json helpers round-trip") {
  const auto dir = scratch_dir();
  nlohmann::json doc;
  doc["alpha"] = 0.001;
  doc["name"] = "run";
  doc["flags"] = {1, 2, 3};
  const auto path = dir / "doc.json";
  write_json(path, doc);
  CHECK(read_json(path) == doc);
  const std::string text = read_text(path);
  CHECK(text.back() == '\n');
}
