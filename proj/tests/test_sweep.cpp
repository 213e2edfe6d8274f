#include <doctest.h>

#include <cmath>
#include <sstream>

#include "chn/sweep.hpp"

using chn::CompareReport;
using chn::CompareSpec;
using chn::Grid;
using chn::NetworkConfig;
using chn::ResultRow;
using chn::SweepSpec;
using chn::SweepVariable;
using chn::TierConfig;

namespace {

Eigen::ArrayXd probs(std::initializer_list<double> values) {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) out[i++] = v;
  return out;
}

NetworkConfig two_tier_is(double a = 1.0) {
  NetworkConfig config;
  config.num_files = 2;
  config.tiers.push_back(TierConfig{1.0, 10.0, 4.0, a, probs({0.2, 0.8}), 1.0});
  config.tiers.push_back(TierConfig{4.0, 0.1, 4.0, a, probs({0.2, 0.8}), 1.0});
  return config;
}

NetworkConfig single_tier(double p, double a) {
  NetworkConfig config;
  config.num_files = 1;
  config.tiers.push_back(TierConfig{1.0, 1.0, 4.0, a, probs({p}), p});
  return config;
}

}  // namespace

TEST_CASE("closed grids avoid step accumulation") {
  const Grid g{-10.0, 10.0, 1.0};
  const std::vector<double> pts = g.points();
  REQUIRE(pts.size() == 21);
  CHECK(pts.front() == -10.0);
  CHECK(pts.back() == 10.0);

  const Grid fine{0.0, 1.0, 0.1};
  CHECK(fine.points().size() == 11);

  CHECK_THROWS_AS((Grid{0.0, 1.0, -0.5}).points(), chn::Error);
  CHECK_THROWS_AS((Grid{2.0, 1.0, 0.5}).points(), chn::Error);
}

TEST_CASE("tau sweep produces one row per grid point, file and engine") {
  SweepSpec spec;
  spec.variable = SweepVariable::TauDb;
  spec.grid = Grid{-10.0, 10.0, 1.0};
  spec.files = {0, 1};
  spec.engine_analytic = true;
  spec.engine_mc = false;
  const std::vector<ResultRow> rows = chn::run_sweep(two_tier_is(), spec);
  REQUIRE(rows.size() == 42);  // 21 grid points x 2 files

  // Deterministic order: grid-major, then file, then engine.
  CHECK(rows[0].sweep_value == -10.0);
  CHECK(rows[0].file == 1);
  CHECK(rows[1].file == 2);
  CHECK(rows[2].sweep_value == -9.0);

  for (const ResultRow& row : rows) {
    CHECK(row.sweep_var == "tau_db");
    CHECK(row.engine == "analytic");
    CHECK(row.coverage >= 0.0);
    CHECK(row.coverage <= 1.0);
    const bool delay_valid = std::isinf(row.delay) || row.delay >= 1.0;
    CHECK(delay_valid);
  }
}

TEST_CASE("identical caching strategies are density-ratio invariant") {
  SweepSpec spec;
  spec.variable = SweepVariable::DensityRatio;
  spec.grid = Grid{1.0, 4.0, 1.0};
  spec.fixed_tau_db = -5.0;
  spec.files = {0, 1};
  const std::vector<ResultRow> rows = chn::run_sweep(two_tier_is(), spec);
  REQUIRE(rows.size() == 8);
  for (int file = 0; file < 2; ++file) {
    const double reference = rows[static_cast<size_t>(file)].coverage;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].file != file + 1) continue;
      CHECK(std::abs(rows[i].coverage - reference) <= 1e-9);
    }
  }
}

TEST_CASE("activity sweeps are monotone in coverage") {
  SweepSpec spec;
  spec.variable = SweepVariable::Activity;
  spec.activity_tier = 0;
  spec.grid = Grid{0.0, 1.0, 0.25};
  spec.fixed_tau_db = -5.0;
  spec.files = {0};
  const std::vector<ResultRow> rows = chn::run_sweep(two_tier_is(), spec);
  REQUIRE(rows.size() == 5);
  CHECK(rows.front().sweep_var == "activity1");
  for (size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].coverage <= rows[i - 1].coverage + 1e-12);
  }
}

TEST_CASE("sweep values producing invalid configs are rejected") {
  SweepSpec spec;
  spec.variable = SweepVariable::Activity;
  spec.activity_tier = 0;
  spec.grid = Grid{0.5, 1.5, 0.5};  // activity 1.5 is out of range
  spec.fixed_tau_db = 0.0;
  spec.files = {0};
  CHECK_THROWS_AS(chn::run_sweep(two_tier_is(), spec), chn::Error);

  SweepSpec ratio;
  ratio.variable = SweepVariable::DensityRatio;
  ratio.grid = Grid{1.0, 2.0, 1.0};
  ratio.files = {0};
  CHECK_THROWS_AS(chn::run_sweep(single_tier(1.0, 1.0), ratio), chn::Error);
}

TEST_CASE("CSV output is stable and spec-shaped") {
  SweepSpec spec;
  spec.variable = SweepVariable::TauDb;
  spec.grid = Grid{-4.0, 0.0, 2.0};
  spec.files = {0, 1};
  spec.engine_analytic = true;
  spec.engine_mc = true;
  spec.mc.samples = 2000;
  spec.mc.seed = 3;

  const std::string csv1 = chn::format_csv(chn::run_sweep(two_tier_is(), spec));
  const std::string csv2 = chn::format_csv(chn::run_sweep(two_tier_is(), spec));
  CHECK(csv1 == csv2);

  std::istringstream lines(csv1);
  std::string header;
  std::getline(lines, header);
  CHECK(header == chn::kCsvHeader);

  size_t data_lines = 0;
  std::string line;
  while (std::getline(lines, line)) {
    ++data_lines;
    // "inf" may appear only in the delay column.
    const size_t pos = line.find("inf");
    if (pos != std::string::npos) {
      std::istringstream fields(line);
      std::string field;
      int index = 0;
      while (std::getline(fields, field, ',')) {
        if (field == "inf") CHECK(index == 6);
        ++index;
      }
    }
  }
  CHECK(data_lines == 3 * 2 * 2);  // grid x files x engines
}

TEST_CASE("run_eval emits one row per engine") {
  const std::vector<ResultRow> rows =
      chn::run_eval(two_tier_is(), 1, -5.0, true, false, chn::McOptions{}, {});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].engine == "analytic");
  CHECK(rows[0].file == 2);
  CHECK(rows[0].coverage > 0.0);
  CHECK(rows[0].coverage < 1.0);
  CHECK(rows[0].delay >= 1.0);
  CHECK(rows[0].samples == 0);
}

TEST_CASE("cross-engine comparison on a small governed grid") {
  CompareSpec spec;
  spec.tau_db_grid = Grid{-6.0, 0.0, 3.0};
  spec.files = {0};
  spec.mc.samples = 8000;
  spec.mc.seed = 17;

  // Finite-delay regime: both metrics checked at 3 sigma.
  const CompareReport finite = chn::run_compare(single_tier(1.0, 0.5), spec);
  REQUIRE(finite.rows.size() == 6);
  CHECK(finite.pass_fraction == 1.0);
  CHECK(finite.passed);

  // Identical seeds reproduce the report byte for byte.
  const CompareReport again = chn::run_compare(single_tier(1.0, 0.5), spec);
  CHECK(chn::format_report(finite) == chn::format_report(again));

  // Divergent delay: analytic inf must pair with the heavy-tail flag.
  CompareSpec div_spec = spec;
  div_spec.check_coverage = false;
  const CompareReport divergent = chn::run_compare(single_tier(0.5, 1.0), div_spec);
  for (const auto& row : divergent.rows) {
    CHECK_FALSE(row.analytic_finite);
    CHECK(row.status == chn::CompareStatus::PassDivergenceConsistent);
  }
  CHECK(divergent.passed);
}

TEST_CASE("window failures surface per row and fail the comparison") {
  CompareSpec spec;
  spec.tau_db_grid = Grid{0.0, 0.0, 1.0};
  spec.files = {0};
  spec.mc.samples = 1000;
  spec.mc.window_radius = 2.0;  // far too small for p = 0.1
  NetworkConfig config = single_tier(0.1, 1.0);
  const CompareReport report = chn::run_compare(config, spec);
  REQUIRE_FALSE(report.rows.empty());
  bool saw_window_note = false;
  for (const auto& row : report.rows) {
    if (row.note == "window_too_small") saw_window_note = true;
  }
  CHECK(saw_window_note);
  CHECK_FALSE(report.passed);
}

TEST_CASE("value formatting is round-trip shortest") {
  CHECK(chn::format_value(0.5) == "0.5");
  CHECK(chn::format_value(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(chn::format_value(1.0 / 3.0) == "0.3333333333333333");
  CHECK(chn::format_value(-2.0) == "-2");
}
