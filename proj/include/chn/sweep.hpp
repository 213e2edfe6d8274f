#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chn/analytic.hpp"
#include "chn/mc.hpp"
#include "chn/model.hpp"

namespace chn {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Closed grid start, start+step, ..., stop. Point i is computed as
// start + i*step with an integer count, so no floating-point accumulation.
struct Grid {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  std::vector<double> points() const;
};

enum class SweepVariable { TauDb, DensityRatio, Activity };

struct SweepSpec {
  SweepVariable variable = SweepVariable::TauDb;
  int activity_tier = 0;  // 0-based; only for Activity sweeps
  Grid grid;
  double fixed_tau_db = 0.0;  // threshold used when tau is not the swept variable
  std::vector<int> files;     // 0-based
  bool engine_analytic = true;
  bool engine_mc = false;
  McOptions mc;
  QuadratureOptions quadrature;
};

struct ResultRow {
  std::string sweep_var;
  double sweep_value = 0.0;
  int file = 0;  // 1-based for output
  std::string engine;
  double coverage = 0.0;
  double coverage_err = 0.0;
  double delay = 0.0;  // +inf serialized as "inf"
  double delay_err = 0.0;
  std::int64_t samples = 0;  // 0 on analytic rows
  uint64_t seed = 0;         // 0 on analytic rows
};

inline constexpr const char* kCsvHeader =
    "sweep_var,sweep_value,file,engine,coverage,coverage_err,delay,delay_err,samples,seed";

// Shortest round-trip decimal representation; infinities print as "inf".
std::string format_value(double v);

std::string format_csv(const std::vector<ResultRow>& rows);

// Single-point evaluation: one row per requested engine.
std::vector<ResultRow> run_eval(const NetworkConfig& config, int file, double tau_db,
                                bool engine_analytic, bool engine_mc, const McOptions& mc,
                                const QuadratureOptions& quadrature);

// Full sweep in deterministic row order: grid-major, then file, then engine.
// Monte Carlo cells get independent seeds derived from mc.seed and the cell
// index; the derived seed is recorded in the row.
std::vector<ResultRow> run_sweep(const NetworkConfig& config, const SweepSpec& spec);

// --- cross-engine comparison ------------------------------------------------

enum class CompareStatus { Pass, PassDivergenceConsistent, Fail };

struct CompareRow {
  int file = 0;  // 1-based
  double tau_db = 0.0;
  std::string metric;  // "coverage" | "delay"
  bool analytic_finite = true;
  double analytic_value = 0.0;
  McEstimate mc;
  double z = 0.0;  // (mc - analytic) / std_error, NaN when not applicable
  CompareStatus status = CompareStatus::Fail;
  uint64_t cell_seed = 0;
  std::string note;  // e.g. "window_too_small"; empty otherwise
};

struct CompareSpec {
  Grid tau_db_grid;
  std::vector<int> files;  // 0-based
  bool check_coverage = true;
  bool check_delay = true;
  McOptions mc;
  QuadratureOptions quadrature;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  double pass_fraction = 0.0;
  bool passed = false;  // pass_fraction >= 0.95
};

// For every grid cell: analytic value vs Monte Carlo estimate with a 3 sigma
// verdict. An infinite analytic delay is consistent with the estimator's
// heavy-tail diagnostic; such cells pass as divergence-consistent.
CompareReport run_compare(const NetworkConfig& config, const CompareSpec& spec);

std::string format_report(const CompareReport& report);

}  // namespace chn
