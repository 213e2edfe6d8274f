#include "chn/sweep.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "chn/rng.hpp"

namespace chn {

std::vector<double> Grid::points() const {
  if (!(step > 0.0)) throw Error(ErrorKind::DomainError, "grid step must be positive");
  if (start > stop) throw Error(ErrorKind::DomainError, "grid start must not exceed stop");
  std::vector<double> out;
  const double slack = 1e-9 * step;
  for (long i = 0;; ++i) {
    const double value = start + static_cast<double>(i) * step;
    if (value > stop + slack) break;
    out.push_back(value);
  }
  return out;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const ResultRow& r : rows) {
    out += r.sweep_var;
    out += ',';
    out += format_value(r.sweep_value);
    out += ',';
    out += std::to_string(r.file);
    out += ',';
    out += r.engine;
    out += ',';
    out += format_value(r.coverage);
    out += ',';
    out += format_value(r.coverage_err);
    out += ',';
    out += format_value(r.delay);
    out += ',';
    out += format_value(r.delay_err);
    out += ',';
    out += std::to_string(r.samples);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

namespace {

ResultRow analytic_row(const NetworkConfig& config, int file, double tau,
                       const QuadratureOptions& quadrature) {
  ResultRow row;
  row.engine = "analytic";
  row.file = file + 1;
  const CoverageBreakdown cov = coverage(config, file, tau, quadrature);
  const DelayBreakdown del = delay(config, file, tau, quadrature);
  row.coverage = cov.total;
  row.coverage_err = cov.abs_error_estimate;
  row.delay = del.total.finite ? del.total.value : std::numeric_limits<double>::infinity();
  row.delay_err = del.total.finite ? del.abs_error_estimate : 0.0;
  row.samples = 0;
  row.seed = 0;
  return row;
}

ResultRow mc_row(const NetworkConfig& config, int file, double tau, const McOptions& mc) {
  ResultRow row;
  row.engine = "mc";
  row.file = file + 1;
  const McEstimate cov = estimate_coverage(config, file, tau, mc);
  const McEstimate del = estimate_delay(config, file, tau, mc);
  row.coverage = cov.mean;
  row.coverage_err = cov.std_error;
  row.delay = del.mean;
  row.delay_err = del.std_error;
  row.samples = mc.samples;
  row.seed = mc.seed;
  return row;
}

NetworkConfig apply_sweep_value(const NetworkConfig& config, const SweepSpec& spec,
                                double value) {
  NetworkConfig out = config;
  switch (spec.variable) {
    case SweepVariable::TauDb:
      break;
    case SweepVariable::DensityRatio:
      if (out.num_tiers() < 2) {
        throw Error(ErrorKind::ConfigInvalid,
                    "density_ratio sweeps require at least two tiers");
      }
      out.tiers[1].density = value * out.tiers[0].density;
      break;
    case SweepVariable::Activity:
      if (spec.activity_tier < 0 || spec.activity_tier >= out.num_tiers()) {
        throw Error(ErrorKind::ConfigInvalid, "activity sweep tier index out of range");
      }
      out.tiers[static_cast<size_t>(spec.activity_tier)].activity_prob = value;
      break;
  }
  const std::vector<Violation> violations = validate_network(out);
  if (!violations.empty()) {
    std::string what = "sweep value " + format_value(value) + " produces an invalid config:";
    for (const Violation& v : violations) what += "\n  - " + v.message;
    throw Error(ErrorKind::ConfigInvalid, what);
  }
  return out;
}

std::string sweep_var_name(const SweepSpec& spec) {
  switch (spec.variable) {
    case SweepVariable::TauDb: return "tau_db";
    case SweepVariable::DensityRatio: return "density_ratio";
    case SweepVariable::Activity:
      return "activity" + std::to_string(spec.activity_tier + 1);
  }
  return "?";
}

}  // namespace

std::vector<ResultRow> run_eval(const NetworkConfig& config, int file, double tau_db,
                                bool engine_analytic, bool engine_mc, const McOptions& mc,
                                const QuadratureOptions& quadrature) {
  const double tau = db_to_linear(tau_db);
  std::vector<ResultRow> rows;
  if (engine_analytic) {
    ResultRow row = analytic_row(config, file, tau, quadrature);
    row.sweep_var = "tau_db";
    row.sweep_value = tau_db;
    rows.push_back(std::move(row));
  }
  if (engine_mc) {
    ResultRow row = mc_row(config, file, tau, mc);
    row.sweep_var = "tau_db";
    row.sweep_value = tau_db;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> run_sweep(const NetworkConfig& config, const SweepSpec& spec) {
  if (spec.files.empty()) {
    throw Error(ErrorKind::DomainError, "sweep requires at least one file index");
  }
  const std::vector<double> grid = spec.grid.points();
  const std::string var = sweep_var_name(spec);
  std::vector<ResultRow> rows;
  uint64_t cell = 0;
  for (const double value : grid) {
    const NetworkConfig cell_config = apply_sweep_value(config, spec, value);
    const double tau_db = spec.variable == SweepVariable::TauDb ? value : spec.fixed_tau_db;
    const double tau = db_to_linear(tau_db);
    for (const int file : spec.files) {
      if (spec.engine_analytic) {
        ResultRow row = analytic_row(cell_config, file, tau, spec.quadrature);
        row.sweep_var = var;
        row.sweep_value = value;
        rows.push_back(std::move(row));
      }
      if (spec.engine_mc) {
        McOptions cell_mc = spec.mc;
        cell_mc.seed = splitmix64_at(spec.mc.seed, cell);
        ResultRow row = mc_row(cell_config, file, tau, cell_mc);
        row.sweep_var = var;
        row.sweep_value = value;
        rows.push_back(std::move(row));
      }
      ++cell;
    }
  }
  return rows;
}

CompareReport run_compare(const NetworkConfig& config, const CompareSpec& spec) {
  if (spec.files.empty()) {
    throw Error(ErrorKind::DomainError, "compare requires at least one file index");
  }
  if (!spec.check_coverage && !spec.check_delay) {
    throw Error(ErrorKind::DomainError, "compare requires at least one metric");
  }
  CompareReport report;
  uint64_t cell = 0;
  for (const double tau_db : spec.tau_db_grid.points()) {
    const double tau = db_to_linear(tau_db);
    for (const int file : spec.files) {
      McOptions cell_mc = spec.mc;
      cell_mc.seed = splitmix64_at(spec.mc.seed, cell);
      ++cell;

      if (spec.check_coverage) {
        CompareRow row;
        row.file = file + 1;
        row.tau_db = tau_db;
        row.metric = "coverage";
        row.analytic_value = coverage(config, file, tau, spec.quadrature).total;
        row.analytic_finite = true;
        row.cell_seed = cell_mc.seed;
        try {
          row.mc = estimate_coverage(config, file, tau, cell_mc);
          if (row.mc.std_error > 0.0) {
            row.z = (row.mc.mean - row.analytic_value) / row.mc.std_error;
            row.status = std::abs(row.z) <= 3.0 ? CompareStatus::Pass : CompareStatus::Fail;
          } else {
            row.z = 0.0;
            row.status = std::abs(row.mc.mean - row.analytic_value) <= 1e-12
                             ? CompareStatus::Pass
                             : CompareStatus::Fail;
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::WindowTooSmall) throw;
          row.z = std::numeric_limits<double>::quiet_NaN();
          row.status = CompareStatus::Fail;
          row.note = "window_too_small";
        }
        report.rows.push_back(std::move(row));
      }

      if (spec.check_delay) {
        CompareRow row;
        row.file = file + 1;
        row.tau_db = tau_db;
        row.metric = "delay";
        const DelayBreakdown del = delay(config, file, tau, spec.quadrature);
        row.analytic_finite = del.total.finite;
        row.analytic_value = del.total.value;
        row.cell_seed = cell_mc.seed;
        try {
          row.mc = estimate_delay(config, file, tau, cell_mc);
          if (!del.total.finite) {
            // A divergent mean cannot be matched numerically; the estimator
            // must at least have flagged an unreliable heavy-tailed sample.
            row.z = std::numeric_limits<double>::quiet_NaN();
            row.status = row.mc.heavy_tail ? CompareStatus::PassDivergenceConsistent
                                           : CompareStatus::Fail;
          } else if (row.mc.std_error > 0.0) {
            row.z = (row.mc.mean - row.analytic_value) / row.mc.std_error;
            row.status = std::abs(row.z) <= 3.0 ? CompareStatus::Pass : CompareStatus::Fail;
          } else {
            row.z = 0.0;
            row.status = std::abs(row.mc.mean - row.analytic_value) <= 1e-12
                             ? CompareStatus::Pass
                             : CompareStatus::Fail;
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::WindowTooSmall) throw;
          row.z = std::numeric_limits<double>::quiet_NaN();
          row.status = CompareStatus::Fail;
          row.note = "window_too_small";
        }
        report.rows.push_back(std::move(row));
      }
    }
  }

  std::int64_t passed = 0;
  for (const CompareRow& row : report.rows) {
    if (row.status != CompareStatus::Fail) ++passed;
  }
  report.pass_fraction =
      report.rows.empty() ? 0.0 : static_cast<double>(passed) / static_cast<double>(report.rows.size());
  report.passed = report.pass_fraction >= 0.95;
  return report;
}

std::string format_report(const CompareReport& report) {
  std::ostringstream out;
  out << "file,tau_db,metric,analytic,mc_mean,mc_std_error,ci95_lo,ci95_hi,z,heavy_tail,seed,status\n";
  for (const CompareRow& row : report.rows) {
    std::string status = row.status == CompareStatus::Pass ? "PASS"
                         : row.status == CompareStatus::PassDivergenceConsistent
                             ? "PASS(divergence-consistent)"
                             : "FAIL";
    if (!row.note.empty()) status += "(" + row.note + ")";
    out << row.file << ',' << format_value(row.tau_db) << ',' << row.metric << ','
        << (row.analytic_finite ? format_value(row.analytic_value) : "inf") << ','
        << format_value(row.mc.mean) << ',' << format_value(row.mc.std_error) << ','
        << format_value(row.mc.ci95_lo) << ',' << format_value(row.mc.ci95_hi) << ','
        << format_value(row.z) << ',' << (row.mc.heavy_tail ? 1 : 0) << ',' << row.cell_seed
        << ',' << status << '\n';
  }
  std::int64_t passed = 0;
  for (const CompareRow& row : report.rows) {
    if (row.status != CompareStatus::Fail) ++passed;
  }
  out << "summary: " << passed << "/" << report.rows.size() << " cells consistent, pass fraction "
      << format_value(report.pass_fraction) << " -> " << (report.passed ? "PASS" : "FAIL")
      << "\n";
  return out.str();
}

}  // namespace chn
