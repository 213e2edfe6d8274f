// chn: coverage/delay toolkit for K-tier cache-aided heterogeneous networks.
//
// Subcommands: validate, eval, sweep, simulate, compare. Thresholds are
// given in dB on the command line and converted to linear SIR once at this
// boundary; everything below works in linear units.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "chn/analytic.hpp"
#include "chn/mc.hpp"
#include "chn/model.hpp"
#include "chn/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigInvalid = 2;
constexpr int kExitUncachedFile = 3;
constexpr int kExitNumericalFailure = 4;
constexpr int kExitComparisonFailure = 5;

int exit_code_for(const chn::Error& e) {
  switch (e.kind()) {
    case chn::ErrorKind::ConfigInvalid:
      return kExitConfigInvalid;
    case chn::ErrorKind::FileUncached:
    case chn::ErrorKind::IndexOutOfRange:
      return kExitUncachedFile;
    default:
      return kExitNumericalFailure;
  }
}

struct RangeOrScalar {
  bool is_range = false;
  double scalar = 0.0;
  chn::Grid grid;
};

RangeOrScalar parse_range_or_scalar(const std::string& text, const std::string& flag) {
  RangeOrScalar out;
  std::vector<double> parts;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t next = text.find(':', pos);
    const std::string token = text.substr(pos, next == std::string::npos ? next : next - pos);
    try {
      parts.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "cannot parse \"" + token + "\" as a number");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (parts.size() == 1) {
    out.scalar = parts[0];
  } else if (parts.size() == 3) {
    out.is_range = true;
    out.grid = chn::Grid{parts[0], parts[1], parts[2]};
  } else {
    throw CLI::ValidationError(flag, "expected <value> or <start:stop:step>");
  }
  return out;
}

chn::NetworkConfig load_validated(const std::string& path) {
  chn::NetworkConfig config = chn::load_network_file(path);
  return chn::require_valid(std::move(config));
}

// Converts 1-based file indices from the command line, defaulting to every
// file in the library.
std::vector<int> resolve_files(const std::vector<int>& requested, const chn::NetworkConfig& config) {
  std::vector<int> files;
  if (requested.empty()) {
    for (int n = 0; n < config.num_files; ++n) files.push_back(n);
    return files;
  }
  for (const int n : requested) {
    if (n < 1 || n > config.num_files) {
      throw chn::Error(chn::ErrorKind::IndexOutOfRange,
                       "file index " + std::to_string(n) + " out of range [1.." +
                           std::to_string(config.num_files) + "]");
    }
    files.push_back(n - 1);
  }
  return files;
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    throw chn::Error(chn::ErrorKind::ConfigInvalid, "cannot open output file: " + out_path);
  }
  out << text;
}

struct CommonFlags {
  std::string config_path;
  std::vector<int> files;
  std::string tau_db;
  std::string engine = "analytic";
  std::int64_t samples = 100000;
  uint64_t seed = 0;
  double window_radius = 0.0;
  int threads = 0;
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  std::string out_path;

  chn::McOptions mc_options() const {
    chn::McOptions mc;
    mc.samples = samples;
    mc.seed = seed;
    mc.window_radius = window_radius;
    mc.threads = threads;
    return mc;
  }
  chn::QuadratureOptions quad_options() const {
    chn::QuadratureOptions q;
    q.abs_tol = abs_tol;
    q.rel_tol = rel_tol;
    return q;
  }
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags, bool with_mc, bool with_quad) {
  cmd->add_option("--config", flags->config_path, "network config file (JSON)")->required();
  cmd->add_option("--out", flags->out_path, "output path (default: standard output)");
  if (with_mc) {
    cmd->add_option("--samples", flags->samples, "Monte Carlo realizations per estimate");
    cmd->add_option("--seed", flags->seed, "master RNG seed");
    cmd->add_option("--window-radius", flags->window_radius,
                    "simulation window radius (default: automatic)");
    cmd->add_option("--threads", flags->threads, "worker threads (default: hardware)");
  }
  if (with_quad) {
    cmd->add_option("--abs-tol", flags->abs_tol, "quadrature absolute tolerance");
    cmd->add_option("--rel-tol", flags->rel_tol, "quadrature relative tolerance");
  }
}

int cmd_validate(const CommonFlags& flags) {
  chn::NetworkConfig config = chn::load_network_file(flags.config_path);
  const std::vector<chn::Violation> violations = chn::validate_network(config);
  if (violations.empty()) {
    std::cout << "OK: " << config.num_tiers() << " tiers, " << config.num_files << " files\n";
    return kExitOk;
  }
  std::cerr << "invalid config (" << violations.size() << " violations):\n";
  for (const chn::Violation& v : violations) std::cerr << "  - " << v.message << "\n";
  return kExitConfigInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coverage and local delay for K-tier cache-aided heterogeneous networks"};
  app.require_subcommand(1);

  CommonFlags validate_flags;
  CLI::App* validate = app.add_subcommand("validate", "check a config file and list violations");
  validate->add_option("--config", validate_flags.config_path, "network config file (JSON)")
      ->required();

  CommonFlags eval_flags;
  CLI::App* eval = app.add_subcommand("eval", "evaluate coverage and delay at one grid point");
  add_common_flags(eval, &eval_flags, true, true);
  eval->add_option("--file", eval_flags.files, "1-based file index (repeatable)");
  eval->add_option("--tau-db", eval_flags.tau_db, "SIR threshold in dB")->required();
  eval->add_option("--engine", eval_flags.engine, "analytic | mc | both")
      ->check(CLI::IsMember({"analytic", "mc", "both"}));

  CommonFlags sweep_flags;
  std::string sweep_density_ratio;
  std::string sweep_activity;
  CLI::App* sweep = app.add_subcommand("sweep", "write a CSV over a parameter grid");
  add_common_flags(sweep, &sweep_flags, true, true);
  sweep->add_option("--file", sweep_flags.files, "1-based file indices (default: all)");
  sweep->add_option("--tau-db", sweep_flags.tau_db,
                    "threshold in dB: scalar, or start:stop:step to sweep tau");
  sweep->add_option("--density-ratio", sweep_density_ratio,
                    "sweep tier-2 density as ratio*lambda_1: start:stop:step");
  sweep->add_option("--activity", sweep_activity,
                    "sweep a tier's activity probability: tier:start:stop:step");
  sweep->add_option("--engine", sweep_flags.engine, "analytic | mc | both")
      ->check(CLI::IsMember({"analytic", "mc", "both"}));

  CommonFlags sim_flags;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimate with diagnostics");
  add_common_flags(simulate, &sim_flags, true, false);
  simulate->add_option("--file", sim_flags.files, "1-based file index (repeatable)");
  simulate->add_option("--tau-db", sim_flags.tau_db, "SIR threshold in dB")->required();

  CommonFlags cmp_flags;
  std::string cmp_metric = "both";
  CLI::App* compare = app.add_subcommand("compare", "analytic vs Monte Carlo cross-validation");
  add_common_flags(compare, &cmp_flags, true, true);
  compare->add_option("--file", cmp_flags.files, "1-based file indices (default: all)");
  compare->add_option("--tau-db", cmp_flags.tau_db, "threshold grid in dB: start:stop:step")
      ->required();
  compare->add_option("--metric", cmp_metric, "coverage | delay | both")
      ->check(CLI::IsMember({"coverage", "delay", "both"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      return cmd_validate(validate_flags);
    }

    if (eval->parsed()) {
      const chn::NetworkConfig config = load_validated(eval_flags.config_path);
      const std::vector<int> files = resolve_files(eval_flags.files, config);
      const RangeOrScalar tau = parse_range_or_scalar(eval_flags.tau_db, "--tau-db");
      if (tau.is_range) {
        throw chn::Error(chn::ErrorKind::DomainError,
                         "eval takes a scalar --tau-db; use the sweep subcommand for ranges");
      }
      std::vector<chn::ResultRow> rows;
      for (const int file : files) {
        for (chn::ResultRow& row :
             chn::run_eval(config, file, tau.scalar, eval_flags.engine != "mc",
                           eval_flags.engine != "analytic", eval_flags.mc_options(),
                           eval_flags.quad_options())) {
          rows.push_back(std::move(row));
        }
      }
      write_output(chn::format_csv(rows), eval_flags.out_path);
      return kExitOk;
    }

    if (sweep->parsed()) {
      const chn::NetworkConfig config = load_validated(sweep_flags.config_path);
      chn::SweepSpec spec;
      spec.files = resolve_files(sweep_flags.files, config);
      spec.engine_analytic = sweep_flags.engine != "mc";
      spec.engine_mc = sweep_flags.engine != "analytic";
      spec.mc = sweep_flags.mc_options();
      spec.quadrature = sweep_flags.quad_options();

      int swept = 0;
      std::optional<RangeOrScalar> tau;
      if (!sweep_flags.tau_db.empty()) {
        tau = parse_range_or_scalar(sweep_flags.tau_db, "--tau-db");
        if (tau->is_range) ++swept;
      }
      if (!sweep_density_ratio.empty()) ++swept;
      if (!sweep_activity.empty()) ++swept;
      if (swept != 1) {
        throw chn::Error(chn::ErrorKind::DomainError,
                         "exactly one swept variable required: --tau-db start:stop:step, "
                         "--density-ratio, or --activity");
      }

      if (tau && tau->is_range) {
        spec.variable = chn::SweepVariable::TauDb;
        spec.grid = tau->grid;
      } else {
        if (!tau) {
          throw chn::Error(chn::ErrorKind::DomainError,
                           "a fixed --tau-db is required when sweeping another variable");
        }
        spec.fixed_tau_db = tau->scalar;
        if (!sweep_density_ratio.empty()) {
          const RangeOrScalar r = parse_range_or_scalar(sweep_density_ratio, "--density-ratio");
          if (!r.is_range) {
            throw chn::Error(chn::ErrorKind::DomainError,
                             "--density-ratio requires start:stop:step");
          }
          spec.variable = chn::SweepVariable::DensityRatio;
          spec.grid = r.grid;
        } else {
          const size_t colon = sweep_activity.find(':');
          if (colon == std::string::npos) {
            throw chn::Error(chn::ErrorKind::DomainError,
                             "--activity requires tier:start:stop:step");
          }
          spec.variable = chn::SweepVariable::Activity;
          spec.activity_tier = std::stoi(sweep_activity.substr(0, colon)) - 1;
          const RangeOrScalar r =
              parse_range_or_scalar(sweep_activity.substr(colon + 1), "--activity");
          if (!r.is_range) {
            throw chn::Error(chn::ErrorKind::DomainError,
                             "--activity requires tier:start:stop:step");
          }
          spec.grid = r.grid;
        }
      }

      const std::vector<chn::ResultRow> rows = chn::run_sweep(config, spec);
      write_output(chn::format_csv(rows), sweep_flags.out_path);
      return kExitOk;
    }

    if (simulate->parsed()) {
      const chn::NetworkConfig config = load_validated(sim_flags.config_path);
      const std::vector<int> files = resolve_files(sim_flags.files, config);
      const RangeOrScalar tau = parse_range_or_scalar(sim_flags.tau_db, "--tau-db");
      if (tau.is_range) {
        throw chn::Error(chn::ErrorKind::DomainError, "simulate takes a scalar --tau-db");
      }
      const double tau_linear = chn::db_to_linear(tau.scalar);
      std::vector<chn::ResultRow> rows;
      for (const int file : files) {
        const chn::McOptions mc = sim_flags.mc_options();
        const double cov_window =
            mc.window_radius > 0.0
                ? mc.window_radius
                : chn::default_window_radius(config, file, tau_linear, chn::WindowMetric::Coverage);
        const double del_window =
            mc.window_radius > 0.0
                ? mc.window_radius
                : chn::default_window_radius(config, file, tau_linear, chn::WindowMetric::Delay);
        const chn::McEstimate cov = chn::estimate_coverage(config, file, tau_linear, mc);
        const chn::McEstimate del = chn::estimate_delay(config, file, tau_linear, mc);
        chn::ResultRow row;
        row.sweep_var = "tau_db";
        row.sweep_value = tau.scalar;
        row.file = file + 1;
        row.engine = "mc";
        row.coverage = cov.mean;
        row.coverage_err = cov.std_error;
        row.delay = del.mean;
        row.delay_err = del.std_error;
        row.samples = mc.samples;
        row.seed = mc.seed;
        rows.push_back(std::move(row));
        std::cerr << "file " << file + 1 << ": window_radius=" << chn::format_value(cov_window)
                  << "/" << chn::format_value(del_window) << " (coverage/delay)"
                  << " used=" << cov.samples_used << " discarded=" << cov.samples_discarded
                  << " coverage_ci=[" << chn::format_value(cov.ci95_lo) << ","
                  << chn::format_value(cov.ci95_hi) << "]"
                  << " delay_ci=[" << chn::format_value(del.ci95_lo) << ","
                  << chn::format_value(del.ci95_hi) << "]"
                  << (del.heavy_tail ? " heavy_tail" : "") << " rng=" << chn::rng_algorithm()
                  << "\n";
      }
      write_output(chn::format_csv(rows), sim_flags.out_path);
      return kExitOk;
    }

    if (compare->parsed()) {
      const chn::NetworkConfig config = load_validated(cmp_flags.config_path);
      chn::CompareSpec spec;
      spec.files = resolve_files(cmp_flags.files, config);
      const RangeOrScalar tau = parse_range_or_scalar(cmp_flags.tau_db, "--tau-db");
      spec.tau_db_grid = tau.is_range ? tau.grid : chn::Grid{tau.scalar, tau.scalar, 1.0};
      spec.check_coverage = cmp_metric != "delay";
      spec.check_delay = cmp_metric != "coverage";
      spec.mc = cmp_flags.mc_options();
      spec.quadrature = cmp_flags.quad_options();
      const chn::CompareReport report = chn::run_compare(config, spec);
      write_output(chn::format_report(report), cmp_flags.out_path);
      return report.passed ? kExitOk : kExitComparisonFailure;
    }
  } catch (const chn::Error& e) {
    std::cerr << "error (" << chn::to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalFailure;
  }
  return kExitOk;
}
