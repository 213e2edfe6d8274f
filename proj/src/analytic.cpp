#include "chn/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_file(const NetworkConfig& config, int file) {
  if (file < 0 || file >= config.num_files) {
    throw Error(ErrorKind::IndexOutOfRange,
                "file index " + std::to_string(file + 1) + " out of range [1.." +
                    std::to_string(config.num_files) + "]");
  }
}

void check_tier(const NetworkConfig& config, int tier) {
  if (tier < 0 || tier >= config.num_tiers()) {
    throw Error(ErrorKind::IndexOutOfRange,
                "tier index " + std::to_string(tier + 1) + " out of range [1.." +
                    std::to_string(config.num_tiers()) + "]");
  }
}

void check_cached(const NetworkConfig& config, int file) {
  if (!config.file_cached_somewhere(file)) {
    throw Error(ErrorKind::FileUncached,
                "file " + std::to_string(file + 1) + " is cached in no tier");
  }
}

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorKind::DomainError, "SIR threshold must be positive and finite");
  }
}

// Per-query scalars pulled out of the config once.
struct Workspace {
  int num_tiers = 0;
  ArrayXd density;   // lambda_j
  ArrayXd power;     // P_j
  ArrayXd alpha;     // alpha_j
  ArrayXd activity;  // a_j
  ArrayXd p;         // p_{nj}
  ArrayXd q;         // 1 - p_{nj}
  bool equal_alpha = false;

  Workspace(const NetworkConfig& config, int file) {
    num_tiers = config.num_tiers();
    density.resize(num_tiers);
    power.resize(num_tiers);
    alpha.resize(num_tiers);
    activity.resize(num_tiers);
    p.resize(num_tiers);
    for (int j = 0; j < num_tiers; ++j) {
      const TierConfig& t = config.tiers[static_cast<size_t>(j)];
      density[j] = t.density;
      power[j] = t.tx_power;
      alpha[j] = t.pathloss_exponent;
      activity[j] = t.activity_prob;
      p[j] = t.caching_probs[file];
    }
    q = 1.0 - p;
    equal_alpha = equal_pathloss_exponents(config);
  }
};

// Rho values for every tier, computed once per evaluation call and reused
// across the outer integrals. Tiers sharing (alpha, activity) share the
// quadrature result.
struct RhoTable {
  std::vector<IntegrationResult> outer;  // Rho1 or Rho3
  std::vector<IntegrationResult> inner;  // Rho2 or Rho4

  static RhoTable coverage(const Workspace& ws, double tau, const QuadratureOptions& opts) {
    return build(ws, tau, opts, RhoKind::Rho1, RhoKind::Rho2, /*use_activity=*/false);
  }
  static RhoTable delay(const Workspace& ws, double tau, const QuadratureOptions& opts) {
    return build(ws, tau, opts, RhoKind::Rho3, RhoKind::Rho4, /*use_activity=*/true);
  }

 private:
  static RhoTable build(const Workspace& ws, double tau, const QuadratureOptions& opts,
                        RhoKind out_kind, RhoKind in_kind, bool use_activity) {
    RhoTable table;
    table.outer.resize(static_cast<size_t>(ws.num_tiers));
    table.inner.resize(static_cast<size_t>(ws.num_tiers));
    for (int j = 0; j < ws.num_tiers; ++j) {
      const double a = use_activity ? ws.activity[j] : 0.0;
      int reuse = -1;
      for (int i = 0; i < j; ++i) {
        const double ai = use_activity ? ws.activity[i] : 0.0;
        if (ws.alpha[i] == ws.alpha[j] && ai == a) { reuse = i; break; }
      }
      if (reuse >= 0) {
        table.outer[static_cast<size_t>(j)] = table.outer[static_cast<size_t>(reuse)];
        table.inner[static_cast<size_t>(j)] = table.inner[static_cast<size_t>(reuse)];
      } else {
        table.outer[static_cast<size_t>(j)] = rho_integral(out_kind, ws.alpha[j], tau, a, opts);
        table.inner[static_cast<size_t>(j)] = rho_integral(in_kind, ws.alpha[j], tau, a, opts);
      }
    }
    return table;
  }
};

// Coverage exponent coefficients p_j + a_j (rho1_j + q_j rho2_j), always
// finite and >= p_j.
struct ExponentCoeffs {
  ArrayXd value;  // beta_j
  ArrayXd error;  // propagated rho quadrature error bound on beta_j
  bool any_negative_infinity = false;
};

ExponentCoeffs coverage_coeffs(const Workspace& ws, const RhoTable& rho) {
  ExponentCoeffs c;
  c.value.resize(ws.num_tiers);
  c.error.resize(ws.num_tiers);
  for (int j = 0; j < ws.num_tiers; ++j) {
    const auto& r1 = rho.outer[static_cast<size_t>(j)];
    const auto& r2 = rho.inner[static_cast<size_t>(j)];
    c.value[j] = ws.p[j] + ws.activity[j] * (r1.value + ws.q[j] * r2.value);
    c.error[j] = ws.activity[j] * (r1.abs_error_estimate + ws.q[j] * r2.abs_error_estimate);
  }
  return c;
}

// Delay exponent coefficients p_j - a_j (rho3_j + q_j rho4_j). A tier with
// rho4 = inf (activity exactly 1) and q_j > 0 drives every serving tier's
// delay to infinity; that is recorded as -inf here.
ExponentCoeffs delay_coeffs(const Workspace& ws, const RhoTable& rho) {
  ExponentCoeffs c;
  c.value.resize(ws.num_tiers);
  c.error.resize(ws.num_tiers);
  for (int j = 0; j < ws.num_tiers; ++j) {
    const auto& r3 = rho.outer[static_cast<size_t>(j)];
    const auto& r4 = rho.inner[static_cast<size_t>(j)];
    if (std::isinf(r4.value) && ws.q[j] > 0.0 && ws.activity[j] > 0.0) {
      c.value[j] = -kInf;
      c.error[j] = 0.0;
      c.any_negative_infinity = true;
      continue;
    }
    const double inner_term = ws.q[j] > 0.0 ? ws.q[j] * r4.value : 0.0;
    c.value[j] = ws.p[j] - ws.activity[j] * (r3.value + inner_term);
    c.error[j] = ws.activity[j] *
                 (r3.abs_error_estimate + (ws.q[j] > 0.0 ? ws.q[j] * r4.abs_error_estimate : 0.0));
  }
  return c;
}

// Geometry of the exponent for serving tier k: the term of tier j carries
// weight lambda_j * (P_j/P_k)^{2/alpha_j} and distance exponent
// 2 alpha_k / alpha_j.
struct ServingGeometry {
  ArrayXd weight;
  ArrayXd exponent;
};

ServingGeometry serving_geometry(const Workspace& ws, int k) {
  ServingGeometry g;
  g.weight.resize(ws.num_tiers);
  g.exponent.resize(ws.num_tiers);
  for (int j = 0; j < ws.num_tiers; ++j) {
    g.weight[j] = ws.density[j] * std::pow(ws.power[j] / ws.power[k], 2.0 / ws.alpha[j]);
    g.exponent[j] = 2.0 * ws.alpha[k] / ws.alpha[j];
  }
  return g;
}

struct OuterResult {
  double value = 0.0;
  double error = 0.0;
};

// Evaluates T = 2 pi prefactor * Int_0^inf x exp(-pi sum_j c_j x^{e_j}) dx.
//
// The integration variable is rescaled by the association-exponent length
// scale so the adaptive rule always sees the peak; for equal exponents the
// substitution t = x^2 turns the integrand into a pure exponential.
// `assoc_coeffs` are the (all positive for the serving tier) coefficients of
// the serving-distance density used to pick that scale.
OuterResult outer_integral(double prefactor, const ArrayXd& coeffs, const ArrayXd& exponents,
                           const ArrayXd& assoc_coeffs, bool equal_alpha,
                           const QuadratureOptions& opts) {
  constexpr double pi = 3.14159265358979323846;
  if (equal_alpha) {
    const double scale_sq = 1.0 / (pi * assoc_coeffs.sum());
    const double rate = pi * coeffs.sum() * scale_sq;
    auto integrand = [rate](double t) { return std::exp(-rate * t); };
    IntegrationResult r;
    try {
      r = integrate_semi_infinite(integrand, 0.0, opts);
    } catch (const Error& e) {
      // rate > 0 proves convergence analytically; a conservative divergence
      // verdict or budget exhaustion here just means the decay is much
      // slower than the association scale, so integrate in units of 1/rate.
      if (rate <= 0.0 ||
          (e.kind() != ErrorKind::DivergenceSuspected && e.kind() != ErrorKind::NoConvergence)) {
        throw;
      }
      auto unit = [](double y) { return std::exp(-y); };
      r = integrate_semi_infinite(unit, 0.0, opts);
      r.value /= rate;
      r.abs_error_estimate /= rate;
    }
    const double factor = pi * prefactor * scale_sq;
    return OuterResult{factor * r.value, factor * r.abs_error_estimate};
  }

  // Mixed exponents: integrate in the (rescaled) distance itself.
  double scale = kInf;
  for (Index j = 0; j < assoc_coeffs.size(); ++j) {
    if (assoc_coeffs[j] > 0.0) {
      scale = std::min(scale, std::pow(1.0 / (pi * assoc_coeffs[j]), 1.0 / exponents[j]));
    }
  }
  if (!std::isfinite(scale)) scale = 1.0;

  ArrayXd scaled = coeffs;
  for (Index j = 0; j < scaled.size(); ++j) {
    scaled[j] = pi * coeffs[j] * std::pow(scale, exponents[j]);
  }
  auto integrand = [&scaled, &exponents](double y) {
    double arg = 0.0;
    for (Index j = 0; j < scaled.size(); ++j) arg += scaled[j] * std::pow(y, exponents[j]);
    return y * std::exp(-arg);
  };

  const bool provably_convergent = (coeffs >= 0.0).all() && (coeffs > 0.0).any();
  IntegrationResult r;
  try {
    r = integrate_semi_infinite(integrand, 0.0, opts);
  } catch (const Error& e) {
    if (!provably_convergent ||
        (e.kind() != ErrorKind::DivergenceSuspected && e.kind() != ErrorKind::NoConvergence)) {
      throw;
    }
    // Retry in units of the slowest-decaying term.
    double slow = 0.0;
    for (Index j = 0; j < coeffs.size(); ++j) {
      if (coeffs[j] > 0.0) {
        slow = std::max(slow, std::pow(1.0 / (pi * coeffs[j]), 1.0 / exponents[j]));
      }
    }
    const double ratio = slow / scale;
    ArrayXd rescaled = scaled;
    for (Index j = 0; j < rescaled.size(); ++j) {
      rescaled[j] = scaled[j] * std::pow(ratio, exponents[j]);
    }
    auto slow_integrand = [&rescaled, &exponents](double y) {
      double arg = 0.0;
      for (Index j = 0; j < rescaled.size(); ++j) arg += rescaled[j] * std::pow(y, exponents[j]);
      return y * std::exp(-arg);
    };
    r = integrate_semi_infinite(slow_integrand, 0.0, opts);
    r.value *= ratio * ratio;
    r.abs_error_estimate *= ratio * ratio;
  }
  const double factor = 2.0 * pi * prefactor * scale * scale;
  return OuterResult{factor * r.value, factor * r.abs_error_estimate};
}

// Association-weighted coverage term A_nk * C_nk as one direct integral.
OuterResult coverage_term(const Workspace& ws, int k, const ExponentCoeffs& beta,
                          const QuadratureOptions& opts) {
  const ServingGeometry g = serving_geometry(ws, k);
  const ArrayXd coeffs = g.weight * beta.value;
  const ArrayXd assoc = g.weight * ws.p;
  return outer_integral(ws.p[k] * ws.density[k], coeffs, g.exponent, assoc, ws.equal_alpha, opts);
}

double association_closed_form(const Workspace& ws, int k) {
  // Equal exponents: A_nk = p_nk lambda_k P_k^{2/alpha} / sum_j p_nj lambda_j P_j^{2/alpha}.
  const double expo = 2.0 / ws.alpha[0];
  double denom = 0.0;
  for (int j = 0; j < ws.num_tiers; ++j) {
    denom += ws.p[j] * ws.density[j] * std::pow(ws.power[j], expo);
  }
  return ws.p[k] * ws.density[k] * std::pow(ws.power[k], expo) / denom;
}

double association_general(const Workspace& ws, int k, const QuadratureOptions& opts) {
  if (ws.p[k] == 0.0) return 0.0;
  if (ws.equal_alpha) return association_closed_form(ws, k);
  const ServingGeometry g = serving_geometry(ws, k);
  const ArrayXd assoc = g.weight * ws.p;
  return outer_integral(ws.p[k] * ws.density[k], assoc, g.exponent, assoc, false, opts).value;
}

// Delay term A_nk * D_nk: returns a finite integral result or an infinity
// verdict. The finiteness decision is two-staged: analytic pre-check first
// (any -inf coefficient, or a nonpositive coefficient sum within the
// propagated rho error bound, proves divergence; all-nonnegative
// coefficients with positive sum prove convergence), then quadrature with
// DivergenceSuspected as the fallback verdict for mixed-sign coefficients
// under unequal pathloss exponents.
struct DelayTerm {
  bool finite = true;
  bool decided_numerically = false;
  OuterResult integral;
};

DelayTerm delay_term(const Workspace& ws, int k, const ExponentCoeffs& beta,
                     const QuadratureOptions& opts) {
  DelayTerm term;
  if (beta.any_negative_infinity) {
    term.finite = false;
    return term;
  }
  const ServingGeometry g = serving_geometry(ws, k);
  const ArrayXd coeffs = g.weight * beta.value;
  const ArrayXd cerr = g.weight * beta.error;
  const ArrayXd assoc = g.weight * ws.p;

  if (ws.equal_alpha) {
    // The integrand reduces to exp(-pi sum(c) x^2); divergence iff the sum is
    // nonpositive. Sums within the rho error bound of zero are treated as
    // divergent so the verdict cannot flip on quadrature noise right at the
    // phase boundary.
    if (coeffs.sum() <= cerr.sum()) {
      term.finite = false;
      return term;
    }
    term.integral = outer_integral(ws.p[k] * ws.density[k], coeffs, g.exponent, assoc, true, opts);
    return term;
  }

  const bool all_nonpositive = (coeffs <= cerr).all();
  if (all_nonpositive) {
    // Integrand is bounded below by 2 pi p lambda x: divergent.
    term.finite = false;
    return term;
  }
  const bool any_negative = (coeffs < 0.0).any();
  try {
    term.integral =
        outer_integral(ws.p[k] * ws.density[k], coeffs, g.exponent, assoc, false, opts);
  } catch (const Error& e) {
    if (any_negative && e.kind() == ErrorKind::DivergenceSuspected) {
      term.finite = false;
      term.decided_numerically = true;
      return term;
    }
    throw;
  }
  return term;
}

}  // namespace

IntegrationResult rho_integral(RhoKind kind, double alpha, double tau, double activity,
                               const QuadratureOptions& opts) {
  if (!(alpha > 2.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::DomainError,
                "pathloss exponent must exceed 2, got " + std::to_string(alpha));
  }
  check_tau(tau);
  const bool delay_kind = kind == RhoKind::Rho3 || kind == RhoKind::Rho4;
  if (delay_kind && !(activity >= 0.0 && activity <= 1.0)) {
    throw Error(ErrorKind::DomainError,
                "activity probability must lie in [0,1], got " + std::to_string(activity));
  }

  const double half_alpha = 0.5 * alpha;
  const double prefactor = std::pow(tau, 2.0 / alpha);
  const double limit = std::pow(tau, -2.0 / alpha);
  const double floor = delay_kind ? 1.0 - activity : 1.0;

  if (kind == RhoKind::Rho4 && activity == 1.0) {
    // Integrand u^{-alpha/2} near zero is non-integrable for alpha > 2.
    return IntegrationResult{kInf, 0.0, 0};
  }

  auto integrand = [half_alpha, floor](double u) {
    return 1.0 / (floor + std::pow(u, half_alpha));
  };

  IntegrationResult r;
  switch (kind) {
    case RhoKind::Rho1:
    case RhoKind::Rho3:
      r = integrate_semi_infinite(integrand, limit, opts);
      break;
    case RhoKind::Rho2:
    case RhoKind::Rho4:
      r = integrate_finite(integrand, 0.0, limit, opts);
      break;
  }
  r.value *= prefactor;
  r.abs_error_estimate *= prefactor;
  return r;
}

double rho(RhoKind kind, double alpha, double tau, double activity,
           const QuadratureOptions& opts) {
  return rho_integral(kind, alpha, tau, activity, opts).value;
}

double association_probability(const NetworkConfig& config, int file, int tier,
                               const QuadratureOptions& opts) {
  check_file(config, file);
  check_tier(config, tier);
  check_cached(config, file);
  const Workspace ws(config, file);
  return association_general(ws, tier, opts);
}

double serving_distance_pdf(const NetworkConfig& config, int file, int tier, double x,
                            const QuadratureOptions& opts) {
  check_file(config, file);
  check_tier(config, tier);
  check_cached(config, file);
  if (x < 0.0) throw Error(ErrorKind::DomainError, "distance must be nonnegative");
  const Workspace ws(config, file);
  if (ws.p[tier] == 0.0) {
    throw Error(ErrorKind::ZeroAssociationProbability,
                "tier " + std::to_string(tier + 1) + " does not cache file " +
                    std::to_string(file + 1));
  }
  const double a_nk = association_general(ws, tier, opts);
  const ServingGeometry g = serving_geometry(ws, tier);
  constexpr double pi = 3.14159265358979323846;
  double arg = 0.0;
  for (int j = 0; j < ws.num_tiers; ++j) {
    arg += g.weight[j] * ws.p[j] * std::pow(x, g.exponent[j]);
  }
  return 2.0 * pi * ws.p[tier] * ws.density[tier] * x * std::exp(-pi * arg) / a_nk;
}

double coverage_tier(const NetworkConfig& config, int file, int tier, double tau,
                     const QuadratureOptions& opts) {
  check_file(config, file);
  check_tier(config, tier);
  check_cached(config, file);
  check_tau(tau);
  const Workspace ws(config, file);
  if (ws.p[tier] == 0.0) {
    throw Error(ErrorKind::ZeroAssociationProbability,
                "tier " + std::to_string(tier + 1) + " does not cache file " +
                    std::to_string(file + 1));
  }
  const RhoTable rho = RhoTable::coverage(ws, tau, opts);
  const ExponentCoeffs beta = coverage_coeffs(ws, rho);
  const double term = coverage_term(ws, tier, beta, opts).value;
  const double a_nk = association_general(ws, tier, opts);
  return std::clamp(term / a_nk, 0.0, 1.0);
}

CoverageBreakdown coverage(const NetworkConfig& config, int file, double tau,
                           const QuadratureOptions& opts) {
  check_file(config, file);
  check_cached(config, file);
  check_tau(tau);
  const Workspace ws(config, file);
  const RhoTable rho = RhoTable::coverage(ws, tau, opts);
  const ExponentCoeffs beta = coverage_coeffs(ws, rho);

  CoverageBreakdown out;
  out.association = ArrayXd::Zero(ws.num_tiers);
  out.conditional = ArrayXd::Zero(ws.num_tiers);
  double total = 0.0;
  double error = 0.0;
  for (int k = 0; k < ws.num_tiers; ++k) {
    if (ws.p[k] == 0.0) continue;
    const OuterResult term = coverage_term(ws, k, beta, opts);
    const double a_nk = association_general(ws, k, opts);
    out.association[k] = a_nk;
    out.conditional[k] = std::clamp(term.value / a_nk, 0.0, 1.0);
    total += term.value;
    error += term.error;
  }
  out.total = std::clamp(total, 0.0, 1.0);
  out.abs_error_estimate = error;
  return out;
}

CoverageBreakdown coverage_equal_alpha(const NetworkConfig& config, int file, double tau,
                                       const QuadratureOptions& opts) {
  check_file(config, file);
  check_cached(config, file);
  check_tau(tau);
  if (!equal_pathloss_exponents(config)) {
    throw Error(ErrorKind::UnequalAlphas,
                "coverage_equal_alpha requires one shared pathloss exponent");
  }
  const Workspace ws(config, file);
  const RhoTable rho = RhoTable::coverage(ws, tau, opts);
  const ExponentCoeffs beta = coverage_coeffs(ws, rho);

  const double expo = 2.0 / ws.alpha[0];
  double denom = 0.0;
  double denom_err = 0.0;
  for (int j = 0; j < ws.num_tiers; ++j) {
    const double w = ws.density[j] * std::pow(ws.power[j], expo);
    denom += w * beta.value[j];
    denom_err += w * beta.error[j];
  }

  CoverageBreakdown out;
  out.association = ArrayXd::Zero(ws.num_tiers);
  out.conditional = ArrayXd::Zero(ws.num_tiers);
  double total = 0.0;
  for (int k = 0; k < ws.num_tiers; ++k) {
    if (ws.p[k] == 0.0) continue;
    const double term = ws.p[k] * ws.density[k] * std::pow(ws.power[k], expo) / denom;
    out.association[k] = association_closed_form(ws, k);
    out.conditional[k] = std::clamp(term / out.association[k], 0.0, 1.0);
    total += term;
  }
  out.total = std::clamp(total, 0.0, 1.0);
  out.abs_error_estimate = total * (denom_err / denom);
  return out;
}

DelayValue delay_tier(const NetworkConfig& config, int file, int tier, double tau,
                      const QuadratureOptions& opts) {
  check_file(config, file);
  check_tier(config, tier);
  check_cached(config, file);
  check_tau(tau);
  const Workspace ws(config, file);
  if (ws.p[tier] == 0.0) {
    throw Error(ErrorKind::ZeroAssociationProbability,
                "tier " + std::to_string(tier + 1) + " does not cache file " +
                    std::to_string(file + 1));
  }
  const RhoTable rho = RhoTable::delay(ws, tau, opts);
  const ExponentCoeffs beta = delay_coeffs(ws, rho);
  const DelayTerm term = delay_term(ws, tier, beta, opts);
  if (!term.finite) return DelayValue::infinite(term.decided_numerically);
  const double a_nk = association_general(ws, tier, opts);
  return DelayValue::of(std::max(1.0, term.integral.value / a_nk));
}

DelayBreakdown delay(const NetworkConfig& config, int file, double tau,
                     const QuadratureOptions& opts) {
  check_file(config, file);
  check_cached(config, file);
  check_tau(tau);
  const Workspace ws(config, file);
  const RhoTable rho = RhoTable::delay(ws, tau, opts);
  const ExponentCoeffs beta = delay_coeffs(ws, rho);

  DelayBreakdown out;
  out.association = ArrayXd::Zero(ws.num_tiers);
  out.conditional.assign(static_cast<size_t>(ws.num_tiers), DelayValue::of(0.0));
  double total = 0.0;
  double error = 0.0;
  bool total_finite = true;
  bool numeric = false;
  for (int k = 0; k < ws.num_tiers; ++k) {
    if (ws.p[k] == 0.0) continue;
    const double a_nk = association_general(ws, k, opts);
    out.association[k] = a_nk;
    const DelayTerm term = delay_term(ws, k, beta, opts);
    if (!term.finite) {
      out.conditional[static_cast<size_t>(k)] = DelayValue::infinite(term.decided_numerically);
      total_finite = false;
      numeric = numeric || term.decided_numerically;
      continue;
    }
    out.conditional[static_cast<size_t>(k)] =
        DelayValue::of(std::max(1.0, term.integral.value / a_nk));
    total += term.integral.value;
    error += term.integral.error;
  }
  out.total = total_finite ? DelayValue::of(std::max(1.0, total)) : DelayValue::infinite(numeric);
  out.abs_error_estimate = error;
  return out;
}

DelayValue delay_equal_alpha(const NetworkConfig& config, int file, double tau,
                             const QuadratureOptions& opts) {
  check_file(config, file);
  check_cached(config, file);
  check_tau(tau);
  if (!equal_pathloss_exponents(config)) {
    throw Error(ErrorKind::UnequalAlphas,
                "delay_equal_alpha requires one shared pathloss exponent");
  }
  const Workspace ws(config, file);
  const RhoTable rho = RhoTable::delay(ws, tau, opts);
  const ExponentCoeffs beta = delay_coeffs(ws, rho);
  if (beta.any_negative_infinity) return DelayValue::infinite();

  const double expo = 2.0 / ws.alpha[0];
  double denom = 0.0;
  double denom_err = 0.0;
  for (int j = 0; j < ws.num_tiers; ++j) {
    const double w = ws.density[j] * std::pow(ws.power[j], expo);
    denom += w * beta.value[j];
    denom_err += w * beta.error[j];
  }
  // Same boundary rule as the general path: a denominator within the rho
  // error bound of zero counts as nonpositive.
  if (denom <= denom_err) return DelayValue::infinite();

  double total = 0.0;
  for (int k = 0; k < ws.num_tiers; ++k) {
    if (ws.p[k] == 0.0) continue;
    total += ws.p[k] * ws.density[k] * std::pow(ws.power[k], expo) / denom;
  }
  return DelayValue::of(std::max(1.0, total));
}

double interference_laplace(const NetworkConfig& config, int file, int serving_tier, int tier,
                            double x, double tau, const QuadratureOptions& opts) {
  check_file(config, file);
  check_tier(config, serving_tier);
  check_tier(config, tier);
  check_tau(tau);
  if (x < 0.0) throw Error(ErrorKind::DomainError, "distance must be nonnegative");
  const Workspace ws(config, file);
  const ServingGeometry g = serving_geometry(ws, serving_tier);
  const int j = tier;
  const IntegrationResult r1 = rho_integral(RhoKind::Rho1, ws.alpha[j], tau, 0.0, opts);
  const IntegrationResult r2 = rho_integral(RhoKind::Rho2, ws.alpha[j], tau, 0.0, opts);
  constexpr double pi = 3.14159265358979323846;
  const double arg = pi * g.weight[j] * ws.activity[j] * std::pow(x, g.exponent[j]) *
                     (r1.value + ws.q[j] * r2.value);
  return std::exp(-arg);
}

double reciprocal_laplace_expectation(const NetworkConfig& config, int file, int serving_tier,
                                      int tier, double x, double tau,
                                      const QuadratureOptions& opts) {
  check_file(config, file);
  check_tier(config, serving_tier);
  check_tier(config, tier);
  check_tau(tau);
  if (x < 0.0) throw Error(ErrorKind::DomainError, "distance must be nonnegative");
  if (x == 0.0) return 1.0;
  const Workspace ws(config, file);
  const ServingGeometry g = serving_geometry(ws, serving_tier);
  const int j = tier;
  if (ws.activity[j] == 0.0) return 1.0;
  const IntegrationResult r3 = rho_integral(RhoKind::Rho3, ws.alpha[j], tau, ws.activity[j], opts);
  const IntegrationResult r4 = rho_integral(RhoKind::Rho4, ws.alpha[j], tau, ws.activity[j], opts);
  if (std::isinf(r4.value) && ws.q[j] > 0.0) return kInf;
  const double inner = ws.q[j] > 0.0 ? ws.q[j] * r4.value : 0.0;
  constexpr double pi = 3.14159265358979323846;
  const double arg = pi * g.weight[j] * ws.activity[j] * std::pow(x, g.exponent[j]) *
                     (r3.value + inner);
  return std::exp(arg);
}

}  // namespace chn
