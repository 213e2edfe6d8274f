#pragma once

#include <Eigen/Core>
#include <limits>
#include <vector>

#include "chn/model.hpp"
#include "chn/quadrature.hpp"

namespace chn {

// The four interference integral families. Rho1/Rho2 come from the coverage
// Laplace transforms (outside / inside the serving-distance circle); Rho3 and
// Rho4 are their reciprocal-expectation counterparts from the delay analysis
// and carry the activity probability inside the integrand.
enum class RhoKind { Rho1, Rho2, Rho3, Rho4 };

// A local-delay value: either a finite mean slot count >= 1, or infinite.
// `decided_numerically` is set when divergence was concluded by the
// quadrature fallback rather than the analytic pre-check (only possible for
// unequal pathloss exponents, where no closed convergence condition exists).
struct DelayValue {
  double value = 0.0;
  bool finite = true;
  bool decided_numerically = false;

  static DelayValue infinite(bool numeric = false) {
    return DelayValue{std::numeric_limits<double>::infinity(), false, numeric};
  }
  static DelayValue of(double v) { return DelayValue{v, true, false}; }
};

struct CoverageBreakdown {
  ArrayXd association;  // A_nk per tier, sums to 1 when the file is cached
  ArrayXd conditional;  // C_nk per tier (0 where the tier cannot serve)
  double total = 0.0;   // sum over tiers of A_nk * C_nk
  double abs_error_estimate = 0.0;
};

struct DelayBreakdown {
  ArrayXd association;
  std::vector<DelayValue> conditional;  // D_nk per tier
  DelayValue total;
  double abs_error_estimate = 0.0;
};

// Evaluates one rho integral. `activity` enters only Rho3/Rho4. Returns the
// value together with the quadrature error bound; Rho4 at activity = 1 is
// +infinity (the integrand behaves like u^{-alpha/2} at zero, which is not
// integrable for alpha > 2). Throws Error{DomainError} for alpha <= 2,
// tau <= 0, or activity outside [0,1].
IntegrationResult rho_integral(RhoKind kind, double alpha, double tau, double activity = 0.0,
                               const QuadratureOptions& opts = {});

double rho(RhoKind kind, double alpha, double tau, double activity = 0.0,
           const QuadratureOptions& opts = {});

// Probability that a user requesting `file` associates with `tier` under the
// max average received power rule, restricted to caching BSs. Closed form
// when all pathloss exponents are equal, quadrature otherwise.
double association_probability(const NetworkConfig& config, int file, int tier,
                               const QuadratureOptions& opts = {});

// Density of the serving distance conditioned on association with `tier`.
double serving_distance_pdf(const NetworkConfig& config, int file, int tier, double x,
                            const QuadratureOptions& opts = {});

// Conditional coverage probability C_nk given association with `tier`.
double coverage_tier(const NetworkConfig& config, int file, int tier, double tau,
                     const QuadratureOptions& opts = {});

// Total coverage probability with the per-tier breakdown. Each association-
// weighted term is computed as a single direct integral; the 1/A_nk inside
// the conditional coverage cancels against the A_nk weight, so small
// association probabilities are never divided by.
CoverageBreakdown coverage(const NetworkConfig& config, int file, double tau,
                           const QuadratureOptions& opts = {});

// Closed-form coverage for equal pathloss exponents (no outer quadrature).
// Throws Error{UnequalAlphas} when the exponents differ.
CoverageBreakdown coverage_equal_alpha(const NetworkConfig& config, int file, double tau,
                                       const QuadratureOptions& opts = {});

// Conditional local delay D_nk given association with `tier`.
DelayValue delay_tier(const NetworkConfig& config, int file, int tier, double tau,
                      const QuadratureOptions& opts = {});

// Total local delay with per-tier breakdown; infinite as soon as any tier
// with positive association probability has infinite conditional delay.
DelayBreakdown delay(const NetworkConfig& config, int file, double tau,
                     const QuadratureOptions& opts = {});

// Closed-form delay for equal pathloss exponents.
DelayValue delay_equal_alpha(const NetworkConfig& config, int file, double tau,
                             const QuadratureOptions& opts = {});

// Laplace transform factor of tier `tier`'s interference at the coverage
// integrand's argument, conditioned on association with `serving_tier` at
// distance `x`. The product over all tiers times the unnormalized serving
// distance density reconstructs the coverage integrand.
double interference_laplace(const NetworkConfig& config, int file, int serving_tier, int tier,
                            double x, double tau, const QuadratureOptions& opts = {});

// Expectation of the reciprocal Laplace factor (delay integrand); >= 1, and
// +infinity in the non-integrable regime (activity 1 with partial caching).
double reciprocal_laplace_expectation(const NetworkConfig& config, int file, int serving_tier,
                                      int tier, double x, double tau,
                                      const QuadratureOptions& opts = {});

}  // namespace chn
