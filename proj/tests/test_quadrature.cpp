#include <doctest.h>

#include <cmath>
#include <vector>

#include "chn/quadrature.hpp"

using chn::Error;
using chn::ErrorKind;
using chn::IntegrationResult;
using chn::QuadratureOptions;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("finite integrals from closed-form antiderivatives") {
  auto runge = [](double u) { return 1.0 / (1.0 + u * u); };
  const IntegrationResult r = chn::integrate_finite(runge, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(kPi / 4.0).epsilon(1e-12));
  CHECK(r.evaluations >= 1);
  CHECK(r.abs_error_estimate >= 0.0);

  auto constant = [](double) { return 1.0; };
  CHECK(chn::integrate_finite(constant, 0.0, 3.0).value == doctest::Approx(3.0).epsilon(1e-14));

  // Integrable endpoint singularity: nodes never touch the endpoints.
  auto inv_sqrt = [](double u) { return 1.0 / std::sqrt(u); };
  CHECK(chn::integrate_finite(inv_sqrt, 0.0, 1.0).value == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("semi-infinite integrals") {
  auto decay = [](double u) { return std::exp(-u); };
  CHECK(chn::integrate_semi_infinite(decay, 0.0).value == doctest::Approx(1.0).epsilon(1e-12));

  auto runge = [](double u) { return 1.0 / (1.0 + u * u); };
  CHECK(chn::integrate_semi_infinite(runge, 1.0).value ==
        doctest::Approx(kPi / 4.0).epsilon(1e-12));
}

TEST_CASE("divergent tails are flagged, not silently summed") {
  auto harmonic = [](double u) { return 1.0 / u; };
  try {
    chn::integrate_semi_infinite(harmonic, 1.0);
    FAIL("expected DivergenceSuspected");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivergenceSuspected);
  }

  // Slowly divergent algebraic tail.
  auto slow = [](double u) { return std::pow(u, -0.9); };
  try {
    chn::integrate_semi_infinite(slow, 1.0);
    FAIL("expected DivergenceSuspected");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivergenceSuspected);
  }

  // Exponential growth overflows the mapped integrand; same verdict.
  auto exploding = [](double u) { return std::exp(u); };
  try {
    chn::integrate_semi_infinite(exploding, 0.0);
    FAIL("expected DivergenceSuspected");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivergenceSuspected);
  }
}

TEST_CASE("non-finite integrand values raise NonFiniteEvaluation") {
  auto bad = [](double u) { return u < 0.5 ? std::nan("") : 1.0; };
  try {
    chn::integrate_finite(bad, 0.0, 1.0);
    FAIL("expected NonFiniteEvaluation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteEvaluation);
  }
}

TEST_CASE("evaluation budget exhaustion raises NoConvergence") {
  QuadratureOptions opts;
  opts.abs_tol = 1e-16;
  opts.rel_tol = 1e-16;
  opts.max_evaluations = 60;
  auto wiggly = [](double u) { return std::sin(50.0 * u) / (1.0 + u * u) + 1.0 / std::sqrt(u); };
  try {
    chn::integrate_finite(wiggly, 0.0, 1.0, opts);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoConvergence);
  }
}

TEST_CASE("linearity within reported error bounds") {
  auto base = [](double u) { return std::exp(-u) * std::cos(3.0 * u); };
  const IntegrationResult ref = chn::integrate_semi_infinite(base, 0.0);
  for (const double c : {-2.0, 0.5, 10.0}) {
    auto scaled = [c, &base](double u) { return c * base(u); };
    const IntegrationResult r = chn::integrate_semi_infinite(scaled, 0.0);
    CHECK(r.value == doctest::Approx(c * ref.value)
                         .epsilon(1e-10)
                         .scale(std::abs(c) * std::abs(ref.value) + 1.0));
  }
}

TEST_CASE("additivity across a split point") {
  auto f = [](double u) { return std::exp(-u * u) * (2.0 + std::sin(u)); };
  const IntegrationResult whole = chn::integrate_finite(f, 0.0, 5.0);
  const IntegrationResult left = chn::integrate_finite(f, 0.0, 1.7);
  const IntegrationResult right = chn::integrate_finite(f, 1.7, 5.0);
  const double bound = whole.abs_error_estimate + left.abs_error_estimate +
                       right.abs_error_estimate + 1e-13;
  CHECK(std::abs(whole.value - (left.value + right.value)) <= bound);
}

TEST_CASE("known-integral battery achieves 10x requested tolerance") {
  QuadratureOptions opts;
  opts.abs_tol = 1e-10;
  opts.rel_tol = 1e-8;

  struct Case {
    const char* name;
    double exact;
    double value;
  };
  std::vector<Case> cases;

  cases.push_back({"int_0^1 1/(1+u^2) = pi/4", kPi / 4.0,
                   chn::integrate_finite([](double u) { return 1.0 / (1.0 + u * u); }, 0.0, 1.0,
                                         opts)
                       .value});
  cases.push_back({"int_0^1 u^-1/2 = 2", 2.0,
                   chn::integrate_finite([](double u) { return 1.0 / std::sqrt(u); }, 0.0, 1.0,
                                         opts)
                       .value});
  cases.push_back({"int_0^pi sin = 2", 2.0,
                   chn::integrate_finite([](double u) { return std::sin(u); }, 0.0, kPi, opts)
                       .value});
  cases.push_back({"int_0^1 log(u) = -1", -1.0,
                   chn::integrate_finite([](double u) { return std::log(u); }, 0.0, 1.0, opts)
                       .value});
  cases.push_back({"int_0^2 u^3 = 4", 4.0,
                   chn::integrate_finite([](double u) { return u * u * u; }, 0.0, 2.0, opts)
                       .value});
  cases.push_back({"int_0^inf e^-u = 1", 1.0,
                   chn::integrate_semi_infinite([](double u) { return std::exp(-u); }, 0.0, opts)
                       .value});
  cases.push_back({"int_0^inf u e^-u^2 = 1/2", 0.5,
                   chn::integrate_semi_infinite([](double u) { return u * std::exp(-u * u); },
                                                0.0, opts)
                       .value});
  cases.push_back({"int_1^inf u^-2 = 1", 1.0,
                   chn::integrate_semi_infinite([](double u) { return 1.0 / (u * u); }, 1.0, opts)
                       .value});
  cases.push_back({"int_0^inf 1/(1+u^2) = pi/2", kPi / 2.0,
                   chn::integrate_semi_infinite([](double u) { return 1.0 / (1.0 + u * u); }, 0.0,
                                                opts)
                       .value});
  cases.push_back({"int_0^inf e^-u cos(u) = 1/2", 0.5,
                   chn::integrate_semi_infinite(
                       [](double u) { return std::exp(-u) * std::cos(u); }, 0.0, opts)
                       .value});

  for (const Case& c : cases) {
    INFO(c.name);
    const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(c.exact));
    CHECK(std::abs(c.value - c.exact) <= 10.0 * tol);
  }
}
