#include <doctest.h>

#include <algorithm>

#include "chn/model.hpp"

using chn::NetworkConfig;
using chn::TierConfig;
using chn::Violation;
using chn::ViolationKind;

namespace {

// The two-tier setup used throughout: P2 = 0.1, P1 = 100 P2, lambda1 = 1,
// alpha = 4, unit caches.
NetworkConfig two_tier(double lambda2, Eigen::ArrayXd tier1_probs, Eigen::ArrayXd tier2_probs,
                       double a1 = 1.0, double a2 = 1.0) {
  NetworkConfig config;
  config.num_files = static_cast<int>(tier1_probs.size());
  config.tiers.push_back(TierConfig{1.0, 10.0, 4.0, a1, std::move(tier1_probs), 1.0});
  config.tiers.push_back(TierConfig{lambda2, 0.1, 4.0, a2, std::move(tier2_probs), 1.0});
  return config;
}

Eigen::ArrayXd probs(std::initializer_list<double> values) {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) out[i++] = v;
  return out;
}

bool has_violation(const std::vector<Violation>& violations, ViolationKind kind) {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

}  // namespace

TEST_CASE("the reference two-tier DS config validates cleanly") {
  const NetworkConfig config = two_tier(1.0, probs({0.5, 0.5}), probs({0.2, 0.8}));
  CHECK(chn::validate_network(config).empty());
}

TEST_CASE("violations are collected, not reported first-only") {
  NetworkConfig config = two_tier(1.0, probs({0.3, 0.6}), probs({0.2, 0.8}));
  config.tiers[0].pathloss_exponent = 2.0;  // boundary of the convergence condition
  config.tiers[1].density = -1.0;
  const std::vector<Violation> violations = chn::validate_network(config);
  CHECK(has_violation(violations, ViolationKind::CacheSizeMismatch));  // 0.3 + 0.6 != 1
  CHECK(has_violation(violations, ViolationKind::PathlossTooSmall));
  CHECK(has_violation(violations, ViolationKind::NonPositiveDensity));
  CHECK(violations.size() >= 3);
}

TEST_CASE("cache size tolerance is 1e-9 absolute") {
  NetworkConfig config = two_tier(1.0, probs({0.5, 0.5}), probs({0.2, 0.8}));
  config.tiers[0].caching_probs[0] = 0.5 + 5e-10;  // inside tolerance
  CHECK(chn::validate_network(config).empty());
  config.tiers[0].caching_probs[0] = 0.5 + 5e-9;  // outside
  CHECK(has_violation(chn::validate_network(config), ViolationKind::CacheSizeMismatch));
}

TEST_CASE("per-field violations") {
  NetworkConfig config = two_tier(1.0, probs({0.5, 0.5}), probs({0.2, 0.8}));

  SUBCASE("caching probability out of range") {
    config.tiers[1].caching_probs[0] = 1.2;
    config.tiers[1].cache_size = 2.0;
    CHECK(has_violation(chn::validate_network(config), ViolationKind::CachingProbOutOfRange));
  }
  SUBCASE("dimension mismatch") {
    config.num_files = 3;
    CHECK(has_violation(chn::validate_network(config), ViolationKind::DimensionMismatch));
  }
  SUBCASE("activity outside [0,1]") {
    config.tiers[0].activity_prob = 1.5;
    CHECK(has_violation(chn::validate_network(config), ViolationKind::ActivityOutOfRange));
  }
  SUBCASE("nonpositive power") {
    config.tiers[0].tx_power = 0.0;
    CHECK(has_violation(chn::validate_network(config), ViolationKind::NonPositiveTxPower));
  }
  SUBCASE("empty network") {
    config.tiers.clear();
    CHECK(has_violation(chn::validate_network(config), ViolationKind::EmptyNetwork));
  }
}

TEST_CASE("a file cached nowhere is legal input") {
  // p = 0 everywhere for file 1 is a valid placement; queries on it fail
  // later with FileUncached, not here.
  const NetworkConfig config = two_tier(1.0, probs({0.0, 1.0}), probs({0.0, 1.0}));
  CHECK(chn::validate_network(config).empty());
  CHECK_FALSE(config.file_cached_somewhere(0));
  CHECK(config.file_cached_somewhere(1));
}

TEST_CASE("validation is idempotent") {
  const NetworkConfig config = two_tier(4.0, probs({0.2, 0.8}), probs({0.2, 0.8}));
  const NetworkConfig validated = chn::require_valid(config);
  CHECK(chn::validate_network(validated).empty());
  const NetworkConfig again = chn::require_valid(validated);
  CHECK(chn::to_json(again) == chn::to_json(validated));
}

TEST_CASE("thinned density") {
  const NetworkConfig config = two_tier(4.0, probs({0.5, 0.5}), probs({0.2, 0.8}));
  CHECK(chn::thinned_density(config, 1, 0) == doctest::Approx(0.2 * 4.0).epsilon(1e-15));
  CHECK(chn::thinned_density(config, 0, 1) == doctest::Approx(0.5).epsilon(1e-15));

  NetworkConfig degenerate = two_tier(4.0, probs({0.0, 1.0}), probs({1.0, 0.0}));
  CHECK(chn::thinned_density(degenerate, 0, 0) == 0.0);   // p = 0: empty thinning
  CHECK(chn::thinned_density(degenerate, 1, 0) == 4.0);   // p = 1: no thinning

  CHECK_THROWS_AS(chn::thinned_density(config, 2, 0), chn::Error);
  CHECK_THROWS_AS(chn::thinned_density(config, 0, 5), chn::Error);

  // Thinning never exceeds the parent density.
  for (int j = 0; j < config.num_tiers(); ++j) {
    for (int m = 0; m < config.num_files; ++m) {
      CHECK(chn::thinned_density(config, j, m) <= config.tiers[j].density);
    }
  }
}

TEST_CASE("JSON round-trip is bit-exact") {
  NetworkConfig config = two_tier(4.0, probs({0.2, 0.8}), probs({0.1, 0.9}), 0.37, 1.0);
  config.tiers[0].tx_power = 0.1 + 0.2;  // not exactly representable as a short decimal
  const std::string text = chn::to_json(config);
  const NetworkConfig parsed = chn::load_network_json(text);
  REQUIRE(parsed.num_tiers() == config.num_tiers());
  CHECK(parsed.num_files == config.num_files);
  for (int j = 0; j < config.num_tiers(); ++j) {
    CHECK(parsed.tiers[j].density == config.tiers[j].density);
    CHECK(parsed.tiers[j].tx_power == config.tiers[j].tx_power);
    CHECK(parsed.tiers[j].pathloss_exponent == config.tiers[j].pathloss_exponent);
    CHECK(parsed.tiers[j].activity_prob == config.tiers[j].activity_prob);
    CHECK(parsed.tiers[j].cache_size == config.tiers[j].cache_size);
    for (int m = 0; m < config.num_files; ++m) {
      CHECK(parsed.tiers[j].caching_probs[m] == config.tiers[j].caching_probs[m]);
    }
  }
  CHECK(chn::to_json(parsed) == text);
}

TEST_CASE("unknown keys are an error") {
  const char* text = R"({
    "num_files": 1,
    "tiers": [{"density": 1.0, "tx_power": 1.0, "pathloss_exponent": 4.0,
               "activity_prob": 1.0, "caching_probs": [1.0], "cache_size": 1.0,
               "pathloss_exponentt": 3.0}]
  })";
  try {
    chn::load_network_json(text);
    FAIL("expected ConfigInvalid");
  } catch (const chn::Error& e) {
    CHECK(e.kind() == chn::ErrorKind::ConfigInvalid);
    CHECK(std::string(e.what()).find("pathloss_exponentt") != std::string::npos);
  }
}

TEST_CASE("schema problems are reported together") {
  const char* text = R"({
    "num_files": 2,
    "typo_key": 1,
    "tiers": [{"density": "fast", "tx_power": 1.0, "pathloss_exponent": 4.0,
               "activity_prob": 1.0, "caching_probs": [1.0, 0.0]}]
  })";
  try {
    chn::load_network_json(text);
    FAIL("expected ConfigInvalid");
  } catch (const chn::Error& e) {
    const std::string what = e.what();
    CHECK(what.find("typo_key") != std::string::npos);
    CHECK(what.find("density") != std::string::npos);
    CHECK(what.find("cache_size") != std::string::npos);
  }
}

TEST_CASE("query validation") {
  const NetworkConfig config = two_tier(1.0, probs({0.5, 0.5}), probs({0.2, 0.8}));
  CHECK_NOTHROW(chn::require_valid_query(config, chn::QueryParams{1, 0.5}));
  CHECK_THROWS_AS(chn::require_valid_query(config, chn::QueryParams{2, 0.5}), chn::Error);
  CHECK_THROWS_AS(chn::require_valid_query(config, chn::QueryParams{0, 0.0}), chn::Error);
  CHECK_THROWS_AS(chn::require_valid_query(config, chn::QueryParams{0, -1.0}), chn::Error);
}
