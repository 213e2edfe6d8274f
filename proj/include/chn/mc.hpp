#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "chn/model.hpp"

namespace chn {

// Points of one tier in a sampled realization, sorted by increasing radius.
struct TierPoints {
  ArrayXd radius;                          // distance to the origin user
  ArrayXd angle;                           // in [0, 2pi)
  Eigen::Array<bool, Eigen::Dynamic, 1> caches_file;  // Bernoulli(p_nj) mark

  Index count() const { return radius.size(); }
};

// One PPP snapshot around the typical user at the origin. Points are
// generated in order of increasing radius from cumulative exponential
// increments of the squared radius, so realizations for two window radii
// under the same seed are nested: the larger window strictly extends the
// smaller one. Window-sensitivity checks therefore isolate the truncation
// bias instead of comparing two independent draws.
struct NetworkRealization {
  std::vector<TierPoints> tiers;
  double window_radius = 0.0;
  uint64_t seed = 0;
};

struct AssociationOutcome {
  bool found = false;
  int tier = -1;
  Index point = -1;      // index into tiers[tier]
  double distance = 0.0;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  std::int64_t samples_used = 0;
  std::int64_t samples_discarded = 0;  // realizations with no caching BS in window
  bool heavy_tail = false;             // delay only: top 1% of samples carry >50% of the mean
};

struct McOptions {
  std::int64_t samples = 100000;
  double window_radius = 0.0;  // <= 0 selects the automatic radius
  uint64_t seed = 0;
  int threads = 0;             // <= 0 selects hardware concurrency
  std::int64_t start_index = 0;  // first realization index; lets disjoint
                                 // half-budgets partition one full budget
};

enum class WindowMetric { Coverage, Delay };

// Radius such that the association distance exceeds R/2 with probability
// below 1e-4 under the smallest positive thinned density. This bounds the
// association truncation only; it is the floor of the automatic window.
double association_window_floor(const NetworkConfig& config, int file);

// Automatic window radius: the association floor, enlarged until the
// neglected interference from beyond the window shifts the requested metric
// by less than ~0.1% (the truncation bias is O(R^{2-alpha}) per tier, so
// brute-force enlargement is cheap for every config of interest). In the
// divergent-delay regime no finite window is unbiased; the radius is then
// capped at three times the floor, which is enough geometry for the
// heavy-tail diagnostic to trip.
double default_window_radius(const NetworkConfig& config, int file, double tau,
                             WindowMetric metric);

// Draws one realization: per tier a Poisson(lambda_j pi R^2) number of
// points uniform on the disk, each independently marked as caching `file`
// with probability p_nj. Fully determined by `seed`.
NetworkRealization sample_network(const NetworkConfig& config, int file, double window_radius,
                                  uint64_t seed);

// Max average received power association over marked points; ties broken by
// smaller distance, then lower tier index. found=false when no marked point
// exists in the window.
AssociationOutcome associate(const NetworkRealization& realization, const NetworkConfig& config,
                             int file);

// P(SIR > tau | geometry, association): fading and activity integrated out
// analytically, leaving the product over all non-serving points of
// a_j/(1 + tau w_i/w_s) + (1 - a_j) with w the average received power.
double conditional_success_probability(const NetworkRealization& realization,
                                       const AssociationOutcome& association,
                                       const NetworkConfig& config, double tau);

// Rao-Blackwellized coverage estimator: mean of the conditional success
// probability over realizations. Throws Error{WindowTooSmall} when more
// than 1% of realizations find no caching BS.
McEstimate estimate_coverage(const NetworkConfig& config, int file, double tau,
                             const McOptions& opts = {});

// Local delay estimator: mean of the reciprocal conditional success
// probability (the conditional delay is geometric with that mean).
McEstimate estimate_delay(const NetworkConfig& config, int file, double tau,
                          const McOptions& opts = {});

// Plain indicator estimator with explicitly sampled Rayleigh fading and
// activity coin flips. Exists to validate the Rao-Blackwellized estimator
// against the raw generative model.
McEstimate estimate_coverage_bernoulli(const NetworkConfig& config, int file, double tau,
                                       const McOptions& opts = {});

// Name of the generator backing the estimators, recorded in tool output.
const char* rng_algorithm();

}  // namespace chn
