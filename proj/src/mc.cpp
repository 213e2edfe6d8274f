#include "chn/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "chn/analytic.hpp"
#include "chn/errors.hpp"
#include "chn/rng.hpp"

namespace chn {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZ95 = 1.959963984540054;

// Realizations are processed in fixed blocks; each worker owns whole blocks
// and partial sums are reduced in block order, so results are bit-identical
// for any thread count.
constexpr std::int64_t kBlockSize = 256;

uint64_t realization_key(uint64_t seed, std::int64_t index) {
  return splitmix64_at(seed, 2 * static_cast<uint64_t>(index));
}

uint64_t channel_key(uint64_t seed, std::int64_t index) {
  return splitmix64_at(seed, 2 * static_cast<uint64_t>(index) + 1);
}

double avg_power_scalar(double tx_power, double radius, double alpha) {
  if (alpha == 4.0) {
    const double r2 = radius * radius;
    return tx_power / (r2 * r2);
  }
  return tx_power * std::pow(radius, -alpha);
}

// Reusable sampling buffers: the estimator loop touches millions of points,
// so per-realization Eigen allocations are avoided in favor of capacity-
// preserving vectors.
struct RawTier {
  std::vector<double> radius;
  std::vector<double> angle;
  std::vector<char> marked;
};

struct RawRealization {
  std::vector<RawTier> tiers;
};

// Radial construction: pi lambda r_i^2 are the arrival times of a unit rate
// Poisson process, so squared radii grow by exponential increments. Points
// come out sorted by distance, and realizations for two window radii under
// one seed are nested: the larger window strictly extends the smaller one.
void sample_into(RawRealization& out, const NetworkConfig& config, int file,
                 double window_radius, uint64_t seed) {
  out.tiers.resize(static_cast<size_t>(config.num_tiers()));
  for (int j = 0; j < config.num_tiers(); ++j) {
    const TierConfig& tier = config.tiers[static_cast<size_t>(j)];
    const double p = tier.caching_probs[file];
    RawTier& raw = out.tiers[static_cast<size_t>(j)];
    raw.radius.clear();
    raw.angle.clear();
    raw.marked.clear();

    Xoshiro256pp rng(splitmix64_at(seed, static_cast<uint64_t>(j)));
    const double cap = kPi * tier.density * window_radius * window_radius;
    double s = rng.exponential();
    while (s <= cap) {
      raw.radius.push_back(window_radius * std::sqrt(s / cap));
      raw.angle.push_back(2.0 * kPi * rng.uniform());
      raw.marked.push_back(rng.bernoulli(p) ? 1 : 0);
      s += rng.exponential();
    }
  }
}

struct RawAssociation {
  bool found = false;
  int tier = -1;
  std::int64_t point = -1;
  double distance = 0.0;
};

RawAssociation associate_raw(const RawRealization& realization, const NetworkConfig& config) {
  RawAssociation best;
  double best_power = -kInf;
  for (int j = 0; j < config.num_tiers(); ++j) {
    const RawTier& pts = realization.tiers[static_cast<size_t>(j)];
    const TierConfig& tier = config.tiers[static_cast<size_t>(j)];
    // Points are radius-sorted, so the first mark is the tier's best server.
    for (size_t i = 0; i < pts.marked.size(); ++i) {
      if (!pts.marked[i]) continue;
      const double w = avg_power_scalar(tier.tx_power, pts.radius[i], tier.pathloss_exponent);
      const bool wins =
          !best.found || w > best_power ||
          (w == best_power && (pts.radius[i] < best.distance ||
                               (pts.radius[i] == best.distance && j < best.tier)));
      if (wins) {
        best.found = true;
        best.tier = j;
        best.point = static_cast<std::int64_t>(i);
        best.distance = pts.radius[i];
        best_power = w;
      }
      break;
    }
  }
  return best;
}

// Product over one tier's points of a/(1+z) + (1-a) = (1+(1-a)z)/(1+z) with
// z = scale * r^{-alpha}, skipping `skip` (the serving point, or -1).
// The direct product is an order of magnitude cheaper than log-space; the
// caller falls back to the log form only on underflow.
double tier_factor_product(const double* radius, std::int64_t n, std::int64_t skip,
                           double scale, double alpha, double activity) {
  double prod = 1.0;
  const double one_minus_a = 1.0 - activity;
  if (alpha == 4.0) {
    for (std::int64_t i = 0; i < n; ++i) {
      if (i == skip) continue;
      const double r2 = radius[i] * radius[i];
      const double z = scale / (r2 * r2);
      prod *= (1.0 + one_minus_a * z) / (1.0 + z);
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      if (i == skip) continue;
      const double z = scale * std::pow(radius[i], -alpha);
      prod *= (1.0 + one_minus_a * z) / (1.0 + z);
    }
  }
  return prod;
}

double tier_factor_log_sum(const double* radius, std::int64_t n, std::int64_t skip,
                           double scale, double alpha, double activity) {
  double log_sum = 0.0;
  const double one_minus_a = 1.0 - activity;
  for (std::int64_t i = 0; i < n; ++i) {
    if (i == skip) continue;
    const double z = scale * std::pow(radius[i], -alpha);
    log_sum += std::log1p(one_minus_a * z) - std::log1p(z);
  }
  return log_sum;
}

// log P(SIR > tau | geometry, association). Exact conditional on the points:
// fading and activity are integrated out per interferer.
template <class TierRange>
double log_success_kernel(const TierRange& tiers, const NetworkConfig& config, int serving_tier,
                          std::int64_t serving_point, double serving_distance, double tau) {
  const TierConfig& serving = config.tiers[static_cast<size_t>(serving_tier)];
  const double w_s =
      avg_power_scalar(serving.tx_power, serving_distance, serving.pathloss_exponent);
  double prod = 1.0;
  for (int j = 0; j < config.num_tiers(); ++j) {
    const auto [radius_ptr, count] = tiers(j);
    if (count == 0) continue;
    const TierConfig& tier = config.tiers[static_cast<size_t>(j)];
    if (tier.activity_prob == 0.0) continue;
    const double scale = tau * tier.tx_power / w_s;
    prod *= tier_factor_product(radius_ptr, count, j == serving_tier ? serving_point : -1, scale,
                                tier.pathloss_exponent, tier.activity_prob);
  }
  if (prod > 1e-280) return std::log(prod);

  // Underflow: redo in log space (rare; only deep in the divergent regime).
  double log_p = 0.0;
  for (int j = 0; j < config.num_tiers(); ++j) {
    const auto [radius_ptr, count] = tiers(j);
    if (count == 0) continue;
    const TierConfig& tier = config.tiers[static_cast<size_t>(j)];
    if (tier.activity_prob == 0.0) continue;
    const double scale = tau * tier.tx_power / w_s;
    log_p += tier_factor_log_sum(radius_ptr, count, j == serving_tier ? serving_point : -1, scale,
                                 tier.pathloss_exponent, tier.activity_prob);
  }
  return log_p;
}

double log_success_raw(const RawRealization& realization, const RawAssociation& assoc,
                       const NetworkConfig& config, double tau) {
  auto tiers = [&realization](int j) {
    const RawTier& t = realization.tiers[static_cast<size_t>(j)];
    return std::pair<const double*, std::int64_t>(t.radius.data(),
                                                  static_cast<std::int64_t>(t.radius.size()));
  };
  return log_success_kernel(tiers, config, assoc.tier, assoc.point, assoc.distance, tau);
}

struct BlockAccum {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::int64_t used = 0;
  std::int64_t discarded = 0;
  bool any_infinite = false;
};

struct EstimateConfig {
  double window_radius = 0.0;
  bool keep_values = false;  // delay keeps the sample list for the tail diagnostic
};

// Drives the realization loop. `per_realization(index, scratch)` returns the
// sample value or nothing when the realization has no caching BS.
template <class Fn>
McEstimate run_estimator(const EstimateConfig& ec, const McOptions& opts, Fn per_realization) {
  if (opts.samples < 1) {
    throw Error(ErrorKind::DomainError, "sample count must be at least 1");
  }
  const std::int64_t n = opts.samples;
  const std::int64_t num_blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<BlockAccum> blocks(static_cast<size_t>(num_blocks));
  std::vector<double> values;
  std::vector<char> value_used;
  if (ec.keep_values) {
    values.assign(static_cast<size_t>(n), 0.0);
    value_used.assign(static_cast<size_t>(n), 0);
  }

  int threads = opts.threads > 0 ? opts.threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = static_cast<int>(std::min<std::int64_t>(threads, num_blocks));

  std::atomic<std::int64_t> next_block{0};
  auto worker = [&]() {
    RawRealization scratch;
    for (;;) {
      const std::int64_t b = next_block.fetch_add(1);
      if (b >= num_blocks) return;
      BlockAccum acc;
      const std::int64_t lo = b * kBlockSize;
      const std::int64_t hi = std::min(n, lo + kBlockSize);
      for (std::int64_t i = lo; i < hi; ++i) {
        const std::optional<double> v = per_realization(opts.start_index + i, scratch);
        if (!v.has_value()) {
          ++acc.discarded;
          continue;
        }
        ++acc.used;
        if (std::isinf(*v)) {
          acc.any_infinite = true;
        } else {
          acc.sum += *v;
          acc.sum_sq += *v * *v;
        }
        if (ec.keep_values) {
          values[static_cast<size_t>(i)] = *v;
          value_used[static_cast<size_t>(i)] = 1;
        }
      }
      blocks[static_cast<size_t>(b)] = acc;
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  double sum = 0.0;
  double sum_sq = 0.0;
  std::int64_t used = 0;
  std::int64_t discarded = 0;
  bool any_infinite = false;
  for (const BlockAccum& acc : blocks) {
    sum += acc.sum;
    sum_sq += acc.sum_sq;
    used += acc.used;
    discarded += acc.discarded;
    any_infinite = any_infinite || acc.any_infinite;
  }

  if (discarded > n / 100 || used == 0) {
    throw Error(ErrorKind::WindowTooSmall,
                "window radius " + std::to_string(ec.window_radius) + " left " +
                    std::to_string(discarded) + " of " + std::to_string(n) +
                    " realizations without a caching BS; enlarge the window");
  }

  McEstimate est;
  est.samples_used = used;
  est.samples_discarded = discarded;
  if (any_infinite) {
    // A conditional success probability underflowed to zero: deep in the
    // divergent-delay regime.
    est.mean = kInf;
    est.std_error = kInf;
    est.ci95_lo = kInf;
    est.ci95_hi = kInf;
    est.heavy_tail = true;
    return est;
  }
  est.mean = sum / static_cast<double>(used);
  if (used > 1) {
    const double variance =
        std::max(0.0, (sum_sq - static_cast<double>(used) * est.mean * est.mean) /
                          static_cast<double>(used - 1));
    est.std_error = std::sqrt(variance / static_cast<double>(used));
  }
  est.ci95_lo = est.mean - kZ95 * est.std_error;
  est.ci95_hi = est.mean + kZ95 * est.std_error;

  if (ec.keep_values) {
    std::vector<double> sorted;
    sorted.reserve(static_cast<size_t>(used));
    for (std::int64_t i = 0; i < n; ++i) {
      if (value_used[static_cast<size_t>(i)]) sorted.push_back(values[static_cast<size_t>(i)]);
    }
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    const auto top = static_cast<size_t>(std::max<std::int64_t>(1, (used + 99) / 100));
    double top_sum = 0.0;
    for (size_t i = 0; i < top && i < sorted.size(); ++i) top_sum += sorted[i];
    est.heavy_tail = top_sum > 0.5 * sum;
  }
  return est;
}

double resolve_window(const NetworkConfig& config, int file, double tau, WindowMetric metric,
                      const McOptions& opts) {
  if (opts.window_radius > 0.0) return opts.window_radius;
  return default_window_radius(config, file, tau, metric);
}

void check_query(const NetworkConfig& config, int file, double tau) {
  require_valid_query(config, QueryParams{file, tau});
  if (!config.file_cached_somewhere(file)) {
    throw Error(ErrorKind::FileUncached,
                "file " + std::to_string(file + 1) + " is cached in no tier");
  }
}

}  // namespace

double association_window_floor(const NetworkConfig& config, int file) {
  double min_thinned = kInf;
  for (int j = 0; j < config.num_tiers(); ++j) {
    const double d = thinned_density(config, j, file);
    if (d > 0.0) min_thinned = std::min(min_thinned, d);
  }
  if (!std::isfinite(min_thinned)) {
    throw Error(ErrorKind::FileUncached,
                "file " + std::to_string(file + 1) + " is cached in no tier");
  }
  // exp(-pi (p lambda) (R/2)^2) < 1e-4  =>  R = 2 sqrt(ln(1e4) / (pi p lambda)).
  return 2.0 * std::sqrt(std::log(1e4) / (kPi * min_thinned));
}

double default_window_radius(const NetworkConfig& config, int file, double tau,
                             WindowMetric metric) {
  require_valid_query(config, QueryParams{file, tau});
  const double floor_radius = association_window_floor(config, file);

  // Leading-order relative shift of the estimate from dropping interferers
  // beyond R, conditioned on serving tier k at distance x:
  //   (tau x^{alpha_k} / P_k) * sum_j a_j lambda_j P_j 2 pi R^{2-alpha_j}/(alpha_j-2),
  // averaged over x with the metric's own integrand weight. A mis-sized
  // window only changes the truncation bias, which the window-insensitivity
  // suite measures directly against the std error.
  const QuadratureOptions rho_opts;
  constexpr double kBiasTarget = 1e-3;
  constexpr double kSafety = 2.0;

  double radius = floor_radius;
  for (int k = 0; k < config.num_tiers(); ++k) {
    const TierConfig& serving = config.tiers[static_cast<size_t>(k)];
    if (serving.caching_probs[file] <= 0.0) continue;
    const double alpha_k = serving.pathloss_exponent;

    // Exponent coefficient sum of the metric's integrand for serving tier k.
    double coeff = 0.0;
    for (int j = 0; j < config.num_tiers(); ++j) {
      const TierConfig& t = config.tiers[static_cast<size_t>(j)];
      const double weight =
          t.density * std::pow(t.tx_power / serving.tx_power, 2.0 / t.pathloss_exponent);
      const double q = 1.0 - t.caching_probs[file];
      double beta;
      if (metric == WindowMetric::Coverage) {
        const double r1 = rho(RhoKind::Rho1, t.pathloss_exponent, tau, 0.0, rho_opts);
        const double r2 = rho(RhoKind::Rho2, t.pathloss_exponent, tau, 0.0, rho_opts);
        beta = t.caching_probs[file] + t.activity_prob * (r1 + q * r2);
      } else {
        const double r3 = rho(RhoKind::Rho3, t.pathloss_exponent, tau, t.activity_prob, rho_opts);
        const double r4 = rho(RhoKind::Rho4, t.pathloss_exponent, tau, t.activity_prob, rho_opts);
        if (std::isinf(r4) && q > 0.0 && t.activity_prob > 0.0) {
          beta = -kInf;
        } else {
          beta = t.caching_probs[file] - t.activity_prob * (r3 + (q > 0.0 ? q * r4 : 0.0));
        }
      }
      coeff += weight * beta;
    }

    if (!(coeff > 0.0)) {
      // Divergent mean: no finite window is unbiased; give the heavy-tail
      // diagnostic room to see deep interference spikes.
      radius = std::max(radius, 3.0 * floor_radius);
      continue;
    }

    // E[x^{alpha_k}] under x exp(-pi coeff x^2) weighting (equal-exponent
    // closed form, reused as a sizing heuristic in the mixed case).
    const double moment =
        std::tgamma(0.5 * alpha_k + 1.0) / std::pow(kPi * coeff, 0.5 * alpha_k);

    auto bias_at = [&](double r) {
      double total = 0.0;
      for (int j = 0; j < config.num_tiers(); ++j) {
        const TierConfig& t = config.tiers[static_cast<size_t>(j)];
        total += t.activity_prob * t.density * t.tx_power * 2.0 * kPi *
                 std::pow(r, 2.0 - t.pathloss_exponent) / (t.pathloss_exponent - 2.0);
      }
      return kSafety * (tau / serving.tx_power) * moment * total;
    };

    double r = std::max(radius, floor_radius);
    while (bias_at(r) > kBiasTarget && r < 1e4 * floor_radius) r *= 1.25;
    radius = std::max(radius, r);
  }
  return radius;
}

NetworkRealization sample_network(const NetworkConfig& config, int file, double window_radius,
                                  uint64_t seed) {
  if (!(window_radius > 0.0)) {
    throw Error(ErrorKind::DomainError, "window radius must be positive");
  }
  if (file < 0 || file >= config.num_files) {
    throw Error(ErrorKind::IndexOutOfRange,
                "file index " + std::to_string(file + 1) + " out of range [1.." +
                    std::to_string(config.num_files) + "]");
  }
  RawRealization raw;
  sample_into(raw, config, file, window_radius, seed);

  NetworkRealization realization;
  realization.window_radius = window_radius;
  realization.seed = seed;
  realization.tiers.resize(raw.tiers.size());
  for (size_t j = 0; j < raw.tiers.size(); ++j) {
    const RawTier& src = raw.tiers[j];
    TierPoints& dst = realization.tiers[j];
    const auto n = static_cast<Index>(src.radius.size());
    dst.radius = Eigen::Map<const ArrayXd>(src.radius.data(), n);
    dst.angle = Eigen::Map<const ArrayXd>(src.angle.data(), n);
    dst.caches_file.resize(n);
    for (Index i = 0; i < n; ++i) dst.caches_file[i] = src.marked[static_cast<size_t>(i)] != 0;
  }
  return realization;
}

AssociationOutcome associate(const NetworkRealization& realization, const NetworkConfig& config,
                             int file) {
  if (file < 0 || file >= config.num_files) {
    throw Error(ErrorKind::IndexOutOfRange,
                "file index " + std::to_string(file + 1) + " out of range [1.." +
                    std::to_string(config.num_files) + "]");
  }
  AssociationOutcome best;
  double best_power = -kInf;
  for (int j = 0; j < config.num_tiers(); ++j) {
    const TierPoints& pts = realization.tiers[static_cast<size_t>(j)];
    const TierConfig& tier = config.tiers[static_cast<size_t>(j)];
    for (Index i = 0; i < pts.count(); ++i) {
      if (!pts.caches_file[i]) continue;
      const double w = avg_power_scalar(tier.tx_power, pts.radius[i], tier.pathloss_exponent);
      const bool wins =
          !best.found || w > best_power ||
          (w == best_power && (pts.radius[i] < best.distance ||
                               (pts.radius[i] == best.distance && j < best.tier)));
      if (wins) {
        best.found = true;
        best.tier = j;
        best.point = i;
        best.distance = pts.radius[i];
        best_power = w;
      }
      break;
    }
  }
  return best;
}

double conditional_success_probability(const NetworkRealization& realization,
                                       const AssociationOutcome& association,
                                       const NetworkConfig& config, double tau) {
  if (!association.found) {
    throw Error(ErrorKind::DomainError,
                "conditional success probability requires a served realization");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorKind::DomainError, "SIR threshold must be positive and finite");
  }
  auto tiers = [&realization](int j) {
    const TierPoints& t = realization.tiers[static_cast<size_t>(j)];
    return std::pair<const double*, std::int64_t>(t.radius.data(), t.count());
  };
  return std::exp(log_success_kernel(tiers, config, association.tier, association.point,
                                     association.distance, tau));
}

McEstimate estimate_coverage(const NetworkConfig& config, int file, double tau,
                             const McOptions& opts) {
  check_query(config, file, tau);
  EstimateConfig ec{resolve_window(config, file, tau, WindowMetric::Coverage, opts), false};
  auto per_realization = [&](std::int64_t index,
                             RawRealization& scratch) -> std::optional<double> {
    sample_into(scratch, config, file, ec.window_radius, realization_key(opts.seed, index));
    const RawAssociation assoc = associate_raw(scratch, config);
    if (!assoc.found) return std::nullopt;
    return std::exp(log_success_raw(scratch, assoc, config, tau));
  };
  return run_estimator(ec, opts, per_realization);
}

McEstimate estimate_delay(const NetworkConfig& config, int file, double tau,
                          const McOptions& opts) {
  check_query(config, file, tau);
  EstimateConfig ec{resolve_window(config, file, tau, WindowMetric::Delay, opts), true};
  auto per_realization = [&](std::int64_t index,
                             RawRealization& scratch) -> std::optional<double> {
    sample_into(scratch, config, file, ec.window_radius, realization_key(opts.seed, index));
    const RawAssociation assoc = associate_raw(scratch, config);
    if (!assoc.found) return std::nullopt;
    return std::exp(-log_success_raw(scratch, assoc, config, tau));
  };
  return run_estimator(ec, opts, per_realization);
}

McEstimate estimate_coverage_bernoulli(const NetworkConfig& config, int file, double tau,
                                       const McOptions& opts) {
  check_query(config, file, tau);
  EstimateConfig ec{resolve_window(config, file, tau, WindowMetric::Coverage, opts), false};
  auto per_realization = [&](std::int64_t index,
                             RawRealization& scratch) -> std::optional<double> {
    sample_into(scratch, config, file, ec.window_radius, realization_key(opts.seed, index));
    const RawAssociation assoc = associate_raw(scratch, config);
    if (!assoc.found) return std::nullopt;

    Xoshiro256pp channel(channel_key(opts.seed, index));
    const TierConfig& serving = config.tiers[static_cast<size_t>(assoc.tier)];
    const double w_s =
        avg_power_scalar(serving.tx_power, assoc.distance, serving.pathloss_exponent);
    double signal = 0.0;
    double interference = 0.0;
    for (int j = 0; j < config.num_tiers(); ++j) {
      const RawTier& pts = scratch.tiers[static_cast<size_t>(j)];
      const TierConfig& tier = config.tiers[static_cast<size_t>(j)];
      const auto n = static_cast<std::int64_t>(pts.radius.size());
      for (std::int64_t i = 0; i < n; ++i) {
        const bool active = channel.bernoulli(tier.activity_prob);
        const double fading = channel.exponential();
        if (j == assoc.tier && i == assoc.point) {
          // The serving BS transmits regardless of the activity coin.
          signal = fading * w_s;
          continue;
        }
        if (active) {
          interference +=
              fading * avg_power_scalar(tier.tx_power, pts.radius[i], tier.pathloss_exponent);
        }
      }
    }
    const bool covered = interference == 0.0 ? true : signal > tau * interference;
    return covered ? 1.0 : 0.0;
  };
  return run_estimator(ec, opts, per_realization);
}

const char* rng_algorithm() { return "xoshiro256++ with SplitMix64 stream keys"; }

}  // namespace chn
