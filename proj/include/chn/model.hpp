#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "chn/errors.hpp"

namespace chn {

using Eigen::ArrayXd;
using Eigen::Index;

// One network tier: base stations of a common class, modeled as a
// homogeneous PPP. All powers are linear watts; dB conversion is a CLI
// concern and never enters the model.
struct TierConfig {
  double density = 0.0;            // BSs per unit area
  double tx_power = 0.0;           // linear watts
  double pathloss_exponent = 0.0;  // must exceed 2 for interference integrals
  double activity_prob = 0.0;      // interferer activity, conditioned on the serving link
  ArrayXd caching_probs;           // per-file caching probability, length num_files
  double cache_size = 0.0;         // files; sum of caching_probs must equal this
};

// Full K-tier network with an M-file content library. Immutable after
// validation; safe to share across threads.
struct NetworkConfig {
  std::vector<TierConfig> tiers;
  int num_files = 0;

  int num_tiers() const { return static_cast<int>(tiers.size()); }

  // Caching probability p of `file` at tier `tier`, both 0-based.
  double caching_prob(int tier, int file) const;

  bool file_cached_somewhere(int file) const;
};

// Evaluation target for a single query. `file` is 0-based internally; the
// CLI surfaces 1-based indices.
struct QueryParams {
  int file = 0;
  double sir_threshold = 0.0;  // linear
};

enum class ViolationKind {
  NonPositiveDensity,
  NonPositiveTxPower,
  PathlossTooSmall,
  ActivityOutOfRange,
  CachingProbOutOfRange,
  CacheSizeMismatch,
  DimensionMismatch,
  EmptyNetwork,
  InvalidFileCount,
};

struct Violation {
  ViolationKind kind;
  int tier;  // 0-based tier index, -1 for network-level violations
  std::string message;
};

// Absolute tolerance on |sum(caching_probs) - cache_size|. Configs are
// human-authored decimals; this absorbs decimal round-off without masking
// typos.
inline constexpr double kCacheSizeTolerance = 1e-9;

// Total validation: reports every violation, not just the first. An empty
// result means the config satisfies all model invariants.
std::vector<Violation> validate_network(const NetworkConfig& config);

// Throws Error{ConfigInvalid} listing all violations when validation fails,
// otherwise returns the config unchanged.
NetworkConfig require_valid(NetworkConfig config);

// Density of the thinned PPP of tier `tier` BSs that cache `file`:
// p_{nj} * lambda_j. Indices 0-based. Throws Error{IndexOutOfRange}.
double thinned_density(const NetworkConfig& config, int tier, int file);

// Throws Error{IndexOutOfRange} on a bad file index and Error{DomainError}
// on a nonpositive SIR threshold.
void require_valid_query(const NetworkConfig& config, const QueryParams& query);

// True when every tier shares one pathloss exponent (exact comparison;
// configs are parsed decimals).
bool equal_pathloss_exponents(const NetworkConfig& config);

std::string describe(const Violation& violation);

// --- config file I/O -------------------------------------------------------
//
// The on-disk format is a single JSON document:
//   {
//     "num_files": M,
//     "tiers": [ { "density": ..., "tx_power": ..., "pathloss_exponent": ...,
//                  "activity_prob": ..., "caching_probs": [...],
//                  "cache_size": ... }, ... ]
//   }
// Unknown keys are an error so that a typo in a sweep config cannot silently
// fall back to a default.

// Parses and schema-checks; does NOT run semantic validation. Throws
// Error{ConfigInvalid} listing every schema problem found.
NetworkConfig load_network_json(const std::string& json_text);
NetworkConfig load_network_file(const std::string& path);

// Serializes with shortest round-trip number formatting; re-parsing the
// output reproduces the config bit-exactly.
std::string to_json(const NetworkConfig& config);
void save_network_file(const NetworkConfig& config, const std::string& path);

}  // namespace chn
