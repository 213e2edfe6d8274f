#include "chn/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace chn {

using nlohmann::json;

double NetworkConfig::caching_prob(int tier, int file) const {
  return tiers[static_cast<size_t>(tier)].caching_probs[file];
}

bool NetworkConfig::file_cached_somewhere(int file) const {
  for (const TierConfig& t : tiers) {
    if (t.caching_probs[file] > 0.0) return true;
  }
  return false;
}

std::vector<Violation> validate_network(const NetworkConfig& config) {
  std::vector<Violation> out;
  auto add = [&out](ViolationKind kind, int tier, std::string msg) {
    out.push_back(Violation{kind, tier, std::move(msg)});
  };

  if (config.tiers.empty()) {
    add(ViolationKind::EmptyNetwork, -1, "network must contain at least one tier");
  }
  if (config.num_files < 1) {
    add(ViolationKind::InvalidFileCount, -1,
        "num_files must be a positive integer, got " + std::to_string(config.num_files));
  }

  for (int j = 0; j < config.num_tiers(); ++j) {
    const TierConfig& t = config.tiers[static_cast<size_t>(j)];
    const std::string where = "tier " + std::to_string(j + 1);
    if (!(t.density > 0.0) || !std::isfinite(t.density)) {
      add(ViolationKind::NonPositiveDensity, j,
          where + ": density must be positive, got " + std::to_string(t.density));
    }
    if (!(t.tx_power > 0.0) || !std::isfinite(t.tx_power)) {
      add(ViolationKind::NonPositiveTxPower, j,
          where + ": tx_power must be positive, got " + std::to_string(t.tx_power));
    }
    if (!(t.pathloss_exponent > 2.0) || !std::isfinite(t.pathloss_exponent)) {
      add(ViolationKind::PathlossTooSmall, j,
          where + ": pathloss_exponent must exceed 2 (interference integrals diverge otherwise), got " +
              std::to_string(t.pathloss_exponent));
    }
    if (!(t.activity_prob >= 0.0 && t.activity_prob <= 1.0)) {
      add(ViolationKind::ActivityOutOfRange, j,
          where + ": activity_prob must lie in [0,1], got " + std::to_string(t.activity_prob));
    }
    if (config.num_files >= 1 && t.caching_probs.size() != config.num_files) {
      add(ViolationKind::DimensionMismatch, j,
          where + ": caching_probs has length " + std::to_string(t.caching_probs.size()) +
              ", expected num_files = " + std::to_string(config.num_files));
    }
    for (Index m = 0; m < t.caching_probs.size(); ++m) {
      const double p = t.caching_probs[m];
      if (!(p >= 0.0 && p <= 1.0)) {
        add(ViolationKind::CachingProbOutOfRange, j,
            where + ": caching_probs[" + std::to_string(m + 1) + "] must lie in [0,1], got " +
                std::to_string(p));
      }
    }
    const double sum = t.caching_probs.size() > 0 ? t.caching_probs.sum() : 0.0;
    if (std::abs(sum - t.cache_size) > kCacheSizeTolerance) {
      std::ostringstream msg;
      msg << where << ": caching_probs sum to " << sum << " but cache_size is " << t.cache_size;
      add(ViolationKind::CacheSizeMismatch, j, msg.str());
    }
  }
  return out;
}

NetworkConfig require_valid(NetworkConfig config) {
  const std::vector<Violation> violations = validate_network(config);
  if (!violations.empty()) {
    std::string what = "invalid network config:";
    for (const Violation& v : violations) what += "\n  - " + v.message;
    throw Error(ErrorKind::ConfigInvalid, what);
  }
  return config;
}

double thinned_density(const NetworkConfig& config, int tier, int file) {
  if (tier < 0 || tier >= config.num_tiers()) {
    throw Error(ErrorKind::IndexOutOfRange,
                "tier index " + std::to_string(tier + 1) + " out of range [1.." +
                    std::to_string(config.num_tiers()) + "]");
  }
  if (file < 0 || file >= config.num_files) {
    throw Error(ErrorKind::IndexOutOfRange,
                "file index " + std::to_string(file + 1) + " out of range [1.." +
                    std::to_string(config.num_files) + "]");
  }
  const TierConfig& t = config.tiers[static_cast<size_t>(tier)];
  return t.caching_probs[file] * t.density;
}

void require_valid_query(const NetworkConfig& config, const QueryParams& query) {
  if (query.file < 0 || query.file >= config.num_files) {
    throw Error(ErrorKind::IndexOutOfRange,
                "file index " + std::to_string(query.file + 1) + " out of range [1.." +
                    std::to_string(config.num_files) + "]");
  }
  if (!(query.sir_threshold > 0.0) || !std::isfinite(query.sir_threshold)) {
    throw Error(ErrorKind::DomainError, "SIR threshold must be positive and finite");
  }
}

bool equal_pathloss_exponents(const NetworkConfig& config) {
  for (const TierConfig& t : config.tiers) {
    if (t.pathloss_exponent != config.tiers.front().pathloss_exponent) return false;
  }
  return true;
}

std::string describe(const Violation& violation) { return violation.message; }

namespace {

// Collects schema problems (unknown keys, missing keys, wrong types) so a
// config file with several typos is reported in one pass.
struct SchemaErrors {
  std::vector<std::string> problems;

  void add(std::string p) { problems.push_back(std::move(p)); }

  void check_keys(const json& obj, const char* what,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* key : allowed) {
        if (it.key() == key) { known = true; break; }
      }
      if (!known) add(std::string(what) + ": unknown key \"" + it.key() + "\"");
    }
  }

  void raise_if_any() const {
    if (problems.empty()) return;
    std::string what = "config schema error:";
    for (const std::string& p : problems) what += "\n  - " + p;
    throw Error(ErrorKind::ConfigInvalid, what);
  }
};

double get_number(const json& obj, const char* key, const std::string& where,
                  SchemaErrors& errors) {
  if (!obj.contains(key)) {
    errors.add(where + ": missing key \"" + key + "\"");
    return 0.0;
  }
  if (!obj[key].is_number()) {
    errors.add(where + ": key \"" + key + "\" must be a number");
    return 0.0;
  }
  return obj[key].get<double>();
}

}  // namespace

NetworkConfig load_network_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }

  SchemaErrors errors;
  NetworkConfig config;

  if (!doc.is_object()) {
    errors.add("top level must be a JSON object");
    errors.raise_if_any();
  }
  errors.check_keys(doc, "top level", {"tiers", "num_files"});

  if (!doc.contains("num_files")) {
    errors.add("top level: missing key \"num_files\"");
  } else if (!doc["num_files"].is_number_integer()) {
    errors.add("top level: \"num_files\" must be an integer");
  } else {
    config.num_files = doc["num_files"].get<int>();
  }

  if (!doc.contains("tiers")) {
    errors.add("top level: missing key \"tiers\"");
  } else if (!doc["tiers"].is_array()) {
    errors.add("top level: \"tiers\" must be an array");
  } else {
    int j = 0;
    for (const json& tier_doc : doc["tiers"]) {
      const std::string where = "tier " + std::to_string(j + 1);
      TierConfig tier;
      if (!tier_doc.is_object()) {
        errors.add(where + ": must be a JSON object");
        ++j;
        continue;
      }
      errors.check_keys(tier_doc, where.c_str(),
                        {"density", "tx_power", "pathloss_exponent", "activity_prob",
                         "caching_probs", "cache_size"});
      tier.density = get_number(tier_doc, "density", where, errors);
      tier.tx_power = get_number(tier_doc, "tx_power", where, errors);
      tier.pathloss_exponent = get_number(tier_doc, "pathloss_exponent", where, errors);
      tier.activity_prob = get_number(tier_doc, "activity_prob", where, errors);
      tier.cache_size = get_number(tier_doc, "cache_size", where, errors);
      if (!tier_doc.contains("caching_probs")) {
        errors.add(where + ": missing key \"caching_probs\"");
      } else if (!tier_doc["caching_probs"].is_array()) {
        errors.add(where + ": \"caching_probs\" must be an array of numbers");
      } else {
        const json& probs = tier_doc["caching_probs"];
        tier.caching_probs.resize(static_cast<Index>(probs.size()));
        Index m = 0;
        for (const json& p : probs) {
          if (!p.is_number()) {
            errors.add(where + ": caching_probs[" + std::to_string(m + 1) + "] must be a number");
            tier.caching_probs[m++] = 0.0;
          } else {
            tier.caching_probs[m++] = p.get<double>();
          }
        }
      }
      config.tiers.push_back(std::move(tier));
      ++j;
    }
  }

  errors.raise_if_any();
  return config;
}

NetworkConfig load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::ConfigInvalid, "cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_network_json(buffer.str());
}

std::string to_json(const NetworkConfig& config) {
  json doc;
  doc["num_files"] = config.num_files;
  doc["tiers"] = json::array();
  for (const TierConfig& t : config.tiers) {
    json tier_doc;
    tier_doc["density"] = t.density;
    tier_doc["tx_power"] = t.tx_power;
    tier_doc["pathloss_exponent"] = t.pathloss_exponent;
    tier_doc["activity_prob"] = t.activity_prob;
    tier_doc["cache_size"] = t.cache_size;
    json probs = json::array();
    for (Index m = 0; m < t.caching_probs.size(); ++m) probs.push_back(t.caching_probs[m]);
    tier_doc["caching_probs"] = std::move(probs);
    doc["tiers"].push_back(std::move(tier_doc));
  }
  return doc.dump(2);
}

void save_network_file(const NetworkConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::ConfigInvalid, "cannot open output file: " + path);
  }
  out << to_json(config) << "\n";
}

}  // namespace chn
