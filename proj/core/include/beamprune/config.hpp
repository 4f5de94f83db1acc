#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace beamprune {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Thresholds of the four candidate filters.
///
///   rp   relative threshold on total score, in [0, 1); 0 disables
///   ap   absolute margin on total score (nats), in (0, inf]; inf disables
///   rpl  relative threshold on the last word's score, in [0, 1); 0 disables
///   mc   max surviving candidates per parent hypothesis; nullopt = unlimited
struct PruneConfig {
  double rp = 0.0;
  double ap = kInfinity;
  double rpl = 0.0;
  std::optional<std::size_t> mc;

  bool is_neutral() const noexcept;
  bool operator==(const PruneConfig&) const = default;
};

PruneConfig neutral_prune_config() noexcept;

struct DecodeConfig {
  std::optional<std::size_t> beam_size = 5;  // nullopt = unbounded
  PruneConfig prune;
  double max_len_factor = 3.0;
  std::int64_t max_len_offset = 10;
  bool normalize_by_length = true;
  std::size_t unbounded_cap = 1000;

  bool bounded() const noexcept { return beam_size.has_value(); }

  /// floor(max_len_factor * source_len + max_len_offset), at least 1.
  std::size_t length_cap(std::size_t source_len) const noexcept;

  bool operator==(const DecodeConfig&) const = default;
};

/// Throws ConfigError naming the first offending field.
void validate_config(const DecodeConfig& cfg);
void validate_prune_config(const PruneConfig& cfg);

/// Row label in the style "no pruning" / "rp=0.6,ap=2.5,rpl=0.02,mc=3";
/// neutral thresholds are omitted.
std::string prune_label(const PruneConfig& cfg);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

void to_json(nlohmann::json& j, const PruneConfig& cfg);
void from_json(const nlohmann::json& j, PruneConfig& cfg);
void to_json(nlohmann::json& j, const DecodeConfig& cfg);
void from_json(const nlohmann::json& j, DecodeConfig& cfg);

}  // namespace beamprune
