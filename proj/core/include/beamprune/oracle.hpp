#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "beamprune/scoring.hpp"

namespace beamprune {

struct OracleResult {
  std::vector<TokenId> best_tokens;
  double best_total = 0.0;
  double best_normalized = 0.0;
  std::uint64_t n_enumerated = 0;
};

/// Largest (|V|-1)^cap the oracle accepts.
inline constexpr std::uint64_t kOracleLimit = 1'000'000;

/// Exhaustive search over every sequence of length <= cap that ends in EOS
/// and has no earlier EOS. Picks the best normalized (or total) score, ties
/// going to the lexicographically smallest sequence. Throws ConfigError when
/// (|V|-1)^cap exceeds kOracleLimit or cap is 0.
OracleResult exhaustive_best(std::span<const TokenId> source, const ScoringModel& model,
                             std::size_t cap, bool normalize);

}  // namespace beamprune
