#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "beamprune/scoring.hpp"

namespace beamprune {

struct PlantedParams {
  double p_hi = 0.6;      // probability of the planted continuation
  double p_decoy = 0.0;   // probability of the decoy during the first `depth` steps
  std::size_t depth = 0;  // deception depth
};

/// Model with one planted target sequence per sentence.
///
/// While a hypothesis follows the planted target, the planted token gets
/// p_hi and the rest of the mass is spread uniformly. For the first `depth`
/// positions a decoy token gets p_decoy > p_hi, so greedy search takes the
/// decoy and misses the planted path. Once a hypothesis leaves the path every
/// token gets 1/|V|.
///
/// The target is either fixed, or derived from the source by mapping each
/// content token through a seeded random permutation (a toy lexicon) and
/// appending EOS.
class PlantedPathModel final : public ScoringModel {
 public:
  /// Fixed planted sequence; EOS is appended when missing.
  PlantedPathModel(Vocabulary vocab, PlantedParams params, std::vector<TokenId> planted);

  /// Source-dependent target through a lexicon permutation drawn from `seed`.
  static PlantedPathModel with_lexicon(Vocabulary vocab, PlantedParams params,
                                       std::uint64_t seed);

  const Vocabulary& vocabulary() const noexcept override { return vocab_; }
  ScorerState init(std::span<const TokenId> source) const override;
  StepOutput step(const ScorerState& state, std::optional<TokenId> last_token) const override;

  /// Planted target for `source`, ending in EOS.
  std::vector<TokenId> planted_target(std::span<const TokenId> source) const;

  /// Decoy token at on-path position `position` when the planted token is
  /// `planted`; never EOS, never `planted`.
  TokenId decoy_token(TokenId planted, std::size_t position) const;

  const PlantedParams& params() const noexcept { return params_; }

 private:
  PlantedPathModel(Vocabulary vocab, PlantedParams params);
  void validate() const;

  Vocabulary vocab_;
  PlantedParams params_;
  std::optional<std::vector<TokenId>> fixed_;
  std::vector<TokenId> lexicon_;  // indexed by source token id
};

}  // namespace beamprune
