#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "beamprune/scoring.hpp"

namespace beamprune {

/// Explicit table from target prefix to next-token distribution. Prefixes
/// without an entry get the uniform distribution. The source is ignored.
///
/// Fixture format (JSON):
///
///   {
///     "vocabulary": ["</s>", "a", "b"],
///     "eos": "</s>",
///     "contexts": { "": [0.2, 0.5, 0.3], "a": [0.9, 0.05, 0.05] }
///   }
///
/// Context keys are space-joined prefixes; values are linear probabilities in
/// vocabulary order and must sum to 1 within 1e-6.
class TableModel final : public ScoringModel {
 public:
  static constexpr double kNormalizationTolerance = 1e-6;

  TableModel(Vocabulary vocab, std::map<std::vector<TokenId>, std::vector<double>> log_probs);

  static TableModel from_json(const nlohmann::json& doc);
  static TableModel load(const std::filesystem::path& path);

  /// Fixture document with probabilities exp(log_prob).
  nlohmann::json to_json() const;

  const Vocabulary& vocabulary() const noexcept override { return vocab_; }
  ScorerState init(std::span<const TokenId> source) const override;
  StepOutput step(const ScorerState& state, std::optional<TokenId> last_token) const override;

  const std::map<std::vector<TokenId>, std::vector<double>>& entries() const noexcept {
    return log_probs_;
  }

 private:
  Vocabulary vocab_;
  std::map<std::vector<TokenId>, std::vector<double>> log_probs_;
  std::vector<double> uniform_;
};

}  // namespace beamprune
