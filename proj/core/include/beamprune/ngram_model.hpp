#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "beamprune/scoring.hpp"

namespace beamprune {

/// Add-k smoothed n-gram language model.
///
/// P(w | h) = (count(h, w) + k) / (count(h) + k * |V|), where h is the last
/// n-1 tokens. Contexts shorter than n-1 are left-padded with a begin marker
/// that lies outside the vocabulary and can never be emitted. Training
/// sentences that do not end in EOS get one appended.
///
/// init() primes the context with the source tokens, so the model behaves as
/// a continuation model conditioned on the source.
class NGramModel final : public ScoringModel {
 public:
  static constexpr TokenId kBeginMarker = -1;

  /// `lines` are whitespace-tokenized sentences. Throws InputError naming the
  /// token and 1-based line of the first out-of-vocabulary token.
  static NGramModel train(Vocabulary vocab, std::span<const std::string> lines, int order,
                          double k);
  static NGramModel train(Vocabulary vocab, std::span<const std::vector<TokenId>> sentences,
                          int order, double k);

  const Vocabulary& vocabulary() const noexcept override { return vocab_; }
  ScorerState init(std::span<const TokenId> source) const override;
  StepOutput step(const ScorerState& state, std::optional<TokenId> last_token) const override;

  int order() const noexcept { return order_; }
  double smoothing() const noexcept { return k_; }

  /// Smoothed log-probabilities for an explicit (n-1)-token context.
  std::vector<double> distribution(std::span<const TokenId> context) const;

 private:
  NGramModel(Vocabulary vocab, int order, double k);

  struct ContextCounts {
    std::vector<std::uint32_t> counts;
    std::uint64_t total = 0;
  };

  void add_sentence(std::span<const TokenId> sentence);
  void finalize();
  std::vector<TokenId> shift(std::vector<TokenId> context, TokenId token) const;

  Vocabulary vocab_;
  int order_;
  double k_;
  std::map<std::vector<TokenId>, ContextCounts> counts_;
  std::map<std::vector<TokenId>, std::vector<double>> log_probs_;
  std::vector<double> unseen_;
};

}  // namespace beamprune
