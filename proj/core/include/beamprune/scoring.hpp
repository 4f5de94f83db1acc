#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "beamprune/types.hpp"

namespace beamprune {

struct StepOutput {
  std::vector<double> log_probs;  // natural log, one entry per vocabulary token
  ScorerState next;
};

/// Produces a log-probability distribution over the vocabulary for the next
/// token of a hypothesis.
///
/// init() builds the root state for a source sentence. step(state, last)
/// appends `last` to the context carried by `state` (nothing at the root) and
/// returns the next-token distribution together with the extended state.
/// Implementations are immutable after construction and step() is reentrant,
/// so one model can serve many decoding threads.
class ScoringModel {
 public:
  virtual ~ScoringModel() = default;

  ScoringModel(const ScoringModel&) = delete;
  ScoringModel& operator=(const ScoringModel&) = delete;

  virtual const Vocabulary& vocabulary() const noexcept = 0;
  virtual ScorerState init(std::span<const TokenId> source) const = 0;
  virtual StepOutput step(const ScorerState& state, std::optional<TokenId> last_token) const = 0;

  std::uint64_t id() const noexcept { return id_; }

 protected:
  ScoringModel();
  ScoringModel(ScoringModel&&) noexcept = default;
  ScoringModel& operator=(ScoringModel&&) noexcept = default;

  /// Throws ModelError for a state from another model instance, an unknown
  /// token or an attempt to extend past EOS.
  void check_step_args(const ScorerState& state, std::optional<TokenId> last_token) const;

  ScorerState make_state(std::vector<TokenId> context) const {
    return ScorerState{id_, std::move(context)};
  }

 private:
  std::uint64_t id_;
};

/// log(sum(exp(x))) with the usual max shift; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values);

/// Every token has probability 1/|V| regardless of context.
class UniformModel final : public ScoringModel {
 public:
  explicit UniformModel(Vocabulary vocab);

  const Vocabulary& vocabulary() const noexcept override { return vocab_; }
  ScorerState init(std::span<const TokenId> source) const override;
  StepOutput step(const ScorerState& state, std::optional<TokenId> last_token) const override;

 private:
  Vocabulary vocab_;
};

}  // namespace beamprune
