#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "beamprune/config.hpp"
#include "beamprune/pruning.hpp"
#include "beamprune/scoring.hpp"
#include "beamprune/types.hpp"

namespace beamprune {

/// Per-step bookkeeping of one decode. Index t describes time step t+1.
struct DecodeTrace {
  std::vector<std::size_t> fan_out_per_step;               // hypotheses expanded
  std::vector<DropCounts> dropped_per_step;                // pruning drops
  std::vector<std::optional<std::size_t>> beam_per_step;   // beam at step start; nullopt = unbounded
  std::vector<std::size_t> finals_per_step;                // EOS hypotheses completed

  std::size_t steps() const noexcept { return fan_out_per_step.size(); }
  bool operator==(const DecodeTrace&) const = default;
};

struct DecodeResult {
  FinalHypothesis best;
  std::vector<FinalHypothesis> finals;  // in completion order
  DecodeTrace trace;
  std::size_t steps = 0;
  bool force_completed = false;  // length cap hit with no finals; EOS appended
  double wall_time_s = 0.0;
};

/// Beam search with EOS beam reduction and candidate pruning.
///
/// Each step expands every active hypothesis into all |V| candidates, sorts
/// the pool by CandidateOrder, cuts it to the current beam, runs
/// prune_pipeline, moves EOS survivors to the final list (one beam slot each)
/// and keeps the best remaining survivors, at most the reduced beam, as the
/// next active set. Search stops when the beam reaches 0, nothing is active,
/// or the length cap is reached. If the cap is reached with no finals, every
/// active hypothesis is completed with EOS at its model score.
///
/// With an unbounded beam the pool is not cut, finals do not consume
/// anything, and the active set is capped at cfg.unbounded_cap.
///
/// The output is the final with the best normalized (or total) score, ties
/// going to the lexicographically smallest token sequence.
DecodeResult decode(std::span<const TokenId> source, const ScoringModel& model,
                    const DecodeConfig& cfg);

/// decode() for each source using up to `jobs` threads. Results are in input
/// order and do not depend on `jobs`. On failure throws Error naming the
/// smallest failing sentence index.
std::vector<DecodeResult> decode_corpus(std::span<const std::vector<TokenId>> sources,
                                        const ScoringModel& model, const DecodeConfig& cfg,
                                        std::size_t jobs = 1);

enum class LossCause { beam, filter, length_cap };

/// Where a decode lost a given target sequence.
struct PruneEvent {
  std::size_t step = 0;               // 1-based time step
  LossCause cause = LossCause::beam;
  std::optional<PruneFilter> filter;  // set when cause == filter
  std::size_t prefix_length = 0;      // target tokens alive before the loss
};

/// Replays decode(source, model, cfg) and reports the first step at which
/// the prefix of `target` (a complete sequence ending in EOS) was discarded.
/// Returns nullopt when the run completes `target` as a final.
std::optional<PruneEvent> locate_prune_step(std::span<const TokenId> source,
                                            const ScoringModel& model, const DecodeConfig& cfg,
                                            std::span<const TokenId> target);

}  // namespace beamprune
