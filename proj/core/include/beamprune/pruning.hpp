#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "beamprune/config.hpp"
#include "beamprune/types.hpp"

namespace beamprune {

// Candidate filters. Scores are natural-log probabilities, so the
// multiplicative thresholds rp and rpl act on probabilities and become
// additive offsets ln(rp), ln(rpl) in log space. A candidate exactly on a
// threshold is discarded. Every filter keeps the relative order of its input.

/// Keeps cand iff total_score > max total_score + ln(rp). rp = 0 keeps all.
std::vector<Candidate> prune_relative(std::span<const Candidate> cands, double rp);

/// Keeps cand iff total_score > max total_score - ap. ap = inf keeps all.
std::vector<Candidate> prune_absolute(std::span<const Candidate> cands, double ap);

/// Keeps cand iff word_score > max word_score + ln(rpl). Looks at the last
/// word only; a candidate with the best total can be dropped.
std::vector<Candidate> prune_relative_local(std::span<const Candidate> cands, double rpl);

/// Scans `cands` (sorted by CandidateOrder) and drops a candidate once `mc`
/// candidates with the same parent were kept. nullopt = unlimited.
std::vector<Candidate> prune_max_candidates(std::span<const Candidate> cands,
                                            std::optional<std::size_t> mc);

enum class PruneFilter : std::size_t { relative = 0, absolute, relative_local, max_candidates };

inline constexpr std::array<PruneFilter, 4> kPruneFilters = {
    PruneFilter::relative, PruneFilter::absolute, PruneFilter::relative_local,
    PruneFilter::max_candidates};

/// "rp", "ap", "rpl", "mc"
std::string_view filter_name(PruneFilter f) noexcept;

struct DropCounts {
  std::size_t rp = 0;
  std::size_t ap = 0;
  std::size_t rpl = 0;
  std::size_t mc = 0;

  std::size_t& operator[](PruneFilter f) noexcept;
  std::size_t operator[](PruneFilter f) const noexcept;
  std::size_t total() const noexcept { return rp + ap + rpl + mc; }
  DropCounts& operator+=(const DropCounts& o) noexcept;
  bool operator==(const DropCounts&) const = default;
};

struct PruneOutcome {
  std::vector<Candidate> kept;                      // input order preserved
  DropCounts dropped_by;                            // first filter that removed each drop
  std::vector<std::optional<PruneFilter>> verdicts;  // per input: nullopt = kept
};

/// Applies rp -> ap -> rpl -> mc in sequence. Each score filter measures its
/// maximum over the candidates still alive when it runs, so every stage keeps
/// at least one candidate and `kept` is non-empty for non-empty input.
/// `cands` must already be truncated to the beam and sorted by CandidateOrder.
PruneOutcome prune_pipeline(std::span<const Candidate> cands, const PruneConfig& cfg);

}  // namespace beamprune
