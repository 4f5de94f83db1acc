#include "beamprune/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace beamprune {

namespace {

void check_rp(double rp, const char* field) {
  if (!(rp >= 0.0 && rp < 1.0)) throw ConfigError(field, "must be in [0, 1)");
}

void check_ap(double ap) {
  if (!(ap > 0.0)) throw ConfigError("ap", "must be > 0");
}

void check_mc(std::optional<std::size_t> mc) {
  if (mc && *mc < 1) throw ConfigError("mc", "must be >= 1 or unlimited");
}

double max_total(std::span<const Candidate> cands) {
  double best = -kInfinity;
  for (const auto& c : cands) best = std::max(best, c.total_score);
  return best;
}

double max_word(std::span<const Candidate> cands) {
  double best = -kInfinity;
  for (const auto& c : cands) best = std::max(best, c.word_score);
  return best;
}

// Threshold predicates. A candidate equal to the best always survives, which
// matters when best is -inf (then best + offset is -inf or nan).
bool passes_relative(double score, double best, double ratio) {
  if (ratio == 0.0 || score == best) return true;
  return score > best + std::log(ratio);
}

bool passes_absolute(double score, double best, double margin) {
  if (margin == kInfinity || score == best) return true;
  return score > best - margin;
}

template <typename Keep>
std::vector<Candidate> filter(std::span<const Candidate> cands, Keep keep) {
  std::vector<Candidate> out;
  out.reserve(cands.size());
  for (const auto& c : cands) {
    if (keep(c)) out.push_back(c);
  }
  return out;
}

}  // namespace

std::vector<Candidate> prune_relative(std::span<const Candidate> cands, double rp) {
  check_rp(rp, "rp");
  const double best = max_total(cands);
  return filter(cands, [&](const Candidate& c) { return passes_relative(c.total_score, best, rp); });
}

std::vector<Candidate> prune_absolute(std::span<const Candidate> cands, double ap) {
  check_ap(ap);
  const double best = max_total(cands);
  return filter(cands, [&](const Candidate& c) { return passes_absolute(c.total_score, best, ap); });
}

std::vector<Candidate> prune_relative_local(std::span<const Candidate> cands, double rpl) {
  check_rp(rpl, "rpl");
  const double best = max_word(cands);
  return filter(cands,
                [&](const Candidate& c) { return passes_relative(c.word_score, best, rpl); });
}

std::vector<Candidate> prune_max_candidates(std::span<const Candidate> cands,
                                            std::optional<std::size_t> mc) {
  check_mc(mc);
  if (!mc) return {cands.begin(), cands.end()};
  std::unordered_map<HypothesisId, std::size_t> per_parent;
  return filter(cands, [&](const Candidate& c) { return per_parent[c.parent_id]++ < *mc; });
}

std::string_view filter_name(PruneFilter f) noexcept {
  switch (f) {
    case PruneFilter::relative: return "rp";
    case PruneFilter::absolute: return "ap";
    case PruneFilter::relative_local: return "rpl";
    case PruneFilter::max_candidates: return "mc";
  }
  return "?";
}

std::size_t& DropCounts::operator[](PruneFilter f) noexcept {
  switch (f) {
    case PruneFilter::relative: return rp;
    case PruneFilter::absolute: return ap;
    case PruneFilter::relative_local: return rpl;
    case PruneFilter::max_candidates: break;
  }
  return mc;
}

std::size_t DropCounts::operator[](PruneFilter f) const noexcept {
  return const_cast<DropCounts&>(*this)[f];
}

DropCounts& DropCounts::operator+=(const DropCounts& o) noexcept {
  rp += o.rp;
  ap += o.ap;
  rpl += o.rpl;
  mc += o.mc;
  return *this;
}

PruneOutcome prune_pipeline(std::span<const Candidate> cands, const PruneConfig& cfg) {
  validate_prune_config(cfg);

  PruneOutcome out;
  out.verdicts.assign(cands.size(), std::nullopt);
  std::vector<std::size_t> alive(cands.size());
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;

  auto run_stage = [&](PruneFilter which, auto&& keep) {
    std::vector<std::size_t> next;
    next.reserve(alive.size());
    for (std::size_t i : alive) {
      if (keep(cands[i])) {
        next.push_back(i);
      } else {
        out.verdicts[i] = which;
        ++out.dropped_by[which];
      }
    }
    alive = std::move(next);
  };
  auto best_of = [&](auto score) {
    double best = -kInfinity;
    for (std::size_t i : alive) best = std::max(best, score(cands[i]));
    return best;
  };

  if (cfg.rp != 0.0) {
    const double best = best_of([](const Candidate& c) { return c.total_score; });
    run_stage(PruneFilter::relative, [&](const Candidate& c) {
      return passes_relative(c.total_score, best, cfg.rp);
    });
  }
  if (cfg.ap != kInfinity) {
    const double best = best_of([](const Candidate& c) { return c.total_score; });
    run_stage(PruneFilter::absolute, [&](const Candidate& c) {
      return passes_absolute(c.total_score, best, cfg.ap);
    });
  }
  if (cfg.rpl != 0.0) {
    const double best = best_of([](const Candidate& c) { return c.word_score; });
    run_stage(PruneFilter::relative_local, [&](const Candidate& c) {
      return passes_relative(c.word_score, best, cfg.rpl);
    });
  }
  if (cfg.mc) {
    std::unordered_map<HypothesisId, std::size_t> per_parent;
    run_stage(PruneFilter::max_candidates,
              [&](const Candidate& c) { return per_parent[c.parent_id]++ < *cfg.mc; });
  }

  out.kept.reserve(alive.size());
  for (std::size_t i : alive) out.kept.push_back(cands[i]);
  return out;
}

}  // namespace beamprune
