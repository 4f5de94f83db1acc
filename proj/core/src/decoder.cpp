#include "beamprune/decoder.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <thread>

namespace beamprune {

namespace {

struct StepView {
  std::size_t step;
  std::span<const Hypothesis> active;
  std::span<const Candidate> pool;       // [0, considered) sorted; rest cut by the beam
  std::size_t considered;
  const PruneOutcome& outcome;           // over pool[0, considered)
  std::span<const Hypothesis> next_active;
};

using StepObserver = std::function<void(const StepView&)>;

class BeamSearch {
 public:
  BeamSearch(std::span<const TokenId> source, const ScoringModel& model, const DecodeConfig& cfg)
      : source_(source), model_(model), cfg_(cfg), vocab_(model.vocabulary()) {}

  DecodeResult run(const StepObserver* observer) {
    validate_config(cfg_);
    for (TokenId t : source_) {
      if (!vocab_.contains(t)) {
        throw InputError("source token id " + std::to_string(t) + " outside vocabulary");
      }
    }

    DecodeResult result;
    std::vector<Hypothesis> active(1);
    active[0].id = next_id_++;
    active[0].scorer_state = model_.init(source_);

    std::optional<std::size_t> beam = cfg_.beam_size;
    const std::size_t cap = cfg_.length_cap(source_.size());
    std::size_t t = 0;

    while (true) {
      ++t;
      auto& trace = result.trace;
      trace.fan_out_per_step.push_back(active.size());
      trace.beam_per_step.push_back(beam);

      std::vector<StepOutput> expanded;
      expanded.reserve(active.size());
      std::vector<Candidate> pool;
      pool.reserve(active.size() * vocab_.size());
      for (std::size_t i = 0; i < active.size(); ++i) {
        expanded.push_back(expand(active[i]));
        const auto& lp = expanded.back().log_probs;
        for (std::size_t tok = 0; tok < lp.size(); ++tok) {
          pool.push_back(Candidate{i, active[i].id, static_cast<TokenId>(tok), lp[tok],
                                   active[i].total_score + lp[tok]});
        }
      }

      std::size_t considered = pool.size();
      if (beam && *beam < pool.size()) {
        considered = *beam;
        std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(considered),
                          pool.end(), CandidateOrder{});
      } else {
        std::sort(pool.begin(), pool.end(), CandidateOrder{});
      }

      auto outcome =
          prune_pipeline(std::span<const Candidate>(pool.data(), considered), cfg_.prune);
      trace.dropped_per_step.push_back(outcome.dropped_by);

      std::size_t finals_now = 0;
      std::vector<Hypothesis> next;
      for (const auto& cand : outcome.kept) {
        if (cand.token == vocab_.eos_id()) {
          auto h = extend(active[cand.parent_index], cand, expanded[cand.parent_index].next);
          result.finals.push_back(make_final(std::move(h.tokens), std::move(h.word_scores)));
          ++finals_now;
        }
      }
      if (beam) *beam -= finals_now;
      const std::size_t limit = beam ? *beam : cfg_.unbounded_cap;
      for (const auto& cand : outcome.kept) {
        if (cand.token == vocab_.eos_id()) continue;
        if (next.size() >= limit) break;
        next.push_back(extend(active[cand.parent_index], cand, expanded[cand.parent_index].next));
      }
      trace.finals_per_step.push_back(finals_now);

      if (observer) {
        (*observer)(StepView{t, active, pool, considered, outcome, next});
      }
      active = std::move(next);

      if ((beam && *beam == 0) || active.empty() || t >= cap) break;
    }

    result.steps = t;
    if (result.finals.empty()) {
      result.force_completed = true;
      for (const auto& h : active) {
        auto out = expand(h);
        const double lp = out.log_probs[static_cast<std::size_t>(vocab_.eos_id())];
        auto tokens = h.tokens;
        auto scores = h.word_scores;
        tokens.push_back(vocab_.eos_id());
        scores.push_back(lp);
        result.finals.push_back(make_final(std::move(tokens), std::move(scores)));
      }
    }
    if (result.finals.empty()) throw ModelError("decode produced no final hypothesis");

    result.best = *std::min_element(
        result.finals.begin(), result.finals.end(),
        [&](const FinalHypothesis& a, const FinalHypothesis& b) {
          return better_final(a, b, cfg_.normalize_by_length);
        });
    return result;
  }

 private:
  StepOutput expand(const Hypothesis& h) const {
    auto out = model_.step(h.scorer_state, h.last_token());
    if (out.log_probs.size() != vocab_.size()) {
      throw ModelError("model returned " + std::to_string(out.log_probs.size()) +
                       " scores for a vocabulary of " + std::to_string(vocab_.size()));
    }
    return out;
  }

  Hypothesis extend(const Hypothesis& parent, const Candidate& cand, const ScorerState& state) {
    Hypothesis h;
    h.id = next_id_++;
    h.parent_id = parent.id;
    h.tokens = parent.tokens;
    h.tokens.push_back(cand.token);
    h.word_scores = parent.word_scores;
    h.word_scores.push_back(cand.word_score);
    h.total_score = cand.total_score;
    h.scorer_state = state;
    return h;
  }

  std::span<const TokenId> source_;
  const ScoringModel& model_;
  const DecodeConfig& cfg_;
  const Vocabulary& vocab_;
  HypothesisId next_id_ = 0;
};

bool has_prefix(const std::vector<TokenId>& tokens, std::span<const TokenId> target,
                std::size_t len) {
  return tokens.size() == len && std::equal(tokens.begin(), tokens.end(), target.begin());
}

}  // namespace

DecodeResult decode(std::span<const TokenId> source, const ScoringModel& model,
                    const DecodeConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  auto result = BeamSearch(source, model, cfg).run(nullptr);
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<DecodeResult> decode_corpus(std::span<const std::vector<TokenId>> sources,
                                        const ScoringModel& model, const DecodeConfig& cfg,
                                        std::size_t jobs) {
  validate_config(cfg);
  std::vector<DecodeResult> results(sources.size());
  if (sources.empty()) return results;

  // Indices are handed out in increasing order and nothing past the smallest
  // known failure is started, so the reported failure is the smallest failing
  // index regardless of scheduling.
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> first_failure{sources.size()};
  std::mutex mu;
  std::string failure_message;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= sources.size() || i > first_failure.load()) return;
      try {
        results[i] = decode(sources[i], model, cfg);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        if (i < first_failure.load()) {
          first_failure.store(i);
          failure_message = e.what();
        }
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, sources.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  if (first_failure.load() < sources.size()) {
    throw Error("sentence " + std::to_string(first_failure.load()) + ": " + failure_message);
  }
  return results;
}

std::optional<PruneEvent> locate_prune_step(std::span<const TokenId> source,
                                            const ScoringModel& model, const DecodeConfig& cfg,
                                            std::span<const TokenId> target) {
  const auto eos = model.vocabulary().eos_id();
  if (target.empty() || target.back() != eos) {
    throw InputError("target must be a complete sequence ending in EOS");
  }

  std::optional<PruneEvent> event;
  bool completed = false;
  std::size_t alive = 0;  // target tokens carried by an active hypothesis

  StepObserver observer = [&](const StepView& v) {
    if (event || completed || alive >= target.size()) return;
    const auto parent = std::find_if(v.active.begin(), v.active.end(), [&](const Hypothesis& h) {
      return has_prefix(h.tokens, target, alive);
    });
    if (parent == v.active.end()) return;
    const auto parent_id = parent->id;
    const TokenId want = target[alive];

    auto loss = [&](LossCause cause, std::optional<PruneFilter> filter) {
      event = PruneEvent{v.step, cause, filter, alive};
    };
    const auto it = std::find_if(v.pool.begin(), v.pool.end(), [&](const Candidate& c) {
      return c.parent_id == parent_id && c.token == want;
    });
    const auto pos = static_cast<std::size_t>(it - v.pool.begin());
    if (pos >= v.considered) return loss(LossCause::beam, std::nullopt);
    if (v.outcome.verdicts[pos]) return loss(LossCause::filter, v.outcome.verdicts[pos]);
    if (want == eos) {
      completed = true;
      return;
    }
    const bool carried = std::any_of(v.next_active.begin(), v.next_active.end(),
                                     [&](const Hypothesis& h) {
                                       return has_prefix(h.tokens, target, alive + 1);
                                     });
    if (!carried) return loss(LossCause::beam, std::nullopt);
    ++alive;
  };

  auto result = BeamSearch(source, model, cfg).run(&observer);
  if (event || completed) return event;
  if (result.force_completed && alive + 1 == target.size()) return std::nullopt;
  return PruneEvent{result.steps, LossCause::length_cap, std::nullopt, alive};
}

}  // namespace beamprune
