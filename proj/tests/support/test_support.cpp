#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "beamprune/random.hpp"

namespace beamprune::testing {

std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(BEAMPRUNE_FIXTURE_DIR) / name;
}

namespace {

struct RefHyp {
  std::vector<TokenId> tokens;
  std::vector<double> scores;
  double total = 0.0;
  ScorerState state;
};

struct RefCand {
  std::size_t parent;  // position in the active list == creation order
  TokenId token;
  double word;
  double total;
};

double normalized(const std::vector<double>& scores) {
  double total = 0.0;
  for (double s : scores) total += s;
  return total / static_cast<double>(scores.size());
}

}  // namespace

ReferenceResult reference_beam_search(std::span<const TokenId> source, const ScoringModel& model,
                                      std::size_t beam, std::size_t length_cap, bool normalize) {
  const TokenId eos = model.vocabulary().eos_id();
  ReferenceResult out;
  std::vector<RefHyp> active{RefHyp{{}, {}, 0.0, model.init(source)}};
  std::vector<RefHyp> finals;

  for (std::size_t t = 1;; ++t) {
    out.fan_out.push_back(active.size());
    out.beam.push_back(beam);
    std::vector<ScorerState> next_states;
    std::vector<RefCand> cands;
    for (std::size_t p = 0; p < active.size(); ++p) {
      std::optional<TokenId> last;
      if (!active[p].tokens.empty()) last = active[p].tokens.back();
      auto step = model.step(active[p].state, last);
      next_states.push_back(step.next);
      for (std::size_t w = 0; w < step.log_probs.size(); ++w) {
        cands.push_back(RefCand{p, static_cast<TokenId>(w), step.log_probs[w],
                                active[p].total + step.log_probs[w]});
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const RefCand& a, const RefCand& b) {
      if (a.total != b.total) return a.total > b.total;
      if (a.token != b.token) return a.token < b.token;
      return a.parent < b.parent;
    });
    if (cands.size() > beam) cands.resize(beam);

    std::vector<RefHyp> next;
    std::size_t ended = 0;
    for (const auto& c : cands) {
      RefHyp h = active[c.parent];
      h.tokens.push_back(c.token);
      h.scores.push_back(c.word);
      h.total = c.total;
      h.state = next_states[c.parent];
      if (c.token == eos) {
        finals.push_back(std::move(h));
        ++ended;
      } else {
        next.push_back(std::move(h));
      }
    }
    out.finals_per_step.push_back(ended);
    beam -= ended;
    if (next.size() > beam) next.resize(beam);
    active = std::move(next);
    if (beam == 0 || active.empty() || t >= length_cap) break;
  }

  if (finals.empty()) {
    for (auto& h : active) {
      auto step = model.step(h.state, h.tokens.back());
      h.tokens.push_back(eos);
      h.scores.push_back(step.log_probs[static_cast<std::size_t>(eos)]);
      finals.push_back(h);
    }
  }

  const RefHyp* best = nullptr;
  double best_score = 0.0;
  for (const auto& f : finals) {
    double total = 0.0;
    for (double s : f.scores) total += s;
    const double score = normalize ? normalized(f.scores) : total;
    if (!best || score > best_score || (score == best_score && f.tokens < best->tokens)) {
      best = &f;
      best_score = score;
    }
  }
  out.best_tokens = best->tokens;
  out.best_total = 0.0;
  for (double s : best->scores) out.best_total += s;
  return out;
}

// Discard rules as stated: drop when score <= threshold, keep otherwise.

std::vector<bool> brute_relative(const std::vector<Candidate>& cands, double rp) {
  std::vector<bool> keep(cands.size(), true);
  if (cands.empty() || rp == 0.0) return keep;
  double best = cands[0].total_score;
  for (const auto& c : cands) best = c.total_score > best ? c.total_score : best;
  const double threshold = best + std::log(rp);
  for (std::size_t i = 0; i < cands.size(); ++i) keep[i] = !(cands[i].total_score <= threshold);
  return keep;
}

std::vector<bool> brute_absolute(const std::vector<Candidate>& cands, double ap) {
  std::vector<bool> keep(cands.size(), true);
  if (cands.empty() || std::isinf(ap)) return keep;
  double best = cands[0].total_score;
  for (const auto& c : cands) best = c.total_score > best ? c.total_score : best;
  const double threshold = best - ap;
  for (std::size_t i = 0; i < cands.size(); ++i) keep[i] = !(cands[i].total_score <= threshold);
  return keep;
}

std::vector<bool> brute_relative_local(const std::vector<Candidate>& cands, double rpl) {
  std::vector<bool> keep(cands.size(), true);
  if (cands.empty() || rpl == 0.0) return keep;
  double best = cands[0].word_score;
  for (const auto& c : cands) best = c.word_score > best ? c.word_score : best;
  const double threshold = best + std::log(rpl);
  for (std::size_t i = 0; i < cands.size(); ++i) keep[i] = !(cands[i].word_score <= threshold);
  return keep;
}

std::vector<bool> brute_max_candidates(const std::vector<Candidate>& cands,
                                       std::optional<std::size_t> mc) {
  std::vector<bool> keep(cands.size(), true);
  if (!mc) return keep;
  // A candidate is dropped if mc better-ranked candidates of the same parent
  // are already kept.
  for (std::size_t i = 0; i < cands.size(); ++i) {
    std::size_t better_kept = 0;
    for (std::size_t j = 0; j < i; ++j) {
      if (keep[j] && cands[j].parent_id == cands[i].parent_id) ++better_kept;
    }
    keep[i] = better_kept < *mc;
  }
  return keep;
}

std::vector<Candidate> masked(const std::vector<Candidate>& cands, const std::vector<bool>& keep) {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (keep[i]) out.push_back(cands[i]);
  }
  return out;
}

std::vector<Candidate> random_candidates(std::mt19937_64& rng) {
  const std::size_t parents = 1 + uniform_index(rng, 6);
  const std::size_t vocab = 2 + uniform_index(rng, 10);
  const bool quantize = uniform_index(rng, 4) == 0;
  auto draw = [&](double scale) {
    double v = -scale * uniform_real(rng);
    if (quantize) v = std::round(v * 4.0) / 4.0;
    return v;
  };

  std::vector<Candidate> all;
  for (std::size_t p = 0; p < parents; ++p) {
    const double parent_total = draw(6.0);
    for (std::size_t w = 0; w < vocab; ++w) {
      const double word = draw(8.0);
      all.push_back(Candidate{p, static_cast<HypothesisId>(p + 10), static_cast<TokenId>(w), word,
                              parent_total + word});
    }
  }
  std::sort(all.begin(), all.end(), CandidateOrder{});
  const std::size_t n = 1 + uniform_index(rng, std::min<std::size_t>(all.size(), 30));
  all.resize(n);
  return all;
}

TableModel random_table_model(std::mt19937_64& rng, std::size_t vocab_size, std::size_t depth) {
  auto vocab = Vocabulary::synthetic(vocab_size);
  std::map<std::vector<TokenId>, std::vector<double>> table;
  std::vector<std::vector<TokenId>> frontier{{}};
  for (std::size_t len = 0; len < depth; ++len) {
    std::vector<std::vector<TokenId>> next;
    for (const auto& ctx : frontier) {
      std::vector<double> weights(vocab_size);
      double sum = 0.0;
      for (auto& w : weights) {
        // Exponential of a wide uniform gives peaked, tie-free distributions.
        w = std::exp(4.0 * uniform_real(rng));
        sum += w;
      }
      std::vector<double> lp(vocab_size);
      for (std::size_t i = 0; i < vocab_size; ++i) lp[i] = std::log(weights[i] / sum);
      table.emplace(ctx, std::move(lp));
      for (TokenId t = 0; t < static_cast<TokenId>(vocab_size); ++t) {
        if (t == vocab.eos_id()) continue;
        auto child = ctx;
        child.push_back(t);
        next.push_back(std::move(child));
      }
    }
    frontier = std::move(next);
  }
  return TableModel(std::move(vocab), std::move(table));
}

NGramModel random_ngram_model(std::mt19937_64& rng, std::size_t vocab_size, int order) {
  auto vocab = Vocabulary::synthetic(vocab_size);
  // Skewed unigram plus a random successor preference per token, so the
  // trained model has real structure rather than near-uniform counts.
  std::vector<TokenId> successor(vocab_size);
  for (auto& s : successor) s = static_cast<TokenId>(1 + uniform_index(rng, vocab_size - 1));
  std::vector<std::vector<TokenId>> sentences;
  for (int i = 0; i < 300; ++i) {
    std::vector<TokenId> s;
    const std::size_t len = 3 + uniform_index(rng, 12);
    TokenId prev = static_cast<TokenId>(1 + uniform_index(rng, vocab_size - 1));
    for (std::size_t j = 0; j < len; ++j) {
      s.push_back(prev);
      if (uniform_real(rng) < 0.6) {
        prev = successor[static_cast<std::size_t>(prev)];
      } else {
        const double u = uniform_real(rng);
        prev = static_cast<TokenId>(1 + static_cast<std::size_t>(u * u * double(vocab_size - 1)));
      }
    }
    sentences.push_back(std::move(s));
  }
  return NGramModel::train(std::move(vocab), sentences, order, 0.05);
}

PlantedPathModel planted_model(std::size_t vocab_size, std::size_t depth, std::uint64_t seed,
                               double p_hi, double p_decoy) {
  PlantedParams params{p_hi, depth > 0 ? p_decoy : 0.0, depth};
  return PlantedPathModel::with_lexicon(Vocabulary::synthetic(vocab_size), params, seed);
}

PruneConfig random_prune_config(std::mt19937_64& rng, bool allow_neutral) {
  while (true) {
    PruneConfig cfg;
    if (uniform_index(rng, 2)) cfg.rp = 0.9 * uniform_real(rng);
    if (uniform_index(rng, 2)) cfg.ap = 0.25 + 5.0 * uniform_real(rng);
    if (uniform_index(rng, 2)) cfg.rpl = 0.5 * uniform_real(rng);
    if (uniform_index(rng, 2)) cfg.mc = 1 + uniform_index(rng, 4);
    if (allow_neutral || !cfg.is_neutral()) return cfg;
  }
}

namespace {

void null_timing(nlohmann::json& j) {
  if (j.is_object()) {
    for (auto& [key, value] : j.items()) {
      if (key == "wall_time_s" || key == "speedup") {
        value = nullptr;
      } else {
        null_timing(value);
      }
    }
  }
}

std::string drop_column(const std::string& text, std::size_t column, char sep) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto pos = line.find(sep, start);
      cells.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (column < cells.size()) cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(column));
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? std::string(1, sep) : "") << cells[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace

std::string mask_timing(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string name = file.filename().string();
  if (name == "summary.json") {
    auto j = nlohmann::json::parse(buf.str());
    null_timing(j);
    return j.dump(2);
  }
  if (name == "report.csv") return drop_column(buf.str(), 4, ',');
  if (name == "sweep.csv") return drop_column(buf.str(), 5, ',');
  if (name == "table.txt") {
    // Column widths depend on the speed-up text, so compare trimmed cells.
    std::string dropped = drop_column(buf.str(), 2, '|');
    std::string squeezed;
    for (char c : dropped) {
      if (c != ' ') squeezed += c;
    }
    return squeezed;
  }
  return buf.str();
}

}  // namespace beamprune::testing
