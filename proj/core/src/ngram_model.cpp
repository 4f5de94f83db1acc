#include "beamprune/ngram_model.hpp"

#include <cmath>
#include <sstream>

namespace beamprune {

NGramModel::NGramModel(Vocabulary vocab, int order, double k)
    : vocab_(std::move(vocab)), order_(order), k_(k) {
  if (order < 1) throw ModelError("n-gram order must be >= 1");
  if (!(k > 0.0) || !std::isfinite(k)) throw ModelError("smoothing constant k must be > 0");
}

NGramModel NGramModel::train(Vocabulary vocab, std::span<const std::string> lines, int order,
                             double k) {
  NGramModel model(std::move(vocab), order, k);
  if (lines.empty()) throw InputError("n-gram training corpus is empty");
  std::vector<TokenId> sentence;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    sentence.clear();
    std::istringstream in(lines[i]);
    std::string tok;
    while (in >> tok) {
      auto id = model.vocab_.find(tok);
      if (!id) {
        throw InputError("unknown token '" + tok + "' on line " + std::to_string(i + 1));
      }
      sentence.push_back(*id);
    }
    model.add_sentence(sentence);
  }
  model.finalize();
  return model;
}

NGramModel NGramModel::train(Vocabulary vocab, std::span<const std::vector<TokenId>> sentences,
                             int order, double k) {
  NGramModel model(std::move(vocab), order, k);
  if (sentences.empty()) throw InputError("n-gram training corpus is empty");
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (TokenId t : sentences[i]) {
      if (!model.vocab_.contains(t)) {
        throw InputError("token id " + std::to_string(t) + " outside vocabulary on sentence " +
                         std::to_string(i + 1));
      }
    }
    model.add_sentence(sentences[i]);
  }
  model.finalize();
  return model;
}

std::vector<TokenId> NGramModel::shift(std::vector<TokenId> context, TokenId token) const {
  if (context.empty()) return context;
  context.erase(context.begin());
  context.push_back(token);
  return context;
}

void NGramModel::add_sentence(std::span<const TokenId> sentence) {
  const std::size_t v = vocab_.size();
  std::vector<TokenId> context(static_cast<std::size_t>(order_ - 1), kBeginMarker);
  auto count = [&](TokenId tok) {
    auto& entry = counts_[context];
    if (entry.counts.empty()) entry.counts.assign(v, 0);
    ++entry.counts[static_cast<std::size_t>(tok)];
    ++entry.total;
    context = shift(std::move(context), tok);
  };
  for (TokenId tok : sentence) count(tok);
  if (sentence.empty() || sentence.back() != vocab_.eos_id()) count(vocab_.eos_id());
}

void NGramModel::finalize() {
  const double v = static_cast<double>(vocab_.size());
  unseen_.assign(vocab_.size(), -std::log(v));
  for (const auto& [context, entry] : counts_) {
    std::vector<double> lp(vocab_.size());
    const double denom = static_cast<double>(entry.total) + k_ * v;
    for (std::size_t w = 0; w < lp.size(); ++w) {
      lp[w] = std::log((static_cast<double>(entry.counts[w]) + k_) / denom);
    }
    log_probs_.emplace(context, std::move(lp));
  }
}

std::vector<double> NGramModel::distribution(std::span<const TokenId> context) const {
  auto it = log_probs_.find(std::vector<TokenId>(context.begin(), context.end()));
  return it == log_probs_.end() ? unseen_ : it->second;
}

ScorerState NGramModel::init(std::span<const TokenId> source) const {
  std::vector<TokenId> context(static_cast<std::size_t>(order_ - 1), kBeginMarker);
  for (TokenId tok : source) {
    if (!vocab_.contains(tok)) {
      throw ModelError("source token id " + std::to_string(tok) + " outside vocabulary");
    }
    if (tok != vocab_.eos_id()) context = shift(std::move(context), tok);
  }
  return make_state(std::move(context));
}

StepOutput NGramModel::step(const ScorerState& state, std::optional<TokenId> last_token) const {
  check_step_args(state, last_token);
  std::vector<TokenId> context =
      last_token ? shift(state.context, *last_token) : state.context;
  auto lp = distribution(context);
  return StepOutput{std::move(lp), make_state(std::move(context))};
}

}  // namespace beamprune
