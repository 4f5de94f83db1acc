#include "beamprune/planted_model.hpp"

#include <cmath>
#include <numeric>

#include "beamprune/random.hpp"

namespace beamprune {

namespace {
constexpr TokenId kOffPath = -1;
}  // namespace

PlantedPathModel::PlantedPathModel(Vocabulary vocab, PlantedParams params)
    : vocab_(std::move(vocab)), params_(params) {
  validate();
}

PlantedPathModel::PlantedPathModel(Vocabulary vocab, PlantedParams params,
                                   std::vector<TokenId> planted)
    : PlantedPathModel(std::move(vocab), params) {
  for (std::size_t i = 0; i < planted.size(); ++i) {
    if (!vocab_.contains(planted[i])) throw ModelError("planted token outside vocabulary");
    if (planted[i] == vocab_.eos_id() && i + 1 != planted.size()) {
      throw ModelError("planted sequence has EOS before its end");
    }
  }
  if (planted.empty() || planted.back() != vocab_.eos_id()) planted.push_back(vocab_.eos_id());
  fixed_ = std::move(planted);
}

PlantedPathModel PlantedPathModel::with_lexicon(Vocabulary vocab, PlantedParams params,
                                                std::uint64_t seed) {
  PlantedPathModel model(std::move(vocab), params);
  std::vector<TokenId> content;
  for (TokenId t = 0; t < static_cast<TokenId>(model.vocab_.size()); ++t) {
    if (t != model.vocab_.eos_id()) content.push_back(t);
  }
  std::vector<TokenId> image = content;
  std::mt19937_64 rng(splitmix64(seed));
  fisher_yates(std::span<TokenId>(image), rng);
  model.lexicon_.assign(model.vocab_.size(), model.vocab_.eos_id());
  for (std::size_t i = 0; i < content.size(); ++i) {
    model.lexicon_[static_cast<std::size_t>(content[i])] = image[i];
  }
  return model;
}

void PlantedPathModel::validate() const {
  const double v = static_cast<double>(vocab_.size());
  const auto& p = params_;
  if (!(p.p_hi > 0.0 && p.p_hi < 1.0)) throw ModelError("p_hi must be in (0, 1)");
  if (!(p.p_hi > (1.0 - p.p_hi) / (v - 1.0))) {
    throw ModelError("p_hi must exceed the uniform share of the remaining mass");
  }
  if (p.depth == 0) return;
  if (vocab_.size() < 3) throw ModelError("a decoy needs a vocabulary of at least 3 tokens");
  if (!(p.p_decoy > p.p_hi)) throw ModelError("p_decoy must exceed p_hi");
  if (!(p.p_hi + p.p_decoy < 1.0)) throw ModelError("p_hi + p_decoy must be < 1");
  if (!(p.p_hi > (1.0 - p.p_hi - p.p_decoy) / (v - 2.0))) {
    throw ModelError("p_hi must exceed the uniform share left beside the decoy");
  }
}

std::vector<TokenId> PlantedPathModel::planted_target(std::span<const TokenId> source) const {
  if (fixed_) return *fixed_;
  std::vector<TokenId> target;
  target.reserve(source.size() + 1);
  for (TokenId t : source) {
    if (!vocab_.contains(t)) {
      throw ModelError("source token id " + std::to_string(t) + " outside vocabulary");
    }
    if (t != vocab_.eos_id()) target.push_back(lexicon_[static_cast<std::size_t>(t)]);
  }
  target.push_back(vocab_.eos_id());
  return target;
}

TokenId PlantedPathModel::decoy_token(TokenId planted, std::size_t position) const {
  const auto v = static_cast<TokenId>(vocab_.size());
  TokenId c = static_cast<TokenId>((static_cast<std::size_t>(planted) + 1 + position) %
                                   vocab_.size());
  while (c == planted || c == vocab_.eos_id()) c = (c + 1) % v;
  return c;
}

ScorerState PlantedPathModel::init(std::span<const TokenId> source) const {
  // context = [matched planted tokens or kOffPath, target...]
  std::vector<TokenId> context{0};
  auto target = planted_target(source);
  context.insert(context.end(), target.begin(), target.end());
  return make_state(std::move(context));
}

StepOutput PlantedPathModel::step(const ScorerState& state,
                                  std::optional<TokenId> last_token) const {
  check_step_args(state, last_token);
  if (state.context.empty()) throw ModelError("malformed planted-path state");
  std::vector<TokenId> context = state.context;
  TokenId& position = context[0];
  const std::size_t target_len = context.size() - 1;
  if (last_token && position != kOffPath) {
    const auto pos = static_cast<std::size_t>(position);
    position = (pos < target_len && context[pos + 1] == *last_token)
                   ? static_cast<TokenId>(pos + 1)
                   : kOffPath;
  }

  const std::size_t n = vocab_.size();
  const double v = static_cast<double>(n);
  std::vector<double> lp;
  if (position == kOffPath || static_cast<std::size_t>(position) >= target_len) {
    lp.assign(n, -std::log(v));
  } else {
    const auto pos = static_cast<std::size_t>(position);
    const TokenId planted = context[pos + 1];
    if (pos < params_.depth) {
      const TokenId decoy = decoy_token(planted, pos);
      lp.assign(n, std::log((1.0 - params_.p_hi - params_.p_decoy) / (v - 2.0)));
      lp[static_cast<std::size_t>(decoy)] = std::log(params_.p_decoy);
    } else {
      lp.assign(n, std::log((1.0 - params_.p_hi) / (v - 1.0)));
    }
    lp[static_cast<std::size_t>(planted)] = std::log(params_.p_hi);
  }
  return StepOutput{std::move(lp), make_state(std::move(context))};
}

}  // namespace beamprune
