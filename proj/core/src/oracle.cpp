#include "beamprune/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "beamprune/config.hpp"

namespace beamprune {

namespace {

class Enumerator {
 public:
  Enumerator(const ScoringModel& model, std::size_t cap, bool normalize)
      : model_(model), eos_(model.vocabulary().eos_id()), cap_(cap), normalize_(normalize) {}

  OracleResult run(std::span<const TokenId> source) {
    visit(model_.init(source), std::nullopt, 0.0);
    return best_;
  }

 private:
  void visit(const ScorerState& state, std::optional<TokenId> last, double total) {
    auto out = model_.step(state, last);
    if (out.log_probs.size() != model_.vocabulary().size()) {
      throw ModelError("model returned a distribution of the wrong size");
    }

    prefix_.push_back(eos_);
    consider(total + out.log_probs[static_cast<std::size_t>(eos_)]);
    prefix_.pop_back();

    if (prefix_.size() + 1 >= cap_) return;
    for (std::size_t tok = 0; tok < out.log_probs.size(); ++tok) {
      const auto id = static_cast<TokenId>(tok);
      if (id == eos_) continue;
      prefix_.push_back(id);
      visit(out.next, id, total + out.log_probs[tok]);
      prefix_.pop_back();
    }
  }

  void consider(double total) {
    ++best_.n_enumerated;
    const double normalized = total / static_cast<double>(prefix_.size());
    const double score = normalize_ ? normalized : total;
    bool take = !found_;
    if (found_) {
      const double best = normalize_ ? best_.best_normalized : best_.best_total;
      take = score > best ||
             (score == best && std::lexicographical_compare(prefix_.begin(), prefix_.end(),
                                                            best_.best_tokens.begin(),
                                                            best_.best_tokens.end()));
    }
    if (take) {
      found_ = true;
      best_.best_tokens = prefix_;
      best_.best_total = total;
      best_.best_normalized = normalized;
    }
  }

  const ScoringModel& model_;
  TokenId eos_;
  std::size_t cap_;
  bool normalize_;
  std::vector<TokenId> prefix_;
  OracleResult best_;
  bool found_ = false;
};

}  // namespace

OracleResult exhaustive_best(std::span<const TokenId> source, const ScoringModel& model,
                             std::size_t cap, bool normalize) {
  if (cap == 0) throw ConfigError("cap", "must be >= 1");
  const double content = static_cast<double>(model.vocabulary().size() - 1);
  if (std::pow(content, static_cast<double>(cap)) > static_cast<double>(kOracleLimit)) {
    throw ConfigError("cap", "(|V|-1)^cap exceeds the oracle limit of " +
                                 std::to_string(kOracleLimit));
  }
  return Enumerator(model, cap, normalize).run(source);
}

}  // namespace beamprune
