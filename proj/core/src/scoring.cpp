#include "beamprune/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

namespace beamprune {

namespace {
std::atomic<std::uint64_t> next_model_id{1};
}  // namespace

ScoringModel::ScoringModel() : id_(next_model_id.fetch_add(1, std::memory_order_relaxed)) {}

void ScoringModel::check_step_args(const ScorerState& state,
                                   std::optional<TokenId> last_token) const {
  if (state.owner != id_) {
    throw ModelError("scorer state was produced by a different model instance");
  }
  if (last_token) {
    const auto& vocab = vocabulary();
    if (!vocab.contains(*last_token)) {
      throw ModelError("token id " + std::to_string(*last_token) + " outside vocabulary");
    }
    if (*last_token == vocab.eos_id()) throw ModelError("cannot extend a hypothesis past EOS");
  }
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double hi = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

UniformModel::UniformModel(Vocabulary vocab) : vocab_(std::move(vocab)) {}

ScorerState UniformModel::init(std::span<const TokenId>) const { return make_state({}); }

StepOutput UniformModel::step(const ScorerState& state, std::optional<TokenId> last_token) const {
  check_step_args(state, last_token);
  const double lp = -std::log(static_cast<double>(vocab_.size()));
  return StepOutput{std::vector<double>(vocab_.size(), lp), state};
}

}  // namespace beamprune
