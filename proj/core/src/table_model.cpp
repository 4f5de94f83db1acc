#include "beamprune/table_model.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace beamprune {

TableModel::TableModel(Vocabulary vocab,
                       std::map<std::vector<TokenId>, std::vector<double>> log_probs)
    : vocab_(std::move(vocab)), log_probs_(std::move(log_probs)) {
  uniform_.assign(vocab_.size(), -std::log(static_cast<double>(vocab_.size())));
  for (const auto& [context, lp] : log_probs_) {
    const std::string name = "context '" + vocab_.decode(context) + "'";
    if (lp.size() != vocab_.size()) {
      throw ModelError(name + " has " + std::to_string(lp.size()) + " entries, expected " +
                       std::to_string(vocab_.size()));
    }
    for (TokenId t : context) {
      if (t == vocab_.eos_id()) throw ModelError(name + " contains EOS");
    }
    if (std::abs(log_sum_exp(lp)) > kNormalizationTolerance) {
      throw ModelError(name + " is not a normalized distribution");
    }
  }
}

TableModel TableModel::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("vocabulary") || !doc.contains("contexts")) {
    throw InputError("table fixture needs \"vocabulary\" and \"contexts\"");
  }
  const std::string eos = doc.value("eos", std::string(kDefaultEos));
  Vocabulary vocab(doc.at("vocabulary").get<std::vector<std::string>>(), eos);

  std::map<std::vector<TokenId>, std::vector<double>> table;
  for (const auto& [key, probs] : doc.at("contexts").items()) {
    if (!probs.is_array()) throw InputError("context '" + key + "' must map to an array");
    std::vector<double> lp;
    lp.reserve(probs.size());
    for (const auto& p : probs) {
      if (!p.is_number() || p.get<double>() < 0.0) {
        throw InputError("context '" + key + "' has a negative or non-numeric probability");
      }
      lp.push_back(std::log(p.get<double>()));
    }
    auto context = vocab.encode(key);
    if (!table.emplace(std::move(context), std::move(lp)).second) {
      throw InputError("duplicate context '" + key + "'");
    }
  }
  return TableModel(std::move(vocab), std::move(table));
}

TableModel TableModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open table fixture " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed table fixture " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json TableModel::to_json() const {
  nlohmann::json doc;
  doc["vocabulary"] = vocab_.tokens();
  doc["eos"] = vocab_.token(vocab_.eos_id());
  auto& contexts = doc["contexts"] = nlohmann::json::object();
  for (const auto& [context, lp] : log_probs_) {
    std::vector<double> probs;
    probs.reserve(lp.size());
    for (double x : lp) probs.push_back(std::exp(x));
    contexts[vocab_.decode(context)] = probs;
  }
  return doc;
}

ScorerState TableModel::init(std::span<const TokenId>) const { return make_state({}); }

StepOutput TableModel::step(const ScorerState& state, std::optional<TokenId> last_token) const {
  check_step_args(state, last_token);
  std::vector<TokenId> context = state.context;
  if (last_token) context.push_back(*last_token);
  auto it = log_probs_.find(context);
  return StepOutput{it == log_probs_.end() ? uniform_ : it->second,
                    make_state(std::move(context))};
}

}  // namespace beamprune
