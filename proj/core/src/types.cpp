#include "beamprune/types.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace beamprune {

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::string_view eos)
    : tokens_(std::move(tokens)) {
  if (tokens_.size() < 2) {
    throw InputError("vocabulary needs at least one content token plus EOS");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& tok = tokens_[i];
    if (tok.empty() || tok.find_first_of(" \t\r\n") != std::string::npos) {
      throw InputError("vocabulary token at index " + std::to_string(i) +
                       " is empty or contains whitespace");
    }
    if (!index_.emplace(tok, static_cast<TokenId>(i)).second) {
      throw InputError("duplicate vocabulary token '" + tok + "'");
    }
  }
  auto it = index_.find(std::string(eos));
  if (it == index_.end()) {
    throw InputError("EOS token '" + std::string(eos) + "' not in vocabulary");
  }
  eos_id_ = it->second;
}

Vocabulary Vocabulary::synthetic(std::size_t size) {
  if (size < 2) throw InputError("synthetic vocabulary size must be >= 2");
  std::vector<std::string> tokens;
  tokens.reserve(size);
  tokens.emplace_back(kDefaultEos);
  for (std::size_t i = 1; i < size; ++i) tokens.push_back("w" + std::to_string(i));
  return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::from_corpus(std::span<const std::string> lines) {
  std::set<std::string> seen;
  for (const auto& line : lines) {
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
      if (tok != kDefaultEos) seen.insert(tok);
    }
  }
  std::vector<std::string> tokens;
  tokens.emplace_back(kDefaultEos);
  tokens.insert(tokens.end(), seen.begin(), seen.end());
  return Vocabulary(std::move(tokens));
}

const std::string& Vocabulary::token(TokenId id) const {
  if (!contains(id)) throw InputError("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view token) const {
  if (auto found = find(token)) return *found;
  throw InputError("unknown token '" + std::string(token) + "'");
}

std::vector<TokenId> Vocabulary::encode(std::string_view line) const {
  std::vector<TokenId> ids;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) ids.push_back(id(tok));
  return ids;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

double sum_scores(std::span<const double> scores) {
  double total = 0.0;
  for (double s : scores) total += s;
  return total;
}

FinalHypothesis make_final(std::vector<TokenId> tokens, std::vector<double> word_scores) {
  FinalHypothesis f;
  f.total_score = sum_scores(word_scores);
  f.normalized_score =
      tokens.empty() ? f.total_score : f.total_score / static_cast<double>(tokens.size());
  f.tokens = std::move(tokens);
  f.word_scores = std::move(word_scores);
  return f;
}

bool better_final(const FinalHypothesis& a, const FinalHypothesis& b, bool normalize) {
  const double sa = normalize ? a.normalized_score : a.total_score;
  const double sb = normalize ? b.normalized_score : b.total_score;
  if (sa != sb) return sa > sb;
  return std::lexicographical_compare(a.tokens.begin(), a.tokens.end(), b.tokens.begin(),
                                      b.tokens.end());
}

}  // namespace beamprune
