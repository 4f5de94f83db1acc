#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace beamprune {

using TokenId = std::int32_t;
using HypothesisId = std::uint64_t;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An out-of-range or inconsistent configuration field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Scoring-model misuse (foreign state, bad token) or a malformed model.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Bad user input: unknown tokens, unreadable files, malformed corpora.
class InputError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::string_view kDefaultEos = "</s>";

/// Ordered set of distinct token strings with a designated end-of-sequence
/// token. Index <-> string is a bijection.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, std::string_view eos = kDefaultEos);

  /// `size` tokens: "</s>" at index 0 followed by "w1" .. "w{size-1}".
  static Vocabulary synthetic(std::size_t size);

  /// "</s>" followed by every distinct whitespace-separated token of `lines`
  /// in lexicographic order.
  static Vocabulary from_corpus(std::span<const std::string> lines);

  std::size_t size() const noexcept { return tokens_.size(); }
  TokenId eos_id() const noexcept { return eos_id_; }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  TokenId id(std::string_view token) const;  // throws InputError
  bool contains(TokenId id) const noexcept {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// Token ids of the whitespace-separated `line`. Throws InputError naming
  /// the first unknown token.
  std::vector<TokenId> encode(std::string_view line) const;
  std::string decode(std::span<const TokenId> ids) const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && eos_id_ == other.eos_id_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId eos_id_ = 0;
};

/// Opaque per-hypothesis scorer state. Only the model that created it may
/// interpret `context`; `owner` identifies that model instance.
struct ScorerState {
  std::uint64_t owner = 0;
  std::vector<TokenId> context;

  bool operator==(const ScorerState&) const = default;
};

/// A partial target sequence.
struct Hypothesis {
  HypothesisId id = 0;
  std::optional<HypothesisId> parent_id;
  std::vector<TokenId> tokens;
  std::vector<double> word_scores;
  double total_score = 0.0;
  ScorerState scorer_state;

  std::optional<TokenId> last_token() const {
    if (tokens.empty()) return std::nullopt;
    return tokens.back();
  }
};

/// One-token extension of an active hypothesis; the unit the pruning filters
/// operate on. `parent_index` is the parent's position in the active list that
/// produced this candidate, `parent_id` its identity (creation order).
struct Candidate {
  std::size_t parent_index = 0;
  HypothesisId parent_id = 0;
  TokenId token = 0;
  double word_score = 0.0;
  double total_score = 0.0;

  bool operator==(const Candidate&) const = default;
};

/// Ranking used everywhere candidates are sorted: total score descending,
/// then token ascending, then parent creation order.
struct CandidateOrder {
  bool operator()(const Candidate& a, const Candidate& b) const noexcept {
    if (a.total_score != b.total_score) return a.total_score > b.total_score;
    if (a.token != b.token) return a.token < b.token;
    return a.parent_id < b.parent_id;
  }
};

/// A completed hypothesis (last token is EOS).
struct FinalHypothesis {
  std::vector<TokenId> tokens;
  std::vector<double> word_scores;
  double total_score = 0.0;
  double normalized_score = 0.0;  // total_score / tokens.size(), EOS included

  bool operator==(const FinalHypothesis&) const = default;
};

FinalHypothesis make_final(std::vector<TokenId> tokens, std::vector<double> word_scores);

/// Sum of `scores` accumulated left to right. Every component that totals
/// per-step scores goes through here so equal inputs give equal bits.
double sum_scores(std::span<const double> scores);

/// True when `a` ranks before `b` as a final output: higher (normalized or
/// total) score, then lexicographically smaller token sequence.
bool better_final(const FinalHypothesis& a, const FinalHypothesis& b, bool normalize);

}  // namespace beamprune
