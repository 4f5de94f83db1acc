#include "beamprune/corpus.hpp"

#include <cmath>
#include <fstream>

#include "beamprune/planted_model.hpp"
#include "beamprune/random.hpp"

namespace beamprune {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<Sentence> encode_corpus(std::span<const std::string> lines, const Vocabulary& vocab) {
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(vocab.encode(lines[i]));
    } catch (const InputError& e) {
      throw InputError(std::string(e.what()) + " on line " + std::to_string(i + 1));
    }
  }
  return out;
}

void write_corpus(const std::filesystem::path& path, std::span<const Sentence> sentences,
                  const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& s : sentences) out << vocab.decode(s) << '\n';
  if (!out) throw InputError("failed writing " + path.string());
}

namespace {

std::vector<TokenId> content_tokens(const Vocabulary& vocab) {
  std::vector<TokenId> out;
  for (TokenId t = 0; t < static_cast<TokenId>(vocab.size()); ++t) {
    if (t != vocab.eos_id()) out.push_back(t);
  }
  return out;
}

TokenId sample(std::span<const double> log_probs, std::mt19937_64& rng) {
  const double u = uniform_real(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    acc += std::exp(log_probs[i]);
    if (u < acc) return static_cast<TokenId>(i);
  }
  return static_cast<TokenId>(log_probs.size() - 1);
}

}  // namespace

GeneratedCorpus generate_corpus(const ScoringModel& model, std::size_t n, std::uint64_t seed,
                                CorpusShape shape) {
  if (n < 1) throw InputError("corpus size must be >= 1");
  if (shape.min_len > shape.max_len) throw InputError("min_len exceeds max_len");

  const auto& vocab = model.vocabulary();
  const auto* planted = dynamic_cast<const PlantedPathModel*>(&model);
  const bool uniform_lengths = planted || dynamic_cast<const UniformModel*>(&model);
  const auto content = content_tokens(vocab);

  GeneratedCorpus corpus;
  corpus.sources.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    Sentence s;
    if (uniform_lengths) {
      const std::size_t len =
          shape.min_len + uniform_index(rng, shape.max_len - shape.min_len + 1);
      for (std::size_t j = 0; j < len; ++j) s.push_back(content[uniform_index(rng, content.size())]);
    } else {
      auto state = model.init({});
      std::optional<TokenId> last;
      while (s.size() < shape.max_len) {
        auto out = model.step(state, last);
        const TokenId tok = sample(out.log_probs, rng);
        if (tok == vocab.eos_id()) break;
        s.push_back(tok);
        state = std::move(out.next);
        last = tok;
      }
    }
    if (planted) corpus.targets.push_back(planted->planted_target(s));
    corpus.sources.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace beamprune
