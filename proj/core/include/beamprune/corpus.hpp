#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "beamprune/scoring.hpp"

namespace beamprune {

using Sentence = std::vector<TokenId>;

/// Lines of a UTF-8 text file without trailing newlines. Throws InputError
/// when the file cannot be read.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Encodes one whitespace-tokenized sentence per line; sentence ids are
/// 0-based line numbers. Throws InputError naming the token and 1-based line.
std::vector<Sentence> encode_corpus(std::span<const std::string> lines, const Vocabulary& vocab);

void write_corpus(const std::filesystem::path& path, std::span<const Sentence> sentences,
                  const Vocabulary& vocab);

struct CorpusShape {
  std::size_t min_len = 4;
  std::size_t max_len = 12;
};

struct GeneratedCorpus {
  std::vector<Sentence> sources;
  std::vector<Sentence> targets;  // planted targets (EOS included); empty for other models
};

/// `n` synthetic source sentences. Sentence i is drawn from an RNG seeded
/// with derive_seed(seed, i). Uniform and planted models get content tokens
/// drawn uniformly with a length uniform in [min_len, max_len]; other models
/// are sampled ancestrally from the empty source until EOS or max_len.
GeneratedCorpus generate_corpus(const ScoringModel& model, std::size_t n, std::uint64_t seed,
                                CorpusShape shape = {});

}  // namespace beamprune
