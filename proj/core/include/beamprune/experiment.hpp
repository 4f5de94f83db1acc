#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "beamprune/config.hpp"
#include "beamprune/corpus.hpp"
#include "beamprune/decoder.hpp"
#include "beamprune/metrics.hpp"
#include "beamprune/model_spec.hpp"

namespace beamprune {

struct SweepSpec {
  std::string parameter;  // rp | ap | rpl | mc
  std::vector<double> values;
};

/// One experiment grid. configs[0] is the baseline every other run is
/// compared against; it must use neutral pruning when compare_to_baseline
/// is set.
struct ExperimentSpec {
  std::string model = "uniform";
  std::filesystem::path corpus;  // empty: synthesize `sentences` sentences from `seed`
  std::size_t sentences = 0;
  std::uint64_t seed = 0;
  std::vector<DecodeConfig> configs;
  std::filesystem::path out_dir = "out";
  std::size_t jobs = 1;
  bool compare_to_baseline = true;
  std::optional<SweepSpec> sweep;
};

void to_json(nlohmann::json& j, const ExperimentSpec& spec);
void from_json(const nlohmann::json& j, ExperimentSpec& spec);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// Throws ConfigError on an empty grid, an invalid config, or a non-neutral
/// baseline when comparison is requested.
void validate_experiment(const ExperimentSpec& spec);

/// Copy of `base` with one threshold set from a sweep value. Throws
/// ConfigError for an unknown parameter or an out-of-range value.
DecodeConfig with_parameter(DecodeConfig base, const std::string& parameter, double value);

struct ConfigRun {
  DecodeConfig config;
  std::vector<DecodeResult> results;
  CorpusReport report;
};

struct ExperimentRuns {
  std::shared_ptr<const ScoringModel> model;
  std::vector<Sentence> sources;
  std::vector<ConfigRun> runs;
};

/// Loads the model and corpus, then decodes the corpus under every config.
ExperimentRuns run_experiment(const ExperimentSpec& spec);

/// Plain-text table with one row per run: pruning, beam size, speed up,
/// avg fan out per sent, tot fan out per sent, changed.
std::string format_table(const std::vector<ConfigRun>& runs);

/// Runs every config and writes table.txt plus run_NN/report.csv and
/// run_NN/summary.json under spec.out_dir. Nothing is left behind on failure.
ExperimentRuns cmd_decode(const ExperimentSpec& spec);

struct SweepRow {
  double value = 0.0;
  DecodeConfig config;
  CorpusReport report;
  bool selected = false;
};

/// One run per sweep value against the baseline, holding everything else at
/// configs[1] (or the baseline when there is only one config). The selected
/// row is the most aggressive value whose changed fraction is 0: the largest
/// rp/rpl, the smallest ap/mc. Writes sweep.csv and table.txt.
std::vector<SweepRow> cmd_sweep(const ExperimentSpec& spec);

/// Writes `n` sentences to `path`; planted models also get `path`.targets.
GeneratedCorpus cmd_gen_corpus(const std::string& model_spec, std::size_t n, std::uint64_t seed,
                               const std::filesystem::path& path);

}  // namespace beamprune
