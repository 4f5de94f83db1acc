#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "beamprune/decoder.hpp"

namespace beamprune {

struct SentenceMetrics {
  double avg_fan_out = 0.0;   // mean hypotheses expanded per step
  std::size_t tot_fan_out = 0;
  std::size_t steps = 0;
  double wall_time_s = 0.0;
};

/// Throws InputError for an empty trace.
SentenceMetrics sentence_metrics(const DecodeTrace& trace, double wall_time_s);

/// Corpus means over sentences, the columns of a results table.
struct RunSummary {
  std::size_t sentences = 0;
  double avg_fan_out = 0.0;  // mean of per-sentence avg_fan_out
  double tot_fan_out = 0.0;  // mean of per-sentence tot_fan_out
  double steps = 0.0;
  double wall_time_s = 0.0;  // summed
};

RunSummary summarize(std::span<const SentenceMetrics> sentences);

struct CorpusReport {
  std::vector<SentenceMetrics> sentences;
  RunSummary summary;
  std::optional<RunSummary> baseline;
  std::vector<bool> changed;          // per sentence; empty without a baseline
  std::size_t changed_count = 0;
  double changed_fraction = 0.0;
  std::optional<double> speedup;      // baseline_time / time - 1

  bool has_baseline() const noexcept { return baseline.has_value(); }
};

/// Metrics of a single run with no baseline attached.
CorpusReport report_run(std::span<const DecodeResult> run);

/// Metrics of `pruned` measured against `baseline` (same sources, same
/// order). A sentence counts as changed when its best token sequence differs.
/// Throws InputError on a length mismatch.
CorpusReport compare_runs(std::span<const DecodeResult> baseline,
                          std::span<const DecodeResult> pruned);

/// CSV: sentence_id,steps,avg_fan_out,tot_fan_out,wall_time_s,changed
void write_report_csv(std::ostream& out, const CorpusReport& report);

/// Corpus means, speedup and changed fraction.
nlohmann::json summary_json(const CorpusReport& report);

}  // namespace beamprune
