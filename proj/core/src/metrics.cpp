#include "beamprune/metrics.hpp"

#include <numeric>

#include <nlohmann/json.hpp>

namespace beamprune {

SentenceMetrics sentence_metrics(const DecodeTrace& trace, double wall_time_s) {
  if (trace.fan_out_per_step.empty()) throw InputError("cannot measure an empty trace");
  SentenceMetrics m;
  m.steps = trace.fan_out_per_step.size();
  m.tot_fan_out = std::accumulate(trace.fan_out_per_step.begin(), trace.fan_out_per_step.end(),
                                  std::size_t{0});
  m.avg_fan_out = static_cast<double>(m.tot_fan_out) / static_cast<double>(m.steps);
  m.wall_time_s = wall_time_s;
  return m;
}

RunSummary summarize(std::span<const SentenceMetrics> sentences) {
  RunSummary s;
  s.sentences = sentences.size();
  if (sentences.empty()) return s;
  for (const auto& m : sentences) {
    s.avg_fan_out += m.avg_fan_out;
    s.tot_fan_out += static_cast<double>(m.tot_fan_out);
    s.steps += static_cast<double>(m.steps);
    s.wall_time_s += m.wall_time_s;
  }
  const double n = static_cast<double>(sentences.size());
  s.avg_fan_out /= n;
  s.tot_fan_out /= n;
  s.steps /= n;
  return s;
}

namespace {

std::vector<SentenceMetrics> measure(std::span<const DecodeResult> run) {
  std::vector<SentenceMetrics> out;
  out.reserve(run.size());
  for (const auto& r : run) out.push_back(sentence_metrics(r.trace, r.wall_time_s));
  return out;
}

}  // namespace

CorpusReport report_run(std::span<const DecodeResult> run) {
  CorpusReport report;
  report.sentences = measure(run);
  report.summary = summarize(report.sentences);
  return report;
}

CorpusReport compare_runs(std::span<const DecodeResult> baseline,
                          std::span<const DecodeResult> pruned) {
  if (baseline.size() != pruned.size()) {
    throw InputError("baseline has " + std::to_string(baseline.size()) +
                     " sentences, pruned run has " + std::to_string(pruned.size()));
  }
  CorpusReport report = report_run(pruned);
  const auto base_metrics = measure(baseline);
  report.baseline = summarize(base_metrics);

  report.changed.resize(pruned.size());
  for (std::size_t i = 0; i < pruned.size(); ++i) {
    report.changed[i] = pruned[i].best.tokens != baseline[i].best.tokens;
    if (report.changed[i]) ++report.changed_count;
  }
  report.changed_fraction =
      pruned.empty() ? 0.0
                     : static_cast<double>(report.changed_count) / static_cast<double>(pruned.size());
  if (report.summary.wall_time_s > 0.0) {
    report.speedup = report.baseline->wall_time_s / report.summary.wall_time_s - 1.0;
  }
  return report;
}

void write_report_csv(std::ostream& out, const CorpusReport& report) {
  out << "sentence_id,steps,avg_fan_out,tot_fan_out,wall_time_s,changed\n";
  for (std::size_t i = 0; i < report.sentences.size(); ++i) {
    const auto& m = report.sentences[i];
    out << i << ',' << m.steps << ',' << format_number(m.avg_fan_out) << ',' << m.tot_fan_out
        << ',' << format_number(m.wall_time_s) << ','
        << (report.changed.empty() ? 0 : static_cast<int>(report.changed[i])) << '\n';
  }
}

namespace {

nlohmann::json summary_fields(const RunSummary& s) {
  return {{"sentences", s.sentences},
          {"avg_fan_out", s.avg_fan_out},
          {"tot_fan_out", s.tot_fan_out},
          {"steps", s.steps},
          {"wall_time_s", s.wall_time_s}};
}

}  // namespace

nlohmann::json summary_json(const CorpusReport& report) {
  nlohmann::json j = summary_fields(report.summary);
  if (report.baseline) {
    j["baseline"] = summary_fields(*report.baseline);
    j["changed_sentences"] = report.changed_count;
    j["changed_fraction"] = report.changed_fraction;
    j["speedup"] = report.speedup ? nlohmann::json(*report.speedup) : nlohmann::json(nullptr);
  }
  return j;
}

}  // namespace beamprune
