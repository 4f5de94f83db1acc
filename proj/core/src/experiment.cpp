#include "beamprune/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace beamprune {

namespace fs = std::filesystem;

void to_json(nlohmann::json& j, const ExperimentSpec& spec) {
  j = nlohmann::json{{"model", spec.model},
                     {"corpus", spec.corpus.string()},
                     {"sentences", spec.sentences},
                     {"seed", spec.seed},
                     {"configs", spec.configs},
                     {"out", spec.out_dir.string()},
                     {"jobs", spec.jobs},
                     {"compare_to_baseline", spec.compare_to_baseline}};
  if (spec.sweep) {
    j["sweep"] = {{"parameter", spec.sweep->parameter}, {"values", spec.sweep->values}};
  }
}

void from_json(const nlohmann::json& j, ExperimentSpec& spec) {
  if (!j.is_object()) throw ConfigError("spec", "expected a JSON object");
  spec = ExperimentSpec{};
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "model") {
        spec.model = value.get<std::string>();
      } else if (key == "corpus") {
        spec.corpus = value.get<std::string>();
      } else if (key == "sentences") {
        spec.sentences = value.get<std::size_t>();
      } else if (key == "seed") {
        spec.seed = value.get<std::uint64_t>();
      } else if (key == "configs") {
        spec.configs = value.get<std::vector<DecodeConfig>>();
      } else if (key == "out") {
        spec.out_dir = value.get<std::string>();
      } else if (key == "jobs") {
        spec.jobs = value.get<std::size_t>();
      } else if (key == "compare_to_baseline") {
        spec.compare_to_baseline = value.get<bool>();
      } else if (key == "sweep") {
        SweepSpec sweep;
        sweep.parameter = value.at("parameter").get<std::string>();
        for (const auto& v : value.at("values")) {
          sweep.values.push_back(v.is_string() && v.get<std::string>() == "inf"
                                     ? kInfinity
                                     : v.get<double>());
        }
        spec.sweep = std::move(sweep);
      } else {
        throw ConfigError(key, "unknown experiment field");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("spec", e.what());
  }
}

ExperimentSpec load_experiment_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read spec file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed spec file " + path.string() + ": " + e.what());
  }
  return doc.get<ExperimentSpec>();
}

namespace {

const DecodeConfig& sweep_base(const ExperimentSpec& spec) {
  return spec.configs.size() > 1 ? spec.configs[1] : spec.configs.at(0);
}

}  // namespace

void validate_experiment(const ExperimentSpec& spec) {
  if (spec.configs.empty()) throw ConfigError("configs", "at least one config is required");
  for (const auto& cfg : spec.configs) validate_config(cfg);
  if (spec.compare_to_baseline && !spec.configs.front().prune.is_neutral()) {
    throw ConfigError("configs", "baseline (first config) must use neutral pruning");
  }
  if (spec.jobs < 1) throw ConfigError("jobs", "must be >= 1");
  if (spec.corpus.empty() && spec.sentences == 0) {
    throw ConfigError("corpus", "give a corpus file or a synthetic sentence count");
  }
  if (spec.sweep) {
    if (spec.sweep->values.empty()) throw ConfigError("sweep", "no values");
    for (double v : spec.sweep->values) {
      validate_config(with_parameter(sweep_base(spec), spec.sweep->parameter, v));
    }
  }
}

DecodeConfig with_parameter(DecodeConfig base, const std::string& parameter, double value) {
  if (parameter == "rp") {
    base.prune.rp = value;
  } else if (parameter == "ap") {
    base.prune.ap = value;
  } else if (parameter == "rpl") {
    base.prune.rpl = value;
  } else if (parameter == "mc") {
    if (value == kInfinity) {
      base.prune.mc.reset();
    } else if (!(value >= 1.0) || value != std::floor(value)) {
      throw ConfigError("mc", "sweep value must be an integer >= 1 or inf");
    } else {
      base.prune.mc = static_cast<std::size_t>(value);
    }
  } else {
    throw ConfigError("parameter", "unknown sweep parameter '" + parameter +
                                       "' (expected rp, ap, rpl or mc)");
  }
  validate_prune_config(base.prune);
  return base;
}

ExperimentRuns run_experiment(const ExperimentSpec& spec) {
  validate_experiment(spec);
  ExperimentRuns out;

  std::vector<std::string> lines;
  if (!spec.corpus.empty()) {
    lines = read_lines(spec.corpus);
    if (lines.empty()) throw InputError("corpus " + spec.corpus.string() + " is empty");
  }
  out.model = make_model(spec.model, lines);
  if (!spec.corpus.empty()) {
    out.sources = encode_corpus(lines, out.model->vocabulary());
  } else {
    out.sources = generate_corpus(*out.model, spec.sentences, spec.seed).sources;
  }

  for (const auto& cfg : spec.configs) {
    ConfigRun run;
    run.config = cfg;
    run.results = decode_corpus(out.sources, *out.model, cfg, spec.jobs);
    out.runs.push_back(std::move(run));
  }
  for (auto& run : out.runs) {
    run.report = spec.compare_to_baseline ? compare_runs(out.runs.front().results, run.results)
                                          : report_run(run.results);
  }
  return out;
}

namespace {

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

std::string beam_text(const DecodeConfig& cfg) {
  return cfg.beam_size ? std::to_string(*cfg.beam_size) : "-";
}

std::string speedup_text(const CorpusReport& report, bool is_baseline) {
  if (is_baseline || !report.speedup) return "-";
  return fixed(*report.speedup * 100.0, 0) + "%";
}

std::string changed_text(const CorpusReport& report) {
  if (!report.has_baseline()) return "-";
  return fixed(report.changed_fraction * 100.0, 1) + "%";
}

std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()));
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += " | ";
      std::string cell = row[c];
      cell.resize(width[c], ' ');
      line += cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

const std::vector<std::string> kTableHeader = {
    "pruning", "beam size", "speed up", "avg fan out per sent", "tot fan out per sent",
    "changed"};

std::vector<std::string> table_row(const DecodeConfig& cfg, const CorpusReport& report,
                                   bool is_baseline) {
  return {prune_label(cfg.prune),
          beam_text(cfg),
          speedup_text(report, is_baseline),
          fixed(report.summary.avg_fan_out, 2),
          fixed(report.summary.tot_fan_out, 0),
          changed_text(report)};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
  if (!out) throw InputError("failed writing " + path.string());
}

// Writes into "<out>.partial" and moves the files into `out` only after
// `write` succeeded.
template <typename Write>
void staged_output(const fs::path& out, Write&& write) {
  const fs::path staging = out.string() + ".partial";
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    write(staging);
    fs::create_directories(out);
    for (const auto& entry : fs::directory_iterator(staging)) {
      const fs::path target = out / entry.path().filename();
      fs::remove_all(target);
      fs::rename(entry.path(), target);
    }
    fs::remove_all(staging);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
}

std::string run_dir_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%02zu", i);
  return buf;
}

nlohmann::json run_summary(const DecodeConfig& cfg, const CorpusReport& report) {
  nlohmann::json j = summary_json(report);
  j["label"] = prune_label(cfg.prune);
  j["config"] = cfg;
  return j;
}

bool more_aggressive(const std::string& parameter, double a, double b) {
  return (parameter == "rp" || parameter == "rpl") ? a > b : a < b;
}

}  // namespace

std::string format_table(const std::vector<ConfigRun>& runs) {
  std::vector<std::vector<std::string>> rows{kTableHeader};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    rows.push_back(table_row(runs[i].config, runs[i].report, i == 0));
  }
  return render(rows);
}

ExperimentRuns cmd_decode(const ExperimentSpec& spec) {
  ExperimentRuns runs;
  staged_output(spec.out_dir, [&](const fs::path& dir) {
    runs = run_experiment(spec);
    for (std::size_t i = 0; i < runs.runs.size(); ++i) {
      const auto& run = runs.runs[i];
      const fs::path sub = dir / run_dir_name(i);
      fs::create_directories(sub);
      std::ostringstream csv;
      write_report_csv(csv, run.report);
      write_file(sub / "report.csv", csv.str());
      write_file(sub / "summary.json", run_summary(run.config, run.report).dump(2) + "\n");
    }
    write_file(dir / "table.txt", format_table(runs.runs));
  });
  return runs;
}

std::vector<SweepRow> cmd_sweep(const ExperimentSpec& spec) {
  if (!spec.sweep) throw ConfigError("sweep", "no sweep parameter given");
  const auto& sweep = *spec.sweep;
  validate_experiment(spec);
  const DecodeConfig base = sweep_base(spec);

  ExperimentSpec grid = spec;
  grid.configs = {spec.configs.front()};
  for (double v : sweep.values) grid.configs.push_back(with_parameter(base, sweep.parameter, v));
  grid.sweep.reset();
  validate_experiment(grid);
  if (!grid.compare_to_baseline) {
    throw ConfigError("compare_to_baseline", "a sweep needs a baseline comparison");
  }

  std::vector<SweepRow> rows;
  staged_output(spec.out_dir, [&](const fs::path& dir) {
    auto runs = run_experiment(grid);
    std::optional<std::size_t> selected;
    for (std::size_t i = 0; i < sweep.values.size(); ++i) {
      const auto& run = runs.runs[i + 1];
      rows.push_back(SweepRow{sweep.values[i], run.config, run.report, false});
      if (run.report.changed_count == 0 &&
          (!selected || more_aggressive(sweep.parameter, sweep.values[i], rows[*selected].value))) {
        selected = i;
      }
    }
    if (selected) rows[*selected].selected = true;

    std::ostringstream csv;
    csv << "parameter,value,changed_fraction,avg_fan_out,tot_fan_out,speedup,selected\n";
    for (const auto& row : rows) {
      csv << sweep.parameter << ',' << format_number(row.value) << ','
          << format_number(row.report.changed_fraction) << ','
          << format_number(row.report.summary.avg_fan_out) << ','
          << format_number(row.report.summary.tot_fan_out) << ','
          << (row.report.speedup ? format_number(*row.report.speedup) : "") << ','
          << (row.selected ? 1 : 0) << '\n';
    }
    write_file(dir / "sweep.csv", csv.str());
    write_file(dir / "table.txt", format_table(runs.runs));
  });
  return rows;
}

GeneratedCorpus cmd_gen_corpus(const std::string& model_spec, std::size_t n, std::uint64_t seed,
                               const fs::path& path) {
  if (ModelSpec::parse(model_spec).kind == "ngram" &&
      !ModelSpec::parse(model_spec).params.contains("train")) {
    throw ConfigError("model", "ngram corpus generation needs train=PATH");
  }
  auto model = make_model(model_spec);
  auto corpus = generate_corpus(*model, n, seed);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  try {
    write_corpus(path, corpus.sources, model->vocabulary());
    if (!corpus.targets.empty()) {
      write_corpus(path.string() + ".targets", corpus.targets, model->vocabulary());
    }
  } catch (...) {
    std::error_code ec;
    fs::remove(path, ec);
    fs::remove(path.string() + ".targets", ec);
    throw;
  }
  return corpus;
}

}  // namespace beamprune
