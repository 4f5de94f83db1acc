// beamprune: decode corpora under beam-search pruning configs and report
// fan-out, speedup and changed sentences against an unpruned baseline.
//
//   beamprune decode --model planted:v=24,p_hi=0.6 --sentences 200 --seed 7 \
//       --beam 5 --baseline --rp 0.6 --ap 2.5 --rpl 0.02 --mc 3 --out results
//   beamprune sweep --spec exp.json --param rp --values 0,0.2,0.4,0.6,0.8
//   beamprune gen-corpus --model planted:v=24 --sentences 500 --seed 1 --out corpus.txt

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "beamprune/experiment.hpp"

namespace bp = beamprune;

namespace {

struct Flags {
  std::string spec_file;
  std::optional<std::string> corpus;
  std::optional<std::string> model;
  std::optional<std::string> beam;
  std::optional<double> rp;
  std::optional<std::string> ap;
  std::optional<double> rpl;
  std::optional<std::string> mc;
  bool baseline = false;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> sentences;
  std::string param;
  std::vector<std::string> values;
};

double parse_double(const std::string& field, const std::string& text) {
  if (text == "inf") return bp::kInfinity;
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw bp::ConfigError(field, "'" + text + "' is not a number");
}

std::optional<std::size_t> parse_count_or(const std::string& field, const std::string& text,
                                          const char* unlimited) {
  if (text == unlimited) return std::nullopt;
  const double v = parse_double(field, text);
  if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw bp::ConfigError(field, "'" + text + "' is not a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

// Spec file first, then flags on top.
bp::ExperimentSpec build_spec(const Flags& f) {
  bp::ExperimentSpec spec;
  if (!f.spec_file.empty()) spec = bp::load_experiment_spec(f.spec_file);
  if (f.corpus) spec.corpus = *f.corpus;
  if (f.model) spec.model = *f.model;
  if (f.out) spec.out_dir = *f.out;
  if (f.jobs) spec.jobs = *f.jobs;
  if (f.seed) spec.seed = *f.seed;
  if (f.sentences) spec.sentences = *f.sentences;

  if (f.beam) {
    const auto beam = parse_count_or("beam_size", *f.beam, "unbounded");
    if (spec.configs.empty()) spec.configs.emplace_back();
    for (auto& cfg : spec.configs) cfg.beam_size = beam;
  }

  const bool thresholds = f.rp || f.ap || f.rpl || f.mc;
  if (thresholds) {
    bp::DecodeConfig pruned = spec.configs.size() > 1   ? spec.configs[1]
                              : !spec.configs.empty() ? spec.configs[0]
                                                      : bp::DecodeConfig{};
    if (f.rp) pruned.prune.rp = *f.rp;
    if (f.ap) pruned.prune.ap = parse_double("ap", *f.ap);
    if (f.rpl) pruned.prune.rpl = *f.rpl;
    if (f.mc) pruned.prune.mc = parse_count_or("mc", *f.mc, "unlimited");
    if (spec.configs.size() > 1) {
      spec.configs[1] = pruned;
    } else if (f.baseline || !spec.configs.empty()) {
      spec.configs.resize(1);
      spec.configs.push_back(pruned);
    } else {
      spec.configs = {pruned};
    }
  }
  if (spec.configs.empty()) spec.configs.emplace_back();

  if (f.baseline && !spec.configs.front().prune.is_neutral()) {
    bp::DecodeConfig base = spec.configs.front();
    base.prune = bp::neutral_prune_config();
    spec.configs.insert(spec.configs.begin(), base);
  }
  if (!f.baseline && !spec.configs.front().prune.is_neutral()) {
    spec.compare_to_baseline = false;
  }

  if (!f.param.empty()) {
    bp::SweepSpec sweep;
    sweep.parameter = f.param;
    for (const auto& v : f.values) sweep.values.push_back(parse_double(f.param, v));
    spec.sweep = std::move(sweep);
  }
  return spec;
}

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--spec", f.spec_file, "Experiment spec (JSON); flags override it");
  cmd->add_option("--corpus", f.corpus, "Corpus file, one tokenized sentence per line");
  cmd->add_option("--model", f.model,
                  "FILE | uniform:v=N | ngram:n=K,k=S[,train=PATH] | "
                  "planted:v=N,p_hi=F,p_decoy=F,d=D,seed=U");
  cmd->add_option("--beam", f.beam, "Beam size or 'unbounded'");
  cmd->add_option("--rp", f.rp, "Relative threshold pruning, [0,1)");
  cmd->add_option("--ap", f.ap, "Absolute threshold pruning, > 0 or 'inf'");
  cmd->add_option("--rpl", f.rpl, "Relative local threshold pruning, [0,1)");
  cmd->add_option("--mc", f.mc, "Maximum candidates per node or 'unlimited'");
  cmd->add_flag("--baseline", f.baseline, "Prepend an unpruned baseline run");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--jobs", f.jobs, "Decoding threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Seed for synthetic corpora");
  cmd->add_option("--sentences", f.sentences, "Synthetic corpus size when no corpus is given");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beam-search decoding with candidate pruning"};
  app.require_subcommand(1);
  Flags f;

  auto* decode = app.add_subcommand("decode", "Decode a corpus under each config");
  add_common(decode, f);

  auto* sweep = app.add_subcommand("sweep", "Sweep one pruning threshold");
  add_common(sweep, f);
  sweep->add_option("--param", f.param, "rp | ap | rpl | mc")->required();
  sweep->add_option("--values", f.values, "Threshold values")->required()->delimiter(',');

  auto* gen = app.add_subcommand("gen-corpus", "Sample a synthetic source corpus");
  std::string gen_model = "uniform";
  std::size_t gen_n = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--model", gen_model, "Model spec")->required();
  gen->add_option("--sentences,-n", gen_n, "Number of sentences")->required();
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Corpus file to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*decode) {
      auto runs = bp::cmd_decode(build_spec(f));
      std::cout << bp::format_table(runs.runs);
    } else if (*sweep) {
      auto rows = bp::cmd_sweep(build_spec(f));
      for (const auto& row : rows) {
        std::cout << f.param << '=' << bp::format_number(row.value)
                  << " changed=" << bp::format_number(row.report.changed_fraction)
                  << " avg_fan_out=" << bp::format_number(row.report.summary.avg_fan_out)
                  << (row.selected ? "  <- selected" : "") << '\n';
      }
    } else if (*gen) {
      auto corpus = bp::cmd_gen_corpus(gen_model, gen_n, gen_seed, gen_out);
      std::cout << "wrote " << corpus.sources.size() << " sentences to " << gen_out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "beamprune: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
