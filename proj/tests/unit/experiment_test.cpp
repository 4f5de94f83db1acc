#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "beamprune/corpus.hpp"
#include "beamprune/experiment.hpp"
#include "test_support.hpp"

namespace bp = beamprune;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("beamprune_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bp::ExperimentSpec planted_spec(const fs::path& out) {
  bp::ExperimentSpec spec;
  spec.model = "planted:v=16,p_hi=0.4,p_decoy=0.5,d=1,seed=3";
  spec.sentences = 40;
  spec.seed = 5;
  spec.out_dir = out;
  bp::DecodeConfig base;
  base.beam_size = 5;
  bp::DecodeConfig pruned = base;
  pruned.prune = {0.6, 2.5, 0.02, 3};
  spec.configs = {base, pruned};
  return spec;
}

}  // namespace

TEST(ExperimentSpecTest, JsonRoundTrip) {
  auto spec = planted_spec("out_dir");
  spec.sweep = bp::SweepSpec{"rp", {0.0, 0.5}};
  nlohmann::json j = spec;
  auto back = j.get<bp::ExperimentSpec>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_THROW((nlohmann::json{{"modle", "x"}}.get<bp::ExperimentSpec>()), bp::ConfigError);
}

TEST(ExperimentSpecTest, Validation) {
  auto spec = planted_spec("x");
  EXPECT_NO_THROW(bp::validate_experiment(spec));
  auto swapped = spec;
  std::swap(swapped.configs[0], swapped.configs[1]);
  EXPECT_THROW(bp::validate_experiment(swapped), bp::ConfigError);
  swapped.compare_to_baseline = false;
  EXPECT_NO_THROW(bp::validate_experiment(swapped));
  auto empty = spec;
  empty.configs.clear();
  EXPECT_THROW(bp::validate_experiment(empty), bp::ConfigError);
}

TEST(ExperimentSpecTest, WithParameter) {
  bp::DecodeConfig base;
  EXPECT_EQ(bp::with_parameter(base, "rp", 0.4).prune.rp, 0.4);
  EXPECT_EQ(bp::with_parameter(base, "mc", 2).prune.mc, 2u);
  EXPECT_THROW(bp::with_parameter(base, "zz", 0.4), bp::ConfigError);
  EXPECT_THROW(bp::with_parameter(base, "rp", 1.5), bp::ConfigError);
  EXPECT_THROW(bp::with_parameter(base, "mc", 1.5), bp::ConfigError);
}

TEST(CmdDecodeTest, TwoRowTableWithColumns) {
  TempDir tmp;
  auto runs = bp::cmd_decode(planted_spec(tmp.path() / "out"));
  ASSERT_EQ(runs.runs.size(), 2u);
  const auto table = slurp(tmp.path() / "out" / "table.txt");
  std::istringstream lines(table);
  std::string header;
  std::getline(lines, header);
  for (const char* col : {"pruning", "beam size", "speed up", "avg fan out per sent",
                          "tot fan out per sent", "changed"}) {
    EXPECT_NE(header.find(col), std::string::npos) << col;
  }
  std::string row0, row1, extra;
  std::getline(lines, row0);
  std::getline(lines, row1);
  EXPECT_FALSE(std::getline(lines, extra));
  EXPECT_EQ(row0.rfind("no pruning", 0), 0u);
  EXPECT_EQ(row1.rfind("rp=0.6,ap=2.5,rpl=0.02,mc=3", 0), 0u);
  EXPECT_EQ(runs.runs[0].report.changed_count, 0u);
  for (const char* f : {"run_00/report.csv", "run_00/summary.json", "run_01/report.csv",
                        "run_01/summary.json"}) {
    EXPECT_TRUE(fs::exists(tmp.path() / "out" / f)) << f;
  }
  EXPECT_FALSE(fs::exists(tmp.path() / "out.partial"));
}

TEST(CmdDecodeTest, EmptyCorpusFailsWithoutOutput) {
  TempDir tmp;
  std::ofstream(tmp.path() / "empty.txt").close();
  auto spec = planted_spec(tmp.path() / "out");
  spec.corpus = tmp.path() / "empty.txt";
  EXPECT_THROW(bp::cmd_decode(spec), bp::InputError);
  EXPECT_FALSE(fs::exists(tmp.path() / "out"));
  EXPECT_FALSE(fs::exists(tmp.path() / "out.partial"));
}

TEST(CmdDecodeTest, VocabularyMismatchFails) {
  TempDir tmp;
  std::ofstream(tmp.path() / "c.txt") << "w1 w2\nw1 nope\n";
  auto spec = planted_spec(tmp.path() / "out");
  spec.corpus = tmp.path() / "c.txt";
  try {
    bp::cmd_decode(spec);
    FAIL();
  } catch (const bp::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("nope"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(tmp.path() / "out"));
}

TEST(CmdDecodeTest, RepeatRunsMatchExceptTiming) {
  TempDir tmp;
  bp::cmd_decode(planted_spec(tmp.path() / "a"));
  bp::cmd_decode(planted_spec(tmp.path() / "b"));
  for (const char* f : {"table.txt", "run_00/report.csv", "run_01/report.csv",
                        "run_00/summary.json", "run_01/summary.json"}) {
    EXPECT_EQ(bp::testing::mask_timing(tmp.path() / "a" / f),
              bp::testing::mask_timing(tmp.path() / "b" / f))
        << f;
  }
}

TEST(CmdSweepTest, SingleValueMatchesDecode) {
  TempDir tmp;
  auto spec = planted_spec(tmp.path() / "sweep");
  spec.sweep = bp::SweepSpec{"rp", {0.6}};
  auto rows = bp::cmd_sweep(spec);
  ASSERT_EQ(rows.size(), 1u);

  auto dspec = planted_spec(tmp.path() / "decode");
  dspec.configs[1].prune.rp = 0.6;
  auto runs = bp::cmd_decode(dspec);
  EXPECT_EQ(rows[0].report.changed, runs.runs[1].report.changed);
  EXPECT_EQ(rows[0].report.summary.tot_fan_out, runs.runs[1].report.summary.tot_fan_out);
  EXPECT_EQ(rows[0].report.summary.avg_fan_out, runs.runs[1].report.summary.avg_fan_out);
}

TEST(CmdSweepTest, ChangedFractionGrowsWithRp) {
  TempDir tmp;
  auto spec = planted_spec(tmp.path() / "sweep");
  spec.model = "planted:v=16,p_hi=0.4,p_decoy=0.5,d=2,seed=3";
  spec.sentences = 100;
  spec.configs.resize(1);
  spec.sweep = bp::SweepSpec{"rp", {0.0, 0.2, 0.4, 0.6, 0.8}};
  auto rows = bp::cmd_sweep(spec);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].report.changed_fraction, rows[i - 1].report.changed_fraction) << i;
  }
  EXPECT_EQ(rows[0].report.changed_count, 0u);  // rp = 0 is neutral

  const auto csv = slurp(tmp.path() / "sweep" / "sweep.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "parameter,value,changed_fraction,avg_fan_out,tot_fan_out,speedup,selected");
}

TEST(CmdSweepTest, SelectsMostAggressiveUnchangedValue) {
  TempDir tmp;
  auto spec = planted_spec(tmp.path() / "sweep");
  spec.configs.resize(1);
  spec.sweep = bp::SweepSpec{"ap", {8.0, 4.0, 0.01}};
  auto rows = bp::cmd_sweep(spec);
  std::size_t selected = 0;
  for (const auto& r : rows) selected += r.selected ? 1 : 0;
  EXPECT_LE(selected, 1u);
  for (const auto& r : rows) {
    if (!r.selected) continue;
    EXPECT_EQ(r.report.changed_count, 0u);
    for (const auto& other : rows) {
      if (other.report.changed_count == 0) EXPECT_LE(r.value, other.value);
    }
  }
  spec.sweep = bp::SweepSpec{"rq", {0.1}};
  EXPECT_THROW(bp::cmd_sweep(spec), bp::ConfigError);
}

TEST(GenCorpusTest, DeterministicAndSeedSensitive) {
  TempDir tmp;
  const std::string model = "planted:v=20,p_hi=0.6,seed=2";
  auto one = bp::cmd_gen_corpus(model, 1, 9, tmp.path() / "one.txt");
  EXPECT_EQ(bp::read_lines(tmp.path() / "one.txt").size(), 1u);
  EXPECT_EQ(bp::read_lines(tmp.path() / "one.txt.targets").size(), 1u);

  bp::cmd_gen_corpus(model, 300, 9, tmp.path() / "a.txt");
  bp::cmd_gen_corpus(model, 300, 9, tmp.path() / "b.txt");
  bp::cmd_gen_corpus(model, 300, 10, tmp.path() / "c.txt");
  EXPECT_EQ(slurp(tmp.path() / "a.txt"), slurp(tmp.path() / "b.txt"));
  EXPECT_NE(slurp(tmp.path() / "a.txt"), slurp(tmp.path() / "c.txt"));

  // Earlier sentences do not depend on corpus size.
  auto head = bp::read_lines(tmp.path() / "a.txt");
  EXPECT_EQ(head.front(), bp::read_lines(tmp.path() / "one.txt").front());

  // Both seeds draw content tokens uniformly: chi-square over the 19 content
  // tokens stays below the 0.999 quantile (43.8 for 18 dof).
  for (const char* f : {"a.txt", "c.txt"}) {
    std::map<std::string, double> hist;
    double n = 0;
    for (const auto& line : bp::read_lines(tmp.path() / f)) {
      std::istringstream toks(line);
      std::string t;
      while (toks >> t) {
        hist[t] += 1;
        n += 1;
      }
    }
    EXPECT_EQ(hist.size(), 19u);
    double chi2 = 0.0;
    for (const auto& [tok, count] : hist) {
      const double expected = n / 19.0;
      chi2 += (count - expected) * (count - expected) / expected;
    }
    EXPECT_LT(chi2, 43.8) << f;
  }
}

TEST(GenCorpusTest, NgramNeedsTrainingText) {
  TempDir tmp;
  EXPECT_THROW(bp::cmd_gen_corpus("ngram:n=2,k=0.1", 3, 1, tmp.path() / "x.txt"), bp::ConfigError);
}

#ifdef BEAMPRUNE_CLI_PATH

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BEAMPRUNE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(CliTest, DecodeWritesReports) {
  TempDir tmp;
  const auto out = (tmp.path() / "out").string();
  EXPECT_EQ(run_cli("decode --model planted:v=16,p_hi=0.6 --sentences 20 --seed 3 --beam 5 "
                    "--baseline --rp 0.6 --ap 2.5 --rpl 0.02 --mc 3 --out " + out),
            0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "table.txt"));
  EXPECT_TRUE(fs::exists(fs::path(out) / "run_01" / "summary.json"));
  auto summary = nlohmann::json::parse(slurp(fs::path(out) / "run_01" / "summary.json"));
  EXPECT_EQ(summary["label"], "rp=0.6,ap=2.5,rpl=0.02,mc=3");
}

TEST(CliTest, SpecFileWithFlagOverride) {
  TempDir tmp;
  auto spec = planted_spec(tmp.path() / "from_spec");
  std::ofstream(tmp.path() / "spec.json") << nlohmann::json(spec).dump(2);
  const auto out = (tmp.path() / "flag_out").string();
  EXPECT_EQ(run_cli("decode --spec " + (tmp.path() / "spec.json").string() + " --out " + out +
                    " --jobs 2"),
            0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "run_01" / "report.csv"));
  EXPECT_FALSE(fs::exists(tmp.path() / "from_spec"));
}

TEST(CliTest, ErrorsExitNonZero) {
  TempDir tmp;
  std::ofstream(tmp.path() / "empty.txt").close();
  const auto out = (tmp.path() / "out").string();
  EXPECT_NE(run_cli("decode --model uniform --corpus " + (tmp.path() / "empty.txt").string() +
                    " --out " + out),
            0);
  EXPECT_NE(run_cli("decode --model uniform --sentences 5 --rp 1.5 --out " + out), 0);
  EXPECT_NE(run_cli("decode --model /no/such/model.json --sentences 5 --out " + out), 0);
  EXPECT_NE(run_cli("sweep --model uniform --sentences 5 --param zz --values 1 --out " + out), 0);
  EXPECT_FALSE(fs::exists(out));
}

TEST(CliTest, GenCorpus) {
  TempDir tmp;
  const auto path = (tmp.path() / "c.txt").string();
  EXPECT_EQ(run_cli("gen-corpus --model uniform:v=10 -n 4 --seed 2 --out " + path), 0);
  EXPECT_EQ(bp::read_lines(path).size(), 4u);
}

#endif
