#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "gnb/gnb.hpp"
#include "test_util.hpp"

using namespace gnb;
using gnb::testing::TempDir;
namespace fs = std::filesystem;

namespace {

int gnb_run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" GNB_CLI_PATH "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Small link-prediction dataset written in the on-disk format.
fs::path tiny_dataset(const fs::path& dir, std::size_t cols = 12) {
  GraphDataset ds;
  ds.graph = watts_strogatz({60, 4, 0.3, 2});
  ds.features = sample_iid_features(60, {cols}, 3);
  round_to_storage(ds.features);
  ds.name = "tiny";
  save_dataset(ds, dir);
  return dir;
}

const std::string kQuick = "--max-epochs 5 --patience 5";

}  // namespace

TEST(Cli, SynthWritesDatasetAndManifest) {
  TempDir t("cli");
  const auto d = t.path() / "ws";
  ASSERT_EQ(gnb_run("synth --family ws1000 --out '" + d.string() + "'"), 0);
  for (const char* f : {"edges.csv", "features.gft", "meta.txt", "manifest.txt"}) EXPECT_TRUE(fs::exists(d / f)) << f;
  const auto manifest = read_key_values((d / "manifest.txt").string());
  EXPECT_EQ(manifest.at("command"), "synth");
  EXPECT_EQ(manifest.at("version"), kVersion);
  EXPECT_EQ(manifest.at("config.graph_seed"), "0");
  EXPECT_TRUE(manifest.count("wall_seconds"));
}

TEST(Cli, SynthIsBitIdentical) {
  TempDir t("cli");
  const auto a = t.path() / "a", b = t.path() / "b";
  ASSERT_EQ(gnb_run("synth --family ws1000-gamma --gamma 0.4 --graph-seed 3 --out '" + a.string() + "'"), 0);
  ASSERT_EQ(gnb_run("synth --family ws1000-gamma --gamma 0.4 --graph-seed 3 --out '" + b.string() + "'"), 0);
  for (const char* f : {"edges.csv", "features.gft", "meta.txt"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, GammaMetaRecordsGammaAndNu) {
  TempDir t("cli");
  const auto d = t.path() / "g";
  ASSERT_EQ(gnb_run("synth --family ws1000-gamma --gamma 0.6 --out '" + d.string() + "'"), 0);
  const auto meta = read_key_values((d / "meta.txt").string());
  EXPECT_EQ(meta.at("gamma"), "0.6");
  EXPECT_EQ(meta.at("nu"), "1");
  EXPECT_EQ(meta.at("name"), "WS1000_γ=0.6");
}

TEST(Cli, SeedEnvironmentDefault) {
  TempDir t("cli");
  const auto d = t.path() / "s";
  ASSERT_EQ(gnb_run("synth --family ws1000 --out '" + d.string() + "'", "GNB_SEED=7"), 0);
  EXPECT_EQ(read_key_values((d / "meta.txt").string()).at("graph_seed"), "7");
  EXPECT_EQ(gnb_run("synth --family ws1000 --out '" + d.string() + "'", "GNB_SEED=abc"), 2);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(gnb_run("synth --family ws1000 --out /tmp/x --no-such-flag"), 2);
  EXPECT_EQ(gnb_run(""), 2);
  EXPECT_EQ(gnb_run("frobnicate"), 2);
  EXPECT_EQ(gnb_run("synth --family nope --out /tmp/gnb_cli_nope"), 2);
  EXPECT_EQ(gnb_run("--help"), 0);
}

TEST(Cli, FormatAndIoErrors) {
  TempDir t("cli");
  const auto d = tiny_dataset(t.path() / "d");
  EXPECT_EQ(gnb_run("train --data '" + (t.path() / "missing").string() + "' --out '" + (t.path() / "o").string() + "'"), 5);
  std::ofstream(d / "edges.csv") << "src,dst\n0,0\n";
  EXPECT_EQ(gnb_run("train --data '" + d.string() + "' --out '" + (t.path() / "o").string() + "'"), 3);
}

TEST(Cli, DivergenceExitsFour) {
  TempDir t("cli");
  GraphDataset ds;
  ds.graph = watts_strogatz({60, 4, 0.3, 2});
  ds.features = FeatureMatrix(Matrix::Constant(60, 4, 1e30));
  ds.name = "huge";
  save_dataset(ds, t.path() / "d");
  EXPECT_EQ(gnb_run("train --data '" + (t.path() / "d").string() + "' --lr 1e300 --trials 1 " + kQuick + " --out '" +
                    (t.path() / "o").string() + "'"),
            4);
}

TEST(Cli, TrainReportHasTestRocAuc) {
  TempDir t("cli");
  const auto d = tiny_dataset(t.path() / "d");
  const auto o = t.path() / "o";
  ASSERT_EQ(gnb_run("train --model gcn --task link --data '" + d.string() + "' --trials 2 " + kQuick + " --out '" +
                    o.string() + "'"),
            0);
  const auto rep = read_key_values((o / "report.txt").string());
  ASSERT_TRUE(rep.count("test_roc_auc"));
  EXPECT_EQ(rep.at("model"), "gcn");
  EXPECT_EQ(rep.at("n_trials"), "2");
  EXPECT_TRUE(fs::exists(o / "curves_trial0.csv"));
  EXPECT_TRUE(fs::exists(o / "checkpoint_trial1" / "checkpoint.txt"));
  const auto summary = read_study_csv((o / "summary.csv").string());
  ASSERT_EQ(summary.points.size(), 1u);
  EXPECT_EQ(format_double(summary.points[0].test.mean), rep.at("test_roc_auc"));
}

TEST(Cli, ReplayReproducesOutputs) {
  TempDir t("cli");
  const auto d = tiny_dataset(t.path() / "d");
  const auto a = t.path() / "a", b = t.path() / "b";
  ASSERT_EQ(gnb_run("sweep --model mlp,gcn --data '" + d.string() + "' --budget 3 --trials 2 --jobs 2 " + kQuick +
                    " --out '" + a.string() + "'"),
            0);
  ASSERT_EQ(gnb_run("replay '" + (a / "manifest.txt").string() + "' --out '" + b.string() + "'"), 0);
  for (const char* f : {"summary.csv", "leaderboard.csv", "table.txt"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  auto ra = read_key_values((a / "report.txt").string());
  auto rb = read_key_values((b / "report.txt").string());
  EXPECT_EQ(rb.at("jobs"), "1");
  ra.erase("jobs");
  rb.erase("jobs");
  EXPECT_EQ(ra, rb);
}

TEST(Cli, FeatureStudyOnWideDataset) {
  TempDir t("cli");
  const auto d = tiny_dataset(t.path() / "d", 767);
  const auto o = t.path() / "o";
  ASSERT_EQ(gnb_run("study --kind features --increment 100 --data '" + d.string() +
                    "' --budget 1 --trials 1 --max-epochs 2 --patience 2 --out '" + o.string() + "'"),
            0);
  const auto r = read_study_csv((o / "summary.csv").string());
  EXPECT_EQ(r.xs, (std::vector<double>{100, 200, 300, 400, 500, 600, 700, 767}));
  for (auto kind : {ModelKind::kMlp, ModelKind::kGcn}) {
    EXPECT_EQ(std::count_if(r.points.begin(), r.points.end(), [&](const auto& p) { return p.model == kind; }), 8);
  }
  EXPECT_TRUE(fs::exists(o / "plan.txt"));
}

TEST(Cli, ReportTableAndPlot) {
  TempDir t("cli");
  StudyReport r;
  StudyPoint p;
  p.dataset = "WS1000";
  p.model = ModelKind::kMlp;
  p.test = summarize({0.49, 0.47, 0.51});
  p.val = p.test;
  r.points.push_back(p);
  p.model = ModelKind::kGcn;
  p.test = summarize({0.547, 0.543, 0.551});
  r.points.push_back(p);
  const auto csv1 = t.path() / "one.csv", csv2 = t.path() / "two.csv";
  write_text_file(csv1.string(), study_csv(r));
  write_text_file(csv2.string(), study_csv(r));
  ASSERT_EQ(gnb_run("report '" + csv1.string() + "' --table '" + (t.path() / "t.txt").string() + "' --plot '" +
                    (t.path() / "a.svg").string() + "'"),
            0);
  ASSERT_EQ(gnb_run("report '" + csv2.string() + "' --plot '" + (t.path() / "b.svg").string() + "'"), 0);
  EXPECT_EQ(slurp(t.path() / "a.svg"), slurp(t.path() / "b.svg"));
  const auto table = slurp(t.path() / "t.txt");
  EXPECT_NE(table.find("Random"), std::string::npos);
  EXPECT_NE(table.find("MLP (tuned)"), std::string::npos);
  EXPECT_NE(table.find("54.7 ± 0.4"), std::string::npos);
  EXPECT_TRUE(fs::exists(t.path() / "a.svg.manifest.txt"));

  write_text_file((t.path() / "bad.csv").string(), "nonsense\n");
  EXPECT_EQ(gnb_run("report '" + (t.path() / "bad.csv").string() + "'"), 3);
}

TEST(Cli, ImportDropsAndCounts) {
  TempDir t("cli");
  std::ofstream(t.path() / "e.csv") << "0,1\n1,0\n2,2\n";
  std::ofstream(t.path() / "f.csv") << "1,2\n3,4\n5,6\n";
  const auto o = t.path() / "imp";
  ASSERT_EQ(gnb_run("import --edges '" + (t.path() / "e.csv").string() + "' --features '" +
                    (t.path() / "f.csv").string() + "' --out '" + o.string() + "'"),
            0);
  const auto ds = load_dataset(o);
  EXPECT_EQ(ds.graph.num_edges(), 1u);
  EXPECT_EQ(ds.graph.num_nodes(), 3u);
  std::ofstream(t.path() / "rag.csv") << "1,2\n3\n5,6\n";
  EXPECT_EQ(gnb_run("import --edges '" + (t.path() / "e.csv").string() + "' --features '" +
                    (t.path() / "rag.csv").string() + "' --out '" + o.string() + "'"),
            3);
}
