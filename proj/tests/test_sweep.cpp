#include <gtest/gtest.h>

#include <sstream>

#include "gnb/sweep.hpp"

using namespace gnb;

namespace {

MetricSummary constant_summary(double v) { return summarize({v}); }

// Unimodal in log10(lr), peak at lr = 3e-3.
double bump(double lr) {
  const double d = std::log10(lr) - std::log10(3e-3);
  return 1.0 / (1.0 + d * d);
}

}  // namespace

TEST(SearchSpace, Validation) {
  SearchSpace s;
  EXPECT_NO_THROW(validate(s));
  s.lr_min = 0;
  EXPECT_THROW(validate(s), ParameterError);
  s = SearchSpace{};
  s.hidden_dims.clear();
  EXPECT_THROW(validate(s), ParameterError);
  s = SearchSpace{};
  s.dropout_max = 1.0;
  EXPECT_THROW(validate(s), ParameterError);
}

TEST(SampleConfig, StaysInDomain) {
  SearchSpace s;
  Rng rng(3);
  std::size_t zeros = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto c = sample_config(s, rng);
    EXPECT_GE(c.lr, s.lr_min);
    EXPECT_LE(c.lr, s.lr_max);
    if (c.weight_decay == 0.0) {
      ++zeros;
    } else {
      EXPECT_GE(c.weight_decay, s.wd_min);
      EXPECT_LE(c.weight_decay, s.wd_max);
    }
    EXPECT_GE(c.dropout, 0.0);
    EXPECT_LE(c.dropout, 0.7);
    EXPECT_NE(std::find(s.hidden_dims.begin(), s.hidden_dims.end(), c.hidden_dim), s.hidden_dims.end());
    EXPECT_NE(std::find(s.num_layers.begin(), s.num_layers.end(), c.num_layers), s.num_layers.end());
  }
  EXPECT_NEAR(zeros / 2000.0, 0.25, 0.04);
}

TEST(RandomSearch, BudgetOne) {
  SearchSpace s;
  std::size_t calls = 0;
  const auto r = random_search(s, 1, [&](const HyperConfig&) { ++calls; return constant_summary(0.3); }, 7);
  Rng rng(7, streams::kSweep);
  EXPECT_EQ(calls, 1u);
  EXPECT_EQ(r.best, sample_config(s, rng));
  EXPECT_EQ(r.leaderboard.size(), 1u);
  EXPECT_THROW(random_search(s, 0, [](const HyperConfig&) { return constant_summary(0); }, 7), ParameterError);
}

TEST(RandomSearch, UnimodalObjectiveLandsInTopDecile) {
  SearchSpace s;
  auto objective = [](const HyperConfig& h) { return constant_summary(bump(h.lr)); };
  // Dense grid over the same function gives the decile threshold.
  std::vector<double> grid;
  for (int i = 0; i <= 1000; ++i) grid.push_back(bump(std::pow(10.0, -4.0 + 3.0 * i / 1000.0)));
  std::sort(grid.begin(), grid.end());
  const double top_decile = grid[grid.size() * 9 / 10];
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = random_search(s, 60, objective, seed);
    EXPECT_GE(bump(r.best.lr), top_decile) << "seed " << seed;
  }
}

TEST(RandomSearch, DeterministicAcrossJobCounts) {
  SearchSpace s;
  auto objective = [](const HyperConfig& h) { return constant_summary(bump(h.lr) + h.dropout); };
  const auto a = random_search(s, 25, objective, 11, 1);
  const auto b = random_search(s, 25, objective, 11, 4);
  ASSERT_EQ(a.leaderboard.size(), b.leaderboard.size());
  for (std::size_t i = 0; i < a.leaderboard.size(); ++i) {
    EXPECT_EQ(a.leaderboard[i].config, b.leaderboard[i].config);
    EXPECT_EQ(a.leaderboard[i].val->mean, b.leaderboard[i].val->mean);
  }
  EXPECT_EQ(a.best_index, b.best_index);
  EXPECT_NE(random_search(s, 25, objective, 12).leaderboard[0].config, a.leaderboard[0].config);
}

TEST(RandomSearch, SelectsMaximumEarliestOnTies) {
  SearchSpace s;
  std::size_t call = 0;
  std::vector<double> scores{0.2, 0.9, 0.5, 0.9, 0.1};
  const auto r = random_search(s, 5, [&](const HyperConfig&) { return constant_summary(scores[call++]); }, 1);
  EXPECT_EQ(r.best_index, 1u);
  EXPECT_EQ(r.best, r.leaderboard[1].config);
}

TEST(RandomSearch, DivergedConfigsRecorded) {
  SearchSpace s;
  std::size_t call = 0;
  const auto r = random_search(s, 4, [&](const HyperConfig&) {
    if (call++ % 2 == 0) throw NumericError("training diverged");
    return constant_summary(0.6);
  }, 1);
  EXPECT_EQ(r.best_index, 1u);
  EXPECT_FALSE(r.leaderboard[0].val.has_value());
  EXPECT_EQ(r.leaderboard[0].error, "training diverged");
  EXPECT_THROW(random_search(s, 3, [](const HyperConfig&) -> MetricSummary { throw NumericError("nan"); }, 1),
               SweepError);
}

TEST(FeatureGrid, StandardAxes) {
  EXPECT_EQ(feature_grid(767, 100), (std::vector<std::size_t>{100, 200, 300, 400, 500, 600, 700, 767}));
  EXPECT_EQ(feature_grid(1433, 200), (std::vector<std::size_t>{200, 400, 600, 800, 1000, 1200, 1400, 1433}));
  EXPECT_EQ(feature_grid(300, 100), (std::vector<std::size_t>{100, 200, 300}));
  EXPECT_EQ(feature_grid(5, 5), (std::vector<std::size_t>{5}));
  EXPECT_THROW(feature_grid(5, 6), ParameterError);
  EXPECT_THROW(feature_grid(5, 0), ParameterError);
}

TEST(FeatureStudy, TinyEndToEnd) {
  GraphDataset ds;
  ds.graph = watts_strogatz({80, 4, 0.3, 1});
  ds.features = sample_iid_features(80, {7}, 2);
  ds.name = "tiny";
  StudyOptions o;
  o.budget = 2;
  o.trials = 2;
  o.space.max_epochs = 5;
  o.space.patience = 5;
  o.space.hidden_dims = {4};
  const auto r = feature_study(ds, 3, o);
  EXPECT_EQ(r.xs, (std::vector<double>{3, 6, 7}));
  ASSERT_EQ(r.points.size(), 6u);
  EXPECT_EQ(r.points[0].model, ModelKind::kMlp);
  EXPECT_EQ(r.points[1].model, ModelKind::kGcn);
  EXPECT_EQ(r.points[0].dataset, "tiny-3");
  EXPECT_EQ(r.points[5].test.n_trials, 2u);
  EXPECT_EQ(study_csv(r), study_csv(feature_study(ds, 3, o)));

  std::istringstream in(study_csv(r));
  const auto back = parse_study_csv(in, "mem");
  EXPECT_EQ(back.xs, r.xs);
  ASSERT_EQ(back.points.size(), r.points.size());
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    EXPECT_EQ(back.points[i].test.mean, r.points[i].test.mean);
    EXPECT_EQ(back.points[i].test.values, r.points[i].test.values);
    EXPECT_EQ(back.points[i].best, r.points[i].best);
  }
}

TEST(GammaStudy, RejectsBadLists) {
  StudyOptions o;
  EXPECT_THROW(gamma_study({}, {}, o), ParameterError);
  EXPECT_THROW(gamma_study({0.2, 0.2}, {}, o), ParameterError);
}

TEST(StudyCsv, MalformedRejected) {
  std::istringstream bad_header("dataset,x\n");
  EXPECT_THROW(parse_study_csv(bad_header, "mem"), FormatError);
  std::istringstream short_row(std::string(kStudyHeader) + "\nds,1,mlp,5\n");
  EXPECT_THROW(parse_study_csv(short_row, "mem"), FormatError);
  std::istringstream bad_model(std::string(kStudyHeader) + "\nds,1,gat,1,0.5,0,0.5,0,0.01,0,0,16,2,0.5\n");
  EXPECT_THROW(parse_study_csv(bad_model, "mem"), FormatError);
}

TEST(Plan, ParseAndRoundTrip) {
  std::istringstream in("# gamma sweep\nkind=gamma\ngammas=0,0.2,1\nbudget=4\nlr_min=0.001\nhidden_dims=16,64\n");
  const auto plan = parse_plan(parse_key_values(in, "plan"));
  EXPECT_EQ(plan.kind, "gamma");
  EXPECT_EQ(plan.gammas, (std::vector<double>{0, 0.2, 1}));
  EXPECT_EQ(plan.options.budget, 4u);
  EXPECT_EQ(plan.options.models, (std::vector<ModelKind>{ModelKind::kMlp}));
  EXPECT_EQ(plan.options.space.lr_min, 0.001);
  EXPECT_EQ(plan.options.space.hidden_dims, (std::vector<std::size_t>{16, 64}));
  const auto again = parse_plan(plan_fields(plan));
  EXPECT_EQ(plan_fields(again), plan_fields(plan));
}

TEST(Plan, Errors) {
  EXPECT_THROW(parse_plan({{"bogus", "1"}}), FormatError);
  EXPECT_THROW(parse_plan({{"budget", "many"}}), FormatError);
  EXPECT_THROW(parse_plan({{"kind", "other"}}), FormatError);
  EXPECT_THROW(parse_plan({{"lr_min", "-1"}}), ParameterError);
}
