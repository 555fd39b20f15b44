#include <gtest/gtest.h>

#include <algorithm>

#include "detect/synth.hpp"
#include "detect/tree.hpp"
#include "support/random_data.hpp"

using namespace detect;

namespace {

Dataset constant_data(std::size_t students, std::size_t times) {
  Dataset d;
  d.schema.features = {{"x", FeatureKind::Numeric, false}, {"c", FeatureKind::Categorical, false}};
  for (std::size_t t = 1; t <= times; ++t) d.times.push_back(static_cast<std::int64_t>(t));
  for (std::size_t s = 0; s < students; ++s) {
    for (std::size_t t = 1; t <= times; ++t) d.rows.push_back({"s" + std::to_string(s), t, {1.0, std::string("k")}});
  }
  return d;
}

FitConfig min_size(std::size_t n) {
  FitConfig c;
  c.min_size = n;
  return c;
}

// Every structural property a fitted tree must satisfy.
void expect_well_formed(const ClusterTree& tree, const Dataset& d, const std::vector<std::size_t>& leaf_of_row) {
  ASSERT_FALSE(tree.nodes.empty());
  EXPECT_EQ(tree.root().label, "C");
  EXPECT_EQ(tree.root().size, d.rows.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& n = tree.nodes[i];
    if (i > 0) EXPECT_GE(n.size, tree.config.min_size) << n.label;
    if (n.is_leaf()) continue;
    const TreeNode& a = tree.nodes[n.child_a];
    const TreeNode& b = tree.nodes[n.child_b];
    EXPECT_EQ(n.child_a, i + 1);
    EXPECT_EQ(a.size + b.size, n.size);
    EXPECT_EQ(a.counts + b.counts, n.counts);
    EXPECT_EQ(a.label, child_label(n.label, Side::A));
    EXPECT_EQ(b.label, child_label(n.label, Side::B));
    EXPECT_EQ(a.label.rfind(n.label == "C" ? "C_" : n.label, 0), 0u);
    EXPECT_EQ(a.depth, n.depth + 1);
  }
  EXPECT_EQ(assign_nodes(tree, d), leaf_of_row);
}

}  // namespace

TEST(Fit, ConstantDataIsSingleLeaf) {
  const Dataset d = constant_data(5, 4);
  std::vector<std::size_t> leaf_of_row;
  const ClusterTree tree = fit(d, Objective::start_end_shift(), min_size(1), &leaf_of_row);
  ASSERT_EQ(tree.nodes.size(), 1u);
  EXPECT_EQ(tree.leaf_labels(), std::vector<std::string>{"C"});
  EXPECT_EQ(tree.root().counts, (CountSeries{5, 5, 5, 5}));
  EXPECT_EQ(leaf_of_row, std::vector<std::size_t>(d.rows.size(), 0));
}

TEST(Fit, PlantedShiftSplitsRootOnSignal) {
  PlantSpec spec;
  spec.seed = 7;
  const Dataset d = generate_planted_shift(spec);
  ASSERT_EQ(d.rows.size(), 240u);
  std::vector<std::size_t> leaf_of_row;
  const ClusterTree tree = fit(d, Objective::start_end_shift(), min_size(24), &leaf_of_row);
  ASSERT_FALSE(tree.root().is_leaf());
  const SplitRule& rule = *tree.root().rule;
  EXPECT_EQ(rule.feature, "signal");
  // 30 of 40 students move to the high band from step 4 on: the ideal C_a
  // count series is [40,40,40,10,10,10], f1 = |40 - 10| = 30.
  EXPECT_EQ(tree.root().score, 30.0);
  EXPECT_EQ(tree.nodes[tree.root().child_a].counts, (CountSeries{40, 40, 40, 10, 10, 10}));
  const double threshold = std::get<NumericLe>(rule.test).threshold;
  double max_low = -1e300, min_high = 1e300;
  for (const Row& row : d.rows) {
    const double v = std::get<double>(row.values.back());
    if (v < spec.band_high.low) max_low = std::max(max_low, v);
    else min_high = std::min(min_high, v);
  }
  EXPECT_LE(max_low, threshold);
  EXPECT_LT(threshold, min_high);
  expect_well_formed(tree, d, leaf_of_row);
}

TEST(Fit, LargeCohortRespectsMinimumSize) {
  PlantSpec spec;
  spec.students = 658;
  spec.times = 20;
  spec.event_time = 10;
  spec.seed = 11;
  const Dataset d = generate_planted_shift(spec);
  std::vector<std::size_t> leaf_of_row;
  const ClusterTree tree = fit(d, Objective::start_end_shift(), min_size(400), &leaf_of_row);
  EXPECT_GT(tree.nodes.size(), 1u);
  for (std::size_t i = 1; i < tree.nodes.size(); ++i) EXPECT_GE(tree.nodes[i].size, 400u);
  expect_well_formed(tree, d, leaf_of_row);
}

TEST(Fit, StructureHoldsOnRandomData) {
  Rng rng(42);
  for (int trial = 0; trial < 150; ++trial) {
    const Dataset d = test_support::random_dataset(rng);
    FitConfig config = min_size(1 + rng.below(std::max<std::size_t>(1, d.rows.size() / 4)));
    config.mode = rng.below(2) ? SearchMode::Reject : SearchMode::Constrained;
    std::vector<std::size_t> leaf_of_row;
    const ClusterTree tree = fit(d, Objective::start_end_shift(), config, &leaf_of_row);
    expect_well_formed(tree, d, leaf_of_row);
  }
}

TEST(Fit, TwoTimeStepsRejectedForShiftObjective) {
  const Dataset d = constant_data(3, 2);
  EXPECT_THROW(fit(d, Objective::start_end_shift(), min_size(1)), ObjectiveUndefined);
  EXPECT_THROW(fit(constant_data(3, 4), Objective::anomaly_at(4), min_size(1)), ObjectiveUndefined);
}

TEST(Fit, InvalidConfigAndDataRejected) {
  EXPECT_THROW(fit(constant_data(3, 3), Objective::start_end_shift(), min_size(0)), InvalidArgument);
  Dataset bad = constant_data(3, 3);
  bad.rows.push_back(bad.rows.front());
  EXPECT_THROW(fit(bad, Objective::start_end_shift(), min_size(1)), DataError);
}

TEST(Fit, MinScoreAndMaxDepthStopGrowth) {
  PlantSpec spec;
  spec.seed = 7;
  const Dataset d = generate_planted_shift(spec);
  FitConfig config = min_size(10);
  const ClusterTree full = fit(d, Objective::start_end_shift(), config);

  config.max_depth = 1;
  const ClusterTree shallow = fit(d, Objective::start_end_shift(), config);
  EXPECT_EQ(shallow.nodes.size(), 3u);
  for (const auto& n : shallow.nodes) EXPECT_LE(n.depth, 1u);

  config.max_depth.reset();
  config.min_score = 30.0;  // root scores exactly 30; strict inequality stops it
  const ClusterTree none = fit(d, Objective::start_end_shift(), config);
  EXPECT_EQ(none.nodes.size(), 1u);
  config.min_score = 29.5;
  const ClusterTree some = fit(d, Objective::start_end_shift(), config);
  EXPECT_GE(some.nodes.size(), 3u);
  EXPECT_LE(some.nodes.size(), full.nodes.size());
  for (const auto& n : some.nodes) {
    if (!n.is_leaf()) EXPECT_GT(n.score, 29.5);
  }
}

TEST(Fit, RejectModeDiscardsUndersizedWinner) {
  // f <= 0 isolates one row and scores 4 ([10,10,2]); g <= 0 gives [5,5,0],
  // score 2.5, with 10/13 rows.
  Dataset d;
  d.schema.features = {{"f", FeatureKind::Numeric, false}, {"g", FeatureKind::Numeric, false}};
  d.times = {1, 2, 3};
  for (std::size_t s = 0; s < 10; ++s) {
    for (std::size_t t = 1; t <= 2; ++t) d.rows.push_back({"s" + std::to_string(s), t, {0.0, s < 5 ? 0.0 : 1.0}});
  }
  d.rows.push_back({"s0", 3, {0.0, 1.0}});
  d.rows.push_back({"s1", 3, {0.0, 1.0}});
  d.rows.push_back({"z", 1, {9.0, 1.0}});
  const auto f1 = Objective::start_end_shift();
  const auto rows = test_support::all_rows(d);

  const auto winner = best_split(d, rows, f1, 2, SearchMode::Reject);
  ASSERT_TRUE(winner);
  EXPECT_EQ(winner->rule.feature, "f");
  EXPECT_EQ(winner->score, 4.0);
  EXPECT_EQ(winner->size_b, 1u);
  const auto constrained = best_split(d, rows, f1, 2, SearchMode::Constrained);
  ASSERT_TRUE(constrained);
  EXPECT_EQ(constrained->rule.feature, "g");
  EXPECT_EQ(constrained->score, 2.5);

  FitConfig config = min_size(2);
  config.mode = SearchMode::Reject;
  EXPECT_EQ(fit(d, f1, config).nodes.size(), 1u);
  config.mode = SearchMode::Constrained;
  const ClusterTree tree = fit(d, f1, config);
  ASSERT_FALSE(tree.root().is_leaf());
  EXPECT_EQ(tree.root().rule->feature, "g");
}

TEST(Fit, ThreadCountAndRowOrderDoNotChangeTree) {
  Rng rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    PlantSpec spec;
    spec.students = 800 + rng.below(400);
    spec.seed = trial;
    const Dataset d = generate_planted_shift(spec);
    FitConfig config = min_size(40);
    const std::string serial = serialize_tree(fit(d, Objective::start_end_shift(), config));
    config.threads = 4;
    EXPECT_EQ(serialize_tree(fit(d, Objective::start_end_shift(), config)), serial);
    const Dataset shuffled = test_support::permute_rows(d, rng);
    EXPECT_EQ(serialize_tree(fit(shuffled, Objective::start_end_shift(), config)), serial);
  }
}

TEST(Labels, ChildLabelScheme) {
  EXPECT_EQ(child_label("C", Side::A), "C_1");
  EXPECT_EQ(child_label("C", Side::B), "C_2");
  EXPECT_EQ(child_label("C_1", Side::A), "C_11");
  EXPECT_EQ(child_label("C_21", Side::B), "C_212");
}

namespace {

// Hand-built tree: C splits on score <= 10, C_2 splits on group == 'x'.
ClusterTree hand_tree() {
  ClusterTree tree;
  tree.schema.features = {{"score", FeatureKind::Numeric, true}, {"group", FeatureKind::Categorical, false}};
  tree.times = {1, 2, 3};
  tree.objective = "f1";
  tree.nodes.resize(5);
  tree.nodes[0] = {"C", 0, 0, CountSeries(3), SplitRule{"score", 0, NumericLe{10.0, Side::B}}, 1.0, 1, 2};
  tree.nodes[1] = {"C_1", 1, 0, CountSeries(3), std::nullopt, 0.0, 0, 0};
  tree.nodes[2] = {"C_2", 1, 0, CountSeries(3), SplitRule{"group", 1, CategoryEq{"x", false}}, 1.0, 3, 4};
  tree.nodes[3] = {"C_21", 2, 0, CountSeries(3), std::nullopt, 0.0, 0, 0};
  tree.nodes[4] = {"C_22", 2, 0, CountSeries(3), std::nullopt, 0.0, 0, 0};
  return tree;
}

}  // namespace

TEST(Assign, FollowsRulesIncludingBoundaryAndMissing) {
  const ClusterTree tree = hand_tree();
  Dataset d;
  d.schema = tree.schema;
  d.times = {1, 2, 3};
  d.rows = {{"a", 1, {10.0, std::string("x")}},     // equal to threshold -> C_1
            {"a", 2, {10.5, std::string("x")}},     // C_21
            {"a", 3, {11.0, std::string("y")}},     // C_22
            {"b", 1, {Missing{}, std::string("y")}}};  // missing routes right -> C_22
  EXPECT_EQ(assign(tree, d), (std::vector<std::string>{"C_1", "C_21", "C_22", "C_22"}));
  EXPECT_EQ(tree.path_to(3), (std::vector<std::size_t>{0, 2, 3}));
}

TEST(Assign, SchemaMismatchIsDataError) {
  const ClusterTree tree = hand_tree();
  Dataset d;
  d.schema.features = {{"score", FeatureKind::Numeric, false}};
  d.times = {1};
  d.rows = {{"a", 1, {1.0}}};
  EXPECT_THROW(assign(tree, d), DataError);
  d.schema.features = {{"score", FeatureKind::Categorical, false}, {"group", FeatureKind::Categorical, false}};
  d.rows = {{"a", 1, {std::string("1"), std::string("x")}}};
  EXPECT_THROW(assign(tree, d), DataError);
}

TEST(Distributions, PlantedDropAppearsInLeafA) {
  PlantSpec spec;
  spec.seed = 7;
  const Dataset d = generate_planted_shift(spec);
  FitConfig config = min_size(24);
  config.max_depth = 1;
  const ClusterTree tree = fit(d, Objective::start_end_shift(), config);
  const DistributionTable table = leaf_distributions(tree, d);
  ASSERT_EQ(table.leaves, (std::vector<std::string>{"C_1", "C_2"}));
  EXPECT_EQ(table.at(2, 0) - table.at(3, 0), 30);
  for (std::size_t t = 0; t < table.times.size(); ++t) EXPECT_EQ(table.at(t, 0) + table.at(t, 1), 40);
}

TEST(Distributions, EmptyTimeStepGivesZeroRow) {
  Dataset d = constant_data(3, 3);
  d.rows.erase(std::remove_if(d.rows.begin(), d.rows.end(), [](const Row& r) { return r.time_index == 2; }),
               d.rows.end());
  const ClusterTree tree = fit(d, Objective::start_end_shift(), min_size(1));
  const DistributionTable table = leaf_distributions(tree, d);
  ASSERT_EQ(table.leaves.size(), 1u);
  EXPECT_EQ(table.counts, (std::vector<std::int64_t>{3, 0, 3}));
}

TEST(Serialization, RoundTripIsExact) {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const Dataset d = test_support::random_dataset(rng);
    FitConfig config = min_size(1 + rng.below(4));
    if (rng.below(2)) config.max_depth = 1 + rng.below(3);
    const std::size_t x = 2 + rng.below(d.num_times() - 2);
    const Objective objective = rng.below(2) ? Objective::start_end_shift() : Objective::anomaly_at(x);
    const ClusterTree tree = fit(d, objective, config);
    const std::string text = serialize_tree(tree);
    const ClusterTree back = parse_tree(text);
    EXPECT_EQ(serialize_tree(back), text);
    EXPECT_EQ(assign(back, d), assign(tree, d));
    EXPECT_EQ(back.nodes.size(), tree.nodes.size());
    EXPECT_EQ(back.x, tree.x);
  }
}

TEST(Serialization, MalformedTextIsDataError) {
  EXPECT_THROW(parse_tree("not json"), DataError);
  EXPECT_THROW(parse_tree("{}"), DataError);
  EXPECT_THROW(parse_tree(R"({"format": "other"})"), DataError);
}
