#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "detect/report.hpp"
#include "detect/synth.hpp"
#include "support/random_data.hpp"

using namespace detect;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Two-level tree shaped like C_11 / C_12 / C_2.
ClusterTree three_leaf_tree() {
  ClusterTree tree;
  tree.schema.features = {{"score", FeatureKind::Numeric, true}, {"group", FeatureKind::Categorical, false}};
  tree.times = {1, 2, 3};
  tree.objective = "f1";
  tree.nodes.resize(5);
  tree.nodes[0] = {"C", 0, 10, CountSeries(3), SplitRule{"score", 0, NumericLe{2.5, Side::A}}, 7.5, 1, 4};
  tree.nodes[1] = {"C_1", 1, 6, CountSeries(3), SplitRule{"group", 1, CategoryEq{"x", false}}, 3.0, 2, 3};
  tree.nodes[2] = {"C_11", 2, 4, CountSeries(3), std::nullopt, 0.0, 0, 0};
  tree.nodes[3] = {"C_12", 2, 2, CountSeries(3), std::nullopt, 0.0, 0, 0};
  tree.nodes[4] = {"C_2", 1, 4, CountSeries(3), std::nullopt, 0.0, 0, 0};
  return tree;
}

// Evaluates one rendered condition against a row without touching SplitRule.
bool holds(const std::string& condition, const Schema& schema, const Row& row) {
  static const std::regex numeric(R"(^(\S+) (<=|>) (\S+)( \(missing → left\))?$)");
  static const std::regex category(R"(^(\S+) (==|!=) '(.*)'$)");
  static const std::regex missing(R"(^(\S+) is (not )?missing$)");
  std::smatch m;
  auto value_of = [&](const std::string& name) { return row.values[*schema.index_of(name)]; };
  if (std::regex_match(condition, m, numeric)) {
    const FeatureValue v = value_of(m[1]);
    const bool missing_left = m[4].matched;
    const bool left = is_missing(v) ? missing_left : std::get<double>(v) <= std::stod(m[3]);
    return m[2] == "<=" ? left : !left;
  }
  if (std::regex_match(condition, m, category)) {
    const FeatureValue v = value_of(m[1]);
    const bool eq = !is_missing(v) && std::get<std::string>(v) == m[3].str();
    return m[2] == "==" ? eq : !eq;
  }
  if (std::regex_match(condition, m, missing)) {
    const bool is = is_missing(value_of(m[1]));
    return m[2].matched ? !is : is;
  }
  ADD_FAILURE() << "unparseable condition: " << condition;
  return false;
}

}  // namespace

TEST(Rules, SingleLeafCoversAllRows) {
  ClusterTree tree;
  tree.schema.features = {{"x", FeatureKind::Numeric, false}};
  tree.times = {1, 2, 3};
  tree.nodes = {{"C", 0, 12, CountSeries{4, 4, 4}, std::nullopt, 0.0, 0, 0}};
  const auto lines = lines_of(render_rules(tree));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].substr(0, 5), "label");
  EXPECT_NE(lines[1].find("(all rows)"), std::string::npos);
  EXPECT_EQ(lines[1].substr(0, 1), "C");
  EXPECT_NE(lines[1].find("12"), std::string::npos);
}

TEST(Rules, ThreeLeafTableListsPathConditions) {
  const ClusterTree tree = three_leaf_tree();
  const auto rules = leaf_rules(tree);
  ASSERT_EQ(rules.size(), 3u);
  EXPECT_EQ(rules[0].label, "C_11");
  EXPECT_EQ(rules[0].conditions,
            (std::vector<std::string>{"score <= 2.5 (missing → left)", "group == 'x'"}));
  EXPECT_EQ(rules[0].scores, (std::vector<Score>{7.5, 3.0}));
  EXPECT_EQ(rules[1].conditions, (std::vector<std::string>{"score <= 2.5 (missing → left)", "group != 'x'"}));
  EXPECT_EQ(rules[2].label, "C_2");
  EXPECT_EQ(rules[2].conditions, (std::vector<std::string>{"score > 2.5 (missing → left)"}));

  const auto text = lines_of(render_rules(tree));
  ASSERT_EQ(text.size(), 4u);
  EXPECT_NE(text[1].find("7.5 / 3.0"), std::string::npos);
  EXPECT_NE(text[1].find("score <= 2.5 (missing → left) AND group == 'x'"), std::string::npos);

  const auto csv = lines_of(render_rules(tree, TableFormat::Csv));
  ASSERT_EQ(csv.size(), 4u);
  EXPECT_EQ(csv[0], "label,size,scores,conditions");
  EXPECT_EQ(csv[3], "C_2,4,7.5,score > 2.5 (missing → left)");
  EXPECT_EQ(csv[1], "C_11,4,7.5;3.0,score <= 2.5 (missing → left) AND group == 'x'");
}

TEST(Rules, ScoresKeepOneDecimal) {
  EXPECT_EQ(format_score(30.0), "30.0");
  EXPECT_EQ(format_score(30.5), "30.5");
  EXPECT_EQ(format_score(0.0), "0.0");
}

TEST(Rules, ConditionTextForms) {
  EXPECT_EQ(condition_text(SplitRule{"f", 0, NumericLe{1.25, Side::B}}, Side::A), "f <= 1.25");
  EXPECT_EQ(condition_text(SplitRule{"f", 0, NumericLe{1.25, Side::B}}, Side::B), "f > 1.25");
  EXPECT_EQ(condition_text(SplitRule{"g", 0, CategoryEq{{}, true}}, Side::A), "g is missing");
  EXPECT_EQ(condition_text(SplitRule{"g", 0, CategoryEq{{}, true}}, Side::B), "g is not missing");
}

TEST(Rules, RenderedConditionsReproduceAssignment) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const Dataset d = test_support::random_dataset(rng);
    FitConfig config;
    config.min_size = 1 + rng.below(3);
    const ClusterTree tree = fit(d, Objective::start_end_shift(), config);
    const auto labels = assign(tree, d);
    const auto rules = leaf_rules(tree);
    for (std::size_t r = 0; r < d.rows.size(); ++r) {
      std::vector<std::string> matching;
      for (const auto& rule : rules) {
        bool all = true;
        for (const auto& c : rule.conditions) all = all && holds(c, d.schema, d.rows[r]);
        if (all) matching.push_back(rule.label);
      }
      ASSERT_EQ(matching.size(), 1u) << "row " << r;
      EXPECT_EQ(matching.front(), labels[r]);
    }
  }
}

TEST(Distribution, ExportParseRoundTrip) {
  DistributionTable table;
  table.times = {3, 7, 11};
  table.leaves = {"C_1", "C_2"};
  table.counts = {5, 0, 4, 1, 0, 9};
  const std::string text = export_distribution(table);
  EXPECT_EQ(text, "time,C_1,C_2\n3,5,0\n7,4,1\n11,0,9\n");
  EXPECT_EQ(parse_distribution(text), table);
  EXPECT_THROW(parse_distribution("t,C\n1,2\n"), DataError);
  EXPECT_THROW(parse_distribution("time,C\n1,-2\n"), DataError);
  EXPECT_THROW(parse_distribution("time,C\n1\n"), DataError);
}

TEST(Distribution, FittedTreesRoundTrip) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset d = test_support::random_dataset(rng);
    const ClusterTree tree = fit(d, Objective::start_end_shift(), FitConfig{});
    const DistributionTable table = leaf_distributions(tree, d);
    EXPECT_EQ(parse_distribution(export_distribution(table)), table);
  }
}

TEST(Plot, FlatSingleLeaf) {
  DistributionTable table{{1, 2, 3}, {"C"}, {4, 4, 4}};
  const std::string svg = render_plot_svg(table);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("data-label=\"C\""), std::string::npos);
  EXPECT_EQ(svg.find("class=\"mark\""), std::string::npos);
  // A flat series draws every vertex at the same height.
  const std::regex points(R"re(class="leaf"[^>]*points="([^"]*)")re");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, points));
  std::istringstream pts(m[1].str());
  std::set<std::string> ys;
  for (std::string p; pts >> p;) ys.insert(p.substr(p.find(',') + 1));
  EXPECT_EQ(ys.size(), 1u);
}

TEST(Plot, DropMarkAndZeroLine) {
  DistributionTable table{{1, 2, 3, 4}, {"C_1", "C_2"}, {40, 0, 40, 0, 10, 30, 10, 30}};
  PlotOptions options;
  options.mark = 3;
  options.title = "planted <drop>";
  const std::string svg = render_plot_svg(table, options);
  EXPECT_NE(svg.find("data-label=\"C_1\""), std::string::npos);
  EXPECT_NE(svg.find("data-label=\"C_2\""), std::string::npos);
  EXPECT_NE(svg.find("class=\"mark\""), std::string::npos);
  EXPECT_NE(svg.find("planted &lt;drop&gt;"), std::string::npos);
  EXPECT_EQ(render_plot_svg(table, options), svg);

  // Zero counts sit on the lowest drawn height.
  const std::regex points(R"re(data-label="(C_\d)"[^>]*points="([^"]*)")re");
  std::map<std::string, std::vector<double>> ys;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), points); it != std::sregex_iterator(); ++it) {
    std::istringstream pts((*it)[2].str());
    for (std::string p; pts >> p;) ys[(*it)[1].str()].push_back(std::stod(p.substr(p.find(',') + 1)));
  }
  ASSERT_EQ(ys["C_2"].size(), 4u);
  ASSERT_EQ(ys["C_1"].size(), 4u);
  EXPECT_EQ(ys["C_2"][0], ys["C_2"][1]);
  EXPECT_GT(ys["C_2"][0], ys["C_1"][0]);
  EXPECT_GT(ys["C_2"][0], ys["C_2"][2]);
  EXPECT_LT(ys["C_1"][0], ys["C_1"][2]);

  const auto path = std::filesystem::temp_directory_path() / "detect_plot_test.svg";
  emit_plot(table, path, options);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), svg);
  std::filesystem::remove(path);
  EXPECT_THROW(emit_plot(table, "/nonexistent-dir/x.svg", options), DataError);
}

TEST(Correlation, PerfectAndAnticorrelated) {
  const std::vector<double> a{1, 2, 3, 4, 5, 6};
  std::vector<double> up, down;
  for (double v : a) {
    up.push_back(3 * v + 1);
    down.push_back(-2 * v);
  }
  EXPECT_DOUBLE_EQ(pearson(a, up), 1.0);
  EXPECT_DOUBLE_EQ(pearson(a, down), -1.0);
  const Correlation c = correlate(a, up, 999, 1);
  EXPECT_DOUBLE_EQ(c.r, 1.0);
  EXPECT_GT(c.p, 0.0);
  EXPECT_LE(c.p, 1.0);
  // Only permutations that reproduce the order (or its reverse) match |r| = 1.
  EXPECT_LT(c.p, 0.02);
  EXPECT_THROW(pearson(a, {1, 2}), InvalidArgument);
  EXPECT_THROW(pearson({1, 1, 1}, {1, 2, 3}), InvalidArgument);
}

TEST(Correlation, SeedDeterminesPValue) {
  Rng rng(10);
  std::vector<double> a(20), b(20);
  for (auto& v : a) v = rng.uniform01();
  for (auto& v : b) v = rng.uniform01();
  const Correlation first = correlate(a, b, 9999, 1);
  const Correlation again = correlate(a, b, 9999, 1);
  EXPECT_EQ(first.p, again.p);
  EXPECT_EQ(first.r, again.r);
  EXPECT_GE(first.p, 1.0 / 10000.0);
  EXPECT_LE(first.p, 1.0);
}

TEST(Correlation, IndependentSeriesAreNotSignificant) {
  Rng rng(20);
  std::vector<double> a(20), b(20);
  for (auto& v : a) v = rng.uniform01();
  for (auto& v : b) v = rng.uniform01();
  const Correlation c = correlate(a, b, 9999, 1);
  EXPECT_GE(c.p, 0.2);
  EXPECT_LE(c.p, 1.0);
}

TEST(Correlation, PValueMatchesExhaustiveCount) {
  // For n = 6 every one of the 720 permutations can be scored directly; a
  // large random sample should land close to the exact fraction.
  const std::vector<double> a{1, 2, 3, 4, 5, 6};
  const std::vector<double> b{2, 1, 4, 3, 6, 5};
  const double r = std::abs(pearson(a, b));
  std::vector<double> perm = b;
  std::sort(perm.begin(), perm.end());
  std::size_t hits = 0, total = 0;
  do {
    ++total;
    if (std::abs(pearson(a, perm)) >= r * (1 - 1e-12)) ++hits;
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double exact = static_cast<double>(hits) / static_cast<double>(total);
  const Correlation c = correlate(a, b, 20000, 5);
  EXPECT_NEAR(c.p, exact, 0.01);
}

TEST(SerializeDataset, WritesMissingTokenAndRejectsCollisions) {
  Dataset d;
  d.schema.features = {{"f", FeatureKind::Numeric, true}, {"g", FeatureKind::Categorical, false}};
  d.times = {5, 9};
  d.rows = {{"a", 1, {Missing{}, std::string("x,y")}}, {"a", 2, {0.5, std::string("z")}}};
  EXPECT_EQ(serialize_dataset(d), "student,time,f,g\na,5,,\"x,y\"\na,9,0.5,z\n");
  d.rows[1].values[1] = std::string("NA");
  EXPECT_THROW(serialize_dataset(d), InvalidArgument);
}
