// Brute-force references for split search and tree fitting. Nothing here
// shares code with search.cpp or tree.cpp beyond the data types: every
// candidate division is rebuilt from scratch and recounted.

#include <set>

#include "detect/synth.hpp"

namespace detect {

namespace {

struct Division {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
};

bool in_side_a(const FeatureValue& value, const std::variant<NumericLe, CategoryEq>& test) {
  if (const auto* le = std::get_if<NumericLe>(&test)) {
    if (is_missing(value)) return le->missing_side == Side::A;
    return std::get<double>(value) <= le->threshold;
  }
  const auto& eq = std::get<CategoryEq>(test);
  if (is_missing(value)) return eq.missing;
  return !eq.missing && std::get<std::string>(value) == eq.category;
}

Division divide(const Dataset& dataset, std::span<const std::size_t> cluster, std::size_t feature,
                const std::variant<NumericLe, CategoryEq>& test) {
  Division d;
  for (std::size_t r : cluster) {
    (in_side_a(dataset.rows[r].values[feature], test) ? d.a : d.b).push_back(r);
  }
  return d;
}

// Every rule the search may consider for one feature, in tie-break order.
std::vector<std::variant<NumericLe, CategoryEq>> enumerate_tests(const Dataset& dataset,
                                                                 std::span<const std::size_t> cluster,
                                                                 std::size_t feature) {
  std::vector<std::variant<NumericLe, CategoryEq>> tests;
  bool has_missing = false;
  if (dataset.schema[feature].kind == FeatureKind::Numeric) {
    std::set<double> values;
    for (std::size_t r : cluster) {
      const FeatureValue& v = dataset.rows[r].values[feature];
      if (is_missing(v)) {
        has_missing = true;
      } else {
        values.insert(std::get<double>(v) + 0.0);
      }
    }
    for (double v : values) {
      if (has_missing) tests.emplace_back(NumericLe{v, Side::A});
      tests.emplace_back(NumericLe{v, Side::B});
    }
  } else {
    std::set<std::string> categories;
    for (std::size_t r : cluster) {
      const FeatureValue& v = dataset.rows[r].values[feature];
      if (is_missing(v)) {
        has_missing = true;
      } else {
        categories.insert(std::get<std::string>(v));
      }
    }
    for (const auto& c : categories) tests.emplace_back(CategoryEq{c, false});
    if (has_missing) tests.emplace_back(CategoryEq{{}, true});
  }
  return tests;
}

}  // namespace

std::optional<SplitCandidate> oracle_best_split(const Dataset& dataset, std::span<const std::size_t> cluster,
                                                const Objective& objective, std::size_t min_size, SearchMode mode,
                                                std::size_t bound) {
  if (cluster.size() > bound) {
    throw InvalidArgument("oracle bound exceeded: cluster has " + std::to_string(cluster.size()) + " rows, bound is " +
                          std::to_string(bound));
  }
  objective.check_times(dataset.num_times());

  std::optional<SplitCandidate> best;
  for (std::size_t f = 0; f < dataset.schema.size(); ++f) {
    for (const auto& test : enumerate_tests(dataset, cluster, f)) {
      Division d = divide(dataset, cluster, f, test);
      if (d.a.empty() || d.b.empty()) continue;
      if (mode == SearchMode::Constrained && (d.a.size() < min_size || d.b.size() < min_size)) continue;
      CountSeries counts_a = counts_over_time(dataset, d.a);
      CountSeries counts_b = counts_over_time(dataset, d.b);
      const Score score = objective.evaluate(counts_a, counts_b);
      if (!best || score_greater(score, best->score, objective.exact())) {
        best = SplitCandidate{SplitRule{dataset.schema[f].name, f, test}, score, d.a.size(), d.b.size(),
                              std::move(counts_a), std::move(counts_b)};
      }
    }
  }
  return best;
}

namespace {

struct OracleGrower {
  const Dataset& dataset;
  const Objective& objective;
  const FitConfig& config;
  std::size_t bound;
  ClusterTree& tree;
  std::vector<std::size_t>* leaf_of_row;

  std::size_t grow(const std::vector<std::size_t>& rows, const std::string& label, std::size_t depth) {
    const std::size_t index = tree.nodes.size();
    tree.nodes.push_back(TreeNode{label, depth, rows.size(), counts_over_time(dataset, rows), std::nullopt, 0.0, 0, 0});

    std::optional<SplitCandidate> split;
    if (!config.max_depth || depth < *config.max_depth) {
      split = oracle_best_split(dataset, rows, objective, config.min_size, config.mode, bound);
    }
    const bool accept = split && split->size_a >= config.min_size && split->size_b >= config.min_size &&
                        (!config.min_score || split->score > *config.min_score);
    if (!accept) {
      if (leaf_of_row) {
        for (std::size_t r : rows) (*leaf_of_row)[r] = index;
      }
      return index;
    }

    Division d = divide(dataset, rows, split->rule.feature_index, split->rule.test);
    tree.nodes[index].rule = split->rule;
    tree.nodes[index].score = split->score;
    const std::string prefix = label == "C" ? "C_" : label;
    const std::size_t a = grow(d.a, prefix + "1", depth + 1);
    tree.nodes[index].child_a = a;
    const std::size_t b = grow(d.b, prefix + "2", depth + 1);
    tree.nodes[index].child_b = b;
    return index;
  }
};

}  // namespace

ClusterTree oracle_fit(const Dataset& dataset, const Objective& objective, const FitConfig& config,
                       std::vector<std::size_t>* leaf_of_row, std::size_t bound) {
  config.validate();
  require_valid(dataset);
  objective.check_times(dataset.num_times());

  ClusterTree tree;
  tree.schema = dataset.schema;
  tree.times = dataset.times;
  tree.objective = objective.name();
  tree.x = objective.kind() == Objective::Kind::AnomalyAt ? objective.x() : 0;
  tree.config = config;
  if (leaf_of_row) leaf_of_row->assign(dataset.rows.size(), 0);

  std::vector<std::size_t> all(dataset.rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  OracleGrower{dataset, objective, config, bound, tree, leaf_of_row}.grow(all, "C", 0);
  return tree;
}

}  // namespace detect
