#include "detect/tree.hpp"

#include <algorithm>
#include <numeric>

#include "parallel.hpp"

namespace detect {

void FitConfig::validate() const {
  if (min_size < 1) throw InvalidArgument("min_size must be at least 1");
  if (min_score && !(*min_score >= 0.0)) throw InvalidArgument("min_score must be non-negative");
  if (max_depth && *max_depth < 1) throw InvalidArgument("max_depth must be at least 1");
}

std::vector<std::size_t> ClusterTree::leaves() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) out.push_back(i);
  }
  return out;
}

std::vector<std::string> ClusterTree::leaf_labels() const {
  std::vector<std::string> out;
  for (std::size_t i : leaves()) out.push_back(nodes[i].label);
  return out;
}

std::vector<std::size_t> ClusterTree::path_to(std::size_t node) const {
  std::vector<std::size_t> path{0};
  while (path.back() != node) {
    const TreeNode& here = nodes[path.back()];
    if (here.is_leaf()) throw InvalidArgument("node " + std::to_string(node) + " is not reachable");
    // Pre-order: child_b's subtree starts after child_a's.
    path.push_back(node >= here.child_b ? here.child_b : here.child_a);
  }
  return path;
}

std::string child_label(const std::string& parent, Side side) {
  const char digit = side == Side::A ? '1' : '2';
  return parent == "C" ? std::string("C_") + digit : parent + digit;
}

ClusterTree fit(const Dataset& dataset, const Objective& objective, const FitConfig& config,
                std::vector<std::size_t>* leaf_of_row) {
  config.validate();
  require_valid(dataset);
  objective.check_times(dataset.num_times());
  const std::size_t threads = detail::resolve_threads(config.threads);

  ClusterTree tree;
  tree.schema = dataset.schema;
  tree.times = dataset.times;
  tree.objective = objective.name();
  tree.x = objective.kind() == Objective::Kind::AnomalyAt ? objective.x() : 0;
  tree.config = config;
  if (leaf_of_row) leaf_of_row->assign(dataset.rows.size(), 0);

  struct Pending {
    std::vector<std::size_t> rows;
    std::string label;
    std::size_t depth;
    std::size_t parent;
    Side side;
  };
  std::vector<std::size_t> all(dataset.rows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<Pending> stack;
  stack.push_back({std::move(all), "C", 0, 0, Side::A});

  while (!stack.empty()) {
    Pending item = std::move(stack.back());
    stack.pop_back();

    const std::size_t index = tree.nodes.size();
    if (index > 0) {
      TreeNode& parent = tree.nodes[item.parent];
      (item.side == Side::A ? parent.child_a : parent.child_b) = index;
    }
    TreeNode node;
    node.label = item.label;
    node.depth = item.depth;
    node.size = item.rows.size();
    node.counts = counts_over_time(dataset, item.rows);

    std::optional<SplitCandidate> split;
    const bool depth_ok = !config.max_depth || item.depth < *config.max_depth;
    if (depth_ok && item.rows.size() >= 2 * config.min_size) {
      split = best_split(dataset, item.rows, objective, config.min_size, config.mode, threads);
      if (split && (split->size_a < config.min_size || split->size_b < config.min_size)) split.reset();
      if (split && config.min_score && !(split->score > *config.min_score)) split.reset();
    }

    if (!split) {
      if (leaf_of_row) {
        for (std::size_t r : item.rows) (*leaf_of_row)[r] = index;
      }
      tree.nodes.push_back(std::move(node));
      continue;
    }

    auto [rows_a, rows_b] = partition(dataset, item.rows, split->rule);
    node.rule = split->rule;
    node.score = split->score;
    tree.nodes.push_back(std::move(node));
    stack.push_back({std::move(rows_b), child_label(item.label, Side::B), item.depth + 1, index, Side::B});
    stack.push_back({std::move(rows_a), child_label(item.label, Side::A), item.depth + 1, index, Side::A});
  }
  return tree;
}

namespace {

// Rules re-resolved against the schema of the dataset being assigned.
std::vector<std::size_t> resolve_rule_features(const ClusterTree& tree, const Dataset& dataset) {
  std::vector<std::size_t> resolved(tree.nodes.size(), 0);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& rule = tree.nodes[i].rule;
    if (!rule) continue;
    auto idx = dataset.schema.index_of(rule->feature);
    if (!idx) throw DataError("schema mismatch: dataset has no feature '" + rule->feature + "'");
    const FeatureKind expected =
        std::holds_alternative<NumericLe>(rule->test) ? FeatureKind::Numeric : FeatureKind::Categorical;
    if (dataset.schema[*idx].kind != expected) {
      throw DataError("schema mismatch: feature '" + rule->feature + "' is " + to_string(dataset.schema[*idx].kind) +
                      " but the tree expects " + to_string(expected));
    }
    resolved[i] = *idx;
  }
  return resolved;
}

}  // namespace

std::vector<std::size_t> assign_nodes(const ClusterTree& tree, const Dataset& dataset) {
  if (tree.nodes.empty()) throw InvalidArgument("tree has no nodes");
  const auto features = resolve_rule_features(tree, dataset);
  std::vector<std::size_t> out(dataset.rows.size());
  for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
    const Row& row = dataset.rows[r];
    if (row.values.size() != dataset.schema.size()) {
      throw DataError("row " + std::to_string(r) + " has the wrong number of values");
    }
    std::size_t node = 0;
    while (!tree.nodes[node].is_leaf()) {
      const TreeNode& here = tree.nodes[node];
      node = here.rule->selects(row.values[features[node]]) ? here.child_a : here.child_b;
    }
    out[r] = node;
  }
  return out;
}

std::vector<std::string> assign(const ClusterTree& tree, const Dataset& dataset) {
  std::vector<std::string> labels;
  labels.reserve(dataset.rows.size());
  for (std::size_t node : assign_nodes(tree, dataset)) labels.push_back(tree.nodes[node].label);
  return labels;
}

DistributionTable leaf_distributions(const ClusterTree& tree, const Dataset& dataset) {
  const auto leaves = tree.leaves();
  std::vector<std::size_t> column(tree.nodes.size(), 0);
  DistributionTable table;
  table.times = dataset.times;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    column[leaves[i]] = i;
    table.leaves.push_back(tree.nodes[leaves[i]].label);
  }
  table.counts.assign(table.times.size() * table.leaves.size(), 0);
  const auto nodes = assign_nodes(tree, dataset);
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    const std::size_t t = dataset.rows[r].time_index;
    if (t < 1 || t > table.times.size()) throw DataError("row " + std::to_string(r) + " has an unknown time index");
    ++table.at(t - 1, column[nodes[r]]);
  }
  return table;
}

}  // namespace detect
