#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detect/core.hpp"
#include "detect/objective.hpp"
#include "detect/search.hpp"

namespace detect {

struct FitConfig {
  std::size_t min_size = 1;  // rows per child cluster
  SearchMode mode = SearchMode::Constrained;
  std::optional<double> min_score;     // split only when score > min_score
  std::optional<std::size_t> max_depth;  // root has depth 0
  std::size_t threads = 1;  // 0 = hardware concurrency; never affects the result

  void validate() const;
};

struct TreeNode {
  std::string label;
  std::size_t depth = 0;
  std::size_t size = 0;
  CountSeries counts;
  std::optional<SplitRule> rule;  // set on internal nodes only
  Score score = 0.0;
  std::size_t child_a = 0;
  std::size_t child_b = 0;

  bool is_leaf() const { return !rule.has_value(); }
};

/// Fitted hierarchy. Nodes are stored in depth-first pre-order (child_a before
/// child_b), so nodes[0] is the root and leaves appear in reading order.
/// The root is labelled "C"; its children "C_1" and "C_2"; below that each
/// level appends one digit (1 for the rule-satisfied side, 2 otherwise).
struct ClusterTree {
  Schema schema;
  std::vector<std::int64_t> times;
  std::string objective;  // "f1", "f2" or a custom name
  std::size_t x = 0;      // f2 time step, 0 otherwise
  FitConfig config;
  std::vector<TreeNode> nodes;

  const TreeNode& root() const { return nodes.front(); }
  std::vector<std::size_t> leaves() const;
  std::vector<std::string> leaf_labels() const;
  /// Node indices from the root down to `node`, inclusive.
  std::vector<std::size_t> path_to(std::size_t node) const;
};

std::string child_label(const std::string& parent, Side side);

/// Divisive clustering: starting from a single cluster holding every row,
/// repeatedly applies the best split while both children keep at least
/// `config.min_size` rows. When `leaf_of_row` is given it receives, for each
/// dataset row, the index of the leaf node that holds it.
ClusterTree fit(const Dataset& dataset, const Objective& objective, const FitConfig& config,
                std::vector<std::size_t>* leaf_of_row = nullptr);

/// Leaf node index for every row, found by evaluating rules root to leaf.
/// Rules are matched to `dataset` features by name.
std::vector<std::size_t> assign_nodes(const ClusterTree& tree, const Dataset& dataset);

/// Leaf label for every row.
std::vector<std::string> assign(const ClusterTree& tree, const Dataset& dataset);

/// Rows per (time step, leaf), leaves in depth-first order.
struct DistributionTable {
  std::vector<std::int64_t> times;
  std::vector<std::string> leaves;
  std::vector<std::int64_t> counts;  // row-major, times.size() x leaves.size()

  std::int64_t at(std::size_t time, std::size_t leaf) const { return counts[time * leaves.size() + leaf]; }
  std::int64_t& at(std::size_t time, std::size_t leaf) { return counts[time * leaves.size() + leaf]; }

  bool operator==(const DistributionTable&) const = default;
};

DistributionTable leaf_distributions(const ClusterTree& tree, const Dataset& dataset);

/// Canonical JSON form: sorted keys, two-space indent, trailing newline.
/// Byte-identical for identical trees.
std::string serialize_tree(const ClusterTree& tree);
ClusterTree parse_tree(std::string_view text);

}  // namespace detect
