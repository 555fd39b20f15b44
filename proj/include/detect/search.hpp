#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "detect/core.hpp"
#include "detect/objective.hpp"

namespace detect {

/// Side of a binary division. A is the rule-satisfied side.
enum class Side { A, B };

const char* to_string(Side side);

/// value <= threshold goes to A; Missing goes to `missing_side`.
struct NumericLe {
  double threshold = 0.0;
  Side missing_side = Side::B;

  bool operator==(const NumericLe&) const = default;
};

/// value == category goes to A. When `missing` is set the rule splits off the
/// reserved missing category instead and `category` is empty.
struct CategoryEq {
  std::string category;
  bool missing = false;

  bool operator==(const CategoryEq&) const = default;
};

struct SplitRule {
  std::string feature;
  std::size_t feature_index = 0;
  std::variant<NumericLe, CategoryEq> test;

  /// True when a row holding `value` for this rule's feature belongs to C_a.
  bool selects(const FeatureValue& value) const;

  bool operator==(const SplitRule&) const = default;
};

struct SplitCandidate {
  SplitRule rule;
  Score score = 0.0;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  CountSeries counts_a;
  CountSeries counts_b;
};

/// How the minimum cluster size interacts with the maximisation.
///   Constrained: maximise over candidates whose sides both hold >= min_size rows.
///   Reject:      maximise over every true bipartition; the caller discards the
///                winner when it is too small.
enum class SearchMode { Constrained, Reject };

const char* to_string(SearchMode mode);
SearchMode parse_search_mode(const std::string& text);

/// Instrumentation for tests; every field is optional to consult.
struct SearchStats {
  std::size_t sorts = 0;
  std::size_t candidates_evaluated = 0;
  std::vector<std::size_t> moves_per_pass;
  /// Called after every threshold advance of the numeric sweep.
  std::function<void(Side pass, const CountSeries& counts_a, const CountSeries& counts_b)> on_step;
};

/// Threshold sweep over one numeric feature. Rows are sorted once; each
/// distinct observed value becomes a candidate threshold in ascending order and
/// rows move from C_b to C_a as the threshold passes them. When the cluster
/// holds Missing values the sweep runs a second pass with them pinned in C_a.
std::optional<SplitCandidate> best_split_numeric(const Dataset& dataset, std::span<const std::size_t> cluster,
                                                 std::size_t feature, const Objective& objective,
                                                 std::size_t min_size, SearchMode mode = SearchMode::Constrained,
                                                 SearchStats* stats = nullptr);
std::optional<SplitCandidate> best_split_numeric(const Dataset& dataset, std::span<const std::size_t> cluster,
                                                 const std::string& feature, const Objective& objective,
                                                 std::size_t min_size, SearchMode mode = SearchMode::Constrained,
                                                 SearchStats* stats = nullptr);

/// Tries splitting off each observed category (and the missing category, when
/// present) from the rest.
std::optional<SplitCandidate> best_split_categorical(const Dataset& dataset, std::span<const std::size_t> cluster,
                                                     std::size_t feature, const Objective& objective,
                                                     std::size_t min_size,
                                                     SearchMode mode = SearchMode::Constrained,
                                                     SearchStats* stats = nullptr);
std::optional<SplitCandidate> best_split_categorical(const Dataset& dataset, std::span<const std::size_t> cluster,
                                                     const std::string& feature, const Objective& objective,
                                                     std::size_t min_size,
                                                     SearchMode mode = SearchMode::Constrained,
                                                     SearchStats* stats = nullptr);

/// Best division of `cluster` over all features. Ties go to the lower feature
/// index, then the smaller threshold (or lexicographically earlier category,
/// missing category last), then missing side A before B. `threads` > 1 runs
/// the per-feature searches concurrently; the result does not depend on it.
std::optional<SplitCandidate> best_split(const Dataset& dataset, std::span<const std::size_t> cluster,
                                         const Objective& objective, std::size_t min_size,
                                         SearchMode mode = SearchMode::Constrained, std::size_t threads = 1);

/// Splits `cluster` by `rule`, preserving row order on each side.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> partition(const Dataset& dataset,
                                                                        std::span<const std::size_t> cluster,
                                                                        const SplitRule& rule);

}  // namespace detect
