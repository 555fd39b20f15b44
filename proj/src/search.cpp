#include "detect/search.hpp"

#include <algorithm>
#include <map>

#include "parallel.hpp"

namespace detect {

namespace {

// Clusters below this size are searched serially; thread start-up dominates.
constexpr std::size_t kParallelMinRows = 4096;

bool feasible(std::size_t size_a, std::size_t size_b, std::size_t min_size, SearchMode mode) {
  if (size_a == 0 || size_b == 0) return false;
  if (mode == SearchMode::Reject) return true;
  return size_a >= min_size && size_b >= min_size;
}

// Order of two rules on the same feature under the tie-break.
bool rule_precedes(const SplitRule& lhs, const SplitRule& rhs) {
  if (lhs.feature_index != rhs.feature_index) return lhs.feature_index < rhs.feature_index;
  if (const auto* l = std::get_if<NumericLe>(&lhs.test)) {
    const auto& r = std::get<NumericLe>(rhs.test);
    if (l->threshold != r.threshold) return l->threshold < r.threshold;
    return l->missing_side == Side::A && r.missing_side == Side::B;
  }
  const auto& l = std::get<CategoryEq>(lhs.test);
  const auto& r = std::get<CategoryEq>(rhs.test);
  if (l.missing != r.missing) return !l.missing;
  return l.category < r.category;
}

bool better(const SplitCandidate& challenger, const std::optional<SplitCandidate>& incumbent, bool exact) {
  if (!incumbent) return true;
  if (scores_tie(challenger.score, incumbent->score, exact)) return rule_precedes(challenger.rule, incumbent->rule);
  return challenger.score > incumbent->score;
}

const FeatureSpec& checked_feature(const Dataset& dataset, std::size_t feature, FeatureKind kind) {
  if (feature >= dataset.schema.size()) {
    throw InvalidArgument("feature index " + std::to_string(feature) + " out of range");
  }
  const FeatureSpec& spec = dataset.schema[feature];
  if (spec.kind != kind) {
    throw InvalidArgument("feature '" + spec.name + "' is " + to_string(spec.kind) + ", expected " + to_string(kind));
  }
  return spec;
}

std::size_t feature_by_name(const Dataset& dataset, const std::string& name) {
  auto idx = dataset.schema.index_of(name);
  if (!idx) throw InvalidArgument("unknown feature '" + name + "'");
  return *idx;
}

}  // namespace

const char* to_string(Side side) { return side == Side::A ? "A" : "B"; }

const char* to_string(SearchMode mode) { return mode == SearchMode::Constrained ? "constrained" : "reject"; }

SearchMode parse_search_mode(const std::string& text) {
  if (text == "constrained") return SearchMode::Constrained;
  if (text == "reject") return SearchMode::Reject;
  throw InvalidArgument("unknown search mode '" + text + "' (expected constrained or reject)");
}

bool SplitRule::selects(const FeatureValue& value) const {
  if (const auto* le = std::get_if<NumericLe>(&test)) {
    if (is_missing(value)) return le->missing_side == Side::A;
    const double* d = std::get_if<double>(&value);
    if (!d) throw InvalidArgument("feature '" + feature + "': numeric rule applied to a category");
    return *d <= le->threshold;
  }
  const auto& eq = std::get<CategoryEq>(test);
  if (is_missing(value)) return eq.missing;
  const std::string* s = std::get_if<std::string>(&value);
  if (!s) throw InvalidArgument("feature '" + feature + "': category rule applied to a number");
  return !eq.missing && *s == eq.category;
}

std::optional<SplitCandidate> best_split_numeric(const Dataset& dataset, std::span<const std::size_t> cluster,
                                                 std::size_t feature, const Objective& objective,
                                                 std::size_t min_size, SearchMode mode, SearchStats* stats) {
  const FeatureSpec& spec = checked_feature(dataset, feature, FeatureKind::Numeric);
  if (cluster.empty()) throw InvalidArgument("cannot split an empty cluster");
  objective.check_times(dataset.num_times());

  const CountSeries parent = counts_over_time(dataset, cluster);
  const std::size_t n = cluster.size();

  struct Entry {
    double value;
    std::size_t time;  // 0-based
  };
  std::vector<Entry> sorted;
  sorted.reserve(n);
  CountSeries missing_counts(dataset.num_times());
  std::size_t missing_rows = 0;
  for (std::size_t r : cluster) {
    const Row& row = dataset.rows[r];
    const FeatureValue& v = row.values[feature];
    if (is_missing(v)) {
      ++missing_counts[row.time_index - 1];
      ++missing_rows;
    } else {
      sorted.push_back({std::get<double>(v), row.time_index - 1});
    }
  }
  std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
    return a.value < b.value || (a.value == b.value && a.time < b.time);
  });
  if (stats) ++stats->sorts;

  std::optional<SplitCandidate> best;
  const bool exact = objective.exact();

  std::vector<Side> passes{Side::B};
  if (missing_rows > 0) passes.push_back(Side::A);

  for (Side pass : passes) {
    CountSeries counts_a = pass == Side::A ? missing_counts : CountSeries(dataset.num_times());
    CountSeries counts_b = parent - counts_a;
    std::size_t size_a = pass == Side::A ? missing_rows : 0;
    std::size_t moves = 0;

    for (std::size_t i = 0; i < sorted.size();) {
      const double threshold = sorted[i].value + 0.0;  // folds -0.0 into 0.0
      for (; i < sorted.size() && sorted[i].value == threshold; ++i) {
        ++counts_a[sorted[i].time];
        --counts_b[sorted[i].time];
        ++size_a;
        ++moves;
      }
      const std::size_t size_b = n - size_a;
      if (stats && stats->on_step) stats->on_step(pass, counts_a, counts_b);
      if (size_b == 0) break;
      if (!feasible(size_a, size_b, min_size, mode)) continue;

      SplitCandidate candidate{SplitRule{spec.name, feature, NumericLe{threshold, pass}},
                               objective.evaluate(counts_a, counts_b), size_a, size_b, {}, {}};
      if (stats) ++stats->candidates_evaluated;
      if (better(candidate, best, exact)) {
        candidate.counts_a = counts_a;
        candidate.counts_b = counts_b;
        best = std::move(candidate);
      }
    }
    if (stats) stats->moves_per_pass.push_back(moves);
  }
  return best;
}

std::optional<SplitCandidate> best_split_numeric(const Dataset& dataset, std::span<const std::size_t> cluster,
                                                 const std::string& feature, const Objective& objective,
                                                 std::size_t min_size, SearchMode mode, SearchStats* stats) {
  return best_split_numeric(dataset, cluster, feature_by_name(dataset, feature), objective, min_size, mode, stats);
}

std::optional<SplitCandidate> best_split_categorical(const Dataset& dataset, std::span<const std::size_t> cluster,
                                                     std::size_t feature, const Objective& objective,
                                                     std::size_t min_size, SearchMode mode, SearchStats* stats) {
  const FeatureSpec& spec = checked_feature(dataset, feature, FeatureKind::Categorical);
  if (cluster.empty()) throw InvalidArgument("cannot split an empty cluster");
  objective.check_times(dataset.num_times());

  struct Group {
    CountSeries counts;
    std::size_t size = 0;
  };
  const std::size_t T = dataset.num_times();
  std::map<std::string_view, Group> groups;
  Group missing{CountSeries(T), 0};
  for (std::size_t r : cluster) {
    const Row& row = dataset.rows[r];
    const FeatureValue& v = row.values[feature];
    Group* g = &missing;
    if (!is_missing(v)) {
      auto [it, inserted] = groups.try_emplace(std::get<std::string>(v));
      if (inserted) it->second.counts = CountSeries(T);
      g = &it->second;
    }
    ++g->counts[row.time_index - 1];
    ++g->size;
  }

  const CountSeries parent = counts_over_time(dataset, cluster);
  const std::size_t n = cluster.size();
  const bool exact = objective.exact();
  std::optional<SplitCandidate> best;

  auto consider = [&](const Group& group, CategoryEq test) {
    const std::size_t size_b = n - group.size;
    if (!feasible(group.size, size_b, min_size, mode)) return;
    CountSeries counts_b = parent - group.counts;
    SplitCandidate candidate{SplitRule{spec.name, feature, std::move(test)},
                             objective.evaluate(group.counts, counts_b), group.size, size_b, group.counts,
                             std::move(counts_b)};
    if (stats) ++stats->candidates_evaluated;
    if (better(candidate, best, exact)) best = std::move(candidate);
  };

  for (const auto& [category, group] : groups) consider(group, CategoryEq{std::string(category), false});
  if (missing.size > 0) consider(missing, CategoryEq{{}, true});
  return best;
}

std::optional<SplitCandidate> best_split_categorical(const Dataset& dataset, std::span<const std::size_t> cluster,
                                                     const std::string& feature, const Objective& objective,
                                                     std::size_t min_size, SearchMode mode, SearchStats* stats) {
  return best_split_categorical(dataset, cluster, feature_by_name(dataset, feature), objective, min_size, mode,
                                stats);
}

std::optional<SplitCandidate> best_split(const Dataset& dataset, std::span<const std::size_t> cluster,
                                         const Objective& objective, std::size_t min_size, SearchMode mode,
                                         std::size_t threads) {
  if (cluster.empty()) return std::nullopt;
  const std::size_t m = dataset.schema.size();
  std::vector<std::optional<SplitCandidate>> per_feature(m);
  auto search = [&](std::size_t f) {
    per_feature[f] = dataset.schema[f].kind == FeatureKind::Numeric
                         ? best_split_numeric(dataset, cluster, f, objective, min_size, mode)
                         : best_split_categorical(dataset, cluster, f, objective, min_size, mode);
  };
  detail::parallel_for(m, cluster.size() >= kParallelMinRows ? threads : 1, search);

  std::optional<SplitCandidate> best;
  for (auto& candidate : per_feature) {
    if (candidate && better(*candidate, best, objective.exact())) best = std::move(candidate);
  }
  return best;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> partition(const Dataset& dataset,
                                                                        std::span<const std::size_t> cluster,
                                                                        const SplitRule& rule) {
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> sides;
  for (std::size_t r : cluster) {
    (rule.selects(dataset.rows[r].values[rule.feature_index]) ? sides.first : sides.second).push_back(r);
  }
  return sides;
}

}  // namespace detect
