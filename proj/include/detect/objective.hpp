#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "detect/core.hpp"

namespace detect {

/// Objective scores are plain doubles. f1 and f2 only ever produce
/// multiples of 0.5 from integer counts, so they compare exactly.
using Score = double;

/// Scorer for a user-defined objective: receives the full count series of
/// both sides of a candidate division (C_a first). Must be pure.
using CustomEvaluator = std::function<Score(const CountSeries& counts_a, const CountSeries& counts_b)>;

/// Maps the time distributions of a candidate pair (C_a, C_b) to a score
/// that the split search maximises.
class Objective {
 public:
  enum class Kind { StartEndShift, AnomalyAt, Custom };

  /// f1: |mean of C_a's first two counts - mean of its last two counts|.
  static Objective start_end_shift();
  /// f2: mean absolute difference between C_a's count at step `x` (1-based)
  /// and its two neighbours.
  static Objective anomaly_at(std::size_t x);
  /// `min_times` is the smallest T the evaluator accepts.
  static Objective custom(std::string name, CustomEvaluator evaluator, std::size_t min_times = 1);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  std::size_t x() const { return x_; }

  /// Builtin objectives produce half-integers and compare with exact
  /// equality; custom ones compare with a 1e-12 relative tolerance.
  bool exact() const { return kind_ != Kind::Custom; }

  /// Throws ObjectiveUndefined if the objective cannot be evaluated on T time steps.
  void check_times(std::size_t num_times) const;

  Score evaluate(const CountSeries& counts_a, const CountSeries& counts_b) const;

 private:
  Objective(Kind kind, std::string name, std::size_t x, CustomEvaluator evaluator, std::size_t min_times)
      : kind_(kind), name_(std::move(name)), x_(x), evaluator_(std::move(evaluator)), min_times_(min_times) {}

  Kind kind_;
  std::string name_;
  std::size_t x_ = 0;
  CustomEvaluator evaluator_;
  std::size_t min_times_ = 1;
};

/// |(a[1] + a[2]) / 2 - (a[T] + a[T-1]) / 2|. Requires T >= 3.
Score eval_f1(const CountSeries& counts_a);

/// (|a[x] - a[x+1]| + |a[x] - a[x-1]|) / 2 with 1-based x. Requires 2 <= x <= T-1.
Score eval_f2(const CountSeries& counts_a, std::size_t x);

/// Checks that both series have equal length and dispatches to the objective.
Score eval_objective(const Objective& objective, const CountSeries& counts_a, const CountSeries& counts_b);

/// True when `a` and `b` are the same score under the objective's comparison rule.
bool scores_tie(Score a, Score b, bool exact);

/// True when `a` is strictly better than `b` (and not tied with it).
inline bool score_greater(Score a, Score b, bool exact) { return !scores_tie(a, b, exact) && a > b; }

}  // namespace detect
