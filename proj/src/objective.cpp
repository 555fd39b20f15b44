#include "detect/objective.hpp"

#include <algorithm>
#include <cmath>

namespace detect {

Objective Objective::start_end_shift() { return Objective(Kind::StartEndShift, "f1", 0, {}, 3); }

Objective Objective::anomaly_at(std::size_t x) { return Objective(Kind::AnomalyAt, "f2", x, {}, 3); }

Objective Objective::custom(std::string name, CustomEvaluator evaluator, std::size_t min_times) {
  if (!evaluator) throw InvalidArgument("custom objective '" + name + "' has no evaluator");
  if (name.empty()) throw InvalidArgument("custom objective needs a name");
  return Objective(Kind::Custom, std::move(name), 0, std::move(evaluator), std::max<std::size_t>(min_times, 1));
}

void Objective::check_times(std::size_t num_times) const {
  switch (kind_) {
    case Kind::StartEndShift:
      if (num_times < 3) {
        throw ObjectiveUndefined("f1 requires at least 3 time steps (dataset has " + std::to_string(num_times) + ")");
      }
      break;
    case Kind::AnomalyAt:
      if (num_times < 3 || x_ < 2 || x_ + 1 > num_times) {
        throw ObjectiveUndefined("f2 requires 2 <= x <= T-1 (x = " + std::to_string(x_) +
                                 ", T = " + std::to_string(num_times) + ")");
      }
      break;
    case Kind::Custom:
      if (num_times < min_times_) {
        throw ObjectiveUndefined(name_ + " requires at least " + std::to_string(min_times_) + " time steps");
      }
      break;
  }
}

Score Objective::evaluate(const CountSeries& counts_a, const CountSeries& counts_b) const {
  switch (kind_) {
    case Kind::StartEndShift: return eval_f1(counts_a);
    case Kind::AnomalyAt: return eval_f2(counts_a, x_);
    case Kind::Custom: return evaluator_(counts_a, counts_b);
  }
  return 0.0;
}

Score eval_f1(const CountSeries& a) {
  const std::size_t T = a.size();
  if (T < 3) throw ObjectiveUndefined("f1 requires at least 3 time steps (got " + std::to_string(T) + ")");
  const double start = static_cast<double>(a[0] + a[1]) / 2.0;
  const double end = static_cast<double>(a[T - 1] + a[T - 2]) / 2.0;
  return std::abs(start - end);
}

Score eval_f2(const CountSeries& a, std::size_t x) {
  const std::size_t T = a.size();
  if (x < 2 || x + 1 > T) {
    throw ObjectiveUndefined("f2 requires 2 <= x <= T-1 (x = " + std::to_string(x) + ", T = " + std::to_string(T) + ")");
  }
  const std::int64_t here = a[x - 1];
  const std::int64_t next = a[x];
  const std::int64_t prev = a[x - 2];
  return static_cast<double>(std::llabs(here - next) + std::llabs(here - prev)) / 2.0;
}

Score eval_objective(const Objective& objective, const CountSeries& counts_a, const CountSeries& counts_b) {
  if (counts_a.size() != counts_b.size()) {
    throw InvalidArgument("count series length mismatch (" + std::to_string(counts_a.size()) + " vs " +
                          std::to_string(counts_b.size()) + ")");
  }
  objective.check_times(counts_a.size());
  return objective.evaluate(counts_a, counts_b);
}

bool scores_tie(Score a, Score b, bool exact) {
  if (exact || a == b) return a == b;
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

}  // namespace detect
