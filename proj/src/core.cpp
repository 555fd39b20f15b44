#include "detect/core.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>
#include <utility>

namespace detect {

const char* to_string(FeatureKind kind) {
  return kind == FeatureKind::Numeric ? "numeric" : "categorical";
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::EmptySchema: return "empty-schema";
    case ViolationKind::DuplicateFeatureName: return "duplicate-feature-name";
    case ViolationKind::EmptyFeatureName: return "empty-feature-name";
    case ViolationKind::NoTimes: return "no-times";
    case ViolationKind::UnsortedTimes: return "unsorted-times";
    case ViolationKind::NoRows: return "no-rows";
    case ViolationKind::UnknownTime: return "unknown-time";
    case ViolationKind::DuplicatePair: return "duplicate-pair";
    case ViolationKind::WrongArity: return "wrong-arity";
    case ViolationKind::KindMismatch: return "kind-mismatch";
    case ViolationKind::DisallowedMissing: return "disallowed-missing";
    case ViolationKind::NonFiniteValue: return "non-finite-value";
    case ViolationKind::EmptyCategory: return "empty-category";
  }
  return "unknown";
}

std::optional<std::size_t> Schema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Dataset::num_students() const {
  std::unordered_set<std::string_view> seen;
  for (const auto& row : rows) seen.insert(row.student);
  return seen.size();
}

std::int64_t CountSeries::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

CountSeries& CountSeries::operator+=(const CountSeries& other) {
  if (other.size() != size()) throw InvalidArgument("count series length mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

CountSeries& CountSeries::operator-=(const CountSeries& other) {
  if (other.size() != size()) throw InvalidArgument("count series length mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] -= other.counts_[i];
  return *this;
}

ValidationReport validate_dataset(const Dataset& dataset) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::optional<std::size_t> row, std::optional<std::string> feature,
                 std::string message) {
    report.push_back({kind, row, std::move(feature), std::move(message)});
  };

  const auto& features = dataset.schema.features;
  if (features.empty()) add(ViolationKind::EmptySchema, std::nullopt, std::nullopt, "schema has no features");
  std::set<std::string_view> names;
  for (const auto& f : features) {
    if (f.name.empty()) add(ViolationKind::EmptyFeatureName, std::nullopt, f.name, "feature name is empty");
    if (!names.insert(f.name).second) {
      add(ViolationKind::DuplicateFeatureName, std::nullopt, f.name, "duplicate feature name '" + f.name + "'");
    }
  }

  const auto& times = dataset.times;
  if (times.empty()) add(ViolationKind::NoTimes, std::nullopt, std::nullopt, "dataset has no time steps");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i - 1] >= times[i]) {
      add(ViolationKind::UnsortedTimes, std::nullopt, std::nullopt,
          "time identifiers are not strictly ascending at position " + std::to_string(i));
    }
  }
  if (dataset.rows.empty()) add(ViolationKind::NoRows, std::nullopt, std::nullopt, "dataset has no rows");

  std::set<std::pair<std::string_view, std::size_t>> pairs;
  for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
    const Row& row = dataset.rows[r];
    const std::string where = "row " + std::to_string(r) + " (student '" + row.student + "')";
    if (row.time_index < 1 || row.time_index > times.size()) {
      add(ViolationKind::UnknownTime, r, std::nullopt,
          where + ": time index " + std::to_string(row.time_index) + " is outside 1.." + std::to_string(times.size()));
    } else if (!pairs.emplace(row.student, row.time_index).second) {
      add(ViolationKind::DuplicatePair, r, std::nullopt,
          where + ": duplicate (student, time) pair at time " + std::to_string(times[row.time_index - 1]));
    }
    if (row.values.size() != features.size()) {
      add(ViolationKind::WrongArity, r, std::nullopt,
          where + ": has " + std::to_string(row.values.size()) + " values, expected " +
              std::to_string(features.size()));
      continue;
    }
    for (std::size_t f = 0; f < features.size(); ++f) {
      const FeatureSpec& spec = features[f];
      const FeatureValue& v = row.values[f];
      if (is_missing(v)) {
        if (!spec.allow_missing) {
          add(ViolationKind::DisallowedMissing, r, spec.name, where + ": missing value in feature '" + spec.name + "'");
        }
      } else if (const double* d = std::get_if<double>(&v)) {
        if (spec.kind != FeatureKind::Numeric) {
          add(ViolationKind::KindMismatch, r, spec.name,
              where + ": numeric value in categorical feature '" + spec.name + "'");
        } else if (!std::isfinite(*d)) {
          add(ViolationKind::NonFiniteValue, r, spec.name, where + ": non-finite value in feature '" + spec.name + "'");
        }
      } else {
        const auto& token = std::get<std::string>(v);
        if (spec.kind != FeatureKind::Categorical) {
          add(ViolationKind::KindMismatch, r, spec.name,
              where + ": category token '" + token + "' in numeric feature '" + spec.name + "'");
        } else if (token.empty()) {
          add(ViolationKind::EmptyCategory, r, spec.name, where + ": empty category in feature '" + spec.name + "'");
        }
      }
    }
  }
  return report;
}

void require_valid(const Dataset& dataset) {
  const auto report = validate_dataset(dataset);
  if (!report.empty()) {
    throw DataError("invalid dataset: " + report.front().message +
                    (report.size() > 1 ? " (and " + std::to_string(report.size() - 1) + " more)" : ""));
  }
}

CountSeries counts_over_time(const Dataset& dataset, std::span<const std::size_t> subset) {
  CountSeries counts(dataset.num_times());
  for (std::size_t r : subset) {
    if (r >= dataset.rows.size()) {
      throw InvalidArgument("row index " + std::to_string(r) + " out of range (dataset has " +
                            std::to_string(dataset.rows.size()) + " rows)");
    }
    const std::size_t t = dataset.rows[r].time_index;
    if (t < 1 || t > counts.size()) throw InvalidArgument("row " + std::to_string(r) + " has an unknown time index");
    ++counts[t - 1];
  }
  return counts;
}

CountSeries counts_over_time(const Dataset& dataset) {
  std::vector<std::size_t> all(dataset.rows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return counts_over_time(dataset, all);
}

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw InvalidArgument("cannot format number");
  return std::string(buf, end);
}

}  // namespace detect
