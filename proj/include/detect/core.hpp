#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "detect/error.hpp"

namespace detect {

struct Missing {
  bool operator==(const Missing&) const = default;
};

/// One cell of the input table: a finite real, a non-empty category token,
/// or missing.
using FeatureValue = std::variant<Missing, double, std::string>;

inline bool is_missing(const FeatureValue& v) { return std::holds_alternative<Missing>(v); }

enum class FeatureKind { Numeric, Categorical };

const char* to_string(FeatureKind kind);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  bool allow_missing = false;

  bool operator==(const FeatureSpec&) const = default;
};

/// Ordered feature list. Order matters: it is the primary tie-break key when
/// two features split equally well.
struct Schema {
  std::vector<FeatureSpec> features;

  std::size_t size() const { return features.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return features[i]; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  bool operator==(const Schema&) const = default;
};

/// One student's record at one time step. `time_index` is 1-based into
/// Dataset::times.
struct Row {
  std::string student;
  std::size_t time_index = 1;
  std::vector<FeatureValue> values;

  bool operator==(const Row&) const = default;
};

/// Long-format table: one row per (student, time step) present in the data.
/// Students need not appear at every time step.
struct Dataset {
  Schema schema;
  std::vector<std::int64_t> times;  // distinct, ascending
  std::vector<Row> rows;

  std::size_t num_times() const { return times.size(); }
  std::size_t num_features() const { return schema.size(); }
  std::size_t num_students() const;

  bool operator==(const Dataset&) const = default;
};

/// Per-time-step row counts of a subset of a dataset.
class CountSeries {
 public:
  CountSeries() = default;
  explicit CountSeries(std::size_t num_times) : counts_(num_times, 0) {}
  explicit CountSeries(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {}
  CountSeries(std::initializer_list<std::int64_t> counts) : counts_(counts) {}

  std::size_t size() const { return counts_.size(); }
  std::int64_t operator[](std::size_t i) const { return counts_[i]; }
  std::int64_t& operator[](std::size_t i) { return counts_[i]; }
  auto begin() const { return counts_.begin(); }
  auto end() const { return counts_.end(); }
  const std::vector<std::int64_t>& values() const { return counts_; }
  std::int64_t total() const;

  CountSeries& operator+=(const CountSeries& other);
  CountSeries& operator-=(const CountSeries& other);
  friend CountSeries operator+(CountSeries lhs, const CountSeries& rhs) { return lhs += rhs; }
  friend CountSeries operator-(CountSeries lhs, const CountSeries& rhs) { return lhs -= rhs; }

  bool operator==(const CountSeries&) const = default;

 private:
  std::vector<std::int64_t> counts_;
};

enum class ViolationKind {
  EmptySchema,
  DuplicateFeatureName,
  EmptyFeatureName,
  NoTimes,
  UnsortedTimes,
  NoRows,
  UnknownTime,
  DuplicatePair,
  WrongArity,
  KindMismatch,
  DisallowedMissing,
  NonFiniteValue,
  EmptyCategory,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::optional<std::size_t> row;      // 0-based row index
  std::optional<std::string> feature;  // feature name
  std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Every invariant violation in `dataset`; empty iff the dataset is well formed.
ValidationReport validate_dataset(const Dataset& dataset);

/// Throws DataError carrying the first violation when the report is non-empty.
void require_valid(const Dataset& dataset);

/// counts[i] = number of `subset` rows whose time_index is i+1.
CountSeries counts_over_time(const Dataset& dataset, std::span<const std::size_t> subset);

/// Counts over every row of the dataset.
CountSeries counts_over_time(const Dataset& dataset);

/// Shortest representation of `value` that parses back to the same double.
std::string format_number(double value);

}  // namespace detect
