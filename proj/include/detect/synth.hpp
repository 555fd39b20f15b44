#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detect/core.hpp"
#include "detect/search.hpp"
#include "detect/tree.hpp"

namespace detect {

struct Band {
  double low = 0.0;
  double high = 1.0;
};

enum class PlantKind { Shift, Anomaly };

const char* to_string(PlantKind kind);

/// Parameters of a synthetic dataset with one planted trend.
///
/// Features are `noise_features` columns named noise1..noiseN followed by the
/// signal column. Every student appears at every time step 1..times.
struct PlantSpec {
  std::size_t students = 40;
  std::size_t times = 6;
  std::string signal_feature = "signal";
  std::size_t noise_features = 3;
  /// Shift plants: first time step in the high band. Anomaly plants: the
  /// single time step in the high band.
  std::size_t event_time = 4;
  double affected_fraction = 0.75;
  Band band_low{0.0, 1.0};
  Band band_high{2.0, 3.0};
  std::uint64_t seed = 0;

  void validate() const;
  /// round(affected_fraction * students), at least 1.
  std::size_t affected_count() const;
};

struct GroundTruth {
  PlantKind kind = PlantKind::Shift;
  std::string signal_feature;
  std::size_t event_time = 0;
  std::vector<std::string> affected_students;
  PlantSpec spec;

  /// key=value lines, one per field.
  std::string to_text() const;
};

/// Student ids used by the generators: "s01".."s40" (zero padded to the
/// width of the student count).
std::string synthetic_student_id(std::size_t index, std::size_t students);

/// Affected students draw the signal from band_low before event_time and
/// from band_high from event_time on; everyone else stays in band_low. Noise
/// features are i.i.d. uniform on [0, 1).
///
/// Draw order, all from one Rng(seed): a shuffle of the student indices (the
/// first affected_count of them are affected), then per student in id order,
/// per time step: the noise features in order, then the signal.
Dataset generate_planted_shift(const PlantSpec& spec);

/// As generate_planted_shift, but affected students sit in band_high only at
/// event_time.
Dataset generate_planted_anomaly(const PlantSpec& spec);

GroundTruth planted_truth(const PlantSpec& spec, PlantKind kind);

constexpr std::size_t kDefaultOracleBound = 5000;

/// Exhaustive reference for best_split: materialises every candidate division
/// and recounts it from scratch. Candidates are enumerated in tie-break order
/// and only a strictly better score replaces the incumbent.
std::optional<SplitCandidate> oracle_best_split(const Dataset& dataset, std::span<const std::size_t> cluster,
                                                const Objective& objective, std::size_t min_size,
                                                SearchMode mode = SearchMode::Constrained,
                                                std::size_t bound = kDefaultOracleBound);

/// Reference recursion built on oracle_best_split. Produces the same tree
/// document as fit() when both agree.
ClusterTree oracle_fit(const Dataset& dataset, const Objective& objective, const FitConfig& config,
                       std::vector<std::size_t>* leaf_of_row = nullptr, std::size_t bound = kDefaultOracleBound);

}  // namespace detect
