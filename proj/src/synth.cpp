#include "detect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detect/random.hpp"

namespace detect {

const char* to_string(PlantKind kind) { return kind == PlantKind::Shift ? "shift" : "anomaly"; }

void PlantSpec::validate() const {
  if (students < 1) throw InvalidArgument("plant spec: need at least one student");
  if (times < 3) throw InvalidArgument("plant spec: need at least 3 time steps");
  if (signal_feature.empty()) throw InvalidArgument("plant spec: signal feature needs a name");
  for (std::size_t i = 1; i <= noise_features; ++i) {
    if (signal_feature == "noise" + std::to_string(i)) {
      throw InvalidArgument("plant spec: signal feature name collides with a noise feature");
    }
  }
  if (event_time < 2 || event_time + 1 > times) {
    throw InvalidArgument("plant spec: event time must lie in 2..T-1");
  }
  if (!(affected_fraction > 0.0 && affected_fraction <= 1.0)) {
    throw InvalidArgument("plant spec: affected fraction must lie in (0, 1]");
  }
  if (!(band_low.low < band_low.high) || !(band_high.low < band_high.high)) {
    throw InvalidArgument("plant spec: bands must have low < high");
  }
  if (!(band_low.high < band_high.low)) {
    throw InvalidArgument("plant spec: band_low must lie strictly below band_high");
  }
}

std::size_t PlantSpec::affected_count() const {
  const auto k = static_cast<std::size_t>(std::llround(affected_fraction * static_cast<double>(students)));
  return std::clamp<std::size_t>(k, 1, students);
}

std::string synthetic_student_id(std::size_t index, std::size_t students) {
  const std::size_t width = std::to_string(students).size();
  std::string digits = std::to_string(index + 1);
  return "s" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

namespace {

std::vector<bool> choose_affected(const PlantSpec& spec, Rng& rng) {
  std::vector<std::size_t> order(spec.students);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  std::vector<bool> affected(spec.students, false);
  for (std::size_t i = 0; i < spec.affected_count(); ++i) affected[order[i]] = true;
  return affected;
}

Dataset generate(const PlantSpec& spec, PlantKind kind) {
  spec.validate();
  Rng rng(spec.seed);
  const auto affected = choose_affected(spec, rng);

  Dataset dataset;
  for (std::size_t i = 1; i <= spec.noise_features; ++i) {
    dataset.schema.features.push_back({"noise" + std::to_string(i), FeatureKind::Numeric, false});
  }
  dataset.schema.features.push_back({spec.signal_feature, FeatureKind::Numeric, false});
  for (std::size_t t = 1; t <= spec.times; ++t) dataset.times.push_back(static_cast<std::int64_t>(t));

  dataset.rows.reserve(spec.students * spec.times);
  for (std::size_t s = 0; s < spec.students; ++s) {
    for (std::size_t t = 1; t <= spec.times; ++t) {
      Row row{synthetic_student_id(s, spec.students), t, {}};
      row.values.reserve(spec.noise_features + 1);
      for (std::size_t f = 0; f < spec.noise_features; ++f) row.values.emplace_back(rng.uniform01());
      const bool high = affected[s] && (kind == PlantKind::Shift ? t >= spec.event_time : t == spec.event_time);
      const Band& band = high ? spec.band_high : spec.band_low;
      row.values.emplace_back(rng.uniform(band.low, band.high));
      dataset.rows.push_back(std::move(row));
    }
  }
  return dataset;
}

}  // namespace

Dataset generate_planted_shift(const PlantSpec& spec) { return generate(spec, PlantKind::Shift); }

Dataset generate_planted_anomaly(const PlantSpec& spec) { return generate(spec, PlantKind::Anomaly); }

GroundTruth planted_truth(const PlantSpec& spec, PlantKind kind) {
  spec.validate();
  Rng rng(spec.seed);
  const auto affected = choose_affected(spec, rng);
  GroundTruth truth{kind, spec.signal_feature, spec.event_time, {}, spec};
  for (std::size_t s = 0; s < spec.students; ++s) {
    if (affected[s]) truth.affected_students.push_back(synthetic_student_id(s, spec.students));
  }
  return truth;
}

std::string GroundTruth::to_text() const {
  std::string out;
  out += "kind=" + std::string(to_string(kind)) + "\n";
  out += "signal_feature=" + signal_feature + "\n";
  out += "event_time=" + std::to_string(event_time) + "\n";
  out += "affected_count=" + std::to_string(affected_students.size()) + "\n";
  out += "students=" + std::to_string(spec.students) + "\n";
  out += "times=" + std::to_string(spec.times) + "\n";
  out += "noise_features=" + std::to_string(spec.noise_features) + "\n";
  out += "band_low=" + format_number(spec.band_low.low) + "," + format_number(spec.band_low.high) + "\n";
  out += "band_high=" + format_number(spec.band_high.low) + "," + format_number(spec.band_high.high) + "\n";
  out += "seed=" + std::to_string(spec.seed) + "\n";
  out += "affected_students=";
  for (std::size_t i = 0; i < affected_students.size(); ++i) out += (i ? "," : "") + affected_students[i];
  out += "\n";
  return out;
}

}  // namespace detect
