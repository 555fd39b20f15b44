#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detect/ingest.hpp"
#include "detect/tree.hpp"

namespace detect {

/// Condition selecting `side` of `rule`, e.g. "autosaves <= 9" or
/// "autosaves > 9". Numeric rules that route Missing to side A carry the
/// suffix " (missing → left)"; without it Missing goes right.
/// Score text with at least one decimal place ("30.0", "30.5").
std::string format_score(Score score);

std::string condition_text(const SplitRule& rule, Side side);

struct LeafRule {
  std::string label;
  std::size_t size = 0;
  std::vector<std::string> conditions;  // root first
  std::vector<Score> scores;            // split score at each ancestor, root first
};

/// One entry per leaf, depth-first.
std::vector<LeafRule> leaf_rules(const ClusterTree& tree);

enum class TableFormat { Text, Csv };

/// Leaf rule table: label, size, per-level scores and the conjunction of the
/// conditions on the path ("a <= 9 AND b > 2").
std::string render_rules(const ClusterTree& tree, TableFormat format = TableFormat::Text);

/// Header "time,<leaf labels...>", then one line per time step.
std::string export_distribution(const DistributionTable& table);
DistributionTable parse_distribution(std::string_view text);

struct PlotOptions {
  std::optional<std::int64_t> mark;  // time identifier to shade
  std::string title = "Cluster distribution over time";
  std::string x_label = "time";
  std::string y_label = "rows";
};

/// Standalone SVG line chart, one polyline per leaf. Deterministic.
std::string render_plot_svg(const DistributionTable& table, const PlotOptions& options = {});
void emit_plot(const DistributionTable& table, const std::filesystem::path& path, const PlotOptions& options = {});

struct Correlation {
  double r = 0.0;
  double p = 1.0;
};

/// Sample Pearson correlation coefficient.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

/// Pearson r with a two-sided permutation p-value: the fraction of the
/// identity plus `permutations` shuffles of `b` whose |r| reaches |r_observed|.
Correlation correlate(const std::vector<double>& a, const std::vector<double>& b, std::size_t permutations,
                      std::uint64_t seed);

/// Inverse of parse_dataset: header, then one line per row in row order.
/// Missing is written as the config's first missing token.
std::string serialize_dataset(const Dataset& dataset, const IngestConfig& config = {});

}  // namespace detect
