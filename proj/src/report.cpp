#include "detect/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "detect/random.hpp"

namespace detect {

std::string format_score(Score score) {
  std::string out = format_number(score);
  if (out.find_first_of(".en") == std::string::npos) out += ".0";
  return out;
}

std::string condition_text(const SplitRule& rule, Side side) {
  if (const auto* le = std::get_if<NumericLe>(&rule.test)) {
    std::string out = rule.feature + (side == Side::A ? " <= " : " > ") + format_number(le->threshold);
    if (le->missing_side == Side::A) out += " (missing → left)";
    return out;
  }
  const auto& eq = std::get<CategoryEq>(rule.test);
  if (eq.missing) return rule.feature + (side == Side::A ? " is missing" : " is not missing");
  return rule.feature + (side == Side::A ? " == '" : " != '") + eq.category + "'";
}

std::vector<LeafRule> leaf_rules(const ClusterTree& tree) {
  std::vector<LeafRule> out;
  for (std::size_t leaf : tree.leaves()) {
    LeafRule entry{tree.nodes[leaf].label, tree.nodes[leaf].size, {}, {}};
    const auto path = tree.path_to(leaf);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const TreeNode& node = tree.nodes[path[i]];
      const Side side = path[i + 1] == node.child_a ? Side::A : Side::B;
      entry.conditions.push_back(condition_text(*node.rule, side));
      entry.scores.push_back(node.score);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string join_scores(const std::vector<Score>& scores, std::string_view sep) {
  std::vector<std::string> parts;
  for (Score s : scores) parts.push_back(format_score(s));
  return join(parts, sep);
}

// Display width in code points; the arrow in the missing annotation is multi-byte.
std::size_t display_width(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

}  // namespace

std::string render_rules(const ClusterTree& tree, TableFormat format) {
  const auto rules = leaf_rules(tree);
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"label", "size", "scores", "conditions"});
  for (const auto& r : rules) {
    if (format == TableFormat::Csv) {
      cells.push_back({r.label, std::to_string(r.size), join_scores(r.scores, ";"), join(r.conditions, " AND ")});
    } else {
      cells.push_back({r.label, std::to_string(r.size), r.scores.empty() ? "-" : join_scores(r.scores, " / "),
                       r.conditions.empty() ? "(all rows)" : join(r.conditions, " AND ")});
    }
  }

  std::string out;
  if (format == TableFormat::Csv) {
    for (const auto& row : cells) {
      std::vector<std::string> quoted;
      for (const auto& c : row) quoted.push_back(quote_field(c, ','));
      out += join(quoted, ",") + "\n";
    }
    return out;
  }
  std::vector<std::size_t> width(4, 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], display_width(row[c]));
  }
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size()) line += std::string(width[c] - display_width(row[c]) + 2, ' ');
    }
    out += line + "\n";
  }
  return out;
}

std::string export_distribution(const DistributionTable& table) {
  std::string out = "time";
  for (const auto& label : table.leaves) out += "," + quote_field(label, ',');
  out += "\n";
  for (std::size_t t = 0; t < table.times.size(); ++t) {
    out += std::to_string(table.times[t]);
    for (std::size_t l = 0; l < table.leaves.size(); ++l) out += "," + std::to_string(table.at(t, l));
    out += "\n";
  }
  return out;
}

DistributionTable parse_distribution(std::string_view text) {
  std::istringstream in{std::string(text)};
  RawTable raw = read_delimited(in, ',');
  if (raw.header.empty() || raw.header.front() != "time") {
    throw DataError("distribution file must start with a 'time' column", 1);
  }
  DistributionTable table;
  table.leaves.assign(raw.header.begin() + 1, raw.header.end());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto& row = raw.rows[r];
    if (row.size() != raw.header.size()) throw DataError("ragged row", raw.lines[r]);
    const auto t = parse_integer(row[0]);
    if (!t) throw DataError("time value is not an integer", raw.lines[r], "time");
    table.times.push_back(*t);
    for (std::size_t c = 1; c < row.size(); ++c) {
      const auto v = parse_integer(row[c]);
      if (!v || *v < 0) throw DataError("count is not a non-negative integer", raw.lines[r], raw.header[c]);
      table.counts.push_back(*v);
    }
  }
  return table;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidArgument("series lengths differ");
  if (a.size() < 3) throw InvalidArgument("correlation needs at least 3 points");
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw InvalidArgument("correlation undefined for a zero-variance series");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

Correlation correlate(const std::vector<double>& a, const std::vector<double>& b, std::size_t permutations,
                      std::uint64_t seed) {
  Correlation result;
  result.r = pearson(a, b);
  const double observed = std::abs(result.r);
  // Rounding can make a relabelling with an identical statistic differ in the last bits.
  const double cutoff = observed * (1.0 - 1e-12);

  Rng rng(seed);
  std::vector<double> shuffled = b;
  std::size_t extreme = 1;  // the identity permutation
  for (std::size_t i = 0; i < permutations; ++i) {
    rng.shuffle(shuffled.begin(), shuffled.end());
    if (std::abs(pearson(a, shuffled)) >= cutoff) ++extreme;
  }
  result.p = static_cast<double>(extreme) / static_cast<double>(permutations + 1);
  return result;
}

std::string serialize_dataset(const Dataset& dataset, const IngestConfig& config) {
  config.validate();
  if (config.missing_tokens.empty()) throw InvalidArgument("serialization needs at least one missing token");
  const char d = config.delimiter;
  const std::string delim(1, d);

  std::string out = quote_field(config.student_column, d) + delim + quote_field(config.time_column, d);
  for (const auto& f : dataset.schema.features) out += delim + quote_field(f.name, d);
  out += "\n";

  for (const Row& row : dataset.rows) {
    if (row.time_index < 1 || row.time_index > dataset.times.size()) throw InvalidArgument("row has unknown time index");
    out += quote_field(row.student, d) + delim + std::to_string(dataset.times[row.time_index - 1]);
    for (const FeatureValue& v : row.values) {
      out += delim;
      if (is_missing(v)) {
        out += quote_field(config.missing_tokens.front(), d);
      } else if (const double* x = std::get_if<double>(&v)) {
        out += format_number(*x);
      } else {
        const auto& token = std::get<std::string>(v);
        if (config.is_missing_token(token)) {
          throw InvalidArgument("category '" + token + "' collides with a missing token");
        }
        out += quote_field(token, d);
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace detect
