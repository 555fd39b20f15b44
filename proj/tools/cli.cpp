#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include "detect/ingest.hpp"
#include "detect/report.hpp"
#include "detect/synth.hpp"
#include "detect/tree.hpp"

namespace detect::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IngestFlags {
  std::string delimiter = ",";
  std::string student_column = "student";
  std::string time_column = "time";
  std::vector<std::string> missing_tokens;
  std::vector<std::string> categorical;
  std::vector<std::string> numeric;

  void add_to(CLI::App* app) {
    app->add_option("--delimiter", delimiter, "Field delimiter (one character)")->capture_default_str();
    app->add_option("--student-column", student_column, "Student column name")->capture_default_str();
    app->add_option("--time-column", time_column, "Time column name")->capture_default_str();
    app->add_option("--missing", missing_tokens, "Token read as missing (repeatable; default: empty and NA)");
    app->add_option("--categorical", categorical, "Force a feature to be categorical (repeatable)");
    app->add_option("--numeric", numeric, "Force a feature to be numeric (repeatable)");
  }

  IngestConfig config() const {
    if (delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
    IngestConfig c;
    c.delimiter = delimiter.front();
    c.student_column = student_column;
    c.time_column = time_column;
    if (!missing_tokens.empty()) c.missing_tokens = missing_tokens;
    for (const auto& name : categorical) c.kind_overrides[name] = FeatureKind::Categorical;
    for (const auto& name : numeric) c.kind_overrides[name] = FeatureKind::Numeric;
    return c;
  }
};

struct ObjectiveFlags {
  std::string name;
  std::optional<std::size_t> x;

  void add_to(CLI::App* app) {
    app->add_option("--objective", name, "Objective: f1 (start-end shift) or f2 (anomaly at --x)")
        ->required()
        ->check(CLI::IsMember({"f1", "f2"}));
    app->add_option("--x", x, "Time step of interest for f2 (1-based index into the sorted time steps)");
  }

  Objective objective() const {
    if (name == "f1") {
      if (x) throw UsageError("--x only applies to --objective f2");
      return Objective::start_end_shift();
    }
    if (!x) throw UsageError("--objective f2 requires --x <int>");
    return Objective::anomaly_at(*x);
  }
};

struct FitFlags {
  std::size_t min_size = 0;
  std::string mode = "constrained";
  std::optional<double> min_score;
  std::optional<std::size_t> max_depth;
  std::size_t threads = 0;

  void add_to(CLI::App* app) {
    app->add_option("--min-size", min_size, "Minimum rows per child cluster")->required()->check(CLI::PositiveNumber);
    app->add_option("--mode", mode, "Size gate: constrained or reject")
        ->capture_default_str()
        ->check(CLI::IsMember({"constrained", "reject"}));
    app->add_option("--min-score", min_score, "Split only when the score exceeds this value")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--max-depth", max_depth, "Maximum tree depth")->check(CLI::PositiveNumber);
    app->add_option("--threads", threads, "Worker threads for the split search (default: all cores)");
  }

  FitConfig config() const {
    FitConfig c;
    c.min_size = min_size;
    c.mode = parse_search_mode(mode);
    c.min_score = min_score;
    c.max_depth = max_depth;
    c.threads = threads;
    return c;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
  if (!out) throw DataError("failed writing '" + path + "'");
}

Dataset load_dataset(const std::string& path, const IngestConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return parse_dataset(in, config);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string split_summary(const ClusterTree& tree) {
  std::string out;
  for (const TreeNode& node : tree.nodes) {
    if (node.is_leaf()) continue;
    out += std::string(2 * node.depth, ' ') + node.label + "  split " + condition_text(*node.rule, Side::A) +
           "  score " + format_score(node.score) + "  sizes " + std::to_string(tree.nodes[node.child_a].size) +
           "/" + std::to_string(tree.nodes[node.child_b].size) + "\n";
  }
  return out.empty() ? "(no splits)\n" : out;
}

std::vector<double> parse_column(const RawTable& raw, const std::string& name) {
  auto it = std::find(raw.header.begin(), raw.header.end(), name);
  if (it == raw.header.end()) throw DataError("no column named '" + name + "'", 1);
  const auto col = static_cast<std::size_t>(it - raw.header.begin());
  std::vector<double> values;
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    if (raw.rows[r].size() != raw.header.size()) throw DataError("ragged row", raw.lines[r]);
    const auto v = parse_real(raw.rows[r][col]);
    if (!v) throw DataError("value '" + raw.rows[r][col] + "' is not a number", raw.lines[r], name);
    values.push_back(*v);
  }
  return values;
}

Band parse_band(const std::string& text, const char* flag) {
  const auto comma = text.find(',');
  const auto lo = comma == std::string::npos ? std::nullopt : parse_real(std::string_view(text).substr(0, comma));
  const auto hi = comma == std::string::npos ? std::nullopt : parse_real(std::string_view(text).substr(comma + 1));
  if (!lo || !hi) throw UsageError(std::string(flag) + " expects 'low,high'");
  return {*lo, *hi};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Divisive clustering of temporal behaviour records by time-aware objectives", "detect"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("--quiet", quiet, "Suppress summaries on standard output");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a cluster tree");
  std::string fit_input, fit_out, fit_format = "text";
  IngestFlags fit_ingest;
  ObjectiveFlags fit_objective;
  FitFlags fit_flags;
  fit_cmd->add_option("--input", fit_input, "Input data file")->required();
  fit_cmd->add_option("--out", fit_out, "Tree file to write")->required();
  fit_cmd->add_option("--format", fit_format, "Rule table format: text or csv")
      ->capture_default_str()
      ->check(CLI::IsMember({"text", "csv"}));
  fit_ingest.add_to(fit_cmd);
  fit_objective.add_to(fit_cmd);
  fit_flags.add_to(fit_cmd);

  // assign
  auto* assign_cmd = app.add_subcommand("assign", "Label every row with its leaf");
  std::string assign_input, assign_tree, assign_out;
  IngestFlags assign_ingest;
  assign_cmd->add_option("--input", assign_input, "Input data file")->required();
  assign_cmd->add_option("--tree", assign_tree, "Tree file")->required();
  assign_cmd->add_option("--out", assign_out, "Assignment file to write (student,time,leaf)")->required();
  assign_ingest.add_to(assign_cmd);

  // distributions
  auto* dist_cmd = app.add_subcommand("distributions", "Count rows per leaf and time step");
  std::string dist_input, dist_tree, dist_out;
  IngestFlags dist_ingest;
  dist_cmd->add_option("--input", dist_input, "Input data file")->required();
  dist_cmd->add_option("--tree", dist_tree, "Tree file")->required();
  dist_cmd->add_option("--out", dist_out, "Distribution file to write")->required();
  dist_ingest.add_to(dist_cmd);

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "Draw a distribution file as an SVG line chart");
  std::string plot_in, plot_out;
  std::optional<std::int64_t> plot_mark;
  PlotOptions plot_options;
  plot_cmd->add_option("--distributions", plot_in, "Distribution file")->required();
  plot_cmd->add_option("--out", plot_out, "SVG file to write")->required();
  plot_cmd->add_option("--mark", plot_mark, "Time identifier to shade");
  plot_cmd->add_option("--title", plot_options.title, "Chart title");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a dataset with a planted trend");
  std::string synth_kind = "shift", synth_out, synth_truth, band_low = "0,1", band_high = "2,3";
  PlantSpec plant;
  synth_cmd->add_option("--kind", synth_kind, "shift or anomaly")
      ->capture_default_str()
      ->check(CLI::IsMember({"shift", "anomaly"}));
  synth_cmd->add_option("--students", plant.students, "Number of students")->capture_default_str();
  synth_cmd->add_option("--times", plant.times, "Number of time steps")->capture_default_str();
  synth_cmd->add_option("--event-time", plant.event_time, "Shift boundary or anomaly time step")
      ->capture_default_str();
  synth_cmd->add_option("--fraction", plant.affected_fraction, "Fraction of affected students")->capture_default_str();
  synth_cmd->add_option("--noise-features", plant.noise_features, "Number of noise features")->capture_default_str();
  synth_cmd->add_option("--signal-feature", plant.signal_feature, "Signal feature name")->capture_default_str();
  synth_cmd->add_option("--band-low", band_low, "Baseline band 'low,high'")->capture_default_str();
  synth_cmd->add_option("--band-high", band_high, "Planted band 'low,high'")->capture_default_str();
  synth_cmd->add_option("--seed", plant.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Dataset file to write")->required();
  synth_cmd->add_option("--truth", synth_truth, "Ground-truth sidecar to write (default: <out>.truth)");

  // check
  auto* check_cmd = app.add_subcommand("check", "Compare the fitted tree against the brute-force oracle");
  std::string check_input, check_out;
  std::size_t check_bound = kDefaultOracleBound;
  IngestFlags check_ingest;
  ObjectiveFlags check_objective;
  FitFlags check_flags;
  check_cmd->add_option("--input", check_input, "Input data file")->required();
  check_cmd->add_option("--out", check_out, "Report file to write");
  check_cmd->add_option("--bound", check_bound, "Largest cluster the oracle may search")->capture_default_str();
  check_ingest.add_to(check_cmd);
  check_objective.add_to(check_cmd);
  check_flags.add_to(check_cmd);

  // correlate
  auto* corr_cmd = app.add_subcommand("correlate", "Pearson correlation with a permutation p-value");
  std::string corr_input, corr_a, corr_b, corr_out;
  std::size_t corr_perms = 9999;
  std::uint64_t corr_seed = 1;
  corr_cmd->add_option("--input", corr_input, "Delimited file holding both series")->required();
  corr_cmd->add_option("--a", corr_a, "First column")->required();
  corr_cmd->add_option("--b", corr_b, "Second column")->required();
  corr_cmd->add_option("--permutations", corr_perms, "Number of shuffles")->capture_default_str();
  corr_cmd->add_option("--seed", corr_seed, "Random seed")->capture_default_str();
  corr_cmd->add_option("--out", corr_out, "Result file to write");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  auto say = [&](const std::string& text) {
    if (!quiet) out << text;
  };

  try {
    if (*fit_cmd) {
      const Objective objective = fit_objective.objective();
      const FitConfig config = fit_flags.config();
      const Dataset data = load_dataset(fit_input, fit_ingest.config());
      const ClusterTree tree = fit(data, objective, config);
      write_file(fit_out, serialize_tree(tree));
      say("rows " + std::to_string(data.rows.size()) + ", students " + std::to_string(data.num_students()) +
          ", time steps " + std::to_string(data.num_times()) + ", features " + std::to_string(data.num_features()) +
          "\n");
      say("objective " + tree.objective + (tree.x ? " (x = " + std::to_string(tree.x) + ")" : "") + ", min size " +
          std::to_string(config.min_size) + ", mode " + to_string(config.mode) + "\n\n");
      say(split_summary(tree) + "\n");
      say(render_rules(tree, fit_format == "csv" ? TableFormat::Csv : TableFormat::Text));
    } else if (*assign_cmd) {
      const Dataset data = load_dataset(assign_input, assign_ingest.config());
      const ClusterTree tree = parse_tree(read_file(assign_tree));
      const auto labels = assign(tree, data);
      const IngestConfig config = assign_ingest.config();
      const std::string d(1, config.delimiter);
      std::string text = "student" + d + "time" + d + "leaf\n";
      for (std::size_t r = 0; r < data.rows.size(); ++r) {
        text += quote_field(data.rows[r].student, config.delimiter) + d +
                std::to_string(data.times[data.rows[r].time_index - 1]) + d + labels[r] + "\n";
      }
      write_file(assign_out, text);
      say("assigned " + std::to_string(labels.size()) + " rows to " + std::to_string(tree.leaves().size()) +
          " leaves\n");
    } else if (*dist_cmd) {
      const Dataset data = load_dataset(dist_input, dist_ingest.config());
      const ClusterTree tree = parse_tree(read_file(dist_tree));
      const DistributionTable table = leaf_distributions(tree, data);
      const std::string text = export_distribution(table);
      write_file(dist_out, text);
      say(text);
    } else if (*plot_cmd) {
      const DistributionTable table = parse_distribution(read_file(plot_in));
      plot_options.mark = plot_mark;
      emit_plot(table, plot_out, plot_options);
      say("wrote " + plot_out + "\n");
    } else if (*synth_cmd) {
      plant.band_low = parse_band(band_low, "--band-low");
      plant.band_high = parse_band(band_high, "--band-high");
      const PlantKind kind = synth_kind == "shift" ? PlantKind::Shift : PlantKind::Anomaly;
      try {
        plant.validate();
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
      const Dataset data = kind == PlantKind::Shift ? generate_planted_shift(plant) : generate_planted_anomaly(plant);
      const GroundTruth truth = planted_truth(plant, kind);
      write_file(synth_out, serialize_dataset(data));
      write_file(synth_truth.empty() ? synth_out + ".truth" : synth_truth, truth.to_text());
      say(truth.to_text());
    } else if (*check_cmd) {
      const Objective objective = check_objective.objective();
      FitConfig config = check_flags.config();
      const Dataset data = load_dataset(check_input, check_ingest.config());
      const std::string fitted = serialize_tree(fit(data, objective, config));
      const std::string reference = serialize_tree(oracle_fit(data, objective, config, nullptr, check_bound));
      const bool match = fitted == reference;
      std::string report = std::string("fit vs oracle: ") + (match ? "match" : "MISMATCH") + "\n";
      if (!match) report += "--- fit\n" + fitted + "--- oracle\n" + reference;
      if (!check_out.empty()) write_file(check_out, report);
      say(report);
      return match ? kOk : kDataError;
    } else if (*corr_cmd) {
      std::istringstream in(read_file(corr_input));
      const RawTable raw = read_delimited(in, ',');
      const Correlation c = correlate(parse_column(raw, corr_a), parse_column(raw, corr_b), corr_perms, corr_seed);
      const std::string text = "r=" + format_number(c.r) + "\np=" + format_number(c.p) + "\npermutations=" +
                               std::to_string(corr_perms) + "\nseed=" + std::to_string(corr_seed) + "\n";
      if (!corr_out.empty()) write_file(corr_out, text);
      say(text);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace detect::cli
