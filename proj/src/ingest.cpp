#include "detect/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace detect {

void IngestConfig::validate() const {
  if (delimiter == '"' || delimiter == '\n' || delimiter == '\r') throw InvalidArgument("invalid delimiter");
  if (student_column.empty() || time_column.empty()) throw InvalidArgument("student and time column names are required");
  if (student_column == time_column) throw InvalidArgument("student and time columns must differ");
  if (kind_overrides.count(student_column) || kind_overrides.count(time_column)) {
    throw InvalidArgument("kind overrides cannot name the student or time column");
  }
}

bool IngestConfig::is_missing_token(std::string_view cell) const {
  return std::find(missing_tokens.begin(), missing_tokens.end(), cell) != missing_tokens.end();
}

RawTable read_delimited(std::istream& in, char delimiter) {
  RawTable table;
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool in_quotes = false;
  bool field_started = false;  // anything (even "") seen for this field
  bool field_quoted = false;
  bool any_field = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
    field_quoted = false;
  };
  auto end_record = [&] {
    const bool blank = record.empty() && !field_started && field.empty();
    if (!blank) {
      end_field();
      if (!any_field) {
        table.header = std::move(record);
        any_field = true;
      } else {
        table.rows.push_back(std::move(record));
        table.lines.push_back(record_line);
      }
    }
    record.clear();
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_quoted) {
      in_quotes = true;
      field_quoted = true;
      field_started = true;
    } else if (c == delimiter) {
      end_field();
      field_started = true;  // the next field exists even if empty
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_record();
      record_line = ++line;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field", record_line);
  if (!field.empty() && field.back() == '\r') field.pop_back();
  end_record();
  if (!any_field) throw DataError("input is empty (a header row is required)", 1);
  return table;
}

std::optional<double> parse_real(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<std::int64_t> parse_integer(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::int64_t value = 0;
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return value;
}

namespace {

struct Columns {
  std::size_t student = 0;
  std::size_t time = 0;
  std::vector<std::size_t> features;  // header positions, in file order
};

Columns locate_columns(const std::vector<std::string>& header, const IngestConfig& config) {
  std::set<std::string_view> seen;
  for (const auto& name : header) {
    if (name.empty()) throw DataError("header contains an empty column name", 1);
    if (!seen.insert(name).second) throw DataError("duplicate column name in header", 1, name);
  }
  Columns cols;
  bool have_student = false;
  bool have_time = false;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == config.student_column) {
      cols.student = i;
      have_student = true;
    } else if (header[i] == config.time_column) {
      cols.time = i;
      have_time = true;
    } else {
      cols.features.push_back(i);
    }
  }
  if (!have_student) throw DataError("header has no student column", 1, config.student_column);
  if (!have_time) throw DataError("header has no time column", 1, config.time_column);
  if (cols.features.empty()) throw DataError("header has no feature columns", 1);
  for (const auto& [name, kind] : config.kind_overrides) {
    if (!seen.count(name)) throw DataError("kind override names a column not in the header", 1, name);
  }
  return cols;
}

Schema infer_columns(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                     const std::vector<std::size_t>& lines, const Columns& cols, const IngestConfig& config) {
  if (rows.empty()) throw DataError("no data rows");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw DataError("row has " + std::to_string(rows[r].size()) + " fields, header has " +
                          std::to_string(header.size()),
                      lines[r]);
    }
  }
  Schema schema;
  for (std::size_t c : cols.features) {
    const std::string& name = header[c];
    bool all_numeric = true;
    bool any_missing = false;
    std::optional<std::size_t> first_bad;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string& cell = rows[r][c];
      if (config.is_missing_token(cell)) {
        any_missing = true;
      } else if (all_numeric && !parse_real(cell)) {
        all_numeric = false;
        first_bad = r;
      }
    }
    FeatureKind kind = all_numeric ? FeatureKind::Numeric : FeatureKind::Categorical;
    if (auto it = config.kind_overrides.find(name); it != config.kind_overrides.end()) {
      if (it->second == FeatureKind::Numeric && !all_numeric) {
        throw DataError("override to numeric conflicts with non-numeric cell '" + rows[*first_bad][c] + "'",
                        lines[*first_bad], name);
      }
      kind = it->second;
    }
    schema.features.push_back({name, kind, any_missing});
  }
  return schema;
}

std::vector<std::size_t> default_lines(std::size_t n) {
  std::vector<std::size_t> lines(n);
  for (std::size_t i = 0; i < n; ++i) lines[i] = i + 2;
  return lines;
}

}  // namespace

Schema infer_schema(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                    const IngestConfig& config) {
  config.validate();
  const Columns cols = locate_columns(header, config);
  return infer_columns(header, rows, default_lines(rows.size()), cols, config);
}

Dataset parse_dataset(std::istream& in, const IngestConfig& config) {
  config.validate();
  RawTable raw = read_delimited(in, config.delimiter);
  const Columns cols = locate_columns(raw.header, config);

  Dataset dataset;
  dataset.schema = infer_columns(raw.header, raw.rows, raw.lines, cols, config);
  const std::string& time_name = raw.header[cols.time];

  std::vector<std::int64_t> row_times(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto t = parse_integer(raw.rows[r][cols.time]);
    if (!t) throw DataError("time value '" + raw.rows[r][cols.time] + "' is not an integer", raw.lines[r], time_name);
    row_times[r] = *t;
  }
  dataset.times = row_times;
  std::sort(dataset.times.begin(), dataset.times.end());
  dataset.times.erase(std::unique(dataset.times.begin(), dataset.times.end()), dataset.times.end());

  std::map<std::pair<std::string_view, std::int64_t>, std::size_t> first_line;
  dataset.rows.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto& cells = raw.rows[r];
    const std::size_t line = raw.lines[r];
    const std::string& student = cells[cols.student];
    if (student.empty()) throw DataError("empty student identifier", line, config.student_column);
    auto [it, inserted] = first_line.emplace(std::pair<std::string_view, std::int64_t>{student, row_times[r]}, line);
    if (!inserted) {
      throw DataError("duplicate (student, time) pair (" + student + ", " + std::to_string(row_times[r]) +
                          "), first seen on line " + std::to_string(it->second),
                      line);
    }

    Row row;
    row.student = student;
    row.time_index =
        static_cast<std::size_t>(std::lower_bound(dataset.times.begin(), dataset.times.end(), row_times[r]) -
                                 dataset.times.begin()) + 1;
    row.values.reserve(cols.features.size());
    for (std::size_t f = 0; f < cols.features.size(); ++f) {
      const std::string& cell = cells[cols.features[f]];
      const FeatureSpec& spec = dataset.schema[f];
      if (config.is_missing_token(cell)) {
        row.values.emplace_back(Missing{});
      } else if (spec.kind == FeatureKind::Numeric) {
        row.values.emplace_back(*parse_real(cell));
      } else {
        if (cell.empty()) throw DataError("empty category (not a missing token)", line, spec.name);
        row.values.emplace_back(cell);
      }
    }
    dataset.rows.push_back(std::move(row));
  }

  require_valid(dataset);
  return dataset;
}

Dataset parse_dataset_text(std::string_view text, const IngestConfig& config) {
  std::istringstream in{std::string(text)};
  return parse_dataset(in, config);
}

std::string quote_field(std::string_view field, char delimiter) {
  const bool needs_quotes =
      field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

IngestConfig config_for_schema(const Schema& schema, IngestConfig base) {
  for (const auto& f : schema.features) base.kind_overrides[f.name] = f.kind;
  return base;
}

}  // namespace detect
