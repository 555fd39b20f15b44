#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detect/core.hpp"

namespace detect {

struct IngestConfig {
  char delimiter = ',';
  std::string student_column = "student";
  std::string time_column = "time";
  /// Exact, case-sensitive tokens read as Missing. The first one is also
  /// what serialization writes for Missing.
  std::vector<std::string> missing_tokens{"", "NA"};
  std::map<std::string, FeatureKind> kind_overrides;

  void validate() const;
  bool is_missing_token(std::string_view cell) const;
};

/// A delimited file split into cells. `lines[i]` is the 1-based source line
/// of `rows[i]`.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
};

/// Splits delimited text into a header and data rows. Fields may be wrapped
/// in double quotes, with "" standing for a literal quote. Blank lines are
/// skipped; a trailing '\r' is dropped.
RawTable read_delimited(std::istream& in, char delimiter);

/// Locale-independent real parse of the whole cell (decimal or scientific).
/// Non-finite results are rejected.
std::optional<double> parse_real(std::string_view text);
std::optional<std::int64_t> parse_integer(std::string_view text);

/// Feature kinds and missing-admissibility for every column other than the
/// student and time columns, in file order.
Schema infer_schema(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                    const IngestConfig& config = {});

/// Reads a long-format file into a validated Dataset. Times are sorted and
/// re-indexed 1..T; rows keep file order. Errors carry the line number and
/// column.
Dataset parse_dataset(std::istream& in, const IngestConfig& config = {});
Dataset parse_dataset_text(std::string_view text, const IngestConfig& config = {});

/// One field in delimited output, quoted when it holds the delimiter, a quote
/// or a line break.
std::string quote_field(std::string_view field, char delimiter);

/// Config whose kind overrides pin every feature to its kind in `schema`.
IngestConfig config_for_schema(const Schema& schema, IngestConfig base = {});

}  // namespace detect
