#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ccwnet/data.hpp"

namespace ccwnet {

/// How one source column is treated.
/// continuous: standardised covariate; numeric: covariate kept as-is;
/// categorical: one-hot covariate; label: binary response; drop: ignored.
struct ColumnSchema {
  enum class Kind { kContinuous, kNumeric, kCategorical, kLabel, kDrop };

  std::string name;
  Kind kind = Kind::kContinuous;
  std::optional<std::vector<std::string>> categories;
  std::vector<std::string> consolidate_from;
  std::string consolidate_to;
  /// Label values coded as 1; everything else is 0.
  std::vector<std::string> positive;
  std::string missing_token = "?";
};

using Schema = std::vector<ColumnSchema>;

/// Throws ConfigError unless there is exactly one label column and
/// consolidation targets are consistent.
void validate_schema(const Schema& schema);

struct RawColumn {
  std::string name;
  ColumnSchema::Kind kind = ColumnSchema::Kind::kContinuous;
  /// Filled for continuous and numeric columns.
  std::vector<std::optional<double>> numbers;
  /// Filled for every other kind.
  std::vector<std::optional<std::string>> strings;
};

struct RawTable {
  std::vector<RawColumn> columns;  // in schema order
  std::size_t rows = 0;
};

/// Reads a headered CSV (no quoting). Cell whitespace is trimmed; missing
/// tokens and unparseable numeric cells become empty.
RawTable load_csv(const std::filesystem::path& path, const Schema& schema);
RawTable parse_csv(std::istream& in, const Schema& schema);

struct EncodedColumn {
  std::string name;
  std::string source;
  std::string encoding;  // "standardized", "numeric" or "indicator"
};

struct StandardizationParams {
  std::string column;
  double mean = 0.0;
  double sd = 1.0;
};

struct PreprocessReport {
  std::size_t rows_in = 0;
  std::size_t rows_out = 0;
  std::size_t rows_dropped_missing = 0;
  std::size_t case_count = 0;
  std::size_t control_count = 0;
  std::vector<EncodedColumn> columns;
  std::vector<StandardizationParams> standardization;
};

struct PreprocessResult {
  Dataset dataset;
  PreprocessReport report;
};

/// Drops schema-designated columns, then rows with missing cells; applies
/// consolidations; one-hot encodes categoricals omitting the alphabetically
/// first category; standardises continuous columns (sample sd); binarises
/// the label.
PreprocessResult preprocess(const RawTable& table, const Schema& schema);

/// n1 cases and n0 controls drawn uniformly without replacement.
CaseControlSample case_control_subsample(const Dataset& dataset, Index n1, Index n0,
                                         std::uint64_t seed);

}  // namespace ccwnet
