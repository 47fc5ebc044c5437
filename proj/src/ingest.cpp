#include "ccwnet/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "ccwnet/error.hpp"
#include "ccwnet/rng.hpp"

namespace ccwnet {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_numeric(ColumnSchema::Kind k) {
  return k == ColumnSchema::Kind::kContinuous || k == ColumnSchema::Kind::kNumeric;
}

std::vector<std::string> final_categories(const ColumnSchema& col,
                                          const std::set<std::string>& observed) {
  std::set<std::string> cats = col.categories
                                   ? std::set<std::string>(col.categories->begin(), col.categories->end())
                                   : observed;
  for (const auto& from : col.consolidate_from) cats.erase(from);
  if (!col.consolidate_from.empty()) cats.insert(col.consolidate_to);
  return {cats.begin(), cats.end()};
}

}  // namespace

void validate_schema(const Schema& schema) {
  std::size_t labels = 0;
  std::set<std::string> names;
  for (const auto& col : schema) {
    if (!names.insert(col.name).second) throw ConfigError("duplicate schema column '" + col.name + "'");
    if (col.kind == ColumnSchema::Kind::kLabel) {
      ++labels;
      if (col.positive.empty()) throw ConfigError("label column '" + col.name + "' lists no positive values");
    }
    if (!col.consolidate_from.empty()) {
      if (col.kind != ColumnSchema::Kind::kCategorical) {
        throw ConfigError("consolidation on non-categorical column '" + col.name + "'");
      }
      if (col.consolidate_to.empty()) throw ConfigError("consolidation target missing for '" + col.name + "'");
      if (col.categories) {
        for (const auto& from : col.consolidate_from) {
          if (std::find(col.categories->begin(), col.categories->end(), from) == col.categories->end()) {
            throw ConfigError("consolidated category '" + from + "' not declared for '" + col.name + "'");
          }
        }
      }
    }
  }
  if (labels != 1) throw ConfigError("schema needs exactly one label column");
}

RawTable parse_csv(std::istream& in, const Schema& schema) {
  validate_schema(schema);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV input is empty");
  const auto header = split_fields(line);

  std::vector<std::string> unknown;
  std::vector<std::string> missing;
  std::map<std::string, std::size_t> position;
  for (std::size_t k = 0; k < header.size(); ++k) position[header[k]] = k;
  for (const auto& h : header) {
    if (std::none_of(schema.begin(), schema.end(), [&](const auto& c) { return c.name == h; })) {
      unknown.push_back(h);
    }
  }
  for (const auto& c : schema) {
    if (!position.count(c.name)) missing.push_back(c.name);
  }
  if (!unknown.empty() || !missing.empty() || position.size() != header.size()) {
    std::string msg = "CSV header does not match schema;";
    for (const auto& u : unknown) msg += " unexpected '" + u + "'";
    for (const auto& m : missing) msg += " missing '" + m + "'";
    if (position.size() != header.size()) msg += " duplicate header names";
    throw ConfigError(msg);
  }

  RawTable table;
  for (const auto& c : schema) table.columns.push_back(RawColumn{c.name, c.kind, {}, {}});

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    }
    for (std::size_t k = 0; k < schema.size(); ++k) {
      const auto& spec = schema[k];
      const std::string& cell = fields[position[spec.name]];
      const bool absent = cell.empty() || cell == spec.missing_token;
      auto& col = table.columns[k];
      if (is_numeric(spec.kind)) {
        col.numbers.push_back(absent ? std::nullopt : parse_number(cell));
      } else {
        col.strings.push_back(absent ? std::nullopt : std::optional<std::string>(cell));
      }
    }
    ++table.rows;
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return parse_csv(in, schema);
}

PreprocessResult preprocess(const RawTable& table, const Schema& schema) {
  validate_schema(schema);
  if (table.columns.size() != schema.size()) throw ConfigError("table does not follow the schema");

  PreprocessReport report;
  report.rows_in = table.rows;

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < table.rows; ++i) {
    bool complete = true;
    for (std::size_t k = 0; k < schema.size() && complete; ++k) {
      if (schema[k].kind == ColumnSchema::Kind::kDrop) continue;
      const auto& col = table.columns[k];
      complete = is_numeric(schema[k].kind) ? col.numbers[i].has_value() : col.strings[i].has_value();
    }
    if (complete) keep.push_back(i);
  }
  report.rows_out = keep.size();
  report.rows_dropped_missing = report.rows_in - report.rows_out;

  std::vector<Eigen::VectorXd> features;
  Eigen::VectorXd y(static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < schema.size(); ++k) {
    const auto& spec = schema[k];
    const auto& col = table.columns[k];
    switch (spec.kind) {
      case ColumnSchema::Kind::kDrop:
        break;
      case ColumnSchema::Kind::kLabel:
        for (std::size_t r = 0; r < keep.size(); ++r) {
          const auto& v = *col.strings[keep[r]];
          y(static_cast<Index>(r)) =
              std::find(spec.positive.begin(), spec.positive.end(), v) != spec.positive.end() ? 1.0 : 0.0;
        }
        break;
      case ColumnSchema::Kind::kContinuous:
      case ColumnSchema::Kind::kNumeric: {
        Eigen::VectorXd v(static_cast<Index>(keep.size()));
        for (std::size_t r = 0; r < keep.size(); ++r) v(static_cast<Index>(r)) = *col.numbers[keep[r]];
        if (spec.kind == ColumnSchema::Kind::kContinuous) {
          const double mean = v.mean();
          const double sd = keep.size() > 1
                                ? std::sqrt((v.array() - mean).square().sum() /
                                            static_cast<double>(keep.size() - 1))
                                : 0.0;
          if (!(sd > 0.0)) throw DomainError("constant column '" + spec.name + "'");
          v = ((v.array() - mean) / sd).matrix();
          report.standardization.push_back({spec.name, mean, sd});
          report.columns.push_back({spec.name, spec.name, "standardized"});
        } else {
          report.columns.push_back({spec.name, spec.name, "numeric"});
        }
        features.push_back(std::move(v));
        break;
      }
      case ColumnSchema::Kind::kCategorical: {
        std::set<std::string> observed;
        for (std::size_t r : keep) observed.insert(*col.strings[r]);
        if (spec.categories) {
          std::vector<std::string> stray;
          for (const auto& v : observed) {
            if (std::find(spec.categories->begin(), spec.categories->end(), v) == spec.categories->end()) {
              stray.push_back(v);
            }
          }
          if (!stray.empty()) {
            std::string msg = "column '" + spec.name + "' has undeclared categories:";
            for (const auto& s : stray) msg += " '" + s + "'";
            throw DomainError(msg);
          }
        }
        const auto cats = final_categories(spec, observed);
        std::map<std::string, std::size_t> slot;
        for (std::size_t c = 0; c < cats.size(); ++c) slot[cats[c]] = c;
        // Category 0 (alphabetically first) is the omitted reference level.
        std::vector<Eigen::VectorXd> indicators(cats.size() > 0 ? cats.size() - 1 : 0,
                                                Eigen::VectorXd::Zero(static_cast<Index>(keep.size())));
        for (std::size_t r = 0; r < keep.size(); ++r) {
          std::string v = *col.strings[keep[r]];
          if (std::find(spec.consolidate_from.begin(), spec.consolidate_from.end(), v) !=
              spec.consolidate_from.end()) {
            v = spec.consolidate_to;
          }
          const std::size_t c = slot.at(v);
          if (c > 0) indicators[c - 1](static_cast<Index>(r)) = 1.0;
        }
        for (std::size_t c = 1; c < cats.size(); ++c) {
          report.columns.push_back({spec.name + "=" + cats[c], spec.name, "indicator"});
          features.push_back(std::move(indicators[c - 1]));
        }
        break;
      }
    }
  }

  Eigen::MatrixXd x(static_cast<Index>(keep.size()), static_cast<Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j) x.col(static_cast<Index>(j)) = features[j];
  report.case_count = static_cast<std::size_t>((y.array() == 1.0).count());
  report.control_count = report.rows_out - report.case_count;
  if (features.empty()) throw ConfigError("schema yields no covariates");
  return {Dataset(std::move(x), std::move(y)), std::move(report)};
}

CaseControlSample case_control_subsample(const Dataset& dataset, Index n1, Index n0,
                                         std::uint64_t seed) {
  std::vector<Index> cases;
  std::vector<Index> controls;
  for (Index i = 0; i < dataset.size(); ++i) (dataset.label(i) == 1.0 ? cases : controls).push_back(i);
  if (static_cast<Index>(cases.size()) < n1 || static_cast<Index>(controls.size()) < n0 || n1 < 1 ||
      n0 < 1) {
    throw DomainError("insufficient stratum size: requested " + std::to_string(n1) + " cases and " +
                      std::to_string(n0) + " controls, available " + std::to_string(cases.size()) +
                      " and " + std::to_string(controls.size()));
  }
  Rng rng(derive_seed(seed, {tag(Stream::kSample)}));
  shuffle(cases.begin(), cases.end(), rng);
  shuffle(controls.begin(), controls.end(), rng);
  std::vector<Index> rows(cases.begin(), cases.begin() + n1);
  rows.insert(rows.end(), controls.begin(), controls.begin() + n0);
  return CaseControlSample(dataset.select(rows));
}

}  // namespace ccwnet
