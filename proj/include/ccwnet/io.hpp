#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "ccwnet/data.hpp"
#include "ccwnet/ingest.hpp"
#include "ccwnet/network.hpp"
#include "ccwnet/pipeline.hpp"
#include "ccwnet/proportion.hpp"
#include "ccwnet/replication.hpp"
#include "ccwnet/train.hpp"

namespace ccwnet {

using Json = nlohmann::ordered_json;

/// Writes `contents` to a sibling temp file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& contents);
Json read_json(const std::filesystem::path& path);
std::string dump(const Json& j);

// Dataset CSV: header `y,x1,...,xp`, one record per line, 17 significant digits.
std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(std::istream& in);
Dataset read_dataset_csv(const std::filesystem::path& path);

Json to_json(const SummarySpec& h);
SummarySpec summary_spec_from_json(const Json& j);
Json to_json(const ExternalSummary& s);
ExternalSummary external_summary_from_json(const Json& j);
Json to_json(const ProportionEstimate& e);

/// {arch: {p, depth, width}, weights: [...], biases: [...]}; matrices row-major.
Json to_json(const Network& net);
Network network_from_json(const Json& j);

Json to_json(const TrainConfig& c);
/// Keys present in `j` override fields of `base`; unknown keys are rejected.
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});
Json to_json(const GridSpec& g);
GridSpec grid_spec_from_json(const Json& j);

Json to_json(const FitResult& f);
FitResult fit_result_from_json(const Json& j);

Json to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j);
Json to_json(const ReplicationSummary& s);
std::string replicates_to_csv(const std::vector<ReplicationResult>& results);

Schema schema_from_json(const Json& j);
Json to_json(const PreprocessReport& r);

}  // namespace ccwnet
