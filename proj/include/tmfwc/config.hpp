#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tmfwc/experiment.hpp"

namespace tmfwc {

using Json = nlohmann::json;

// Serialization of the full configuration tree. Parsing starts from the
// current values of `target`, so objects may be partial; unknown keys and
// wrongly typed values raise ConfigInvalid.
Json extractor_settings_to_json(const ExtractorSettings& s);
void merge_extractor_settings(ExtractorSettings& target, const Json& j);

Json reservoir_params_to_json(const ReservoirParams& p);
void merge_reservoir_params(ReservoirParams& target, const Json& j);

Json experiment_config_to_json(const ExperimentConfig& cfg);
void merge_experiment_config(ExperimentConfig& target, const Json& j);

// Defaults overlaid with a JSON file (if given), then TMFWC_CACHE_DIR.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
void apply_environment(ExperimentConfig& cfg);

Json parse_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

Json result_table_to_json(const ResultTable& table);
ResultTable result_table_from_json(const Json& j);

Json trained_model_to_json(const TrainedModel& model);
TrainedModel trained_model_from_json(const Json& j);

}  // namespace tmfwc
