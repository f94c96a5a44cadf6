#pragma once

#include <filesystem>
#include <iosfwd>

#include "tmfwc/experiment.hpp"

namespace tmfwc {

// Long-format CSVs for plotting.
//   accuracy.csv: task,extractor,seed,value
//   timing.csv:   extractor,utterances,repetitions,median_ms_per_utterance,
//                 macs_per_utterance,transforms_per_utterance,total_macs,
//                 total_transforms,total_frames
void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyRecord>& records);
void write_timing_csv(std::ostream& out, const std::vector<TimingRecord>& records);

// Writes accuracy.csv, timing.csv and summary.json into out_dir (created if
// needed). An empty table raises InsufficientData before anything is written.
void emit_report(const ResultTable& results, const std::filesystem::path& out_dir);

// results.json holds the full table so separate runs can be merged later.
void save_results(const std::filesystem::path& path, const ResultTable& results);
ResultTable load_results(const std::filesystem::path& path);

}  // namespace tmfwc
