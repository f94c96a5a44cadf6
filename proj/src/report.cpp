#include "tmfwc/report.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "tmfwc/config.hpp"
#include "tmfwc/error.hpp"

namespace fs = std::filesystem;

namespace tmfwc {

void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyRecord>& records) {
  out << "task,extractor,seed,value\n";
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{}\n", to_string(r.task), r.extractor, r.seed, r.accuracy);
  }
}

void write_timing_csv(std::ostream& out, const std::vector<TimingRecord>& records) {
  out << "extractor,utterances,repetitions,median_ms_per_utterance,macs_per_utterance,"
         "transforms_per_utterance,total_macs,total_transforms,total_frames\n";
  for (const auto& t : records) {
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", t.extractor, t.utterances, t.repetitions,
                       t.median_ms_per_utterance, t.macs_per_utterance(),
                       t.transforms_per_utterance(), t.total_macs, t.total_transforms,
                       t.total_frames);
  }
}

namespace {

Json aggregates_to_json(const std::vector<AccuracyRecord>& records, bool control) {
  Json out = Json::array();
  const auto groups = aggregate(records);
  for (const auto& a : groups) {
    Json j = {{"task", to_string(a.task)}, {"extractor", a.extractor}, {"n_seeds", a.n_seeds},
              {"mean", a.mean},            {"sd", a.sd},               {"chance", a.chance}};
    if (a.chance > 0.0) j["mean_over_chance"] = a.mean / a.chance;
    if (control) {
      // Spread of one test-set accuracy under pure guessing.
      std::size_t total = 0;
      for (const auto& r : records) {
        if (r.task == a.task && r.extractor == a.extractor) total = r.total;
      }
      const double sigma = total ? std::sqrt(a.chance * (1.0 - a.chance) / static_cast<double>(total)) : 0.0;
      j["chance_sd"] = sigma;
      j["within_3sd_of_chance"] = std::abs(a.mean - a.chance) <= 3.0 * sigma;
    }
    out.push_back(std::move(j));
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

}  // namespace

void emit_report(const ResultTable& results, const fs::path& out_dir) {
  if (results.empty()) throw Error(ErrorCode::InsufficientData, "no results to report");
  ResultTable sorted = results;
  sorted.sort();

  std::ostringstream acc, tim;
  write_accuracy_csv(acc, sorted.accuracy);
  write_timing_csv(tim, sorted.timing);
  Json timing = Json::array();
  for (const auto& t : sorted.timing) {
    timing.push_back({{"extractor", t.extractor},
                      {"utterances", t.utterances},
                      {"repetitions", t.repetitions},
                      {"median_ms_per_utterance", t.median_ms_per_utterance},
                      {"macs_per_utterance", t.macs_per_utterance()},
                      {"transforms_per_utterance", t.transforms_per_utterance()},
                      {"total_frames", t.total_frames}});
  }
  const Json summary = {{"format", "tmfwc-summary-1"},
                        {"accuracy", aggregates_to_json(sorted.accuracy, false)},
                        {"control", aggregates_to_json(sorted.control, true)},
                        {"timing", timing}};

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
  write_text(out_dir / "accuracy.csv", acc.str());
  write_text(out_dir / "timing.csv", tim.str());
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
}

void save_results(const fs::path& path, const ResultTable& results) {
  write_json_file(path, result_table_to_json(results));
}

ResultTable load_results(const fs::path& path) {
  return result_table_from_json(parse_json_file(path));
}

}  // namespace tmfwc
