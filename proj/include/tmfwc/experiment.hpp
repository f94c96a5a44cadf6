#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "tmfwc/dataset.hpp"
#include "tmfwc/extractor.hpp"
#include "tmfwc/feature_matrix.hpp"
#include "tmfwc/readout.hpp"
#include "tmfwc/reservoir.hpp"

namespace tmfwc {

struct DatasetSource {
  std::filesystem::path root;
  DatasetLayout layout = DatasetLayout::Fsdd;
};

struct ExperimentConfig {
  ExtractorSettings extractor;
  DatasetSource dataset;
  SplitConfig split;
  ReservoirParams reservoir;  // reservoir.seed is the base; seed s runs at base + s
  std::size_t n_reservoir_seeds = 10;
  double ridge_lambda = 1e-6;
  // Also train readouts on shuffled training labels and report their accuracy.
  bool shuffle_labels_control = false;
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::filesystem::path cache_dir;  // empty = in-memory cache only

  void validate() const;
};

struct AccuracyRecord {
  Task task = Task::Digit;
  std::string extractor;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t num_classes = 0;

  bool operator==(const AccuracyRecord&) const = default;
};

struct TimingRecord {
  std::string extractor;
  std::size_t utterances = 0;
  std::size_t repetitions = 0;
  double median_ms_per_utterance = 0.0;
  std::uint64_t total_macs = 0;        // one pass over all utterances
  std::uint64_t total_transforms = 0;  // one pass over all utterances
  std::uint64_t total_frames = 0;      // feature rows produced by one pass

  double macs_per_utterance() const noexcept;
  double transforms_per_utterance() const noexcept;

  bool operator==(const TimingRecord&) const = default;
};

struct AggregateRecord {
  Task task = Task::Digit;
  std::string extractor;
  std::size_t n_seeds = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single seed
  double chance = 0.0;
};

struct ResultTable {
  std::vector<AccuracyRecord> accuracy;
  std::vector<AccuracyRecord> control;  // shuffled-label runs
  std::vector<TimingRecord> timing;

  bool empty() const noexcept { return accuracy.empty() && control.empty() && timing.empty(); }
  // Records sorted by (task, extractor, seed); timing by extractor.
  void sort();
  void merge(const ResultTable& other);

  bool operator==(const ResultTable&) const = default;
};

std::vector<AggregateRecord> aggregate(const std::vector<AccuracyRecord>& records);

// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware).
// The first exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

// Features keyed by a content hash of the audio file bytes and the
// extractor's cache key. Disk entries are binary FeatureMatrix dumps.
class FeatureCache {
 public:
  explicit FeatureCache(std::filesystem::path dir = {});

  FeatureMatrix get(const Utterance& utt, const FeatureExtractor& extractor);

  std::size_t computed() const;  // extractions actually performed
  std::size_t hits() const;      // served from memory or disk

  static std::string content_key(std::span<const std::uint8_t> file_bytes,
                                 const FeatureExtractor& extractor);

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, FeatureMatrix> memory_;
  std::size_t computed_ = 0;
  std::size_t hits_ = 0;
};

// Extracts (or fetches) features for every utterance, in input order.
std::vector<FeatureMatrix> extract_all(const std::vector<Utterance>& utterances,
                                       const FeatureExtractor& extractor, FeatureCache& cache,
                                       std::size_t threads);

struct SeedModel {
  std::uint64_t seed = 0;
  std::map<Task, ReadoutWeights> readouts;
  std::map<Task, ReadoutWeights> control_readouts;
};

struct TrainedModel {
  ExperimentConfig config;
  std::size_t input_dim = 0;
  std::vector<int> digit_classes;           // class index -> digit
  std::vector<std::string> speaker_classes; // class index -> speaker id
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<SeedModel> seeds;
};

// Splits `data`, extracts features, and trains digit and speaker readouts
// for each reservoir seed. Class ids come from the sorted training labels.
TrainedModel train_model(const ExperimentConfig& cfg, const std::vector<Utterance>& data,
                         FeatureCache& cache);

// Rebuilds each seed's reservoir and scores the model's recorded test
// split. `data` must contain every test id. Throws DimensionMismatch when
// `extractor` does not match the model.
ResultTable evaluate_model(const TrainedModel& model, const std::vector<Utterance>& data,
                           const FeatureExtractor& extractor, FeatureCache& cache);

// train_model followed by evaluate_model with one shared cache.
ResultTable run_experiment(const ExperimentConfig& cfg, const std::vector<Utterance>& data,
                           FeatureCache* cache = nullptr);

}  // namespace tmfwc
