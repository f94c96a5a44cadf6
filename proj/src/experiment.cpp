#include "tmfwc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "tmfwc/audio.hpp"
#include "tmfwc/error.hpp"
#include "tmfwc/rng.hpp"

namespace fs = std::filesystem;

namespace tmfwc {

void ExperimentConfig::validate() const {
  split.validate();
  reservoir.validate();
  if (n_reservoir_seeds < 1) throw Error(ErrorCode::ConfigInvalid, "n_reservoir_seeds must be >= 1");
  if (!(ridge_lambda >= 0.0)) throw Error(ErrorCode::ConfigInvalid, "ridge_lambda must be >= 0");
  if (extractor.sample_rate_hz <= 0) throw Error(ErrorCode::ConfigInvalid, "sample rate must be positive");
}

double TimingRecord::macs_per_utterance() const noexcept {
  return utterances ? static_cast<double>(total_macs) / static_cast<double>(utterances) : 0.0;
}

double TimingRecord::transforms_per_utterance() const noexcept {
  return utterances ? static_cast<double>(total_transforms) / static_cast<double>(utterances) : 0.0;
}

void ResultTable::sort() {
  const auto by_key = [](const AccuracyRecord& a, const AccuracyRecord& b) {
    return std::tie(a.task, a.extractor, a.seed) < std::tie(b.task, b.extractor, b.seed);
  };
  std::stable_sort(accuracy.begin(), accuracy.end(), by_key);
  std::stable_sort(control.begin(), control.end(), by_key);
  std::stable_sort(timing.begin(), timing.end(),
                   [](const TimingRecord& a, const TimingRecord& b) { return a.extractor < b.extractor; });
}

void ResultTable::merge(const ResultTable& other) {
  accuracy.insert(accuracy.end(), other.accuracy.begin(), other.accuracy.end());
  control.insert(control.end(), other.control.begin(), other.control.end());
  timing.insert(timing.end(), other.timing.begin(), other.timing.end());
  sort();
}

std::vector<AggregateRecord> aggregate(const std::vector<AccuracyRecord>& records) {
  std::map<std::pair<Task, std::string>, std::vector<const AccuracyRecord*>> groups;
  for (const auto& r : records) groups[{r.task, r.extractor}].push_back(&r);
  std::vector<AggregateRecord> out;
  for (const auto& [key, group] : groups) {
    AggregateRecord a;
    a.task = key.first;
    a.extractor = key.second;
    a.n_seeds = group.size();
    double sum = 0.0;
    for (const auto* r : group) sum += r->accuracy;
    a.mean = sum / static_cast<double>(group.size());
    if (group.size() > 1) {
      double ss = 0.0;
      for (const auto* r : group) ss += (r->accuracy - a.mean) * (r->accuracy - a.mean);
      a.sd = std::sqrt(ss / static_cast<double>(group.size() - 1));
    }
    const std::size_t classes = group.front()->num_classes;
    a.chance = classes ? 1.0 / static_cast<double>(classes) : 0.0;
    out.push_back(std::move(a));
  }
  return out;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first) first = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

namespace {

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes,
                    std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a(std::string_view s) noexcept {
  return fnv1a({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

}  // namespace

FeatureCache::FeatureCache(fs::path dir) : dir_(std::move(dir)) {}

std::size_t FeatureCache::computed() const {
  std::lock_guard lock(mutex_);
  return computed_;
}

std::size_t FeatureCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::string FeatureCache::content_key(std::span<const std::uint8_t> file_bytes,
                                      const FeatureExtractor& extractor) {
  return fmt::format("{}-{:016x}-{:016x}", to_string(extractor.kind()), fnv1a(file_bytes),
                     fnv1a(extractor.cache_key()));
}

FeatureMatrix FeatureCache::get(const Utterance& utt, const FeatureExtractor& extractor) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(utt.path);
  const std::string key = content_key(bytes, extractor);
  {
    std::lock_guard lock(mutex_);
    if (const auto it = memory_.find(key); it != memory_.end()) {
      ++hits_;
      return it->second;
    }
  }
  const fs::path disk = dir_.empty() ? fs::path{} : dir_ / (key + ".fm");
  std::error_code ec;
  if (!disk.empty() && fs::is_regular_file(disk, ec)) {
    try {
      FeatureMatrix m = load_binary(disk);
      std::lock_guard lock(mutex_);
      ++hits_;
      memory_.emplace(key, m);
      return m;
    } catch (const Error&) {
      // Unreadable entries are recomputed and overwritten.
    }
  }

  FeatureMatrix m;
  try {
    m = extractor.extract(parse_wav(bytes));
  } catch (const Error& e) {
    throw Error(e.code(), utt.path.string() + ": " + e.detail());
  }
  if (!disk.empty()) {
    fs::create_directories(dir_, ec);
    const fs::path tmp = disk.string() + fmt::format(".{}.tmp", std::hash<std::thread::id>{}(std::this_thread::get_id()));
    save_binary(tmp, m);
    fs::rename(tmp, disk, ec);
    if (ec) fs::remove(tmp, ec);
  }
  std::lock_guard lock(mutex_);
  ++computed_;
  memory_.emplace(key, m);
  return m;
}

std::vector<FeatureMatrix> extract_all(const std::vector<Utterance>& utterances,
                                       const FeatureExtractor& extractor, FeatureCache& cache,
                                       std::size_t threads) {
  std::vector<FeatureMatrix> out(utterances.size());
  parallel_for(utterances.size(), threads,
               [&](std::size_t i) { out[i] = cache.get(utterances[i], extractor); });
  return out;
}

namespace {

Eigen::MatrixXd reservoir_summaries(const Reservoir& res, const std::vector<FeatureMatrix>& features,
                                    std::size_t threads) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(features.size()),
                      static_cast<Eigen::Index>(2 * res.size()));
  parallel_for(features.size(), threads, [&](std::size_t i) {
    out.row(static_cast<Eigen::Index>(i)) = res.run_sequence(features[i]).concatenated().transpose();
  });
  return out;
}

template <class T>
std::vector<int> class_indices(const std::vector<T>& values, const std::vector<T>& classes) {
  std::vector<int> out;
  out.reserve(values.size());
  for (const T& v : values) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), v);
    out.push_back(it != classes.end() && *it == v ? static_cast<int>(it - classes.begin()) : -1);
  }
  return out;
}

template <class T>
std::vector<T> sorted_unique(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void shuffle_labels(std::vector<int>& labels, Rng& rng) {
  for (std::size_t i = labels.size(); i > 1; --i) {
    std::swap(labels[i - 1], labels[static_cast<std::size_t>(rng.below(i))]);
  }
}

struct LabelSet {
  std::vector<int> digits;
  std::vector<std::string> speakers;
};

LabelSet labels_of(const std::vector<Utterance>& utts) {
  LabelSet out;
  for (const auto& u : utts) {
    out.digits.push_back(u.digit_label);
    out.speakers.push_back(u.speaker_label);
  }
  return out;
}

ReservoirParams seed_params(const ReservoirParams& base, std::uint64_t seed) {
  ReservoirParams p = base;
  p.seed = seed;
  return p;
}

}  // namespace

TrainedModel train_model(const ExperimentConfig& cfg, const std::vector<Utterance>& data,
                         FeatureCache& cache) {
  cfg.validate();
  const auto extractor = make_extractor(cfg.extractor);
  const LabelSet all = labels_of(data);
  if (sorted_unique(all.digits).size() < 2 || sorted_unique(all.speakers).size() < 2) {
    throw Error(ErrorCode::InsufficientData, "need at least 2 digits and 2 speakers");
  }
  const DatasetSplit split = stratified_split(data, cfg.split);

  TrainedModel model;
  model.config = cfg;
  model.input_dim = extractor->output_dim();
  for (const auto& u : split.train) model.train_ids.push_back(u.id);
  for (const auto& u : split.test) model.test_ids.push_back(u.id);

  const LabelSet train = labels_of(split.train);
  model.digit_classes = sorted_unique(train.digits);
  model.speaker_classes = sorted_unique(train.speakers);
  std::map<Task, TaskLabels> tasks{
      {Task::Digit, {class_indices(train.digits, model.digit_classes), model.digit_classes.size()}},
      {Task::Speaker, {class_indices(train.speakers, model.speaker_classes), model.speaker_classes.size()}},
  };

  const auto features = extract_all(split.train, *extractor, cache, cfg.threads);
  for (std::size_t s = 0; s < cfg.n_reservoir_seeds; ++s) {
    const std::uint64_t seed = cfg.reservoir.seed + s;
    const Reservoir res(seed_params(cfg.reservoir, seed), model.input_dim);
    const Eigen::MatrixXd summaries = reservoir_summaries(res, features, cfg.threads);

    SeedModel sm;
    sm.seed = seed;
    sm.readouts = train_multitask(summaries, tasks, cfg.ridge_lambda);
    if (cfg.shuffle_labels_control) {
      Rng rng(seed, RngStream::LabelShuffle);
      std::map<Task, TaskLabels> shuffled = tasks;
      for (auto& [task, labels] : shuffled) shuffle_labels(labels.labels, rng);
      sm.control_readouts = train_multitask(summaries, shuffled, cfg.ridge_lambda);
    }
    model.seeds.push_back(std::move(sm));
  }
  return model;
}

ResultTable evaluate_model(const TrainedModel& model, const std::vector<Utterance>& data,
                           const FeatureExtractor& extractor, FeatureCache& cache) {
  if (extractor.output_dim() != model.input_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("model expects {}-dimensional features, {} extractor produces {}",
                            model.input_dim, to_string(extractor.kind()), extractor.output_dim()));
  }
  std::map<std::string, const Utterance*> by_id;
  for (const auto& u : data) by_id[u.id] = &u;
  std::vector<Utterance> test;
  for (const auto& id : model.test_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::EmptyDataset, "test utterance '" + id + "' not in dataset");
    test.push_back(*it->second);
  }
  if (test.empty()) throw Error(ErrorCode::EmptyDataset, "model has no test utterances");

  const LabelSet labels = labels_of(test);
  const std::map<Task, std::vector<int>> truth{
      {Task::Digit, class_indices(labels.digits, model.digit_classes)},
      {Task::Speaker, class_indices(labels.speakers, model.speaker_classes)},
  };
  const std::string name(to_string(extractor.kind()));
  const std::size_t threads = model.config.threads;

  const auto features = extract_all(test, extractor, cache, threads);
  ResultTable table;
  for (const auto& sm : model.seeds) {
    const Reservoir res(seed_params(model.config.reservoir, sm.seed), model.input_dim);
    const Eigen::MatrixXd summaries = reservoir_summaries(res, features, threads);

    const auto score = [&](const std::map<Task, ReadoutWeights>& readouts,
                           std::vector<AccuracyRecord>& into) {
      for (const auto& [task, readout] : readouts) {
        if (readout.summary_dim() != static_cast<std::size_t>(summaries.cols())) {
          throw Error(ErrorCode::DimensionMismatch,
                      fmt::format("{} readout expects {} state entries, reservoir gives {}",
                                  to_string(task), readout.summary_dim(), summaries.cols()));
        }
        const std::vector<int>& expected = truth.at(task);
        AccuracyRecord rec{task, name, sm.seed, 0.0, 0, test.size(), readout.num_classes()};
        for (std::size_t i = 0; i < test.size(); ++i) {
          const Eigen::VectorXd row = summaries.row(static_cast<Eigen::Index>(i)).transpose();
          if (classify(readout, row).label == expected[i]) ++rec.correct;
        }
        rec.accuracy = static_cast<double>(rec.correct) / static_cast<double>(rec.total);
        into.push_back(rec);
      }
    };
    score(sm.readouts, table.accuracy);
    score(sm.control_readouts, table.control);
  }
  table.sort();
  return table;
}

ResultTable run_experiment(const ExperimentConfig& cfg, const std::vector<Utterance>& data,
                           FeatureCache* cache) {
  FeatureCache local(cfg.cache_dir);
  FeatureCache& use = cache ? *cache : local;
  const TrainedModel model = train_model(cfg, data, use);
  const auto extractor = make_extractor(cfg.extractor);
  return evaluate_model(model, data, *extractor, use);
}

}  // namespace tmfwc
