#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tmfwc {

struct Utterance {
  std::string id;
  std::filesystem::path path;
  int digit_label = 0;
  std::string speaker_label;

  bool operator==(const Utterance&) const = default;
};

enum class DatasetLayout {
  AudioMnist,   // recursive scan for {digit}_{speaker}_{take}.wav
  Fsdd,         // flat directory of {digit}_{speaker}_{index}.wav
  ManifestCsv,  // manifest.csv with columns id,path,digit,speaker
};

std::string_view to_string(DatasetLayout layout) noexcept;
DatasetLayout dataset_layout_from_string(std::string_view name);

struct DatasetListing {
  std::vector<Utterance> utterances;  // sorted by id
  std::size_t skipped = 0;            // files that did not match the layout
};

// Parses `{digit}_{speaker}_{take}` from a file stem; nullopt if it does not match.
std::optional<Utterance> parse_utterance_name(const std::filesystem::path& path);

// Throws EmptyDataset if nothing usable is found and IoFailure if root is
// not a directory.
DatasetListing load_dataset(const std::filesystem::path& root, DatasetLayout layout);

struct SplitConfig {
  double train_fraction = 0.8;
  bool stratified = true;
  std::uint64_t seed = 7;

  void validate() const;
};

struct DatasetSplit {
  std::vector<Utterance> train;
  std::vector<Utterance> test;
};

// Stratified: every (digit, speaker) cell present in the data is shuffled
// with a seeded generator and split round(fraction * n) / rest, keeping at
// least one training item per cell and one test item when n >= 2.
// Throws EmptyCell when a digit/speaker combination is missing.
DatasetSplit stratified_split(std::vector<Utterance> data, const SplitConfig& cfg);

}  // namespace tmfwc
