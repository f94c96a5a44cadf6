#include "tmfwc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "tmfwc/error.hpp"
#include "tmfwc/rng.hpp"

namespace fs = std::filesystem;

namespace tmfwc {

std::string_view to_string(DatasetLayout layout) noexcept {
  switch (layout) {
    case DatasetLayout::AudioMnist: return "audiomnist";
    case DatasetLayout::Fsdd: return "fsdd";
    case DatasetLayout::ManifestCsv: return "manifest";
  }
  return "fsdd";
}

DatasetLayout dataset_layout_from_string(std::string_view name) {
  if (name == "audiomnist") return DatasetLayout::AudioMnist;
  if (name == "fsdd") return DatasetLayout::Fsdd;
  if (name == "manifest") return DatasetLayout::ManifestCsv;
  throw Error(ErrorCode::ConfigInvalid, "unknown dataset layout '" + std::string(name) + "'");
}

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream ss(s);
  while (std::getline(ss, part, sep)) parts.push_back(part);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool is_wav(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

DatasetListing load_manifest(const fs::path& root) {
  const fs::path manifest = root / "manifest.csv";
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + manifest.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyDataset, "manifest.csv is empty");
  auto header = split(trim(line), ',');
  for (auto& h : header) h = trim(h);
  const auto col = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(ErrorCode::UnparseableName, fmt::format("manifest.csv lacks column '{}'", name));
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = col("id"), c_path = col("path"), c_digit = col("digit"),
                    c_speaker = col("speaker");
  DatasetListing listing;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto cells = split(line, ',');
    for (auto& c : cells) c = trim(c);
    int digit = 0;
    if (cells.size() != header.size() || !parse_int(cells[c_digit], digit) || digit < 0 ||
        digit > 9 || cells[c_id].empty() || cells[c_speaker].empty()) {
      ++listing.skipped;
      continue;
    }
    fs::path p = cells[c_path];
    if (p.is_relative()) p = root / p;
    listing.utterances.push_back({cells[c_id], p, digit, cells[c_speaker]});
  }
  return listing;
}

}  // namespace

std::optional<Utterance> parse_utterance_name(const fs::path& path) {
  const auto parts = split(path.stem().string(), '_');
  if (parts.size() != 3) return std::nullopt;
  int digit = 0;
  int take = 0;
  if (!parse_int(parts[0], digit) || digit < 0 || digit > 9) return std::nullopt;
  if (parts[1].empty() || !parse_int(parts[2], take) || take < 0) return std::nullopt;
  return Utterance{path.stem().string(), path, digit, parts[1]};
}

DatasetListing load_dataset(const fs::path& root, DatasetLayout layout) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::IoFailure, "dataset root " + root.string() + " is not a directory");
  }
  DatasetListing listing;
  if (layout == DatasetLayout::ManifestCsv) {
    listing = load_manifest(root);
  } else {
    const auto consider = [&](const fs::directory_entry& entry) {
      if (!entry.is_regular_file() || !is_wav(entry.path())) return;
      if (auto u = parse_utterance_name(entry.path())) {
        listing.utterances.push_back(std::move(*u));
      } else {
        ++listing.skipped;
      }
    };
    if (layout == DatasetLayout::AudioMnist) {
      for (const auto& e : fs::recursive_directory_iterator(root)) consider(e);
    } else {
      for (const auto& e : fs::directory_iterator(root)) consider(e);
    }
  }
  std::sort(listing.utterances.begin(), listing.utterances.end(),
            [](const Utterance& a, const Utterance& b) { return a.id < b.id; });
  const auto dup = std::adjacent_find(listing.utterances.begin(), listing.utterances.end(),
                                      [](const Utterance& a, const Utterance& b) { return a.id == b.id; });
  if (dup != listing.utterances.end()) {
    throw Error(ErrorCode::UnparseableName, "duplicate utterance id '" + dup->id + "'");
  }
  if (listing.utterances.empty()) {
    throw Error(ErrorCode::EmptyDataset, "no utterances found under " + root.string());
  }
  return listing;
}

void SplitConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, fmt::format("train fraction {} outside (0, 1)", train_fraction));
  }
}

namespace {

void seeded_shuffle(std::vector<Utterance>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

std::size_t train_count(std::size_t n, double fraction) {
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n >= 2) k = std::clamp<std::size_t>(k, 1, n - 1);
  else k = n;
  return k;
}

}  // namespace

DatasetSplit stratified_split(std::vector<Utterance> data, const SplitConfig& cfg) {
  cfg.validate();
  std::sort(data.begin(), data.end(), [](const Utterance& a, const Utterance& b) { return a.id < b.id; });
  Rng rng(cfg.seed, RngStream::DataSplit);
  DatasetSplit out;

  if (!cfg.stratified) {
    seeded_shuffle(data, rng);
    const std::size_t k = train_count(data.size(), cfg.train_fraction);
    out.train.assign(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(k));
    out.test.assign(data.begin() + static_cast<std::ptrdiff_t>(k), data.end());
  } else {
    std::map<std::pair<int, std::string>, std::vector<Utterance>> cells;
    std::set<int> digits;
    std::set<std::string> speakers;
    for (auto& u : data) {
      digits.insert(u.digit_label);
      speakers.insert(u.speaker_label);
      cells[{u.digit_label, u.speaker_label}].push_back(std::move(u));
    }
    for (int d : digits) {
      for (const auto& s : speakers) {
        if (!cells.count({d, s})) {
          throw Error(ErrorCode::EmptyCell,
                      fmt::format("no utterance of digit {} by speaker '{}'", d, s));
        }
      }
    }
    for (auto& [key, items] : cells) {
      seeded_shuffle(items, rng);
      const std::size_t k = train_count(items.size(), cfg.train_fraction);
      for (std::size_t i = 0; i < items.size(); ++i) {
        (i < k ? out.train : out.test).push_back(std::move(items[i]));
      }
    }
  }
  const auto by_id = [](const Utterance& a, const Utterance& b) { return a.id < b.id; };
  std::sort(out.train.begin(), out.train.end(), by_id);
  std::sort(out.test.begin(), out.test.end(), by_id);
  return out;
}

}  // namespace tmfwc
