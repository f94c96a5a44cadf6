#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "support.hpp"
#include "tmfwc/bench.hpp"
#include "tmfwc/config.hpp"
#include "tmfwc/dataset.hpp"
#include "tmfwc/error.hpp"
#include "tmfwc/experiment.hpp"
#include "tmfwc/report.hpp"

using namespace tmfwc;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoFailure;
}

void touch(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << "x";
}

std::vector<Utterance> grid(int digits, int speakers, int takes) {
  std::vector<Utterance> out;
  for (int d = 0; d < digits; ++d)
    for (int s = 0; s < speakers; ++s)
      for (int t = 0; t < takes; ++t) {
        const std::string spk = "s" + std::to_string(s);
        out.push_back({std::to_string(d) + "_" + spk + "_" + std::to_string(t), {}, d, spk});
      }
  return out;
}

// Digit sets the low tone, speaker the high one; takes differ by a little noise.
std::vector<Utterance> write_tone_corpus(const fs::path& dir, int takes) {
  const double digit_hz[] = {300.0, 1100.0};
  const double speaker_hz[] = {2300.0, 3300.0};
  for (int d = 0; d < 2; ++d)
    for (int s = 0; s < 2; ++s)
      for (int t = 0; t < takes; ++t) {
        auto x = testutil::tone(digit_hz[d], 8000, 2400, 0.3);
        const auto y = testutil::tone(speaker_hz[s], 8000, 2400, 0.2);
        const auto n = testutil::random_signal(2400, 100 * d + 10 * s + t, 0.02);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i] + n[i];
        save_wav(dir / (std::to_string(d) + "_spk" + std::to_string(s) + "_" + std::to_string(t) + ".wav"),
                 AudioBuffer(x, 8000));
      }
  return load_dataset(dir, DatasetLayout::Fsdd).utterances;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.reservoir.n_nodes = 40;
  cfg.n_reservoir_seeds = 3;
  cfg.split.train_fraction = 0.5;
  cfg.ridge_lambda = 1e-3;
  cfg.threads = 2;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("file names") {
    const auto u = parse_utterance_name("some/dir/7_theo_42.wav");
    REQUIRE(u);
    CHECK(u->digit_label == 7);
    CHECK(u->speaker_label == "theo");
    CHECK(u->id == "7_theo_42");
    CHECK_FALSE(parse_utterance_name("x_theo_1.wav"));
    CHECK_FALSE(parse_utterance_name("12_theo_1.wav"));
    CHECK_FALSE(parse_utterance_name("1_theo.wav"));
    CHECK_FALSE(parse_utterance_name("1_theo_a.wav"));
    CHECK_FALSE(parse_utterance_name("1_a_b_2.wav"));
  }

  TEST_CASE("directory layouts") {
    testutil::TempDir dir;
    CHECK(code_of([&] { load_dataset(dir.path(), DatasetLayout::Fsdd); }) == ErrorCode::EmptyDataset);
    CHECK(code_of([&] { load_dataset(dir / "missing", DatasetLayout::Fsdd); }) == ErrorCode::IoFailure);

    touch(dir / "01" / "3_01_0.wav");
    touch(dir / "02" / "4_02_1.wav");
    touch(dir / "notes.txt");
    touch(dir / "bad_name.wav");
    touch(dir / "5_03_2.wav");
    const auto mnist = load_dataset(dir.path(), DatasetLayout::AudioMnist);
    CHECK(mnist.utterances.size() == 3);
    CHECK(mnist.skipped >= 1);
    CHECK(std::is_sorted(mnist.utterances.begin(), mnist.utterances.end(),
                         [](const auto& a, const auto& b) { return a.id < b.id; }));
    CHECK(load_dataset(dir.path(), DatasetLayout::Fsdd).utterances.size() == 1);

    touch(dir / "other" / "5_03_2.wav");
    CHECK(code_of([&] { load_dataset(dir.path(), DatasetLayout::AudioMnist); }) == ErrorCode::UnparseableName);
  }

  TEST_CASE("manifest") {
    testutil::TempDir dir;
    std::ofstream(dir / "manifest.csv") << "id,path,digit,speaker\nu1,a/b.wav,3,s05\nu2,/abs/c.wav,9,s01\nbad,x.wav,11,s1\n";
    const auto l = load_dataset(dir.path(), DatasetLayout::ManifestCsv);
    REQUIRE(l.utterances.size() == 2);
    CHECK(l.utterances[0] == Utterance{"u1", dir.path() / "a/b.wav", 3, "s05"});
    CHECK(l.utterances[1].path == fs::path("/abs/c.wav"));
    CHECK(l.skipped == 1);
    CHECK(dataset_layout_from_string("manifest") == DatasetLayout::ManifestCsv);
    CHECK(code_of([] { dataset_layout_from_string("tar"); }) == ErrorCode::ConfigInvalid);
  }

  TEST_CASE("stratified split") {
    const auto data = grid(3, 4, 10);
    const auto s = stratified_split(data, SplitConfig{});
    CHECK(s.train.size() == 96);
    CHECK(s.test.size() == 24);
    std::map<std::pair<int, std::string>, int> per_cell;
    for (const auto& u : s.train) ++per_cell[{u.digit_label, u.speaker_label}];
    for (const auto& [cell, n] : per_cell) CHECK(n == 8);
    CHECK(per_cell.size() == 12);

    std::set<std::string> ids;
    for (const auto& u : s.train) ids.insert(u.id);
    for (const auto& u : s.test) CHECK(ids.insert(u.id).second);
    CHECK(ids.size() == data.size());

    auto shuffled = data;
    std::reverse(shuffled.begin(), shuffled.end());
    const auto s2 = stratified_split(shuffled, SplitConfig{});
    CHECK(s2.train == s.train);
    CHECK(s2.test == s.test);
    SplitConfig other;
    other.seed = 8;
    CHECK(stratified_split(data, other).test != s.test);

    const auto tiny = stratified_split(grid(2, 2, 2), SplitConfig{0.9, true, 1});
    CHECK(tiny.train.size() == 4);
    CHECK(tiny.test.size() == 4);

    auto holey = data;
    std::erase_if(holey, [](const Utterance& u) { return u.digit_label == 1 && u.speaker_label == "s2"; });
    CHECK(code_of([&] { stratified_split(holey, SplitConfig{}); }) == ErrorCode::EmptyCell);
    CHECK(code_of([&] { stratified_split(data, SplitConfig{1.0, true, 1}); }) == ErrorCode::ConfigInvalid);

    const auto flat = stratified_split(data, SplitConfig{0.75, false, 3});
    CHECK(flat.train.size() == 90);
  }
}

TEST_SUITE("experiment") {
  TEST_CASE("synthetic corpus is learned and the pipeline is reproducible") {
    testutil::TempDir dir;
    const auto data = write_tone_corpus(dir.path(), 2);
    REQUIRE(data.size() == 8);
    auto cfg = small_config();
    cfg.shuffle_labels_control = true;
    FeatureCache cache;
    const auto model = train_model(cfg, data, cache);
    CHECK(model.digit_classes == std::vector<int>{0, 1});
    CHECK(model.speaker_classes == std::vector<std::string>{"spk0", "spk1"});
    CHECK(model.seeds.size() == 3);
    CHECK(model.seeds[1].seed == cfg.reservoir.seed + 1);
    CHECK(model.input_dim == 10);
    CHECK(cache.computed() == 4);

    const auto ex = make_extractor(cfg.extractor);
    const auto results = evaluate_model(model, data, *ex, cache);
    CHECK(cache.computed() == 8);
    REQUIRE(results.accuracy.size() == 6);
    CHECK(results.control.size() == 6);
    for (const auto& r : results.accuracy) {
      CHECK(r.accuracy == 1.0);
      CHECK(r.total == 4);
      CHECK(r.num_classes == 2);
      CHECK(r.extractor == "tmfwc");
    }

    // Order of the input listing does not matter, nor does the cache.
    auto reversed = data;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(run_experiment(cfg, reversed) == results);

    // The stored model reproduces the same scores.
    const auto reloaded = trained_model_from_json(Json::parse(trained_model_to_json(model).dump()));
    CHECK(evaluate_model(reloaded, data, *ex, cache) == results);

    auto mfcc = cfg.extractor;
    mfcc.kind = ExtractorKind::Mfcc;
    CHECK(code_of([&] { evaluate_model(model, data, *make_extractor(mfcc), cache); }) ==
          ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { evaluate_model(model, std::vector<Utterance>(data.begin(), data.begin() + 2), *ex, cache); }) ==
          ErrorCode::EmptyDataset);
  }

  TEST_CASE("every extractor trains end to end") {
    testutil::TempDir dir;
    const auto data = write_tone_corpus(dir.path(), 2);
    for (auto kind : {ExtractorKind::Mfcc, ExtractorKind::Dwt}) {
      auto cfg = small_config();
      cfg.n_reservoir_seeds = 1;
      cfg.extractor.kind = kind;
      const auto r = run_experiment(cfg, data);
      REQUIRE(r.accuracy.size() == 2);
      CHECK(r.accuracy[0].extractor == std::string(to_string(kind)));
      CHECK(aggregate(r.accuracy)[0].sd == 0.0);
    }
  }

  TEST_CASE("too few classes") {
    auto cfg = small_config();
    std::vector<Utterance> one_speaker;
    for (auto u : grid(2, 1, 4)) one_speaker.push_back(u);
    FeatureCache cache;
    CHECK(code_of([&] { train_model(cfg, one_speaker, cache); }) == ErrorCode::InsufficientData);
  }

  TEST_CASE("disk cache") {
    testutil::TempDir dir, cache_dir;
    const auto data = write_tone_corpus(dir.path(), 1);
    const auto ex = make_extractor(ExtractorSettings{});
    FeatureCache first(cache_dir.path());
    const auto a = extract_all(data, *ex, first, 2);
    CHECK(first.computed() == 4);
    CHECK(std::distance(fs::directory_iterator(cache_dir.path()), fs::directory_iterator{}) == 4);
    FeatureCache second(cache_dir.path());
    const auto b = extract_all(data, *ex, second, 1);
    CHECK(second.computed() == 0);
    CHECK(second.hits() == 4);
    const auto same_values = [](const std::vector<FeatureMatrix>& x, const std::vector<FeatureMatrix>& y) {
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].rows() != y[i].rows() || x[i].cols() != y[i].cols()) return false;
        if (!std::equal(x[i].data().begin(), x[i].data().end(), y[i].data().begin())) return false;
      }
      return true;
    };
    CHECK(same_values(a, b));
    FeatureCache none;
    CHECK(same_values(extract_all(data, *ex, none, 1), a));

    auto changed = ExtractorSettings{};
    changed.tmfwc.pool_window_ms = 4.0;
    const auto ex2 = make_extractor(changed);
    CHECK(ex2->cache_key() != ex->cache_key());
    FeatureCache third(cache_dir.path());
    extract_all(data, *ex2, third, 1);
    CHECK(third.computed() == 4);

    std::vector<Utterance> missing{{"9_x_0", dir / "nope.wav", 9, "x"}};
    CHECK(code_of([&] { extract_all(missing, *ex, none, 1); }) == ErrorCode::IoFailure);
  }

  TEST_CASE("aggregation") {
    std::vector<AccuracyRecord> recs;
    for (std::uint64_t s = 0; s < 4; ++s) recs.push_back({Task::Digit, "tmfwc", s, 0.5 + 0.1 * s, 0, 10, 10});
    recs.push_back({Task::Speaker, "tmfwc", 0, 0.7, 7, 10, 5});
    const auto agg = aggregate(recs);
    REQUIRE(agg.size() == 2);
    CHECK(agg[0].task == Task::Digit);
    CHECK(agg[0].mean == doctest::Approx(0.65));
    CHECK(agg[0].sd == doctest::Approx(std::sqrt(0.05 / 3.0)));
    CHECK(agg[0].chance == doctest::Approx(0.1));
    CHECK(agg[1].sd == 0.0);
    CHECK(agg[1].chance == doctest::Approx(0.2));
  }

  TEST_CASE("parallel_for rethrows") {
    std::atomic<int> hits{0};
    parallel_for(100, 4, [&](std::size_t) { ++hits; });
    CHECK(hits == 100);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                      if (i == 5) throw Error(ErrorCode::EmptyAudio, "x");
                    }),
                    Error);
  }
}

TEST_SUITE("bench and report") {
  TEST_CASE("benchmark counts and rows") {
    testutil::TempDir dir;
    const auto data = write_tone_corpus(dir.path(), 1);
    const auto rows = benchmark_extraction(data, standard_benchmark_settings(ExtractorSettings{}), {3, 1});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].extractor == "tmfwc");
    CHECK(rows[0].total_transforms == 0);
    CHECK(rows[0].total_macs == 4ull * 10 * 2 * 200 * 2400);
    CHECK(rows[1].extractor == "mfcc");
    CHECK(rows[1].total_transforms == rows[1].total_frames);
    CHECK(rows[1].total_frames > 0);
    CHECK(rows[2].extractor == "dwt");
    for (const auto& r : rows) {
      CHECK(r.utterances == 4);
      CHECK(r.repetitions == 3);
      CHECK(r.median_ms_per_utterance > 0.0);
    }
    CHECK(rows[1].transforms_per_utterance() == doctest::Approx(rows[1].total_frames / 4.0));
    CHECK(code_of([] { benchmark_extraction({}, {ExtractorSettings{}}); }) == ErrorCode::EmptyDataset);

    const auto with_fft = benchmark_extraction(data, {ExtractorSettings{}}, {3, 0, true});
    REQUIRE(with_fft.size() == 2);
    CHECK(with_fft[1].extractor == "tmfwc-fftconv");
    CHECK(with_fft[1].total_transforms == 4 * (1 + 4 * 10));
    CHECK(with_fft[1].total_frames == with_fft[0].total_frames);
  }

  TEST_CASE("fft convolution reproduces the direct path") {
    const auto settings = ExtractorSettings{};
    const TmfwcExtractor ex(settings.tmfwc, resolve_component_table(settings));
    for (std::size_t len : {1u, 199u, 2400u, 8001u}) {
      const AudioBuffer buf(testutil::random_signal(len, len, 0.5), 8000);
      const auto direct = ex.extract(buf);
      const auto fast = tmfwc_extract_fft_convolution(ex, buf);
      REQUIRE(fast.rows() == direct.rows());
      REQUIRE(fast.cols() == direct.cols());
      double worst = 0.0;
      for (std::size_t i = 0; i < direct.data().size(); ++i)
        worst = std::max(worst, std::abs(fast.data()[i] - direct.data()[i]));
      CHECK(worst < 1e-9);
      CHECK(fast.column_names() == direct.column_names());
    }
    CHECK(code_of([&] { tmfwc_extract_fft_convolution(ex, AudioBuffer(std::vector<double>(10, 0.1), 16000)); }) ==
          ErrorCode::SampleRateMismatch);
  }

  TEST_CASE("report files") {
    ResultTable t;
    for (std::uint64_t s = 0; s < 3; ++s) {
      t.accuracy.push_back({Task::Digit, "tmfwc", s, 0.9 + 0.01 * s, 0, 100, 10});
      t.accuracy.push_back({Task::Speaker, "tmfwc", s, 0.8, 80, 100, 10});
      t.control.push_back({Task::Digit, "tmfwc", s, 0.1, 10, 100, 10});
    }
    t.timing.push_back({"tmfwc", 50, 20, 1.5, 1000, 0, 30});
    testutil::TempDir out;
    emit_report(t, out / "r");
    const auto acc = slurp(out / "r" / "accuracy.csv");
    CHECK(acc.rfind("task,extractor,seed,value\n", 0) == 0);
    CHECK(std::count(acc.begin(), acc.end(), '\n') == 7);
    const auto timing = slurp(out / "r" / "timing.csv");
    CHECK(std::count(timing.begin(), timing.end(), '\n') == 2);

    const auto summary = parse_json_file(out / "r" / "summary.json");
    CHECK(summary["format"] == "tmfwc-summary-1");
    double sum = 0.0;
    for (const auto& r : t.accuracy)
      if (r.task == Task::Digit) sum += r.accuracy;
    CHECK(std::abs(summary["accuracy"][0]["mean"].get<double>() - sum / 3.0) < 1e-12);
    CHECK(summary["control"][0]["within_3sd_of_chance"] == true);
    CHECK(summary["control"][0]["chance_sd"].get<double>() == doctest::Approx(0.03));
    CHECK(summary["timing"][0]["macs_per_utterance"].get<double>() == 20.0);

    save_results(out / "results.json", t);
    auto back = load_results(out / "results.json");
    CHECK(back == t);

    CHECK(code_of([&] { emit_report(ResultTable{}, out / "empty"); }) == ErrorCode::InsufficientData);
    CHECK_FALSE(fs::exists(out / "empty"));
  }

  TEST_CASE("merging tables") {
    ResultTable a, b;
    a.accuracy.push_back({Task::Speaker, "mfcc", 1, 0.5, 5, 10, 2});
    b.accuracy.push_back({Task::Digit, "tmfwc", 0, 0.5, 5, 10, 2});
    b.timing.push_back({"dwt", 1, 20, 0.1, 1, 0, 1});
    a.merge(b);
    a.sort();
    CHECK(a.accuracy.size() == 2);
    CHECK(a.accuracy[0].task == Task::Digit);
    CHECK(a.timing.size() == 1);
  }
}

TEST_SUITE("config") {
  TEST_CASE("strict parsing") {
    ExperimentConfig cfg;
    CHECK(code_of([&] { merge_experiment_config(cfg, Json::parse(R"({"bogus": 1})")); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([&] { merge_experiment_config(cfg, Json::parse(R"({"n_reservoir_seeds": "ten"})")); }) ==
          ErrorCode::ConfigInvalid);
    CHECK(code_of([&] { merge_experiment_config(cfg, Json::parse(R"({"extractor": {"mfcc": {"numceps": 3}}})")); }) ==
          ErrorCode::ConfigInvalid);
    CHECK(code_of([&] { merge_experiment_config(cfg, Json::parse(R"({"extractor": {"kind": "lpc"}})")); }) ==
          ErrorCode::ConfigInvalid);

    merge_experiment_config(cfg, Json::parse(R"({"extractor": {"mfcc": {"num_ceps": 8}}, "reservoir": {"n_nodes": 64}})"));
    CHECK(cfg.extractor.mfcc.num_ceps == 8);
    CHECK(cfg.reservoir.n_nodes == 64);
    CHECK(cfg.reservoir.spectral_radius == 0.9);
  }

  TEST_CASE("round trip") {
    ExperimentConfig cfg;
    cfg.extractor.kind = ExtractorKind::Dwt;
    cfg.extractor.dwt.wavelet.family = WaveletFamily::Haar;
    cfg.dataset = {"/data/digits", DatasetLayout::AudioMnist};
    cfg.split.seed = 99;
    cfg.reservoir.seed = 1234567890123ULL;
    cfg.ridge_lambda = 0.25;
    cfg.shuffle_labels_control = true;
    const Json j = experiment_config_to_json(cfg);
    ExperimentConfig back;
    merge_experiment_config(back, Json::parse(j.dump()));
    CHECK(experiment_config_to_json(back) == j);
    CHECK(back.reservoir.seed == 1234567890123ULL);
  }

  TEST_CASE("files and environment") {
    testutil::TempDir dir;
    std::ofstream(dir / "c.json") << R"({"threads": 3})";
    ::setenv("TMFWC_CACHE_DIR", (dir / "cache").c_str(), 1);
    const auto cfg = load_experiment_config(dir / "c.json");
    ::unsetenv("TMFWC_CACHE_DIR");
    CHECK(cfg.threads == 3);
    CHECK(cfg.cache_dir == dir / "cache");
    CHECK(load_experiment_config({}).cache_dir.empty());
    std::ofstream(dir / "bad.json") << "{";
    CHECK(code_of([&] { load_experiment_config(dir / "bad.json"); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([&] { load_experiment_config(dir / "none.json"); }) == ErrorCode::IoFailure);
  }
}
