// tmfwc: feature extraction, kernel synthesis, reservoir training and
// evaluation, extraction benchmarks and report merging.
//
// Exit codes: 0 success, 1 I/O failure, 2 configuration error (including
// unknown flags and dimension mismatches), 3 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tmfwc/audio.hpp"
#include "tmfwc/bench.hpp"
#include "tmfwc/config.hpp"
#include "tmfwc/dataset.hpp"
#include "tmfwc/error.hpp"
#include "tmfwc/experiment.hpp"
#include "tmfwc/extractor.hpp"
#include "tmfwc/melwave.hpp"
#include "tmfwc/report.hpp"

namespace fs = std::filesystem;
using namespace tmfwc;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Overrides {
  std::string config;
  std::optional<std::string> extractor;
  std::optional<std::string> table;
  std::optional<std::string> dataset;
  std::optional<std::string> layout;
  std::optional<std::size_t> seeds;
  std::optional<double> train_frac;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> split_seed;
  std::optional<std::size_t> num_ceps;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON configuration file");
  cmd->add_option("--extractor", o.extractor, "Feature extractor")
      ->check(CLI::IsMember({"tmfwc", "mfcc", "dwt"}));
  cmd->add_option("--table", o.table, "Component table CSV overlaid on the derived table");
  cmd->add_option("--dataset", o.dataset, "Dataset root directory");
  cmd->add_option("--layout", o.layout, "Dataset layout")
      ->check(CLI::IsMember({"fsdd", "audiomnist", "manifest"}));
  cmd->add_option("--seeds", o.seeds, "Number of reservoir seeds")->check(CLI::PositiveNumber);
  cmd->add_option("--train-frac", o.train_frac, "Training fraction in (0, 1)");
  cmd->add_option("--threads", o.threads, "Worker thread cap (0 = all cores)");
  cmd->add_option("--seed", o.seed, "Base reservoir seed");
  cmd->add_option("--split-seed", o.split_seed, "Train/test split seed");
  cmd->add_option("--num-ceps", o.num_ceps, "MFCC cepstral coefficients");
}

void apply_overrides(const Overrides& o, ExperimentConfig& cfg) {
  if (o.extractor) cfg.extractor.kind = extractor_kind_from_string(*o.extractor);
  if (o.table) cfg.extractor.table_path = *o.table;
  if (o.dataset) cfg.dataset.root = *o.dataset;
  if (o.layout) cfg.dataset.layout = dataset_layout_from_string(*o.layout);
  if (o.seeds) cfg.n_reservoir_seeds = *o.seeds;
  if (o.train_frac) cfg.split.train_fraction = *o.train_frac;
  if (o.threads) cfg.threads = *o.threads;
  if (o.seed) cfg.reservoir.seed = *o.seed;
  if (o.split_seed) cfg.split.seed = *o.split_seed;
  if (o.num_ceps) cfg.extractor.mfcc.num_ceps = *o.num_ceps;
}

ExperimentConfig resolve_config(const Overrides& o) {
  ExperimentConfig cfg = load_experiment_config(o.config);
  apply_overrides(o, cfg);
  cfg.validate();
  return cfg;
}

void echo_config(const fs::path& dir, const ExperimentConfig& cfg) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  write_json_file(dir / "resolved_config.json", experiment_config_to_json(cfg));
}

std::vector<Utterance> load_configured_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset.root.empty()) throw Error(ErrorCode::ConfigInvalid, "no dataset given (--dataset)");
  DatasetListing listing = load_dataset(cfg.dataset.root, cfg.dataset.layout);
  if (listing.skipped > 0) {
    fmt::print(stderr, "warning: skipped {} file(s) not matching the {} layout\n", listing.skipped,
               to_string(cfg.dataset.layout));
  }
  return std::move(listing.utterances);
}

// ---- extract -------------------------------------------------------------

struct ExtractArgs {
  Overrides o;
  std::vector<std::string> inputs;
  std::string out;
  std::string format = "csv";
};

int cmd_extract(const ExtractArgs& a) {
  const ExperimentConfig cfg = resolve_config(a.o);
  const auto extractor = make_extractor(cfg.extractor);
  const std::string kind(to_string(cfg.extractor.kind));
  const std::string ext = a.format == "csv" ? ".csv" : ".fm";

  std::vector<fs::path> wavs;
  for (const auto& in : a.inputs) {
    std::error_code ec;
    if (fs::is_directory(in, ec)) {
      for (const auto& u : load_dataset(in, cfg.dataset.layout).utterances) wavs.push_back(u.path);
    } else if (fs::exists(in, ec)) {
      wavs.emplace_back(in);
    } else {
      throw Error(ErrorCode::IoFailure, "no such file: " + in);
    }
  }

  std::vector<fs::path> dirs;
  for (const auto& wav : wavs) {
    const fs::path dir = a.out.empty() ? wav.parent_path() : fs::path(a.out);
    if (std::find(dirs.begin(), dirs.end(), dir) == dirs.end()) {
      echo_config(dir.empty() ? "." : dir, cfg);
      dirs.push_back(dir);
    }
    const FeatureMatrix m = extractor->extract(load_wav(wav));
    const fs::path target = dir / (wav.stem().string() + "." + kind + ext);
    if (a.format == "csv") save_csv(target, m);
    else save_binary(target, m);
    fmt::print("{}\n", target.string());
  }
  return 0;
}

// ---- synth-kernels -------------------------------------------------------

struct SynthArgs {
  Overrides o;
  std::string out = "kernels";
};

int cmd_synth_kernels(const SynthArgs& a) {
  ExperimentConfig cfg = resolve_config(a.o);
  cfg.extractor.kind = ExtractorKind::Tmfwc;
  const MelComponentTable table = resolve_component_table(cfg.extractor);
  TmfwcConfig tcfg = cfg.extractor.tmfwc;
  tcfg.filterbank.sample_rate_hz = cfg.extractor.sample_rate_hz;
  const TmfwcExtractor ex(tcfg, table);

  const fs::path dir = a.out;
  echo_config(dir, cfg);
  save_component_table(dir / "components.csv", table);
  for (const auto& k : ex.kernels()) {
    const fs::path path = dir / fmt::format("kernel_ch{:02}.csv", k.channel_index + 1);
    std::ofstream out(path, std::ios::binary);
    out << "n,t_s,real,imag\n";
    for (std::size_t n = 0; n < k.kernel_len(); ++n) {
      out << fmt::format("{},{},{},{}\n", n, static_cast<double>(n) / k.sample_rate_hz,
                         k.real_kernel[n], k.imag_kernel[n]);
    }
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  }
  fmt::print("wrote {} kernels to {}\n", ex.kernels().size(), dir.string());
  return 0;
}

// ---- train / eval --------------------------------------------------------

struct TrainArgs {
  Overrides o;
  std::string out = "run";
};

void write_run_outputs(const fs::path& dir, const ResultTable& results) {
  save_results(dir / "results.json", results);
  emit_report(results, dir);
}

void print_accuracy(const ResultTable& results) {
  for (const auto& a : aggregate(results.accuracy)) {
    fmt::print("{} {}: mean {:.4f} sd {:.4f} over {} seed(s)\n", a.extractor, to_string(a.task), a.mean,
               a.sd, a.n_seeds);
  }
  for (const auto& a : aggregate(results.control)) {
    fmt::print("{} {} (shuffled labels): mean {:.4f}, chance {:.4f}\n", a.extractor, to_string(a.task),
               a.mean, a.chance);
  }
}

int cmd_train(const TrainArgs& a) {
  const ExperimentConfig cfg = resolve_config(a.o);
  const fs::path dir = a.out;
  echo_config(dir, cfg);
  const auto data = load_configured_dataset(cfg);
  FeatureCache cache(cfg.cache_dir);
  const TrainedModel model = train_model(cfg, data, cache);
  write_json_file(dir / "model.json", trained_model_to_json(model));
  const auto extractor = make_extractor(cfg.extractor);
  const ResultTable results = evaluate_model(model, data, *extractor, cache);
  write_run_outputs(dir, results);
  print_accuracy(results);
  return 0;
}

struct EvalArgs {
  Overrides o;
  std::string model;
  std::string out = "eval";
};

int cmd_eval(const EvalArgs& a) {
  TrainedModel model = trained_model_from_json(parse_json_file(a.model));
  ExperimentConfig cfg = model.config;
  if (!a.o.config.empty()) merge_experiment_config(cfg, parse_json_file(a.o.config));
  apply_environment(cfg);
  apply_overrides(a.o, cfg);
  cfg.validate();
  model.config.threads = cfg.threads;
  model.config.cache_dir = cfg.cache_dir;

  const fs::path dir = a.out;
  echo_config(dir, cfg);
  const auto extractor = make_extractor(cfg.extractor);
  FeatureCache cache(cfg.cache_dir);
  const ResultTable results = evaluate_model(model, load_configured_dataset(cfg), *extractor, cache);
  write_run_outputs(dir, results);
  print_accuracy(results);
  return 0;
}

// ---- bench ---------------------------------------------------------------

struct BenchArgs {
  Overrides o;
  std::string out = "bench";
  std::size_t reps = 20;
  std::size_t limit = 0;
  bool fft_conv = false;
};

int cmd_bench(const BenchArgs& a) {
  ExperimentConfig cfg = resolve_config(a.o);
  cfg.threads = 1;
  if (a.reps < 20) throw Error(ErrorCode::ConfigInvalid, "--reps must be at least 20");
  const fs::path dir = a.out;
  echo_config(dir, cfg);
  auto data = load_configured_dataset(cfg);
  if (a.limit > 0 && data.size() > a.limit) data.resize(a.limit);

  ResultTable results;
  results.timing = benchmark_extraction(data, standard_benchmark_settings(cfg.extractor),
                                        BenchmarkConfig{a.reps, 3, a.fft_conv});
  write_run_outputs(dir, results);
  for (const auto& t : results.timing) {
    fmt::print("{}: {:.4f} ms/utterance, {:.0f} MACs/utterance, {:.1f} transforms/utterance\n",
               t.extractor, t.median_ms_per_utterance, t.macs_per_utterance(),
               t.transforms_per_utterance());
  }
  return 0;
}

// ---- report --------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out = "report";
};

int cmd_report(const ReportArgs& a) {
  ResultTable merged;
  for (const auto& in : a.inputs) {
    fs::path p = in;
    std::error_code ec;
    if (fs::is_directory(p, ec)) p /= "results.json";
    merged.merge(load_results(p));
  }
  emit_report(merged, a.out);
  fmt::print("merged {} accuracy and {} timing record(s) into {}\n", merged.accuracy.size(),
             merged.timing.size(), a.out);
  return 0;
}

int exit_code_for(ErrorCode code) {
  switch (category_of(code)) {
    case ErrorCategory::Io: return kExitIo;
    case ErrorCategory::Config: return kExitConfig;
    case ErrorCategory::Data: return kExitData;
  }
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-domain mel wavelet features with reservoir readouts"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract", "Write one feature matrix per input utterance");
  add_config_flags(c_extract, extract.o);
  c_extract->add_option("inputs", extract.inputs, "WAV files or dataset directories")->required();
  c_extract->add_option("--out", extract.out, "Output directory (default: next to each input)");
  c_extract->add_option("--format", extract.format, "Output format")->check(CLI::IsMember({"csv", "bin"}));

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth-kernels", "Dump TMFWC kernels and the component table");
  add_config_flags(c_synth, synth.o);
  c_synth->add_option("--out", synth.out, "Output directory")->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train readouts for every reservoir seed and score the test split");
  add_config_flags(c_train, train.o);
  c_train->add_option("--out", train.out, "Output directory")->capture_default_str();

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Score a trained model on its recorded test split");
  add_config_flags(c_eval, eval.o);
  c_eval->add_option("--model", eval.model, "model.json written by train")->required();
  c_eval->add_option("--out", eval.out, "Output directory")->capture_default_str();

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Time TMFWC, MFCC and DWT extraction on one thread");
  add_config_flags(c_bench, bench.o);
  c_bench->add_option("--out", bench.out, "Output directory")->capture_default_str();
  c_bench->add_option("--reps", bench.reps, "Timed repetitions (>= 20)")->capture_default_str();
  c_bench->add_option("--limit", bench.limit, "Use only the first N utterances (0 = all)");
  c_bench->add_flag("--fft-conv", bench.fft_conv, "Also time TMFWC computed by FFT convolution");

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "Merge results.json files into CSV and JSON summaries");
  c_report->add_option("--in", report.inputs, "results.json files or run directories")->required();
  c_report->add_option("--out", report.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*c_extract) return cmd_extract(extract);
    if (*c_synth) return cmd_synth_kernels(synth);
    if (*c_train) return cmd_train(train);
    if (*c_eval) return cmd_eval(eval);
    if (*c_bench) return cmd_bench(bench);
    if (*c_report) return cmd_report(report);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitData;
  }
  return kExitConfig;
}
