#include "tmfwc/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "tmfwc/error.hpp"

namespace tmfwc {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigInvalid, fmt::format("{}: {}", where, what));
}

// Reads known keys out of a JSON object and rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) bad(where_, "expected an object");
  }
  ObjectReader(const ObjectReader&) = delete;
  ObjectReader& operator=(const ObjectReader&) = delete;

  ~ObjectReader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) bad(where_, "unknown key '" + item.key() + "'");
    }
  }

  const Json* find(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const char* key, double& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number()) bad(path(key), "expected a number");
      out = v->get<double>();
    }
  }
  void get(const char* key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) bad(path(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const Json* v = find(key)) {
      if (!v->is_string()) bad(path(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const char* key, std::filesystem::path& out) {
    std::string s = out.string();
    get(key, s);
    out = s;
  }
  void get(const char* key, std::uint64_t& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_unsigned()) bad(path(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(const char* key, int& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_integer()) bad(path(key), "expected an integer");
      out = v->get<int>();
    }
  }
  template <class Enum, class Parse>
  void get_enum(const char* key, Enum& out, Parse parse) {
    if (const Json* v = find(key)) {
      if (!v->is_string()) bad(path(key), "expected a string");
      out = parse(v->get<std::string>());
    }
  }
  template <class F>
  void sub(const char* key, F&& f) {
    if (const Json* v = find(key)) f(*v, path(key));
  }

  std::string path(const char* key) const { return where_ + "." + key; }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void get_size(ObjectReader& r, const char* key, std::size_t& out) {
  std::uint64_t v = out;
  r.get(key, v);
  out = static_cast<std::size_t>(v);
}

Json filterbank_to_json(const MelFilterbankSpec& s) {
  return {{"num_filters", s.num_filters},
          {"f_min_hz", s.f_min_hz},
          {"f_max_hz", s.f_max_hz},
          {"fft_size", s.fft_size}};
}

void merge_filterbank(MelFilterbankSpec& s, const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  get_size(r, "num_filters", s.num_filters);
  r.get("f_min_hz", s.f_min_hz);
  r.get("f_max_hz", s.f_max_hz);
  get_size(r, "fft_size", s.fft_size);
}

std::string_view phase_name(CepstrumPhase p) {
  return p == CepstrumPhase::OneBasedFilters ? "one-based" : "zero-based";
}

CepstrumPhase phase_from_string(const std::string& s) {
  if (s == "one-based") return CepstrumPhase::OneBasedFilters;
  if (s == "zero-based") return CepstrumPhase::ZeroBasedFilters;
  throw Error(ErrorCode::ConfigInvalid, "unknown dct_phase '" + s + "'");
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array()) bad("model", "weights must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.front().size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      bad("model", "ragged weight matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Json readouts_to_json(const std::map<Task, ReadoutWeights>& readouts) {
  Json out = Json::object();
  for (const auto& [task, w] : readouts) out[std::string(to_string(task))] = matrix_to_json(w.w_out);
  return out;
}

std::map<Task, ReadoutWeights> readouts_from_json(const Json& j) {
  std::map<Task, ReadoutWeights> out;
  for (const auto& item : j.items()) {
    const Task task = task_from_string(item.key());
    out[task] = ReadoutWeights{matrix_from_json(item.value()), task};
  }
  return out;
}

Json accuracy_to_json(const AccuracyRecord& r) {
  return {{"task", to_string(r.task)}, {"extractor", r.extractor}, {"seed", r.seed},
          {"accuracy", r.accuracy},    {"correct", r.correct},     {"total", r.total},
          {"num_classes", r.num_classes}};
}

AccuracyRecord accuracy_from_json(const Json& j) {
  AccuracyRecord r;
  ObjectReader rd(j, "accuracy record");
  rd.get_enum("task", r.task, task_from_string);
  rd.get("extractor", r.extractor);
  rd.get("seed", r.seed);
  rd.get("accuracy", r.accuracy);
  get_size(rd, "correct", r.correct);
  get_size(rd, "total", r.total);
  get_size(rd, "num_classes", r.num_classes);
  return r;
}

Json timing_to_json(const TimingRecord& t) {
  return {{"extractor", t.extractor},
          {"utterances", t.utterances},
          {"repetitions", t.repetitions},
          {"median_ms_per_utterance", t.median_ms_per_utterance},
          {"total_macs", t.total_macs},
          {"total_transforms", t.total_transforms},
          {"total_frames", t.total_frames}};
}

TimingRecord timing_from_json(const Json& j) {
  TimingRecord t;
  ObjectReader rd(j, "timing record");
  rd.get("extractor", t.extractor);
  get_size(rd, "utterances", t.utterances);
  get_size(rd, "repetitions", t.repetitions);
  rd.get("median_ms_per_utterance", t.median_ms_per_utterance);
  rd.get("total_macs", t.total_macs);
  rd.get("total_transforms", t.total_transforms);
  rd.get("total_frames", t.total_frames);
  return t;
}

}  // namespace

Json extractor_settings_to_json(const ExtractorSettings& s) {
  const TmfwcConfig& t = s.tmfwc;
  const MfccConfig& m = s.mfcc;
  const DwtFeatureConfig& d = s.dwt;
  return {
      {"kind", to_string(s.kind)},
      {"sample_rate_hz", s.sample_rate_hz},
      {"table", s.table_path.generic_string()},
      {"tmfwc",
       {{"num_channels", t.num_channels},
        {"kernel_ms", t.kernel_ms},
        {"taper", to_string(t.taper)},
        {"pool_window_ms", t.pool_window_ms},
        {"component_spacing_hz", t.component_spacing_hz},
        {"filterbank", filterbank_to_json(t.filterbank)}}},
      {"mfcc",
       {{"filterbank", filterbank_to_json(s.mfcc_filterbank)},
        {"num_ceps", m.num_ceps},
        {"include_c0", m.include_c0},
        {"append_deltas", m.append_deltas},
        {"delta_width", m.delta_width},
        {"floor_eps", m.floor_eps},
        {"frame_ms", m.frame_ms},
        {"hop_ms", m.hop_ms},
        {"window", to_string(m.window)},
        {"dct_phase", phase_name(m.phase)}}},
      {"dwt",
       {{"family", to_string(d.wavelet.family)},
        {"levels", d.wavelet.levels},
        {"frame_ms", d.frame_ms},
        {"hop_ms", d.hop_ms},
        {"floor_eps", d.floor_eps}}},
  };
}

void merge_extractor_settings(ExtractorSettings& s, const Json& j) {
  ObjectReader r(j, "extractor");
  r.get_enum("kind", s.kind, extractor_kind_from_string);
  r.get("sample_rate_hz", s.sample_rate_hz);
  r.get("table", s.table_path);
  r.sub("tmfwc", [&](const Json& v, const std::string& where) {
    ObjectReader t(v, where);
    get_size(t, "num_channels", s.tmfwc.num_channels);
    t.get("kernel_ms", s.tmfwc.kernel_ms);
    t.get_enum("taper", s.tmfwc.taper, kernel_taper_from_string);
    t.get("pool_window_ms", s.tmfwc.pool_window_ms);
    t.get("component_spacing_hz", s.tmfwc.component_spacing_hz);
    t.sub("filterbank", [&](const Json& f, const std::string& w) { merge_filterbank(s.tmfwc.filterbank, f, w); });
  });
  r.sub("mfcc", [&](const Json& v, const std::string& where) {
    ObjectReader m(v, where);
    m.sub("filterbank", [&](const Json& f, const std::string& w) { merge_filterbank(s.mfcc_filterbank, f, w); });
    get_size(m, "num_ceps", s.mfcc.num_ceps);
    m.get("include_c0", s.mfcc.include_c0);
    m.get("append_deltas", s.mfcc.append_deltas);
    get_size(m, "delta_width", s.mfcc.delta_width);
    m.get("floor_eps", s.mfcc.floor_eps);
    m.get("frame_ms", s.mfcc.frame_ms);
    m.get("hop_ms", s.mfcc.hop_ms);
    m.get_enum("window", s.mfcc.window, window_kind_from_string);
    m.get_enum("dct_phase", s.mfcc.phase, phase_from_string);
  });
  r.sub("dwt", [&](const Json& v, const std::string& where) {
    ObjectReader d(v, where);
    d.get_enum("family", s.dwt.wavelet.family, wavelet_family_from_string);
    get_size(d, "levels", s.dwt.wavelet.levels);
    d.get("frame_ms", s.dwt.frame_ms);
    d.get("hop_ms", s.dwt.hop_ms);
    d.get("floor_eps", s.dwt.floor_eps);
  });
}

Json reservoir_params_to_json(const ReservoirParams& p) {
  return {{"n_nodes", p.n_nodes},
          {"spectral_radius", p.spectral_radius},
          {"input_scaling", p.input_scaling},
          {"leak_rate", p.leak_rate},
          {"input_density", p.input_density},
          {"recurrent_density", p.recurrent_density},
          {"seed", p.seed}};
}

void merge_reservoir_params(ReservoirParams& p, const Json& j) {
  ObjectReader r(j, "reservoir");
  get_size(r, "n_nodes", p.n_nodes);
  r.get("spectral_radius", p.spectral_radius);
  r.get("input_scaling", p.input_scaling);
  r.get("leak_rate", p.leak_rate);
  r.get("input_density", p.input_density);
  r.get("recurrent_density", p.recurrent_density);
  r.get("seed", p.seed);
}

Json experiment_config_to_json(const ExperimentConfig& cfg) {
  return {
      {"extractor", extractor_settings_to_json(cfg.extractor)},
      {"dataset", {{"root", cfg.dataset.root.generic_string()}, {"layout", to_string(cfg.dataset.layout)}}},
      {"split",
       {{"train_fraction", cfg.split.train_fraction},
        {"stratified", cfg.split.stratified},
        {"seed", cfg.split.seed}}},
      {"reservoir", reservoir_params_to_json(cfg.reservoir)},
      {"n_reservoir_seeds", cfg.n_reservoir_seeds},
      {"ridge_lambda", cfg.ridge_lambda},
      {"shuffle_labels_control", cfg.shuffle_labels_control},
      {"threads", cfg.threads},
      {"cache_dir", cfg.cache_dir.generic_string()},
  };
}

void merge_experiment_config(ExperimentConfig& cfg, const Json& j) {
  ObjectReader r(j, "config");
  r.sub("extractor", [&](const Json& v, const std::string&) { merge_extractor_settings(cfg.extractor, v); });
  r.sub("dataset", [&](const Json& v, const std::string& where) {
    ObjectReader d(v, where);
    d.get("root", cfg.dataset.root);
    d.get_enum("layout", cfg.dataset.layout, dataset_layout_from_string);
  });
  r.sub("split", [&](const Json& v, const std::string& where) {
    ObjectReader s(v, where);
    s.get("train_fraction", cfg.split.train_fraction);
    s.get("stratified", cfg.split.stratified);
    s.get("seed", cfg.split.seed);
  });
  r.sub("reservoir", [&](const Json& v, const std::string&) { merge_reservoir_params(cfg.reservoir, v); });
  get_size(r, "n_reservoir_seeds", cfg.n_reservoir_seeds);
  r.get("ridge_lambda", cfg.ridge_lambda);
  r.get("shuffle_labels_control", cfg.shuffle_labels_control);
  get_size(r, "threads", cfg.threads);
  r.get("cache_dir", cfg.cache_dir);
}

Json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

void apply_environment(ExperimentConfig& cfg) {
  if (const char* dir = std::getenv("TMFWC_CACHE_DIR"); dir != nullptr && *dir != '\0') {
    cfg.cache_dir = dir;
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  ExperimentConfig cfg;
  if (!path.empty()) merge_experiment_config(cfg, parse_json_file(path));
  apply_environment(cfg);
  return cfg;
}

Json result_table_to_json(const ResultTable& table) {
  Json acc = Json::array(), ctl = Json::array(), tim = Json::array();
  for (const auto& r : table.accuracy) acc.push_back(accuracy_to_json(r));
  for (const auto& r : table.control) ctl.push_back(accuracy_to_json(r));
  for (const auto& t : table.timing) tim.push_back(timing_to_json(t));
  return {{"accuracy", acc}, {"control", ctl}, {"timing", tim}};
}

ResultTable result_table_from_json(const Json& j) {
  ResultTable table;
  ObjectReader r(j, "results");
  const auto list = [&](const char* key, auto&& each) {
    if (const Json* v = r.find(key)) {
      if (!v->is_array()) bad(r.path(key), "expected an array");
      for (const auto& item : *v) each(item);
    }
  };
  list("accuracy", [&](const Json& v) { table.accuracy.push_back(accuracy_from_json(v)); });
  list("control", [&](const Json& v) { table.control.push_back(accuracy_from_json(v)); });
  list("timing", [&](const Json& v) { table.timing.push_back(timing_from_json(v)); });
  return table;
}

Json trained_model_to_json(const TrainedModel& model) {
  Json seeds = Json::array();
  for (const auto& s : model.seeds) {
    seeds.push_back({{"seed", s.seed},
                     {"readouts", readouts_to_json(s.readouts)},
                     {"control_readouts", readouts_to_json(s.control_readouts)}});
  }
  return {{"format", "tmfwc-model-1"},
          {"config", experiment_config_to_json(model.config)},
          {"input_dim", model.input_dim},
          {"digit_classes", model.digit_classes},
          {"speaker_classes", model.speaker_classes},
          {"train_ids", model.train_ids},
          {"test_ids", model.test_ids},
          {"seeds", seeds}};
}

TrainedModel trained_model_from_json(const Json& j) {
  TrainedModel model;
  try {
    if (!j.is_object() || j.value("format", "") != "tmfwc-model-1") bad("model", "not a model file");
    merge_experiment_config(model.config, j.at("config"));
    model.input_dim = j.at("input_dim").get<std::size_t>();
    model.digit_classes = j.at("digit_classes").get<std::vector<int>>();
    model.speaker_classes = j.at("speaker_classes").get<std::vector<std::string>>();
    model.train_ids = j.at("train_ids").get<std::vector<std::string>>();
    model.test_ids = j.at("test_ids").get<std::vector<std::string>>();
    for (const auto& s : j.at("seeds")) {
      model.seeds.push_back({s.at("seed").get<std::uint64_t>(), readouts_from_json(s.at("readouts")),
                             readouts_from_json(s.at("control_readouts"))});
    }
  } catch (const Json::exception& e) {
    bad("model", e.what());
  }
  return model;
}

}  // namespace tmfwc
