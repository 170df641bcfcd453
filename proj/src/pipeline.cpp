#include "mecho/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

#include "mecho/io.hpp"
#include "mecho/operators.hpp"
#include "mecho/parallel.hpp"

namespace mecho::pipeline {

using nlohmann::json;

namespace {

const fs::path kTruth = "truth";
const fs::path kMask = "mask.json";
const fs::path kKspace = "kspace";

fs::path recon_base(const RunConfig& c, Method m) { return c.out / ("recon_" + std::string(method_name(m))); }
fs::path record_path(const RunConfig& c, Method m) {
  return c.out / ("record_" + std::string(method_name(m)) + ".json");
}

void unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where,
                  std::vector<std::string>& bad) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) bad.push_back("unknown " + where + " key '" + key + "'");
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& dst, const std::string& where,
                std::vector<std::string>& bad) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    bad.push_back(where + key + " has the wrong type");
  }
}

void setup(const RunConfig& c, const char* command) {
  require_valid(validate(c), command);
  set_thread_count(c.sequential ? 1 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  fs::create_directories(c.out);
  io::write_json(c.out / (std::string("config_") + command + ".json"), config_to_json(c));
}

void require_files(const std::vector<fs::path>& files, const char* command) {
  std::vector<std::string> missing;
  for (const auto& f : files) {
    if (!fs::exists(f)) missing.push_back("missing input " + f.string());
  }
  require_valid(missing, command);
}

std::optional<MultiEchoImage> load_truth_if_present(const RunConfig& c) {
  if (!fs::exists(c.out / "truth.json")) return std::nullopt;
  return io::load_mef(c.out / kTruth);
}

std::string format_snr(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

RunConfig config_from_json(const json& j, const RunConfig& base) {
  RunConfig c = base;
  std::vector<std::string> bad;
  if (!j.is_object()) {
    require_valid({"config must be a JSON object"}, "config");
  }
  unknown_keys(j, {"method", "out", "seed", "sequential", "phantom", "truth", "mask", "noise_sigma",
                   "params", "sweep", "export"},
               "config", bad);
  if (j.contains("method")) {
    const auto& m = j.at("method");
    const auto parsed = m.is_string() ? parse_method(m.get<std::string>()) : std::nullopt;
    if (parsed) {
      c.method = *parsed;
    } else {
      bad.push_back("method must be one of " + method_names());
    }
  }
  std::string out = c.out.string();
  read_field(j, "out", out, "", bad);
  c.out = out;
  read_field(j, "seed", c.seed, "", bad);
  read_field(j, "sequential", c.sequential, "", bad);
  read_field(j, "noise_sigma", c.noise_sigma, "", bad);
  if (j.contains("truth")) {
    if (j.at("truth").is_string()) {
      c.truth_input = j.at("truth").get<std::string>();
    } else {
      bad.push_back("truth must be a path string");
    }
  }
  if (j.contains("phantom")) {
    const auto& p = j.at("phantom");
    if (!p.is_object()) {
      bad.push_back("phantom must be an object");
    } else {
      unknown_keys(p, {"height", "width", "echoes", "delta_te_ms", "supersample", "regions"}, "phantom", bad);
      try {
        c.phantom = io::phantom_from_json(p, c.phantom);
      } catch (const FormatError& e) {
        bad.push_back(e.what());
      }
    }
  }
  if (j.contains("mask")) {
    const auto& m = j.at("mask");
    if (!m.is_object()) {
      bad.push_back("mask must be an object");
    } else {
      unknown_keys(m, {"lines", "dense_fraction", "per_echo_distinct"}, "mask", bad);
      read_field(m, "lines", c.mask.lines, "mask.", bad);
      read_field(m, "dense_fraction", c.mask.dense_fraction, "mask.", bad);
      read_field(m, "per_echo_distinct", c.mask.per_echo_distinct, "mask.", bad);
    }
  }
  if (j.contains("params")) {
    if (j.at("params").is_object()) {
      // Checked against the parameter schema now, resolved per method later.
      io::params_from_json(j.at("params"), ReconParams{}, &bad);
      for (const auto& [k, v] : j.at("params").items()) c.params[k] = v;
    } else {
      bad.push_back("params must be an object");
    }
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    unknown_keys(s, {"mu", "lambda", "gamma"}, "sweep", bad);
    read_field(s, "mu", c.grids.mu, "sweep.", bad);
    read_field(s, "lambda", c.grids.lambda, "sweep.", bad);
    read_field(s, "gamma", c.grids.gamma, "sweep.", bad);
  }
  if (j.contains("export")) {
    const auto& e = j.at("export");
    unknown_keys(e, {"echoes"}, "export", bad);
    read_field(e, "echoes", c.export_echoes, "export.", bad);
  }
  // Report value problems together with the structural ones.
  for (auto& v : validate(c)) {
    if (std::find(bad.begin(), bad.end(), v) == bad.end()) bad.push_back(std::move(v));
  }
  require_valid(bad, "config");
  return c;
}

json config_to_json(const RunConfig& c) {
  json j = {{"method", method_name(c.method)},
            {"out", c.out.string()},
            {"seed", c.seed},
            {"sequential", c.sequential},
            {"phantom", io::phantom_to_json(c.phantom)},
            {"mask",
             {{"lines", c.mask.lines},
              {"dense_fraction", c.mask.dense_fraction},
              {"per_echo_distinct", c.mask.per_echo_distinct}}},
            {"noise_sigma", c.noise_sigma},
            {"params", io::params_to_json(resolved_params(c))},
            {"sweep", {{"mu", c.grids.mu}, {"lambda", c.grids.lambda}, {"gamma", c.grids.gamma}}},
            {"export", {{"echoes", c.export_echoes}}}};
  if (c.truth_input) j["truth"] = c.truth_input->string();
  return j;
}

ReconParams resolved_params(const RunConfig& c) {
  ReconParams p = io::params_from_json(c.params, default_params(c.method));
  if (!c.params.contains("seed")) p.seed = c.seed;
  return p;
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> out;
  if (c.out.empty()) out.push_back("out directory must be set");
  auto ph = mecho::validate(c.phantom);
  out.insert(out.end(), ph.begin(), ph.end());
  if (c.truth_input && !fs::exists(io::fs::path(c.truth_input->string() + ".json"))) {
    out.push_back("truth input " + c.truth_input->string() + ".json does not exist");
  }
  if (c.mask.lines < 1 || c.mask.lines > c.phantom.height) {
    out.push_back("mask.lines must be in [1, " + std::to_string(c.phantom.height) + "]");
  }
  if (!(c.mask.dense_fraction >= 0 && c.mask.dense_fraction <= 1)) {
    out.push_back("mask.dense_fraction must be in [0, 1]");
  }
  if (!(c.noise_sigma >= 0) || !std::isfinite(c.noise_sigma)) out.push_back("noise_sigma must be nonnegative");
  std::vector<std::string> pv;
  const ReconParams p = io::params_from_json(c.params, default_params(c.method), &pv);
  out.insert(out.end(), pv.begin(), pv.end());
  const Shape s{c.phantom.height, c.phantom.width, c.phantom.echoes};
  auto rv = mecho::validate(p, s);
  out.insert(out.end(), rv.begin(), rv.end());
  for (int e : c.export_echoes) {
    if (e < 1) out.push_back("export echoes are 1-based");
  }
  return out;
}

LcurveGrids default_grids(Method m) {
  switch (m) {
    case Method::ZeroFilled:
      return {};
    case Method::CsAnalysis:
      return {{}, {0.005, 0.01, 0.02, 0.04, 0.08}, {}};
    case Method::DlSparse:
      return {{0.003, 0.01, 0.03}, {0.02, 0.035, 0.07, 0.14, 0.28}, {}};
    case Method::DlRowSparse:
      return {{0.003, 0.01, 0.03}, {0.05, 0.1, 0.2, 0.4, 0.8}, {}};
    case Method::TlRowSparse:
      return {{0.003, 0.01, 0.03}, {0.025, 0.05, 0.1, 0.2, 0.4}, {1.0, 10.0, 100.0}};
  }
  return {};
}

std::vector<int> default_export_echoes(int echoes) {
  if (echoes >= 13) return {1, 5, 9, 13};
  std::vector<int> all(echoes);
  for (int e = 0; e < echoes; ++e) all[e] = e + 1;
  return all;
}

std::uint64_t mask_seed(const RunConfig& c) { return c.seed; }
std::uint64_t noise_seed(const RunConfig& c) { return c.seed + 1000; }

void cmd_phantom(const RunConfig& c) {
  setup(c, "phantom");
  const MultiEchoImage truth = c.truth_input ? io::load_mef(*c.truth_input) : generate_phantom(c.phantom);
  require_valid(mecho::validate(truth), "phantom");
  io::save_mef(c.out / kTruth, truth);
}

void cmd_mask(const RunConfig& c) {
  setup(c, "mask");
  Shape s{c.phantom.height, c.phantom.width, c.phantom.echoes};
  if (fs::exists(c.out / "truth.json")) s = io::load_mef(c.out / kTruth).shape();
  io::save_mask(c.out / kMask, generate_mask(s.height, s.width, c.mask.lines, s.echoes,
                                             c.mask.dense_fraction, c.mask.per_echo_distinct,
                                             mask_seed(c)));
}

void cmd_simulate(const RunConfig& c) {
  require_files({c.out / "truth.json", c.out / "truth.bin", c.out / kMask}, "simulate");
  setup(c, "simulate");
  const auto truth = io::load_mef(c.out / kTruth);
  const auto mask = io::load_mask(c.out / kMask);
  if (!(truth.shape() == mask.shape())) {
    throw InvalidArgument("simulate: mask shape " + to_string(mask.shape()) +
                          " does not match ground truth " + to_string(truth.shape()));
  }
  io::save_kspace(c.out / kKspace, simulate_acquisition(truth, mask, c.noise_sigma, noise_seed(c)));
}

io::RunRecord cmd_reconstruct(const RunConfig& c) {
  require_files({c.out / "kspace.json", c.out / "kspace.kbin"}, "reconstruct");
  require_valid(validate(c), "reconstruct");
  fs::create_directories(c.out);
  set_thread_count(c.sequential ? 1 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  const json config = config_to_json(c);
  io::write_json(c.out / ("config_reconstruct_" + std::string(method_name(c.method)) + ".json"), config);

  const KSpaceData y = io::load_kspace(c.out / kKspace);
  const ReconParams params = resolved_params(c);
  const auto t0 = std::chrono::steady_clock::now();
  const ReconOutput out = run_method(c.method, y, params);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::save_mef(recon_base(c, c.method), out.image);

  io::RunRecord r;
  r.method = std::string(method_name(c.method));
  // The record describes the run, not where it was stored, so records from
  // identical runs in different directories compare equal.
  r.config = config;
  r.config.erase("out");
  r.cost_history = out.cost_history;
  r.iterations = out.iterations;
  r.seed = c.seed;
  r.zero_row_fraction = out.zero_row_fraction;
  r.zero_entry_fraction = out.zero_entry_fraction;
  // Wall-clock time is the only non-reproducible field; sequential runs omit it.
  if (!c.sequential) r.wall_clock_seconds = seconds;
  if (const auto truth = load_truth_if_present(c)) {
    // Scored against what was written, so evaluate reproduces it exactly.
    const auto saved = io::quantize_f32(out.image);
    r.snr_db = snr_db(*truth, saved);
    r.snr_per_echo = snr_db_per_echo(*truth, saved);
  } else {
    r.snr_db = std::numeric_limits<double>::quiet_NaN();
  }
  io::write_json(record_path(c, c.method), io::run_record_to_json(r));
  return r;
}

std::string cmd_evaluate(const RunConfig& c) {
  require_files({c.out / "truth.json", c.out / kMask}, "evaluate");
  setup(c, "evaluate");
  const auto truth = io::load_mef(c.out / kTruth);
  const auto mask = io::load_mask(c.out / kMask);
  const std::string column = std::to_string(mask.lines(0).size()) + " lines";

  std::ostringstream table;
  char line[128];
  std::snprintf(line, sizeof line, "%-32s %10s\n", "Recovery Method", column.c_str());
  table << line;
  json rows = json::array();
  for (Method m : kAllMethods) {
    if (!fs::exists(recon_base(c, m).string() + ".json")) continue;
    const auto rec = io::load_mef(recon_base(c, m));
    const double snr = snr_db(truth, rec);
    std::snprintf(line, sizeof line, "%-32s %10s\n", std::string(method_label(m)).c_str(),
                  format_snr(snr).c_str());
    table << line;
    json per_echo = json::array();
    for (double v : snr_db_per_echo(truth, rec)) per_echo.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    rows.push_back({{"method", method_name(m)},
                    {"snr_db", std::isfinite(snr) ? json(snr) : json(nullptr)},
                    {"snr_per_echo_db", per_echo}});
  }
  const std::string text = table.str();
  std::FILE* f = std::fopen((c.out / "snr_table.txt").c_str(), "w");
  if (!f) throw IoError("cannot open " + (c.out / "snr_table.txt").string() + " for writing");
  std::fputs(text.c_str(), f);
  std::fclose(f);
  io::write_json(c.out / "snr_table.json", {{"lines", mask.lines(0).size()}, {"methods", rows}});
  return text;
}

void cmd_export(const RunConfig& c) {
  setup(c, "export");
  const auto truth = load_truth_if_present(c);
  const fs::path dir = c.out / "pgm";
  fs::create_directories(dir);

  auto echoes_for = [&](int count) {
    std::vector<int> list = c.export_echoes.empty() ? default_export_echoes(count) : c.export_echoes;
    std::erase_if(list, [&](int e) { return e > count; });
    return list;
  };
  auto stack_max = [](const MultiEchoImage& x) {
    const double m = *std::max_element(x.data().begin(), x.data().end());
    return m > 0 ? m : 1.0;
  };

  if (truth) {
    for (int e : echoes_for(truth->echoes())) {
      io::export_pgm(dir / ("truth_echo" + std::to_string(e) + ".pgm"), truth->plane(e - 1), stack_max(*truth));
    }
  }
  for (Method m : kAllMethods) {
    if (!fs::exists(recon_base(c, m).string() + ".json")) continue;
    const auto rec = io::load_mef(recon_base(c, m));
    const std::string name(method_name(m));
    const double norm = truth ? stack_max(*truth) : stack_max(rec);
    for (int e : echoes_for(rec.echoes())) {
      const std::string tag = name + "_echo" + std::to_string(e);
      io::export_pgm(dir / (tag + ".pgm"), rec.plane(e - 1), norm);
      if (truth) io::export_difference(dir / ("diff_" + tag + ".pgm"), truth->plane(e - 1), rec.plane(e - 1));
    }
  }
}

LcurveResult cmd_sweep(const RunConfig& c) {
  require_files({c.out / "kspace.json", c.out / "kspace.kbin"}, "sweep");
  setup(c, "sweep");
  const KSpaceData y = io::load_kspace(c.out / kKspace);
  const auto truth = load_truth_if_present(c);
  LcurveGrids grids = default_grids(c.method);
  if (!c.grids.mu.empty()) grids.mu = c.grids.mu;
  if (!c.grids.lambda.empty()) grids.lambda = c.grids.lambda;
  if (!c.grids.gamma.empty()) grids.gamma = c.grids.gamma;
  const LcurveResult res = lcurve_greedy(y, c.method, grids, resolved_params(c), truth ? &*truth : nullptr);

  json stages = json::array();
  for (const auto& st : res.stages) {
    json pts = json::array();
    for (const auto& p : st.points) {
      json pt = {{"value", p.value}, {"residual", p.residual}, {"penalty", p.penalty}};
      if (p.snr_db) pt["snr_db"] = std::isfinite(*p.snr_db) ? json(*p.snr_db) : json(nullptr);
      pts.push_back(pt);
    }
    stages.push_back({{"parameter", st.parameter}, {"points", pts}, {"selected", st.selected}});
  }
  const std::string name(method_name(c.method));
  io::write_json(c.out / ("sweep_" + name + ".json"),
                 {{"method", name}, {"params", io::params_to_json(res.params)}, {"stages", stages}});
  // Ready to pass back as the "params" section of a config.
  io::write_json(c.out / ("params_" + name + ".json"), io::params_to_json(res.params));
  return res;
}

std::string run_all(const RunConfig& c) {
  cmd_phantom(c);
  cmd_mask(c);
  cmd_simulate(c);
  for (Method m : kAllMethods) {
    RunConfig mc = c;
    mc.method = m;
    cmd_reconstruct(mc);
  }
  return cmd_evaluate(c);
}

}  // namespace mecho::pipeline
