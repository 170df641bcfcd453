#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mecho/io.hpp"
#include "mecho/lcurve.hpp"
#include "mecho/methods.hpp"
#include "mecho/phantom.hpp"

// File-based experiment pipeline behind the command-line tool. Every stage
// reads and writes fixed file names inside one output directory:
//
//   truth.{json,bin}           ground truth (MEF)
//   mask.json                  sampling mask
//   kspace.{json,kbin}         simulated acquisition
//   recon_<method>.{json,bin}  reconstruction (MEF)
//   record_<method>.json       run record
//   sweep_<method>.json        L-curve stages and chosen parameters
//   snr_table.{txt,json}       evaluation
//   pgm/                       exported images
//   config_<command>.json      resolved configuration of each command
namespace mecho::pipeline {

namespace fs = std::filesystem;

struct MaskConfig {
  int lines = 16;
  double dense_fraction = 1.0 / 3.0;
  bool per_echo_distinct = false;
};

struct RunConfig {
  Method method = Method::DlRowSparse;
  fs::path out = "mecho_out";
  std::uint64_t seed = 7;
  bool sequential = false;
  PhantomSpec phantom = default_phantom_spec();
  /// MEF base path used as ground truth instead of the phantom.
  std::optional<fs::path> truth_input;
  MaskConfig mask;
  double noise_sigma = 0.01;
  /// Overrides on top of default_params(method); resolved lazily so that the
  /// method can be changed after loading.
  nlohmann::json params = nlohmann::json::object();
  /// Empty grids fall back to default_grids(method).
  LcurveGrids grids;
  /// 1-based echo numbers; empty selects the default set.
  std::vector<int> export_echoes;
};

/// Parses a configuration object. Every problem is collected before throwing
/// InvalidArgument, including unknown keys at any level.
RunConfig config_from_json(const nlohmann::json& j, const RunConfig& base = RunConfig{});
nlohmann::json config_to_json(const RunConfig& c);

/// Structural checks plus existence of referenced input files.
std::vector<std::string> validate(const RunConfig& c);

ReconParams resolved_params(const RunConfig& c);
LcurveGrids default_grids(Method m);
/// Echoes 1, 5, 9, 13 when the stack has all of them, otherwise every echo.
std::vector<int> default_export_echoes(int echoes);

/// Seeds derived from the run seed so the stages use independent streams.
std::uint64_t mask_seed(const RunConfig& c);
std::uint64_t noise_seed(const RunConfig& c);

void cmd_phantom(const RunConfig& c);
void cmd_mask(const RunConfig& c);
void cmd_simulate(const RunConfig& c);
io::RunRecord cmd_reconstruct(const RunConfig& c);
/// Returns the rendered table; also written to snr_table.txt.
std::string cmd_evaluate(const RunConfig& c);
void cmd_export(const RunConfig& c);
LcurveResult cmd_sweep(const RunConfig& c);

/// phantom, mask, simulate, then reconstruct every method, then evaluate.
std::string run_all(const RunConfig& c);

}  // namespace mecho::pipeline
