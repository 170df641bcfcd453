#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mecho/core.hpp"
#include "mecho/methods.hpp"
#include "mecho/phantom.hpp"

namespace mecho::io {

namespace fs = std::filesystem;

/// MEF image: `<base>.json` header plus `<base>.bin` with H*W*C little-endian
/// f32 values, echo-major then row-major. Values are stored in single
/// precision, so a roundtrip is exact for f32-representable data.
void save_mef(const fs::path& base, const MultiEchoImage& image);
MultiEchoImage load_mef(const fs::path& base);

/// Rounds every value to the nearest f32, i.e. what save/load produces.
MultiEchoImage quantize_f32(const MultiEchoImage& image);

nlohmann::json mask_to_json(const SamplingMask& mask);
SamplingMask mask_from_json(const nlohmann::json& j);
void save_mask(const fs::path& path, const SamplingMask& mask);
SamplingMask load_mask(const fs::path& path);

/// K-space: mask JSON at `<base>.json` and interleaved (re, im) f32 pairs at
/// `<base>.kbin`, echo-major, then ascending line, then ascending column.
void save_kspace(const fs::path& base, const KSpaceData& kspace);
KSpaceData load_kspace(const fs::path& base);

/// Binary P5 PGM, value = round(255 * v / normalization_max) clamped to [0, 255].
void export_pgm(const fs::path& path, const RealPlane& plane, double normalization_max);
/// |ref - rec| normalized by the reference maximum.
void export_difference(const fs::path& path, const RealPlane& reference,
                       const RealPlane& reconstruction);

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};
PgmImage read_pgm(const fs::path& path);

nlohmann::json params_to_json(const ReconParams& p);
/// Overlays the keys present in `j` onto `base`; unknown keys are violations.
ReconParams params_from_json(const nlohmann::json& j, const ReconParams& base,
                             std::vector<std::string>* violations = nullptr);

nlohmann::json phantom_to_json(const PhantomSpec& spec);
PhantomSpec phantom_from_json(const nlohmann::json& j, const PhantomSpec& base);

struct RunRecord {
  std::string method;
  nlohmann::json config;
  double snr_db = 0.0;  ///< +infinity when exact, NaN when no reference was available
  std::vector<double> snr_per_echo;
  std::vector<double> cost_history;
  int iterations = 0;
  std::optional<double> wall_clock_seconds;
  std::uint64_t seed = 0;
  double zero_row_fraction = 0.0;
  double zero_entry_fraction = 0.0;
};

nlohmann::json run_record_to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

/// Pretty-printed JSON with a trailing newline.
void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

}  // namespace mecho::io
