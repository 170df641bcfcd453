#include "mecho/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace mecho::io {

using nlohmann::json;

namespace {

fs::path with_ext(const fs::path& base, const char* ext) {
  fs::path p = base;
  if (p.extension() == ".json" || p.extension() == ".bin" || p.extension() == ".kbin") {
    p.replace_extension();
  }
  p += ext;
  return p;
}

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

void write_f32(std::vector<char>& buf, double v) {
  const auto bits = to_le(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  char raw[4];
  std::memcpy(raw, &bits, 4);
  buf.insert(buf.end(), raw, raw + 4);
}

float read_f32(const char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  return std::bit_cast<float>(to_le(bits));
}

void write_bytes(const fs::path& path, const std::vector<char>& buf) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

std::vector<char> read_bytes(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

template <typename T>
T field(const json& j, const char* key, const fs::path& where) {
  if (!j.contains(key)) throw FormatError(where.string() + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(where.string() + ": bad field '" + key + "': " + e.what());
  }
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_mef(const fs::path& base, const MultiEchoImage& image) {
  const json header = {{"mef_version", 1},
                       {"height", image.height()},
                       {"width", image.width()},
                       {"echoes", image.echoes()},
                       {"dtype", "f32"},
                       {"endian", "little"},
                       {"layout", "echo-major, then row-major"}};
  std::vector<char> buf;
  buf.reserve(image.data().size() * 4);
  for (double v : image.data()) write_f32(buf, v);
  write_json(with_ext(base, ".json"), header);
  write_bytes(with_ext(base, ".bin"), buf);
}

MultiEchoImage load_mef(const fs::path& base) {
  const fs::path hp = with_ext(base, ".json");
  const json h = read_json(hp);
  if (field<int>(h, "mef_version", hp) != 1) throw FormatError(hp.string() + ": unsupported mef_version");
  if (field<std::string>(h, "dtype", hp) != "f32") throw FormatError(hp.string() + ": dtype must be f32");
  if (field<std::string>(h, "endian", hp) != "little") {
    throw FormatError(hp.string() + ": endian must be little");
  }
  const int height = field<int>(h, "height", hp);
  const int width = field<int>(h, "width", hp);
  const int echoes = field<int>(h, "echoes", hp);
  if (height <= 0 || width <= 0 || echoes <= 0) throw FormatError(hp.string() + ": bad dimensions");
  const fs::path bp = with_ext(base, ".bin");
  const auto bytes = read_bytes(bp);
  const std::size_t n = static_cast<std::size_t>(height) * width * echoes;
  if (bytes.size() != n * 4) {
    throw FormatError(bp.string() + ": expected " + std::to_string(n * 4) + " bytes, found " +
                      std::to_string(bytes.size()));
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = read_f32(bytes.data() + 4 * i);
  return MultiEchoImage(height, width, echoes, std::move(data));
}

MultiEchoImage quantize_f32(const MultiEchoImage& image) {
  MultiEchoImage out = image;
  for (double& v : out.data()) v = static_cast<float>(v);
  return out;
}

json mask_to_json(const SamplingMask& mask) {
  return {{"height", mask.height()},
          {"width", mask.width()},
          {"echoes", mask.echoes()},
          {"lines", mask.all_lines()}};
}

SamplingMask mask_from_json(const json& j) {
  const fs::path where = "mask";
  SamplingMask m(field<int>(j, "height", where), field<int>(j, "width", where),
                 field<std::vector<std::vector<int>>>(j, "lines", where));
  if (field<int>(j, "echoes", where) != m.echoes()) {
    throw FormatError("mask: 'echoes' does not match the number of line lists");
  }
  const auto violations = validate(m);
  if (!violations.empty()) throw FormatError("mask: " + violations.front());
  return m;
}

void save_mask(const fs::path& path, const SamplingMask& mask) { write_json(path, mask_to_json(mask)); }

SamplingMask load_mask(const fs::path& path) {
  try {
    return mask_from_json(read_json(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_kspace(const fs::path& base, const KSpaceData& kspace) {
  std::vector<char> buf;
  buf.reserve(kspace.samples().size() * 8);
  for (const Complex& c : kspace.samples()) {
    write_f32(buf, c.real());
    write_f32(buf, c.imag());
  }
  save_mask(with_ext(base, ".json"), kspace.mask());
  write_bytes(with_ext(base, ".kbin"), buf);
}

KSpaceData load_kspace(const fs::path& base) {
  SamplingMask mask = load_mask(with_ext(base, ".json"));
  const fs::path bp = with_ext(base, ".kbin");
  const auto bytes = read_bytes(bp);
  const std::size_t n = mask.sample_count();
  if (bytes.size() != n * 8) {
    throw FormatError(bp.string() + ": expected " + std::to_string(n * 8) + " bytes, found " +
                      std::to_string(bytes.size()));
  }
  std::vector<Complex> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = {read_f32(bytes.data() + 8 * i), read_f32(bytes.data() + 8 * i + 4)};
  }
  return KSpaceData(std::move(mask), std::move(samples));
}

void export_pgm(const fs::path& path, const RealPlane& plane, double normalization_max) {
  if (!(normalization_max > 0)) throw InvalidArgument("export_pgm: normalization max must be positive");
  const std::string header = "P5\n" + std::to_string(plane.cols()) + " " +
                             std::to_string(plane.rows()) + "\n255\n";
  std::vector<char> buf(header.begin(), header.end());
  for (Eigen::Index r = 0; r < plane.rows(); ++r) {
    for (Eigen::Index c = 0; c < plane.cols(); ++c) {
      const double v = std::round(255.0 * plane(r, c) / normalization_max);
      buf.push_back(static_cast<char>(static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0))));
    }
  }
  write_bytes(path, buf);
}

void export_difference(const fs::path& path, const RealPlane& reference,
                       const RealPlane& reconstruction) {
  if (reference.rows() != reconstruction.rows() || reference.cols() != reconstruction.cols()) {
    throw InvalidArgument("export_difference: shape mismatch");
  }
  const double peak = reference.maxCoeff();
  if (!(peak > 0)) throw InvalidArgument("export_difference: reference maximum must be positive");
  export_pgm(path, (reference - reconstruction).cwiseAbs(), peak);
}

PgmImage read_pgm(const fs::path& path) {
  const auto bytes = read_bytes(path);
  std::size_t pos = 0;
  auto token = [&] {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    std::string t;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      t += bytes[pos++];
    }
    return t;
  };
  if (token() != "P5") throw FormatError(path.string() + ": not a binary PGM");
  PgmImage img;
  try {
    img.width = std::stoi(token());
    img.height = std::stoi(token());
    if (std::stoi(token()) != 255) throw FormatError(path.string() + ": maxval must be 255");
  } catch (const std::logic_error&) {
    throw FormatError(path.string() + ": malformed PGM header");
  }
  ++pos;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  if (bytes.size() - pos != n) throw FormatError(path.string() + ": pixel count mismatch");
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return img;
}

json params_to_json(const ReconParams& p) {
  return {{"mu", p.mu},
          {"lambda", p.lambda},
          {"gamma", p.gamma},
          {"patch_size", p.patch_size},
          {"patch_stride", p.patch_stride},
          {"max_outer_iters", p.max_outer_iters},
          {"rel_cost_tol", p.rel_cost_tol},
          {"cg_tol", p.cg_tol},
          {"cg_max_iters", p.cg_max_iters},
          {"inner_iters", p.inner_iters},
          {"wavelet_levels", p.wavelet_levels},
          {"cs_max_iters", p.cs_max_iters},
          {"cs_rel_tol", p.cs_rel_tol},
          {"order", p.order == StepOrder::CoefsDictImage ? "coefs_dict_image" : "image_dict_coefs"},
          {"seed", p.seed}};
}

ReconParams params_from_json(const json& j, const ReconParams& base,
                             std::vector<std::string>* violations) {
  ReconParams p = base;
  std::vector<std::string> local;
  auto& bad = violations ? *violations : local;
  if (!j.is_object()) {
    bad.push_back("params must be a JSON object");
    if (!violations) require_valid(local, "params");
    return p;
  }
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "mu") p.mu = value.get<double>();
      else if (key == "lambda") p.lambda = value.get<double>();
      else if (key == "gamma") p.gamma = value.get<double>();
      else if (key == "patch_size") p.patch_size = value.get<int>();
      else if (key == "patch_stride") p.patch_stride = value.get<int>();
      else if (key == "max_outer_iters") p.max_outer_iters = value.get<int>();
      else if (key == "rel_cost_tol") p.rel_cost_tol = value.get<double>();
      else if (key == "cg_tol") p.cg_tol = value.get<double>();
      else if (key == "cg_max_iters") p.cg_max_iters = value.get<int>();
      else if (key == "inner_iters") p.inner_iters = value.get<int>();
      else if (key == "wavelet_levels") p.wavelet_levels = value.get<int>();
      else if (key == "cs_max_iters") p.cs_max_iters = value.get<int>();
      else if (key == "cs_rel_tol") p.cs_rel_tol = value.get<double>();
      else if (key == "seed") p.seed = value.get<std::uint64_t>();
      else if (key == "order") {
        const auto s = value.get<std::string>();
        if (s == "coefs_dict_image") p.order = StepOrder::CoefsDictImage;
        else if (s == "image_dict_coefs") p.order = StepOrder::ImageDictCoefs;
        else bad.push_back("params.order must be coefs_dict_image or image_dict_coefs");
      } else {
        bad.push_back("unknown params key '" + key + "'");
      }
    } catch (const json::exception&) {
      bad.push_back("params." + key + " has the wrong type");
    }
  }
  if (!violations) require_valid(local, "params");
  return p;
}

json phantom_to_json(const PhantomSpec& spec) {
  json regions = json::array();
  for (const auto& r : spec.regions) {
    regions.push_back({{"center", {r.ellipse.center_x, r.ellipse.center_y}},
                       {"axes", {r.ellipse.axis_x, r.ellipse.axis_y}},
                       {"angle_deg", r.ellipse.angle_deg},
                       {"proton_density", r.proton_density},
                       {"t2_ms", r.t2_ms}});
  }
  return {{"height", spec.height},
          {"width", spec.width},
          {"echoes", spec.echoes},
          {"delta_te_ms", spec.delta_te_ms},
          {"supersample", spec.supersample},
          {"regions", regions}};
}

PhantomSpec phantom_from_json(const json& j, const PhantomSpec& base) {
  PhantomSpec s = base;
  try {
    s.height = j.value("height", s.height);
    s.width = j.value("width", s.width);
    s.echoes = j.value("echoes", s.echoes);
    s.delta_te_ms = j.value("delta_te_ms", s.delta_te_ms);
    s.supersample = j.value("supersample", s.supersample);
    if (j.contains("regions")) {
      s.regions.clear();
      for (const auto& r : j.at("regions")) {
        PhantomRegion pr;
        const auto c = r.at("center").get<std::vector<double>>();
        const auto a = r.at("axes").get<std::vector<double>>();
        if (c.size() != 2 || a.size() != 2) throw FormatError("phantom region center/axes need 2 values");
        pr.ellipse = {c[0], c[1], a[0], a[1], r.value("angle_deg", 0.0)};
        pr.proton_density = r.at("proton_density").get<double>();
        pr.t2_ms = r.at("t2_ms").get<double>();
        s.regions.push_back(pr);
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("phantom spec: ") + e.what());
  }
  return s;
}

json run_record_to_json(const RunRecord& r) {
  json per_echo = json::array();
  for (double v : r.snr_per_echo) per_echo.push_back(finite_or_null(v));
  json j = {{"method", r.method},
            {"config", r.config},
            {"snr_db", finite_or_null(r.snr_db)},
            {"snr_is_infinite", std::isinf(r.snr_db) && r.snr_db > 0},
            {"snr_per_echo_db", per_echo},
            {"cost_history", r.cost_history},
            {"iterations", r.iterations},
            {"seed", r.seed},
            {"zero_row_fraction", r.zero_row_fraction},
            {"zero_entry_fraction", r.zero_entry_fraction}};
  if (r.wall_clock_seconds) j["wall_clock_seconds"] = *r.wall_clock_seconds;
  return j;
}

RunRecord run_record_from_json(const json& j) {
  const fs::path where = "run record";
  RunRecord r;
  r.method = field<std::string>(j, "method", where);
  r.config = j.value("config", json::object());
  const bool inf = j.value("snr_is_infinite", false);
  // null means "exact" when flagged infinite, otherwise "no reference".
  const double missing = inf ? std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::quiet_NaN();
  if (!j.contains("snr_db")) throw FormatError("run record: missing field 'snr_db'");
  r.snr_db = j.at("snr_db").is_null() ? missing : field<double>(j, "snr_db", where);
  for (const auto& v : j.value("snr_per_echo_db", json::array())) {
    r.snr_per_echo.push_back(v.is_null() ? missing : v.get<double>());
  }
  r.cost_history = j.value("cost_history", std::vector<double>{});
  r.iterations = j.value("iterations", 0);
  r.seed = j.value("seed", std::uint64_t{0});
  r.zero_row_fraction = j.value("zero_row_fraction", 0.0);
  r.zero_entry_fraction = j.value("zero_entry_fraction", 0.0);
  if (j.contains("wall_clock_seconds")) r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  return r;
}

}  // namespace mecho::io
