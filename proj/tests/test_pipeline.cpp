#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "mecho/io.hpp"
#include "mecho/pipeline.hpp"

using namespace mecho;
namespace fs = std::filesystem;

namespace {

pipeline::RunConfig small_config(const std::string& name) {
  const fs::path out = fs::temp_directory_path() / ("mecho_pipeline_" + name);
  fs::remove_all(out);
  nlohmann::json j = {{"out", out.string()},
                      {"sequential", true},
                      {"phantom", {{"height", 16}, {"width", 16}, {"echoes", 3}}},
                      {"mask", {{"lines", 6}, {"per_echo_distinct", true}}},
                      {"params", {{"patch_size", 4}, {"patch_stride", 2}, {"max_outer_iters", 3}}}};
  return pipeline::config_from_json(j);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("full pipeline writes one record per method") {
  const auto c = small_config("all");
  const std::string table = pipeline::run_all(c);
  CHECK(table.find("Row-sparse TL") != std::string::npos);
  CHECK(table.find("6 lines") != std::string::npos);
  for (Method m : kAllMethods) {
    const auto r = io::run_record_from_json(io::read_json(c.out / ("record_" + std::string(method_name(m)) + ".json")));
    CHECK(r.method == method_name(m));
    CHECK_FALSE(io::read_json(c.out / ("record_" + std::string(method_name(m)) + ".json")).contains("wall_clock_seconds"));
    // evaluate recomputes from the saved files
    const double again = snr_db(io::load_mef(c.out / "truth"), io::load_mef(c.out / ("recon_" + std::string(method_name(m)))));
    CHECK(std::abs(again - r.snr_db) <= 1e-10);
    CHECK_FALSE(r.config.contains("out"));
  }
  CHECK(fs::exists(c.out / "config_simulate.json"));

  SUBCASE("re-simulating with the same seed is byte-identical") {
    const std::string before = slurp(c.out / "kspace.kbin");
    pipeline::cmd_simulate(c);
    CHECK(slurp(c.out / "kspace.kbin") == before);
  }
  SUBCASE("export writes images for every echo of a short stack") {
    pipeline::cmd_export(c);
    CHECK(fs::exists(c.out / "pgm" / "truth_echo3.pgm"));
    CHECK(fs::exists(c.out / "pgm" / "diff_dl_rowsparse_echo1.pgm"));
  }
  SUBCASE("sweep writes chosen parameters") {
    auto sc = c;
    sc.method = Method::CsAnalysis;
    const auto res = pipeline::cmd_sweep(sc);
    REQUIRE(res.stages.size() == 1);
    const auto chosen = io::params_from_json(io::read_json(c.out / "params_cs_analysis.json"), ReconParams{});
    CHECK(chosen.lambda == res.params.lambda);
  }
}

TEST_CASE("config errors") {
  CHECK_THROWS_WITH_AS(pipeline::config_from_json({{"method", "bogus"}}),
                       doctest::Contains("tl_rowsparse"), InvalidArgument);
  try {
    pipeline::config_from_json({{"mask", {{"lines", 0}}}, {"noise_sigma", -1.0}, {"colour", 1}});
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("mask.lines") != std::string::npos);
    CHECK(msg.find("noise_sigma") != std::string::npos);
    CHECK(msg.find("colour") != std::string::npos);
  }
  auto c = small_config("missing");
  CHECK_THROWS_WITH_AS(pipeline::cmd_reconstruct(c), doctest::Contains("missing input"), InvalidArgument);
}

TEST_CASE("default export echoes") {
  CHECK(pipeline::default_export_echoes(16) == std::vector<int>{1, 5, 9, 13});
  CHECK(pipeline::default_export_echoes(3) == std::vector<int>{1, 2, 3});
}
