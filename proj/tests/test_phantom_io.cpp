#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "mecho/io.hpp"
#include "mecho/operators.hpp"
#include "mecho/phantom.hpp"

using namespace mecho;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mecho_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("phantom values follow mono-exponential decay") {
  PhantomSpec spec;
  spec.height = spec.width = 8;
  spec.echoes = 3;
  spec.supersample = 1;
  spec.delta_te_ms = 10.0;
  spec.regions = {{{0.0, 0.0, 5.0, 5.0, 0.0}, 0.8, 50.0}};
  const auto img = generate_phantom(spec);
  for (int e = 0; e < 3; ++e) {
    CHECK(img.at(4, 4, e) == doctest::Approx(0.8 * std::exp(-(e + 1) * 10.0 / 50.0)).epsilon(1e-14));
  }

  SUBCASE("later regions overwrite earlier ones") {
    spec.regions.push_back({{0.0, 0.0, 0.3, 0.3, 0.0}, 0.2, 20.0});
    const auto two = generate_phantom(spec);
    CHECK(two.at(4, 4, 0) == doctest::Approx(0.2 * std::exp(-0.5)));
    CHECK(two.at(0, 0, 0) == doctest::Approx(0.8 * std::exp(-0.2)));
  }
  SUBCASE("disjoint regions do not depend on order") {
    spec.regions = {{{-0.5, 0.0, 0.3, 0.3, 0.0}, 1.0, 40.0}, {{0.5, 0.0, 0.3, 0.3, 30.0}, 0.5, 80.0}};
    spec.supersample = 4;
    const auto a = generate_phantom(spec);
    std::swap(spec.regions[0], spec.regions[1]);
    CHECK(generate_phantom(spec) == a);
  }
  SUBCASE("outside every region is zero") {
    spec.regions = {{{0.0, 0.0, 0.2, 0.2, 0.0}, 1.0, 40.0}};
    CHECK(generate_phantom(spec).at(0, 0, 2) == 0.0);
  }
  spec.supersample = 0;
  CHECK_FALSE(validate(spec).empty());
  CHECK_THROWS_AS(generate_phantom(spec), InvalidArgument);
}

TEST_CASE("default phantom") {
  const auto img = generate_phantom(default_phantom_spec());
  CHECK(img.shape() == Shape{64, 64, 8});
  CHECK(validate(img).empty());
  // Signal decays with echo time everywhere.
  for (int e = 1; e < 8; ++e) CHECK(img.at(32, 32, e) < img.at(32, 32, e - 1));
}

TEST_CASE("acquisition noise") {
  const auto truth = generate_phantom(default_phantom_spec(32, 32, 2));
  const auto mask = generate_mask(32, 32, 32, 2, 0.3, false, 0);
  const auto clean = simulate_acquisition(truth, mask, 0.0, 1);
  CHECK(clean.samples() == apply_forward(truth, mask).samples());
  const double sigma = 0.05;
  const auto noisy = simulate_acquisition(truth, mask, sigma, 1);
  double re = 0.0, im = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < clean.samples().size(); ++i) {
    const Complex d = noisy.samples()[i] - clean.samples()[i];
    re += d.real() * d.real();
    im += d.imag() * d.imag();
    mean += d.real();
  }
  const double n = static_cast<double>(clean.samples().size());
  CHECK(re / n == doctest::Approx(sigma * sigma).epsilon(0.05));
  CHECK(im / n == doctest::Approx(sigma * sigma).epsilon(0.05));
  CHECK(std::abs(mean / n) < 4 * sigma / std::sqrt(n));
  CHECK(simulate_acquisition(truth, mask, sigma, 1).samples() == noisy.samples());
  CHECK_THROWS_AS(simulate_acquisition(truth, mask, -1.0, 1), InvalidArgument);
}

TEST_CASE("SNR") {
  MultiEchoImage ref(2, 2, 2, {1, 1, 1, 1, 1, 1, 1, 1});
  CHECK(std::isinf(snr_db(ref, ref)));
  MultiEchoImage rec = ref;
  for (double& v : rec.data()) v = 1.1;
  CHECK(snr_db(ref, rec) == doctest::Approx(20.0));
  rec.at(0, 0, 1) = 1.0;
  const auto per = snr_db_per_echo(ref, rec);
  CHECK(per[0] == doctest::Approx(20.0));
  CHECK(per[1] > 20.0);
  CHECK_THROWS_AS(snr_db(MultiEchoImage(2, 2, 2), ref), InvalidArgument);
  CHECK_THROWS_AS(snr_db(ref, MultiEchoImage(2, 2, 1)), InvalidArgument);
}

TEST_CASE("MEF roundtrip") {
  const auto dir = scratch_dir("mef");
  const auto img = generate_phantom(default_phantom_spec(8, 6, 3));
  io::save_mef(dir / "x", img);
  CHECK(fs::file_size(dir / "x.bin") == 8 * 6 * 3 * 4);
  const auto back = io::load_mef(dir / "x");
  CHECK(back == io::quantize_f32(img));
  io::save_mef(dir / "y", back);
  CHECK(io::load_mef(dir / "y") == back);

  fs::resize_file(dir / "x.bin", 10);
  CHECK_THROWS_AS(io::load_mef(dir / "x"), FormatError);
  CHECK_THROWS_AS(io::load_mef(dir / "missing"), IoError);
}

TEST_CASE("mask and k-space files") {
  const auto dir = scratch_dir("kspace");
  const auto mask = generate_mask(16, 12, 5, 3, 1.0 / 3.0, true, 4);
  io::save_mask(dir / "m.json", mask);
  CHECK(io::load_mask(dir / "m.json") == mask);

  auto bad = io::mask_to_json(mask);
  bad["lines"][1].push_back(bad["lines"][1][0]);
  CHECK_THROWS_AS(io::mask_from_json(bad), FormatError);

  const auto truth = generate_phantom(default_phantom_spec(16, 12, 3));
  const auto y = simulate_acquisition(truth, mask, 0.01, 5);
  io::save_kspace(dir / "k", y);
  const auto back = io::load_kspace(dir / "k");
  CHECK(back.mask() == mask);
  for (std::size_t i = 0; i < y.samples().size(); ++i) {
    CHECK(back.samples()[i].real() == static_cast<float>(y.samples()[i].real()));
    CHECK(back.samples()[i].imag() == static_cast<float>(y.samples()[i].imag()));
  }
  fs::resize_file(dir / "k.kbin", 8);
  CHECK_THROWS_AS(io::load_kspace(dir / "k"), FormatError);
}

TEST_CASE("PGM export") {
  const auto dir = scratch_dir("pgm");
  RealPlane p(2, 3);
  p << 0.0, 0.5, 1.0, 2.0, -1.0, 0.25;
  io::export_pgm(dir / "a.pgm", p, 1.0);
  const auto img = io::read_pgm(dir / "a.pgm");
  CHECK(img.width == 3);
  CHECK(img.height == 2);
  CHECK(img.pixels == std::vector<std::uint8_t>{0, 128, 255, 255, 0, 64});
  CHECK_THROWS_AS(io::export_pgm(dir / "b.pgm", p, 0.0), InvalidArgument);

  RealPlane q = p;
  q(0, 2) = 0.0;
  io::export_difference(dir / "d.pgm", p, q);
  CHECK(io::read_pgm(dir / "d.pgm").pixels[2] == 128);
}

TEST_CASE("parameter JSON") {
  ReconParams p;
  p.mu = 0.3;
  p.lambda = 0.07;
  p.order = StepOrder::ImageDictCoefs;
  const auto back = io::params_from_json(io::params_to_json(p), ReconParams{});
  CHECK(io::params_to_json(back) == io::params_to_json(p));

  std::vector<std::string> v;
  io::params_from_json({{"mu", 1.0}, {"lamda", 0.1}, {"gamma", "x"}}, ReconParams{}, &v);
  REQUIRE(v.size() == 2);
  CHECK(std::any_of(v.begin(), v.end(), [](const std::string& m) { return m.find("'lamda'") != std::string::npos; }));
  CHECK(std::any_of(v.begin(), v.end(), [](const std::string& m) { return m.find("gamma") != std::string::npos; }));
  CHECK_THROWS_AS(io::params_from_json({{"nope", 1}}, ReconParams{}), InvalidArgument);
}

TEST_CASE("phantom JSON") {
  auto spec = default_phantom_spec(32, 16, 4);
  spec.supersample = 2;
  const auto back = io::phantom_from_json(io::phantom_to_json(spec), PhantomSpec{});
  CHECK(generate_phantom(back) == generate_phantom(spec));
}

TEST_CASE("run record JSON") {
  io::RunRecord r;
  r.method = "dl_rowsparse";
  r.config = {{"mu", 0.01}};
  r.snr_db = std::numeric_limits<double>::infinity();
  r.snr_per_echo = {20.0, std::numeric_limits<double>::infinity()};
  r.cost_history = {3.0, 2.0};
  r.iterations = 2;
  r.seed = 9;
  const auto j = io::run_record_to_json(r);
  CHECK(j.at("snr_db").is_null());
  CHECK(j.at("snr_is_infinite") == true);
  CHECK_FALSE(j.contains("wall_clock_seconds"));
  const auto back = io::run_record_from_json(j);
  CHECK(std::isinf(back.snr_db));
  CHECK(std::isinf(back.snr_per_echo[1]));
  CHECK(back.cost_history == r.cost_history);
  CHECK(back.seed == 9);

  const auto dir = scratch_dir("record");
  io::write_json(dir / "r.json", j);
  CHECK(io::read_json(dir / "r.json") == j);
}

TEST_CASE("SNR invariants") {
  const auto ref = generate_phantom(default_phantom_spec(16, 16, 2));
  MultiEchoImage dir(16, 16, 2);
  std::mt19937_64 rng(8);
  for (double& v : dir.data()) v = std::normal_distribution<double>()(rng);
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {1e-3, 1e-2, 0.1, 1.0}) {
    MultiEchoImage rec = ref;
    for (std::size_t i = 0; i < rec.data().size(); ++i) rec.data()[i] += alpha * dir.data()[i];
    const double s = snr_db(ref, rec);
    CHECK(s < prev);
    prev = s;

    MultiEchoImage sref = ref, srec = rec;
    for (double& v : sref.data()) v *= -3.5;
    for (double& v : srec.data()) v *= -3.5;
    CHECK(snr_db(sref, srec) == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("PGM edge cases") {
  const auto dir = scratch_dir("pgm_edges");
  const RealPlane c = RealPlane::Constant(3, 4, 0.8);
  io::export_pgm(dir / "c.pgm", c, 0.8);
  for (auto p : io::read_pgm(dir / "c.pgm").pixels) CHECK(p == 255);
  io::export_difference(dir / "z.pgm", c, c);
  for (auto p : io::read_pgm(dir / "z.pgm").pixels) CHECK(p == 0);
}
