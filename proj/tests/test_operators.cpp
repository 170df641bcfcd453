#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "mecho/operators.hpp"
#include "oracles.hpp"

using namespace mecho;

namespace {

MultiEchoImage random_image(int h, int w, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  MultiEchoImage x(h, w, c);
  for (double& v : x.data()) v = g(rng);
  return x;
}

KSpaceData random_kspace(const SamplingMask& mask, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Complex> s(mask.sample_count());
  for (auto& v : s) v = {g(rng), g(rng)};
  return KSpaceData(mask, std::move(s));
}

double real_inner(const KSpaceData& a, const KSpaceData& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.samples().size(); ++i) {
    acc += (a.samples()[i] * std::conj(b.samples()[i])).real();
  }
  return acc;
}

double inner(const MultiEchoImage& a, const MultiEchoImage& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) acc += a.data()[i] * b.data()[i];
  return acc;
}

}  // namespace

TEST_CASE("unitary FFT matches the direct DFT on 8x8") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexPlane x(8, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = {g(rng), g(rng)};
  const ComplexPlane f = fft2_unitary(x);
  CHECK((f - oracle::naive_dft2(x, -1)).norm() / f.norm() <= 1e-12);
  const ComplexPlane b = ifft2_unitary(x);
  CHECK((b - oracle::naive_dft2(x, +1)).norm() / b.norm() <= 1e-12);

  ComplexPlane odd(5, 6);
  for (Eigen::Index i = 0; i < odd.size(); ++i) odd.data()[i] = {g(rng), g(rng)};
  CHECK((fft2_unitary(odd) - oracle::naive_dft2(odd, -1)).norm() / odd.norm() <= 1e-12);
}

TEST_CASE("FFT of a unit impulse is flat and Parseval holds") {
  ComplexPlane delta = ComplexPlane::Zero(4, 4);
  delta(0, 0) = 1.0;
  const ComplexPlane f = fft2_unitary(delta);
  for (Eigen::Index i = 0; i < f.size(); ++i) CHECK(std::abs(f.data()[i] - Complex(0.25)) < 1e-15);

  std::mt19937_64 rng(2);
  const RealPlane x = oracle::random_matrix(64, 64, rng);
  CHECK(std::abs(fft2_unitary(x).squaredNorm() - x.squaredNorm()) / x.squaredNorm() <= 1e-12);
  CHECK((ifft2_unitary(fft2_unitary(x)).real() - x).norm() <= 1e-12 * x.norm());
}

TEST_CASE("FFT rejects non-finite input") {
  ComplexPlane x = ComplexPlane::Zero(4, 4);
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fft2_unitary(x), InvalidArgument);
}

TEST_CASE("shifted and unshifted row indices invert each other") {
  for (int h : {7, 8, 64}) {
    for (int r = 0; r < h; ++r) CHECK(unshift_row(shift_row(r, h), h) == r);
  }
  CHECK(unshift_row(32, 64) == 0);
  CHECK(unshift_row(31, 64) == 63);
}

TEST_CASE("mask generation") {
  SUBCASE("full sampling") {
    const auto m = generate_mask(64, 64, 64, 2, 1.0 / 3.0, true, 5);
    for (int e = 0; e < 2; ++e) CHECK(m.lines(e).size() == 64);
  }
  SUBCASE("33 lines: 11 contiguous center rows and 22 random rows") {
    const auto m = generate_mask(64, 64, 33, 1, 1.0 / 3.0, false, 9);
    const auto& l = m.lines(0);
    CHECK(l.size() == 33);
    CHECK(std::set<int>(l.begin(), l.end()).size() == 33);
    std::set<int> shifted;
    for (int r : l) shifted.insert(shift_row(r, 64));
    for (int s = 32 - 5; s < 32 - 5 + 11; ++s) CHECK(shifted.count(s) == 1);
    CHECK(validate(m).empty());
  }
  SUBCASE("shared versus per-echo draws") {
    const auto shared = generate_mask(64, 64, 16, 4, 1.0 / 3.0, false, 3);
    for (int e = 1; e < 4; ++e) CHECK(shared.lines(e) == shared.lines(0));
    const auto distinct = generate_mask(64, 64, 16, 4, 1.0 / 3.0, true, 3);
    bool differs = false;
    for (int e = 1; e < 4; ++e) differs |= distinct.lines(e) != distinct.lines(0);
    CHECK(differs);
  }
  SUBCASE("deterministic given the seed") {
    CHECK(generate_mask(64, 64, 20, 3, 0.25, true, 11) == generate_mask(64, 64, 20, 3, 0.25, true, 11));
    CHECK_FALSE(generate_mask(64, 64, 20, 3, 0.25, true, 11) ==
                generate_mask(64, 64, 20, 3, 0.25, true, 12));
  }
  CHECK_THROWS_AS(generate_mask(64, 64, 65, 1, 0.3, false, 0), InvalidArgument);
  CHECK_THROWS_AS(generate_mask(64, 64, 0, 1, 0.3, false, 0), InvalidArgument);
}

TEST_CASE("forward model") {
  std::mt19937_64 rng(4);
  const auto x = random_image(16, 16, 2, rng);
  SUBCASE("full mask gives the full FFT") {
    const auto full = generate_mask(16, 16, 16, 2, 0.0, false, 0);
    const auto y = apply_forward(x, full);
    for (int e = 0; e < 2; ++e) {
      const ComplexPlane f = fft2_unitary(RealPlane(x.plane(e)));
      const auto s = y.echo_samples(e);
      for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) CHECK(std::abs(s[r * 16 + c] - f(r, c)) < 1e-12);
      }
    }
    const auto back = apply_adjoint(y);
    for (std::size_t i = 0; i < x.data().size(); ++i) CHECK(back.data()[i] == doctest::Approx(x.data()[i]).epsilon(1e-12));
  }
  SUBCASE("restriction never increases energy") {
    const auto half = generate_mask(16, 16, 8, 2, 1.0 / 3.0, true, 1);
    const auto y = apply_forward(x, half);
    double ey = 0.0;
    for (const auto& v : y.samples()) ey += std::norm(v);
    CHECK(ey <= inner(x, x));
  }
}

TEST_CASE("forward and adjoint satisfy <Ax, y> = <x, A^T y>") {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto mask = generate_mask(16, 12, 6, 3, 1.0 / 3.0, true, trial);
    const auto x = random_image(16, 12, 3, rng);
    const auto y = random_kspace(mask, rng);
    const double lhs = real_inner(apply_forward(x, mask), y);
    const double rhs = inner(x, apply_adjoint(y));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("normal operator equals adjoint of forward") {
  std::mt19937_64 rng(6);
  const auto mask = generate_mask(16, 16, 7, 2, 1.0 / 3.0, true, 2);
  const ForwardModel model(mask);
  const auto x = random_image(16, 16, 2, rng);
  const auto ata = model.adjoint(model.forward(x));
  std::vector<double> out(256);
  for (int e = 0; e < 2; ++e) {
    model.normal(e, x.echo(e), out);
    for (int i = 0; i < 256; ++i) CHECK(out[i] == doctest::Approx(ata.echo(e)[i]).epsilon(1e-12));
  }
}

TEST_CASE("patch scheme anchors") {
  CHECK(make_patch_scheme(64, 64, 8, 8).count() == 64);
  CHECK(make_patch_scheme(64, 64, 8, 4).count() == 225);
  const auto s = make_patch_scheme(10, 14, 4, 3);
  // Rows 0, 3, 6 reach the bottom edge; columns need a flush anchor at 10.
  std::set<int> rows, cols;
  for (auto [r, c] : s.anchors) {
    rows.insert(r);
    cols.insert(c);
  }
  CHECK(rows == std::set<int>{0, 3, 6});
  CHECK(cols == std::set<int>{0, 3, 6, 9, 10});
  CHECK_THROWS_AS(make_patch_scheme(8, 8, 9, 1), InvalidArgument);
  CHECK_THROWS_AS(make_patch_scheme(8, 8, 4, 0), InvalidArgument);
}

TEST_CASE("patch extraction and assembly are exact transposes") {
  std::mt19937_64 rng(7);
  for (auto [stride, h, w] : {std::tuple{4, 64, 64}, std::tuple{3, 21, 17}, std::tuple{8, 16, 24}}) {
    const auto scheme = make_patch_scheme(h, w, 8, stride);
    const auto x = random_image(h, w, 3, rng);
    auto p = extract_patches(x, scheme);
    std::vector<PatchMatrix> q(p.size());
    double lhs = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      q[i] = {p[i].location, oracle::random_matrix(64, 3, rng)};
      lhs += (p[i].values.array() * q[i].values.array()).sum();
    }
    const double rhs = inner(x, assemble_adjoint(q, scheme, h, w));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
  }
}

TEST_CASE("patch vectorization and coverage") {
  MultiEchoImage x(16, 16, 1);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) x.at(r, c, 0) = r * 100 + c;
  }
  const auto scheme = make_patch_scheme(16, 16, 8, 4);
  const auto p = extract_patches(x, scheme);
  const auto [r0, c0] = scheme.anchors[1];
  CHECK(p[1].values(0, 0) == r0 * 100 + c0);
  CHECK(p[1].values(9, 0) == (r0 + 1) * 100 + c0 + 1);  // row-major inside the patch

  const auto disjoint = make_patch_scheme(16, 16, 8, 8);
  const auto back = assemble_adjoint(extract_patches(x, disjoint), disjoint, 16, 16);
  CHECK(back == x);

  const auto cov = coverage_counts(make_patch_scheme(64, 64, 8, 4));
  CHECK(cov[20 * 64 + 20] == 4.0);
  CHECK(cov[0] == 1.0);
  CHECK(*std::min_element(cov.begin(), cov.end()) >= 1.0);
}
