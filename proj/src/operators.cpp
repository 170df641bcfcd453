#include "mecho/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <unsupported/Eigen/FFT>

#include "mecho/parallel.hpp"

namespace mecho {

namespace {

// kissfft plans are cached per object and not thread-safe.
Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::Unscaled);
    return f;
  }();
  return engine;
}

void require_finite(const ComplexPlane& p, const char* what) {
  if (!p.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite input");
}

ComplexPlane transform2(const ComplexPlane& in, bool inverse) {
  const int h = static_cast<int>(in.rows());
  const int w = static_cast<int>(in.cols());
  if (h < 1 || w < 1) throw InvalidArgument("fft2: empty plane");
  auto& fft = fft_engine();
  ComplexPlane out(h, w);
  std::vector<Complex> src(std::max(h, w));
  std::vector<Complex> dst;
  src.resize(w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) src[c] = in(r, c);
    inverse ? fft.inv(dst, src) : fft.fwd(dst, src);
    for (int c = 0; c < w; ++c) out(r, c) = dst[c];
  }
  src.resize(h);
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) src[r] = out(r, c);
    inverse ? fft.inv(dst, src) : fft.fwd(dst, src);
    for (int r = 0; r < h; ++r) out(r, c) = dst[r];
  }
  out *= 1.0 / std::sqrt(static_cast<double>(h) * w);
  return out;
}

// Uniform integer in [0, n) by rejection, so the draw sequence depends only on
// the mt19937_64 stream.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % n);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (!(a == b)) {
    throw InvalidArgument(std::string(what) + ": shape mismatch " + to_string(a) + " vs " +
                          to_string(b));
  }
}

}  // namespace

ComplexPlane fft2_unitary(const ComplexPlane& plane) {
  require_finite(plane, "fft2_unitary");
  return transform2(plane, false);
}

ComplexPlane fft2_unitary(const RealPlane& plane) {
  return fft2_unitary(ComplexPlane(plane.cast<Complex>()));
}

ComplexPlane ifft2_unitary(const ComplexPlane& plane) {
  require_finite(plane, "ifft2_unitary");
  return transform2(plane, true);
}

int unshift_row(int shifted, int height) { return ((shifted - height / 2) % height + height) % height; }

int shift_row(int row, int height) { return (row + height / 2) % height; }

SamplingMask generate_mask(int height, int width, int lines_per_echo, int echoes,
                           double dense_fraction, bool per_echo_distinct, std::uint64_t seed) {
  if (height < 1 || width < 1 || echoes < 1) {
    throw InvalidArgument("generate_mask: dimensions must be positive");
  }
  if (lines_per_echo < 1 || lines_per_echo > height) {
    throw InvalidArgument("generate_mask: lines_per_echo " + std::to_string(lines_per_echo) +
                          " must lie in [1, " + std::to_string(height) + "]");
  }
  if (!(dense_fraction >= 0.0 && dense_fraction <= 1.0)) {
    throw InvalidArgument("generate_mask: dense_fraction must lie in [0, 1]");
  }
  const int dense = static_cast<int>(std::floor(dense_fraction * lines_per_echo + 1e-9));
  const int start = height / 2 - dense / 2;
  std::vector<int> center;
  std::vector<std::uint8_t> taken(height, 0);
  for (int s = start; s < start + dense; ++s) {
    const int row = unshift_row(s, height);
    center.push_back(row);
    taken[row] = 1;
  }
  std::vector<int> pool;
  for (int r = 0; r < height; ++r) {
    if (!taken[r]) pool.push_back(r);
  }
  const int extra = lines_per_echo - dense;

  std::mt19937_64 rng(seed);
  auto draw = [&] {
    std::vector<int> candidates = pool;
    std::vector<int> lines = center;
    for (int k = 0; k < extra; ++k) {
      const auto j = k + static_cast<int>(uniform_index(rng, candidates.size() - k));
      std::swap(candidates[k], candidates[j]);
      lines.push_back(candidates[k]);
    }
    std::sort(lines.begin(), lines.end());
    return lines;
  };

  std::vector<std::vector<int>> lines;
  lines.reserve(echoes);
  if (per_echo_distinct) {
    for (int e = 0; e < echoes; ++e) lines.push_back(draw());
  } else {
    lines.assign(echoes, draw());
  }
  return SamplingMask(height, width, std::move(lines));
}

ForwardModel::ForwardModel(SamplingMask mask) : mask_(std::move(mask)) {
  require_valid(validate(mask_), "ForwardModel");
}

KSpaceData ForwardModel::forward(const MultiEchoImage& x) const {
  require_same_shape(x.shape(), shape(), "apply_forward");
  const int w = mask_.width();
  KSpaceData y(mask_, std::vector<Complex>(mask_.sample_count()));
  parallel_for(x.echoes(), [&](int e) {
    const ComplexPlane spec = fft2_unitary(RealPlane(x.plane(e)));
    auto out = y.echo_samples(e);
    std::size_t k = 0;
    for (int row : mask_.lines(e)) {
      for (int c = 0; c < w; ++c) out[k++] = spec(row, c);
    }
  });
  return y;
}

MultiEchoImage ForwardModel::adjoint(const KSpaceData& y) const {
  require_same_shape(y.shape(), shape(), "apply_adjoint");
  if (y.samples().size() != mask_.sample_count()) {
    throw InvalidArgument("apply_adjoint: sample count does not match mask");
  }
  const Shape s = shape();
  MultiEchoImage x(s.height, s.width, s.echoes);
  parallel_for(s.echoes, [&](int e) {
    ComplexPlane spec = ComplexPlane::Zero(s.height, s.width);
    auto in = y.echo_samples(e);
    std::size_t k = 0;
    for (int row : mask_.lines(e)) {
      for (int c = 0; c < s.width; ++c) spec(row, c) = in[k++];
    }
    x.plane(e) = ifft2_unitary(spec).real();
  });
  return x;
}

void ForwardModel::normal(int echo, std::span<const double> in, std::span<double> out) const {
  const int h = mask_.height();
  const int w = mask_.width();
  Eigen::Map<const RealPlane> src(in.data(), h, w);
  const ComplexPlane spec = fft2_unitary(RealPlane(src));
  ComplexPlane kept = ComplexPlane::Zero(h, w);
  for (int row : mask_.lines(echo)) kept.row(row) = spec.row(row);
  Eigen::Map<RealPlane>(out.data(), h, w) = ifft2_unitary(kept).real();
}

KSpaceData apply_forward(const MultiEchoImage& x, const SamplingMask& mask) {
  return ForwardModel(mask).forward(x);
}

MultiEchoImage apply_adjoint(const KSpaceData& y) {
  require_valid(validate(y), "apply_adjoint");
  return ForwardModel(y.mask()).adjoint(y);
}

PatchScheme make_patch_scheme(int height, int width, int patch_size, int stride) {
  if (patch_size < 1 || stride < 1) {
    throw InvalidArgument("make_patch_scheme: patch_size and stride must be positive");
  }
  if (patch_size > height || patch_size > width) {
    throw InvalidArgument("make_patch_scheme: patch size " + std::to_string(patch_size) +
                          " does not fit a " + std::to_string(height) + "x" +
                          std::to_string(width) + " image");
  }
  auto axis = [&](int extent) {
    std::vector<int> a;
    for (int p = 0; p + patch_size <= extent; p += stride) a.push_back(p);
    if (a.back() != extent - patch_size) a.push_back(extent - patch_size);
    return a;
  };
  PatchScheme s{patch_size, stride, height, width, {}};
  for (int r : axis(height)) {
    for (int c : axis(width)) s.anchors.emplace_back(r, c);
  }
  return s;
}

Matrix extract_plane_patches(std::span<const double> plane, const PatchScheme& scheme) {
  const int p = scheme.patch_size;
  Matrix out(scheme.patch_pixels(), scheme.count());
  for (int i = 0; i < scheme.count(); ++i) {
    const auto [r0, c0] = scheme.anchors[i];
    for (int dr = 0; dr < p; ++dr) {
      const double* src = plane.data() + static_cast<std::size_t>(r0 + dr) * scheme.width + c0;
      for (int dc = 0; dc < p; ++dc) out(dr * p + dc, i) = src[dc];
    }
  }
  return out;
}

void assemble_plane_patches(const Matrix& patches, const PatchScheme& scheme,
                            std::span<double> plane) {
  const int p = scheme.patch_size;
  std::fill(plane.begin(), plane.end(), 0.0);
  for (int i = 0; i < scheme.count(); ++i) {
    const auto [r0, c0] = scheme.anchors[i];
    for (int dr = 0; dr < p; ++dr) {
      double* dst = plane.data() + static_cast<std::size_t>(r0 + dr) * scheme.width + c0;
      for (int dc = 0; dc < p; ++dc) dst[dc] += patches(dr * p + dc, i);
    }
  }
}

std::vector<PatchMatrix> extract_patches(const MultiEchoImage& x, const PatchScheme& scheme) {
  if (x.height() != scheme.height || x.width() != scheme.width) {
    throw InvalidArgument("extract_patches: scheme built for " + std::to_string(scheme.height) +
                          "x" + std::to_string(scheme.width) + " but image is " +
                          to_string(x.shape()));
  }
  const int n = scheme.patch_pixels();
  std::vector<PatchMatrix> out(scheme.count());
  for (int i = 0; i < scheme.count(); ++i) out[i] = {i, Matrix(n, x.echoes())};
  for (int e = 0; e < x.echoes(); ++e) {
    const Matrix cols = extract_plane_patches(x.echo(e), scheme);
    for (int i = 0; i < scheme.count(); ++i) out[i].values.col(e) = cols.col(i);
  }
  return out;
}

MultiEchoImage assemble_adjoint(std::span<const PatchMatrix> patches, const PatchScheme& scheme,
                                int height, int width) {
  if (height != scheme.height || width != scheme.width) {
    throw InvalidArgument("assemble_adjoint: scheme does not match target size");
  }
  if (static_cast<int>(patches.size()) != scheme.count()) {
    throw InvalidArgument("assemble_adjoint: expected " + std::to_string(scheme.count()) +
                          " patches, got " + std::to_string(patches.size()));
  }
  const int echoes = patches.empty() ? 0 : static_cast<int>(patches.front().values.cols());
  for (const auto& pm : patches) {
    if (pm.values.rows() != scheme.patch_pixels() || pm.values.cols() != echoes) {
      throw InvalidArgument("assemble_adjoint: patch matrix shape does not conform to scheme");
    }
  }
  MultiEchoImage x(height, width, echoes);
  Matrix cols(scheme.patch_pixels(), scheme.count());
  for (int e = 0; e < echoes; ++e) {
    for (int i = 0; i < scheme.count(); ++i) cols.col(i) = patches[i].values.col(e);
    assemble_plane_patches(cols, scheme, x.echo(e));
  }
  return x;
}

Matrix concatenate_patches(std::span<const PatchMatrix> patches) {
  if (patches.empty()) return {};
  const auto rows = patches.front().values.rows();
  const auto cols = patches.front().values.cols();
  Matrix out(rows, cols * static_cast<Eigen::Index>(patches.size()));
  for (std::size_t i = 0; i < patches.size(); ++i) {
    out.middleCols(static_cast<Eigen::Index>(i) * cols, cols) = patches[i].values;
  }
  return out;
}

std::vector<double> coverage_counts(const PatchScheme& scheme) {
  std::vector<double> counts(static_cast<std::size_t>(scheme.height) * scheme.width, 0.0);
  assemble_plane_patches(Matrix::Ones(scheme.patch_pixels(), scheme.count()), scheme, counts);
  return counts;
}

}  // namespace mecho
