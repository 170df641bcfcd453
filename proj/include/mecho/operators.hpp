#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mecho/core.hpp"

namespace mecho {

/// Unitary 2D DFT (1/sqrt(HW) scaling), DC at index (0, 0).
ComplexPlane fft2_unitary(const ComplexPlane& plane);
ComplexPlane fft2_unitary(const RealPlane& plane);
ComplexPlane ifft2_unitary(const ComplexPlane& plane);

/// Row index in unshifted FFT coordinates of shifted-view row `shifted`.
int unshift_row(int shifted, int height);
/// Inverse of unshift_row.
int shift_row(int row, int height);

/// Variable-density line mask: floor(dense_fraction * lines_per_echo) rows
/// contiguous around DC in the fftshifted view, the remainder drawn uniformly
/// without replacement from the other rows.
SamplingMask generate_mask(int height, int width, int lines_per_echo, int echoes,
                           double dense_fraction, bool per_echo_distinct, std::uint64_t seed);

/// Per-echo row restriction of the unitary FFT, seen as a map from real
/// images to complex samples.
class ForwardModel {
 public:
  explicit ForwardModel(SamplingMask mask);

  const SamplingMask& mask() const { return mask_; }
  Shape shape() const { return mask_.shape(); }

  KSpaceData forward(const MultiEchoImage& x) const;
  MultiEchoImage adjoint(const KSpaceData& y) const;

  /// Re(F^H R^T R F) applied to one echo plane; `out` may not alias `in`.
  void normal(int echo, std::span<const double> in, std::span<double> out) const;

 private:
  SamplingMask mask_;
};

KSpaceData apply_forward(const MultiEchoImage& x, const SamplingMask& mask);
MultiEchoImage apply_adjoint(const KSpaceData& y);

/// Top-left anchors of the patches covering an image. Anchors lie on the
/// stride grid; an extra anchor flush with the bottom/right edge is added when
/// the grid does not reach it.
struct PatchScheme {
  int patch_size = 8;
  int stride = 4;
  int height = 0;
  int width = 0;
  std::vector<std::pair<int, int>> anchors;

  int count() const { return static_cast<int>(anchors.size()); }
  int patch_pixels() const { return patch_size * patch_size; }
};

PatchScheme make_patch_scheme(int height, int width, int patch_size, int stride);

std::vector<PatchMatrix> extract_patches(const MultiEchoImage& x, const PatchScheme& scheme);

/// Exact transpose of extract_patches: overlapping contributions are summed.
MultiEchoImage assemble_adjoint(std::span<const PatchMatrix> patches, const PatchScheme& scheme,
                                int height, int width);

/// Single-plane variants used inside the image-update operators. The patch
/// matrix has one column per anchor.
Matrix extract_plane_patches(std::span<const double> plane, const PatchScheme& scheme);
void assemble_plane_patches(const Matrix& patches, const PatchScheme& scheme,
                            std::span<double> plane);

/// [X_1 | ... | X_N], n x (N * echoes).
Matrix concatenate_patches(std::span<const PatchMatrix> patches);

/// Diagonal of sum_i P_i^T P_i: how many patches cover each pixel.
std::vector<double> coverage_counts(const PatchScheme& scheme);

}  // namespace mecho
