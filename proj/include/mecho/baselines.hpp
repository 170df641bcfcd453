#pragma once

#include <vector>

#include "mecho/core.hpp"
#include "mecho/dict_recon.hpp"

namespace mecho {

/// Orthonormal multi-level 2D Haar analysis. Coefficients use the usual
/// pyramid layout with the coarsest approximation in the top-left corner.
RealPlane haar_dwt2(const RealPlane& plane, int levels);
RealPlane haar_idwt2(const RealPlane& coeffs, int levels);

/// Minimum-norm least-squares estimate, A^T y.
MultiEchoImage reconstruct_zero_filled(const KSpaceData& y);

struct CsResult {
  MultiEchoImage image;
  std::vector<double> cost_history;
  int iterations = 0;
  bool converged = false;
};

/// Largest L such that both dimensions are divisible by 2^L.
int max_wavelet_levels(int height, int width);
/// params.wavelet_levels, or the full depth when it is 0.
int resolve_wavelet_levels(const ReconParams& params, const Shape& shape);

/// Haar coefficients of every echo, one row per coefficient position and one
/// column per echo.
Matrix wavelet_rows(const MultiEchoImage& x, int levels);
MultiEchoImage from_wavelet_rows(const Matrix& rows, const Shape& shape, int levels);

/// ||y - A x||^2 + lambda * ||S X||_{2,1}.
double cs_objective(const MultiEchoImage& x, const KSpaceData& y, double lambda, int levels);

/// Proximal gradient with unit step on A^T A (||A^T A|| <= 1 for a row
/// restriction of a unitary map); the prox is exact because S is orthonormal.
CsResult reconstruct_cs_analysis(const KSpaceData& y, const ReconParams& params);

/// Sparse (entrywise l1) dictionary learning on the same patch layout.
dl::DlResult reconstruct_dl_sparse(const KSpaceData& y, const ReconParams& params);

}  // namespace mecho
