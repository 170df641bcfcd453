#pragma once

#include <span>
#include <vector>

#include "mecho/core.hpp"
#include "mecho/operators.hpp"

// Row-sparse transform-learning reconstruction:
//
//   ||y - A x||^2 + mu * (sum_i ||T X_i - Z_i||_F^2 + lambda * ||Z_i||_{2,1}
//                         + gamma * (||T||_F^2 - log det T))
//
// The transform regularizer is counted once, not once per patch. All three
// block updates are exact (closed form for T and Z, CG for the image).
namespace mecho::tl {

struct TlState {
  MultiEchoImage image;
  Transform transform;
  std::vector<Matrix> coefs;
  std::vector<double> cost_history;
};

struct TlResult {
  TlState state;
  int iterations = 0;
  bool converged = false;
};

/// log det of a matrix with positive determinant; DomainError otherwise.
double log_det_positive(const Matrix& t);

double objective(const TlState& state, const KSpaceData& y, const PatchScheme& scheme,
                 const ReconParams& params);

/// sum_i ||T X_i - Z_i||^2 + gamma (||T||^2 - log det T), the transform sub-problem.
double transform_objective(const Matrix& x, const Matrix& z, const Matrix& t, double gamma);

/// Transposed left singular vectors of [X_1 | ... | X_N], sign convention as
/// the dictionary initializer, last row flipped if needed so det = +1.
Transform init_transform(const MultiEchoImage& x0, const PatchScheme& scheme);
Transform init_transform(const Matrix& concatenated_patches);

MultiEchoImage update_image(const KSpaceData& y, const Transform& t,
                            std::span<const Matrix> coefs, const PatchScheme& scheme,
                            const ReconParams& params, const MultiEchoImage& warm);

/// Closed-form minimizer over det T > 0 from the moments X X^T and X Z^T.
Transform update_transform_from_moments(const Matrix& xxt, const Matrix& xzt, double gamma);
/// Same, from concatenated data X (n x m) and coefficients Z (n x m).
Transform update_transform(const Matrix& x, const Matrix& z, double gamma);
Transform update_transform(std::span<const PatchMatrix> patches, std::span<const Matrix> coefs,
                           double gamma);

/// Z_i = row_soft_threshold(T X_i, lambda / 2).
std::vector<Matrix> update_coefficients(std::span<const PatchMatrix> patches, const Transform& t,
                                        double lambda);

TlResult reconstruct(const KSpaceData& y, const ReconParams& params);

}  // namespace mecho::tl
