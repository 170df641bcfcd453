#pragma once

#include <vector>

#include "mecho/core.hpp"
#include "mecho/operators.hpp"
#include "mecho/solvers.hpp"

// Row-sparse dictionary-learning reconstruction. The objective is
//
//   ||y - A x||^2 + mu * sum_i (||X_i - D Z_i||_F^2 + lambda * ||Z_i||_{2,1})
//
// where X_i stacks the patch at location i of every echo as columns. It is
// minimized by alternating a coefficient update (ISTA with the row prox), a
// least-squares dictionary update and a CG image update. The entrywise-l1
// variant of the same loop is the unstructured sparse-DL baseline.
namespace mecho::dl {

struct DlState {
  MultiEchoImage image;
  Dictionary dictionary;
  std::vector<Matrix> coefs;
  std::vector<double> cost_history;
};

struct DlResult {
  DlState state;
  int iterations = 0;
  bool converged = false;
};

double objective(const DlState& state, const KSpaceData& y, const PatchScheme& scheme,
                 const ReconParams& params, Penalty penalty = Penalty::RowL21);

/// The learning part of the objective, sum_i ||X_i - D Z_i||^2 + lambda * penalty(Z_i).
double learning_objective(std::span<const PatchMatrix> patches, const Dictionary& d,
                          std::span<const Matrix> coefs, double lambda, Penalty penalty);

/// Left singular vectors of [X_1 | ... | X_N], each column signed so its
/// largest-magnitude entry is positive.
Dictionary init_dictionary(const MultiEchoImage& x0, const PatchScheme& scheme);
Dictionary init_dictionary(const Matrix& concatenated_patches);

MultiEchoImage update_image(const KSpaceData& y, const Dictionary& d,
                            std::span<const Matrix> coefs, const PatchScheme& scheme,
                            const ReconParams& params, const MultiEchoImage& warm);

/// (sum X_i Z_i^T)(sum Z_i Z_i^T + ridge I)^{-1} with ridge = ridge_rel * mean diagonal.
Matrix least_squares_dictionary(std::span<const PatchMatrix> patches, std::span<const Matrix> coefs,
                                double ridge_rel);

struct DictionaryUpdate {
  Dictionary dictionary;
  std::vector<Matrix> coefs;  ///< rows rescaled so that D Z_i is unchanged
};

/// Least-squares dictionary with unit-norm columns. Atoms whose column comes
/// out exactly zero keep the previous atom (their coefficient rows are zero).
DictionaryUpdate update_dictionary(std::span<const PatchMatrix> patches,
                                   std::span<const Matrix> coefs, double ridge_rel,
                                   const Dictionary& previous);

std::vector<Matrix> update_coefficients(std::span<const PatchMatrix> patches, const Dictionary& d,
                                        double lambda, std::span<const Matrix> previous,
                                        int inner_iters, Penalty penalty = Penalty::RowL21);

DlResult reconstruct(const KSpaceData& y, const ReconParams& params,
                     Penalty penalty = Penalty::RowL21);

inline constexpr double kDefaultRidge = 1e-8;

}  // namespace mecho::dl
