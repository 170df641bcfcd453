#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mecho/core.hpp"

namespace mecho {

/// Matrix-free symmetric positive (semi-)definite operator.
struct SpdOperator {
  int dim = 0;
  std::function<void(const Vector& in, Vector& out)> apply;

  Vector operator()(const Vector& x) const {
    Vector y(dim);
    apply(x, y);
    return y;
  }
};

SpdOperator dense_operator(const Matrix& a);

struct CgResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0;  ///< ||b - A x|| from the recurrence
};

/// Stops when ||A x - b|| <= tol * ||b|| or after max_iters steps.
CgResult conjugate_gradient(const SpdOperator& a, const Vector& b, const Vector& x0, double tol,
                            int max_iters);

/// Proximal map of tau * l21: rows shrink toward zero by tau in norm.
Matrix row_soft_threshold(const Matrix& m, double tau);

/// Proximal map of tau * l1, entrywise.
Matrix soft_threshold(const Matrix& m, double tau);

/// Largest eigenvalue estimate (Rayleigh quotient) of a symmetric PSD operator.
double power_iteration(const SpdOperator& g, int iters, std::uint64_t seed);

enum class Penalty { RowL21, EntryL1 };

double penalty_value(const Matrix& z, Penalty penalty);

/// ||X - D Z||_F^2 + lambda * penalty(Z); note the fidelity carries no 1/2.
double coding_objective(const Matrix& d, const Matrix& x, const Matrix& z, double lambda,
                        Penalty penalty);

struct IstaOptions {
  int max_iters = 20;
  double rel_change_tol = 1e-6;
  double lipschitz = 0.0;  ///< largest eigenvalue of D^T D; estimated when <= 0
  bool track_objective = false;
};

struct IstaResult {
  Matrix z;
  int iterations = 0;
  std::vector<double> objective;  ///< filled when track_objective; entry 0 is at Z0
};

/// Largest eigenvalue of D^T D times the 1.01 safety factor used for the ISTA step.
double ista_lipschitz(const Matrix& d);

/// Proximal gradient for min_Z ||X - D Z||_F^2 + lambda * penalty(Z):
/// Z <- prox_{lambda / (2L)}(Z - D^T (D Z - X) / L).
IstaResult ista(const Matrix& d, const Matrix& x, double lambda, const Matrix& z0,
                Penalty penalty, const IstaOptions& options);

Matrix ista_row_sparse(const Dictionary& d, const Matrix& x, double lambda, const Matrix& z0,
                       int iters);

/// Fraction of coefficient rows, over all matrices, that are exactly zero.
double zero_row_fraction(std::span<const Matrix> coefs);
/// Fraction of coefficient entries that are exactly zero.
double zero_entry_fraction(std::span<const Matrix> coefs);

}  // namespace mecho
