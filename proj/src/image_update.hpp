#pragma once

#include <functional>
#include <span>

#include "mecho/core.hpp"
#include "mecho/operators.hpp"

namespace mecho::detail {

using PlaneOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Solves, echo by echo, (A^T A + mu * R) x = A^T y + mu * prior via CG,
/// warm-started at `warm`. R is the per-plane regularizer operator.
MultiEchoImage solve_image_update(const ForwardModel& model, const MultiEchoImage& adjoint_y,
                                  const MultiEchoImage& prior, double mu,
                                  const PlaneOperator& regularizer, const MultiEchoImage& warm,
                                  double tol, int max_iters);

/// ||A x - y||^2
double data_residual_sq(const ForwardModel& model, const MultiEchoImage& x, const KSpaceData& y);

}  // namespace mecho::detail
