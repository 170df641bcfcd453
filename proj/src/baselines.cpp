#include "mecho/baselines.hpp"

#include <cmath>

#include "image_update.hpp"
#include "mecho/operators.hpp"
#include "mecho/solvers.hpp"

namespace mecho {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void check_levels(Eigen::Index rows, Eigen::Index cols, int levels) {
  if (levels < 0) throw InvalidArgument("haar: levels must be nonnegative");
  const Eigen::Index f = Eigen::Index{1} << levels;
  if (rows % f != 0 || cols % f != 0) {
    throw InvalidArgument("haar: " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " is not divisible by 2^" + std::to_string(levels));
  }
}

// One analysis step on the leading h x w block, rows then columns.
void haar_step(RealPlane& a, Eigen::Index h, Eigen::Index w) {
  RealPlane tmp = a.topLeftCorner(h, w);
  const Eigen::Index hw = w / 2;
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index k = 0; k < hw; ++k) {
      const double x0 = tmp(r, 2 * k);
      const double x1 = tmp(r, 2 * k + 1);
      a(r, k) = (x0 + x1) * kInvSqrt2;
      a(r, hw + k) = (x0 - x1) * kInvSqrt2;
    }
  }
  tmp = a.topLeftCorner(h, w);
  const Eigen::Index hh = h / 2;
  for (Eigen::Index c = 0; c < w; ++c) {
    for (Eigen::Index k = 0; k < hh; ++k) {
      const double x0 = tmp(2 * k, c);
      const double x1 = tmp(2 * k + 1, c);
      a(k, c) = (x0 + x1) * kInvSqrt2;
      a(hh + k, c) = (x0 - x1) * kInvSqrt2;
    }
  }
}

void haar_inverse_step(RealPlane& a, Eigen::Index h, Eigen::Index w) {
  RealPlane tmp = a.topLeftCorner(h, w);
  const Eigen::Index hh = h / 2;
  for (Eigen::Index c = 0; c < w; ++c) {
    for (Eigen::Index k = 0; k < hh; ++k) {
      const double s = tmp(k, c);
      const double d = tmp(hh + k, c);
      a(2 * k, c) = (s + d) * kInvSqrt2;
      a(2 * k + 1, c) = (s - d) * kInvSqrt2;
    }
  }
  tmp = a.topLeftCorner(h, w);
  const Eigen::Index hw = w / 2;
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index k = 0; k < hw; ++k) {
      const double s = tmp(r, k);
      const double d = tmp(r, hw + k);
      a(r, 2 * k) = (s + d) * kInvSqrt2;
      a(r, 2 * k + 1) = (s - d) * kInvSqrt2;
    }
  }
}

}  // namespace

RealPlane haar_dwt2(const RealPlane& plane, int levels) {
  check_levels(plane.rows(), plane.cols(), levels);
  RealPlane a = plane;
  Eigen::Index h = a.rows();
  Eigen::Index w = a.cols();
  for (int l = 0; l < levels; ++l, h /= 2, w /= 2) haar_step(a, h, w);
  return a;
}

RealPlane haar_idwt2(const RealPlane& coeffs, int levels) {
  check_levels(coeffs.rows(), coeffs.cols(), levels);
  RealPlane a = coeffs;
  for (int l = levels - 1; l >= 0; --l) {
    haar_inverse_step(a, a.rows() >> l, a.cols() >> l);
  }
  return a;
}

MultiEchoImage reconstruct_zero_filled(const KSpaceData& y) { return apply_adjoint(y); }

int max_wavelet_levels(int height, int width) {
  int levels = 0;
  while (height % 2 == 0 && width % 2 == 0 && height > 1 && width > 1) {
    height /= 2;
    width /= 2;
    ++levels;
  }
  return levels;
}

int resolve_wavelet_levels(const ReconParams& params, const Shape& shape) {
  return params.wavelet_levels > 0 ? params.wavelet_levels
                                   : max_wavelet_levels(shape.height, shape.width);
}

Matrix wavelet_rows(const MultiEchoImage& x, int levels) {
  Matrix rows(static_cast<Eigen::Index>(x.shape().plane_size()), x.echoes());
  for (int e = 0; e < x.echoes(); ++e) {
    const RealPlane c = haar_dwt2(RealPlane(x.plane(e)), levels);
    rows.col(e) = Eigen::Map<const Vector>(c.data(), c.size());
  }
  return rows;
}

MultiEchoImage from_wavelet_rows(const Matrix& rows, const Shape& shape, int levels) {
  MultiEchoImage x(shape.height, shape.width, shape.echoes);
  for (int e = 0; e < shape.echoes; ++e) {
    const RealPlane c = Eigen::Map<const RealPlane>(rows.col(e).data(), shape.height, shape.width);
    x.plane(e) = haar_idwt2(c, levels);
  }
  return x;
}

double cs_objective(const MultiEchoImage& x, const KSpaceData& y, double lambda, int levels) {
  const ForwardModel model(y.mask());
  return detail::data_residual_sq(model, x, y) + lambda * l21_norm(wavelet_rows(x, levels));
}

CsResult reconstruct_cs_analysis(const KSpaceData& y, const ReconParams& params) {
  require_valid(validate(y), "reconstruct_cs_analysis");
  const Shape s = y.shape();
  require_valid(validate(params, s), "reconstruct_cs_analysis");
  const int levels = resolve_wavelet_levels(params, s);
  check_levels(s.height, s.width, levels);
  const ForwardModel model(y.mask());
  // Gradient of ||y - Ax||^2 is 2 A^T(Ax - y) with Lipschitz constant 2, so
  // the step is 1/2 on it and the l21 threshold is lambda / 2.
  const double tau = params.lambda / 2.0;

  CsResult res;
  res.image = model.adjoint(y);
  res.cost_history.push_back(cs_objective(res.image, y, params.lambda, levels));
  const MultiEchoImage aty = model.adjoint(y);
  for (int it = 0; it < params.cs_max_iters; ++it) {
    MultiEchoImage grad_step = res.image;
    std::vector<double> buf(s.plane_size());
    for (int e = 0; e < s.echoes; ++e) {
      model.normal(e, res.image.echo(e), buf);
      auto dst = grad_step.echo(e);
      auto b = aty.echo(e);
      for (std::size_t k = 0; k < buf.size(); ++k) dst[k] += b[k] - buf[k];
    }
    MultiEchoImage next =
        from_wavelet_rows(row_soft_threshold(wavelet_rows(grad_step, levels), tau), s, levels);
    double diff = 0.0;
    double norm = 0.0;
    for (std::size_t k = 0; k < next.data().size(); ++k) {
      const double d = next.data()[k] - res.image.data()[k];
      diff += d * d;
      norm += next.data()[k] * next.data()[k];
    }
    res.image = std::move(next);
    ++res.iterations;
    res.cost_history.push_back(cs_objective(res.image, y, params.lambda, levels));
    if (std::sqrt(diff) <= params.cs_rel_tol * std::sqrt(norm)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

dl::DlResult reconstruct_dl_sparse(const KSpaceData& y, const ReconParams& params) {
  return dl::reconstruct(y, params, Penalty::EntryL1);
}

}  // namespace mecho
