#include "mecho/transform_recon.hpp"

#include <cmath>
#include <limits>

#include "image_update.hpp"
#include "mecho/dict_recon.hpp"
#include "mecho/parallel.hpp"
#include "mecho/solvers.hpp"

namespace mecho::tl {

namespace {

double orthogonal_det_sign(const Matrix& q) { return q.partialPivLu().determinant() < 0 ? -1.0 : 1.0; }

}  // namespace

double log_det_positive(const Matrix& t) {
  if (t.rows() != t.cols() || t.size() == 0) throw InvalidArgument("log_det: matrix must be square");
  const Eigen::PartialPivLU<Matrix> lu(t);
  double sign = lu.permutationP().determinant();
  double acc = 0.0;
  const auto diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag[i] == 0.0 || !std::isfinite(diag[i])) {
      throw DomainError("log_det: transform is singular");
    }
    if (diag[i] < 0) sign = -sign;
    acc += std::log(std::abs(diag[i]));
  }
  if (sign <= 0) throw DomainError("log_det: transform has non-positive determinant");
  return acc;
}

double transform_objective(const Matrix& x, const Matrix& z, const Matrix& t, double gamma) {
  return (t * x - z).squaredNorm() + gamma * (t.squaredNorm() - log_det_positive(t));
}

double objective(const TlState& state, const KSpaceData& y, const PatchScheme& scheme,
                 const ReconParams& params) {
  const Matrix& t = state.transform.matrix;
  const double reg = params.gamma * (t.squaredNorm() - log_det_positive(t));
  const ForwardModel model(y.mask());
  const auto patches = extract_patches(state.image, scheme);
  if (patches.size() != state.coefs.size()) {
    throw InvalidArgument("tl::objective: coefficient count does not match patch scheme");
  }
  double fit = 0.0;
  double sparse = 0.0;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    fit += (t * patches[i].values - state.coefs[i]).squaredNorm();
    sparse += state.coefs[i].rowwise().norm().sum();
  }
  return detail::data_residual_sq(model, state.image, y) +
         params.mu * (fit + params.lambda * sparse + reg);
}

Transform init_transform(const Matrix& concatenated) {
  Matrix t = dl::init_dictionary(concatenated).atoms.transpose();
  if (orthogonal_det_sign(t) < 0) t.row(t.rows() - 1) *= -1.0;
  return {t};
}

Transform init_transform(const MultiEchoImage& x0, const PatchScheme& scheme) {
  return init_transform(concatenate_patches(extract_patches(x0, scheme)));
}

MultiEchoImage update_image(const KSpaceData& y, const Transform& t,
                            std::span<const Matrix> coefs, const PatchScheme& scheme,
                            const ReconParams& params, const MultiEchoImage& warm) {
  const ForwardModel model(y.mask());
  const Shape s = model.shape();
  if (static_cast<int>(coefs.size()) != scheme.count()) {
    throw InvalidArgument("tl::update_image: coefficient count does not match patch scheme");
  }
  const Matrix& tm = t.matrix;
  std::vector<PatchMatrix> back(coefs.size());
  for (std::size_t i = 0; i < coefs.size(); ++i) {
    back[i] = {static_cast<int>(i), tm.transpose() * coefs[i]};
  }
  const MultiEchoImage prior = assemble_adjoint(back, scheme, s.height, s.width);
  const Matrix gram = tm.transpose() * tm;
  auto reg = [&](std::span<const double> in, std::span<double> out) {
    const Matrix p = extract_plane_patches(in, scheme);
    assemble_plane_patches(gram * p, scheme, out);
  };
  return detail::solve_image_update(model, model.adjoint(y), prior, params.mu, reg, warm,
                                    params.cg_tol, params.cg_max_iters);
}

Transform update_transform_from_moments(const Matrix& xxt, const Matrix& xzt, double gamma) {
  if (!(gamma > 0)) throw InvalidArgument("update_transform: gamma must be positive");
  const auto n = xxt.rows();
  if (xxt.cols() != n || xzt.rows() != n || xzt.cols() != n) {
    throw InvalidArgument("update_transform: moment matrices must be n x n");
  }
  // Symmetric square root: X X^T + gamma I = L L^T with L = L^T.
  Matrix reg = xxt + gamma * Matrix::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(reg);
  const Matrix& v = eig.eigenvectors();
  const Matrix l_inv =
      v * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();

  Eigen::JacobiSVD<Matrix> svd(l_inv * xzt, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix& q = svd.matrixU();
  Matrix r = svd.matrixV();
  Vector sigma = svd.singularValues();
  // The unconstrained stationary point has det(T) of the sign of det(Q R).
  // Restricted to det T > 0 the minimizer flips the weakest direction.
  if (orthogonal_det_sign(q) * orthogonal_det_sign(r) < 0) {
    r.col(n - 1) *= -1.0;
    sigma[n - 1] = -sigma[n - 1];
  }
  const Vector scale =
      0.5 * (sigma.array() + (sigma.array().square() + 2.0 * gamma).sqrt()).matrix();
  return {r * scale.asDiagonal() * q.transpose() * l_inv};
}

Transform update_transform(const Matrix& x, const Matrix& z, double gamma) {
  if (x.rows() != z.rows() || x.cols() != z.cols()) {
    throw InvalidArgument("update_transform: data and coefficient shapes differ");
  }
  return update_transform_from_moments(x * x.transpose(), x * z.transpose(), gamma);
}

Transform update_transform(std::span<const PatchMatrix> patches, std::span<const Matrix> coefs,
                           double gamma) {
  if (patches.empty() || patches.size() != coefs.size()) {
    throw InvalidArgument("update_transform: patch/coefficient count mismatch");
  }
  const auto n = patches.front().values.rows();
  Matrix xxt = Matrix::Zero(n, n);
  Matrix xzt = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    if (coefs[i].rows() != n || coefs[i].cols() != patches[i].values.cols()) {
      throw InvalidArgument("update_transform: shape mismatch at location " + std::to_string(i));
    }
    xxt.noalias() += patches[i].values * patches[i].values.transpose();
    xzt.noalias() += patches[i].values * coefs[i].transpose();
  }
  return update_transform_from_moments(xxt, xzt, gamma);
}

std::vector<Matrix> update_coefficients(std::span<const PatchMatrix> patches, const Transform& t,
                                        double lambda) {
  if (!(lambda >= 0)) throw InvalidArgument("tl::update_coefficients: lambda must be nonnegative");
  std::vector<Matrix> out(patches.size());
  for (const auto& p : patches) {
    if (p.values.rows() != t.matrix.cols()) {
      throw InvalidArgument("tl::update_coefficients: patch size does not match transform");
    }
  }
  parallel_for(static_cast<int>(patches.size()), [&](int i) {
    out[i] = row_soft_threshold(t.matrix * patches[i].values, lambda / 2.0);
  });
  return out;
}

TlResult reconstruct(const KSpaceData& y, const ReconParams& params) {
  require_valid(validate(y), "tl::reconstruct");
  const Shape s = y.shape();
  auto violations = validate(params, s);
  if (!(params.gamma > 0)) violations.push_back("gamma must be positive for transform learning");
  require_valid(violations, "tl::reconstruct");
  const PatchScheme scheme = make_patch_scheme(s.height, s.width, params.patch_size,
                                               params.patch_stride);
  TlResult res;
  TlState& st = res.state;
  st.image = apply_adjoint(y);
  st.transform = init_transform(st.image, scheme);
  st.coefs.assign(scheme.count(), Matrix::Zero(scheme.patch_pixels(), s.echoes));
  st.cost_history.push_back(objective(st, y, scheme, params));

  for (int it = 0; it < params.max_outer_iters; ++it) {
    const auto patches = extract_patches(st.image, scheme);
    st.coefs = update_coefficients(patches, st.transform, params.lambda);
    st.transform = update_transform(patches, st.coefs, params.gamma);
    st.image = update_image(y, st.transform, st.coefs, scheme, params, st.image);
    ++res.iterations;
    const double prev = st.cost_history.back();
    const double cost = objective(st, y, scheme, params);
    st.cost_history.push_back(cost);
    if (std::abs(prev - cost) <= params.rel_cost_tol * std::abs(prev)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace mecho::tl
