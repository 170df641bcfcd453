#include "mecho/dict_recon.hpp"

#include <cmath>

#include "image_update.hpp"
#include "mecho/parallel.hpp"

namespace mecho::dl {

namespace {

void require_coefs(std::span<const PatchMatrix> patches, std::span<const Matrix> coefs,
                   const Matrix& atoms, const char* what) {
  if (patches.size() != coefs.size()) {
    throw InvalidArgument(std::string(what) + ": " + std::to_string(coefs.size()) +
                          " coefficient matrices for " + std::to_string(patches.size()) +
                          " patch locations");
  }
  for (std::size_t i = 0; i < coefs.size(); ++i) {
    if (coefs[i].rows() != atoms.cols() || coefs[i].cols() != patches[i].values.cols() ||
        patches[i].values.rows() != atoms.rows()) {
      throw InvalidArgument(std::string(what) + ": shape mismatch at location " +
                            std::to_string(i));
    }
  }
}

// Makes the largest-magnitude entry of every column positive.
void fix_column_signs(Matrix& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    u.col(c).cwiseAbs().maxCoeff(&arg);
    if (u(arg, c) < 0) u.col(c) *= -1.0;
  }
}

}  // namespace

double learning_objective(std::span<const PatchMatrix> patches, const Dictionary& d,
                          std::span<const Matrix> coefs, double lambda, Penalty penalty) {
  require_coefs(patches, coefs, d.atoms, "learning_objective");
  double acc = 0.0;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    acc += coding_objective(d.atoms, patches[i].values, coefs[i], lambda, penalty);
  }
  return acc;
}

double objective(const DlState& state, const KSpaceData& y, const PatchScheme& scheme,
                 const ReconParams& params, Penalty penalty) {
  const ForwardModel model(y.mask());
  const auto patches = extract_patches(state.image, scheme);
  const double data = detail::data_residual_sq(model, state.image, y);
  return data + params.mu * learning_objective(patches, state.dictionary, state.coefs,
                                               params.lambda, penalty);
}

Dictionary init_dictionary(const Matrix& concatenated) {
  if (concatenated.size() == 0 || concatenated.isZero(0.0)) {
    throw DegenerateInput("init_dictionary: all patches are zero");
  }
  Eigen::BDCSVD<Matrix> svd(concatenated, Eigen::ComputeFullU);
  Matrix u = svd.matrixU();
  fix_column_signs(u);
  return {u};
}

Dictionary init_dictionary(const MultiEchoImage& x0, const PatchScheme& scheme) {
  return init_dictionary(concatenate_patches(extract_patches(x0, scheme)));
}

MultiEchoImage update_image(const KSpaceData& y, const Dictionary& d,
                            std::span<const Matrix> coefs, const PatchScheme& scheme,
                            const ReconParams& params, const MultiEchoImage& warm) {
  const ForwardModel model(y.mask());
  const Shape s = model.shape();
  if (static_cast<int>(coefs.size()) != scheme.count()) {
    throw InvalidArgument("update_image: coefficient count does not match patch scheme");
  }
  std::vector<PatchMatrix> synth(coefs.size());
  for (std::size_t i = 0; i < coefs.size(); ++i) {
    synth[i] = {static_cast<int>(i), d.atoms * coefs[i]};
  }
  const MultiEchoImage prior = assemble_adjoint(synth, scheme, s.height, s.width);
  const std::vector<double> coverage = coverage_counts(scheme);
  auto reg = [&coverage](std::span<const double> in, std::span<double> out) {
    for (std::size_t k = 0; k < in.size(); ++k) out[k] = coverage[k] * in[k];
  };
  return detail::solve_image_update(model, model.adjoint(y), prior, params.mu, reg, warm,
                                    params.cg_tol, params.cg_max_iters);
}

Matrix least_squares_dictionary(std::span<const PatchMatrix> patches, std::span<const Matrix> coefs,
                                double ridge_rel) {
  if (patches.empty() || patches.size() != coefs.size()) {
    throw InvalidArgument("least_squares_dictionary: patch/coefficient count mismatch");
  }
  const auto n = patches.front().values.rows();
  const auto k = coefs.front().rows();
  Matrix xzt = Matrix::Zero(n, k);
  Matrix zzt = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    xzt.noalias() += patches[i].values * coefs[i].transpose();
    zzt.noalias() += coefs[i] * coefs[i].transpose();
  }
  const double scale = zzt.trace() / static_cast<double>(k);
  if (!(scale > 0)) throw DegenerateInput("update_dictionary: all coefficients are zero");
  zzt.diagonal().array() += ridge_rel * scale;
  // D = xzt * zzt^{-1}; zzt is symmetric.
  return zzt.ldlt().solve(xzt.transpose()).transpose();
}

DictionaryUpdate update_dictionary(std::span<const PatchMatrix> patches,
                                   std::span<const Matrix> coefs, double ridge_rel,
                                   const Dictionary& previous) {
  require_coefs(patches, coefs, previous.atoms, "update_dictionary");
  Matrix d = least_squares_dictionary(patches, coefs, ridge_rel);
  std::vector<Matrix> z(coefs.begin(), coefs.end());
  for (Eigen::Index c = 0; c < d.cols(); ++c) {
    const double norm = d.col(c).norm();
    if (norm > 0.0) {
      d.col(c) /= norm;
      for (auto& zi : z) zi.row(c) *= norm;
    } else {
      d.col(c) = previous.atoms.col(c);
      for (auto& zi : z) zi.row(c).setZero();
    }
  }
  return {{std::move(d)}, std::move(z)};
}

std::vector<Matrix> update_coefficients(std::span<const PatchMatrix> patches, const Dictionary& d,
                                        double lambda, std::span<const Matrix> previous,
                                        int inner_iters, Penalty penalty) {
  require_coefs(patches, previous, d.atoms, "update_coefficients");
  IstaOptions opts;
  opts.max_iters = inner_iters;
  opts.lipschitz = ista_lipschitz(d.atoms);
  if (!(opts.lipschitz > 0)) throw InvalidArgument("update_coefficients: zero dictionary");
  std::vector<Matrix> out(patches.size());
  parallel_for(static_cast<int>(patches.size()), [&](int i) {
    out[i] = ista(d.atoms, patches[i].values, lambda, previous[i], penalty, opts).z;
  });
  return out;
}

DlResult reconstruct(const KSpaceData& y, const ReconParams& params, Penalty penalty) {
  require_valid(validate(y), "dl::reconstruct");
  const Shape s = y.shape();
  require_valid(validate(params, s), "dl::reconstruct");
  const PatchScheme scheme = make_patch_scheme(s.height, s.width, params.patch_size,
                                               params.patch_stride);
  DlResult res;
  DlState& st = res.state;
  st.image = apply_adjoint(y);
  st.dictionary = init_dictionary(st.image, scheme);
  st.coefs.assign(scheme.count(), Matrix::Zero(st.dictionary.num_atoms(), s.echoes));
  st.cost_history.push_back(objective(st, y, scheme, params, penalty));

  auto learn = [&](const std::vector<PatchMatrix>& patches) {
    st.coefs = update_coefficients(patches, st.dictionary, params.lambda, st.coefs,
                                   params.inner_iters, penalty);
    if (zero_row_fraction(st.coefs) == 1.0) return;  // nothing to fit
    DictionaryUpdate cand = update_dictionary(patches, st.coefs, kDefaultRidge, st.dictionary);
    // Normalization rescales coefficient rows, which can raise the penalty;
    // re-code against the candidate so the step is judged on a fair footing.
    cand.coefs = update_coefficients(patches, cand.dictionary, params.lambda, cand.coefs,
                                     params.inner_iters, penalty);
    // Keep the previous dictionary when the step does not descend.
    const double before =
        learning_objective(patches, st.dictionary, st.coefs, params.lambda, penalty);
    const double after =
        learning_objective(patches, cand.dictionary, cand.coefs, params.lambda, penalty);
    if (after <= before) {
      st.dictionary = std::move(cand.dictionary);
      st.coefs = std::move(cand.coefs);
    }
  };

  for (int it = 0; it < params.max_outer_iters; ++it) {
    if (params.order == StepOrder::CoefsDictImage) {
      learn(extract_patches(st.image, scheme));
      st.image = update_image(y, st.dictionary, st.coefs, scheme, params, st.image);
    } else {
      st.image = update_image(y, st.dictionary, st.coefs, scheme, params, st.image);
      learn(extract_patches(st.image, scheme));
    }
    ++res.iterations;
    const double prev = st.cost_history.back();
    const double cost = objective(st, y, scheme, params, penalty);
    st.cost_history.push_back(cost);
    if (std::abs(prev - cost) <= params.rel_cost_tol * std::abs(prev)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace mecho::dl
