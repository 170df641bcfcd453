#include "mecho/solvers.hpp"

#include <cmath>
#include <random>
#include <string>

namespace mecho {

SpdOperator dense_operator(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("dense_operator: matrix must be square");
  return {static_cast<int>(a.rows()), [a](const Vector& in, Vector& out) { out.noalias() = a * in; }};
}

CgResult conjugate_gradient(const SpdOperator& a, const Vector& b, const Vector& x0, double tol,
                            int max_iters) {
  if (b.size() != a.dim || x0.size() != a.dim) {
    throw InvalidArgument("conjugate_gradient: dimension mismatch");
  }
  if (!(tol > 0) || max_iters < 0) throw InvalidArgument("conjugate_gradient: bad tolerance");

  CgResult res{x0, 0, 0.0};
  Vector& x = res.x;
  Vector q(a.dim);
  a.apply(x, q);
  Vector r = b - q;
  Vector p = r;
  double rr = r.squaredNorm();
  if (!std::isfinite(rr)) throw NumericalError("conjugate_gradient: non-finite residual at iteration 0");
  const double target = tol * b.norm();
  res.residual = std::sqrt(rr);

  while (res.iterations < max_iters && res.residual > target && rr > 0.0) {
    a.apply(p, q);
    const double pq = p.dot(q);
    if (!std::isfinite(pq)) {
      throw NumericalError("conjugate_gradient: non-finite curvature at iteration " +
                           std::to_string(res.iterations + 1));
    }
    if (pq <= 0.0) break;  // p in the null space of a PSD operator
    const double alpha = rr / pq;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * q;
    const double rr_new = r.squaredNorm();
    ++res.iterations;
    if (!std::isfinite(rr_new)) {
      throw NumericalError("conjugate_gradient: non-finite residual at iteration " +
                           std::to_string(res.iterations));
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    res.residual = std::sqrt(rr);
  }
  return res;
}

Matrix row_soft_threshold(const Matrix& m, double tau) {
  if (!(tau >= 0)) throw InvalidArgument("row_soft_threshold: tau must be nonnegative");
  if (!m.allFinite()) throw InvalidArgument("row_soft_threshold: non-finite input");
  Matrix out = m;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double n = m.row(r).norm();
    if (n <= tau) {
      out.row(r).setZero();
    } else {
      out.row(r) *= 1.0 - tau / n;
    }
  }
  return out;
}

Matrix soft_threshold(const Matrix& m, double tau) {
  if (!(tau >= 0)) throw InvalidArgument("soft_threshold: tau must be nonnegative");
  if (!m.allFinite()) throw InvalidArgument("soft_threshold: non-finite input");
  return m.unaryExpr([tau](double v) {
    const double a = std::abs(v) - tau;
    return a > 0 ? std::copysign(a, v) : 0.0;
  });
}

double power_iteration(const SpdOperator& g, int iters, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(g.dim);
  for (int i = 0; i < g.dim; ++i) v[i] = normal(rng);
  v.normalize();
  Vector w(g.dim);
  for (int k = 0; k < iters; ++k) {
    g.apply(v, w);
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    v = w / n;
  }
  g.apply(v, w);
  return v.dot(w);
}

double penalty_value(const Matrix& z, Penalty penalty) {
  return penalty == Penalty::RowL21 ? z.rowwise().norm().sum() : z.cwiseAbs().sum();
}

double coding_objective(const Matrix& d, const Matrix& x, const Matrix& z, double lambda,
                        Penalty penalty) {
  return (x - d * z).squaredNorm() + lambda * penalty_value(z, penalty);
}

double ista_lipschitz(const Matrix& d) {
  const Matrix gram = d.transpose() * d;
  return 1.01 * power_iteration(dense_operator(gram), 500, 0x5eed);
}

IstaResult ista(const Matrix& d, const Matrix& x, double lambda, const Matrix& z0,
                Penalty penalty, const IstaOptions& options) {
  if (d.rows() != x.rows() || z0.rows() != d.cols() || z0.cols() != x.cols()) {
    throw InvalidArgument("ista: shape mismatch");
  }
  if (!(lambda >= 0)) throw InvalidArgument("ista: lambda must be nonnegative");
  const double lip = options.lipschitz > 0 ? options.lipschitz : ista_lipschitz(d);
  if (!(lip > 0)) throw InvalidArgument("ista: zero dictionary (Lipschitz constant is 0)");

  const Matrix gram = d.transpose() * d;
  const Matrix dtx = d.transpose() * x;
  const double tau = lambda / (2.0 * lip);
  IstaResult res{z0, 0, {}};
  if (options.track_objective) res.objective.push_back(coding_objective(d, x, z0, lambda, penalty));
  Matrix step(z0.rows(), z0.cols());
  for (int k = 0; k < options.max_iters; ++k) {
    step = res.z - (gram * res.z - dtx) / lip;
    Matrix next = penalty == Penalty::RowL21 ? row_soft_threshold(step, tau)
                                             : soft_threshold(step, tau);
    const double change = (next - res.z).norm();
    res.z = std::move(next);
    ++res.iterations;
    if (options.track_objective) {
      res.objective.push_back(coding_objective(d, x, res.z, lambda, penalty));
    }
    if (change <= options.rel_change_tol * res.z.norm()) break;
  }
  return res;
}

Matrix ista_row_sparse(const Dictionary& d, const Matrix& x, double lambda, const Matrix& z0,
                       int iters) {
  IstaOptions opts;
  opts.max_iters = iters;
  return ista(d.atoms, x, lambda, z0, Penalty::RowL21, opts).z;
}

double zero_row_fraction(std::span<const Matrix> coefs) {
  std::size_t zero = 0;
  std::size_t total = 0;
  for (const auto& z : coefs) {
    for (Eigen::Index r = 0; r < z.rows(); ++r) zero += (z.row(r).array() == 0.0).all() ? 1 : 0;
    total += static_cast<std::size_t>(z.rows());
  }
  return total ? static_cast<double>(zero) / static_cast<double>(total) : 0.0;
}

double zero_entry_fraction(std::span<const Matrix> coefs) {
  std::size_t zero = 0;
  std::size_t total = 0;
  for (const auto& z : coefs) {
    zero += static_cast<std::size_t>((z.array() == 0.0).count());
    total += static_cast<std::size_t>(z.size());
  }
  return total ? static_cast<double>(zero) / static_cast<double>(total) : 0.0;
}

}  // namespace mecho
