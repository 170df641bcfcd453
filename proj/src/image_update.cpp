#include "image_update.hpp"

#include <vector>

#include "mecho/parallel.hpp"
#include "mecho/solvers.hpp"

namespace mecho::detail {

MultiEchoImage solve_image_update(const ForwardModel& model, const MultiEchoImage& adjoint_y,
                                  const MultiEchoImage& prior, double mu,
                                  const PlaneOperator& regularizer, const MultiEchoImage& warm,
                                  double tol, int max_iters) {
  const Shape s = model.shape();
  const auto n = static_cast<int>(s.plane_size());
  MultiEchoImage out(s.height, s.width, s.echoes);
  parallel_for(s.echoes, [&](int e) {
    const auto len = static_cast<std::size_t>(n);
    SpdOperator op{n, [&, e, len](const Vector& in, Vector& res) {
                     model.normal(e, {in.data(), len}, {res.data(), len});
                     if (mu != 0.0) {
                       Vector reg(n);
                       regularizer({in.data(), len}, {reg.data(), len});
                       res += mu * reg;
                     }
                   }};
    Eigen::Map<const Vector> aty(adjoint_y.echo(e).data(), n);
    Eigen::Map<const Vector> pri(prior.echo(e).data(), n);
    const Vector rhs = aty + mu * pri;
    const Vector x0 = Eigen::Map<const Vector>(warm.echo(e).data(), n);
    const CgResult cg = conjugate_gradient(op, rhs, x0, tol, max_iters);
    Eigen::Map<Vector>(out.echo(e).data(), n) = cg.x;
  });
  return out;
}

double data_residual_sq(const ForwardModel& model, const MultiEchoImage& x, const KSpaceData& y) {
  const KSpaceData ax = model.forward(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < ax.samples().size(); ++i) acc += std::norm(ax.samples()[i] - y.samples()[i]);
  return acc;
}

}  // namespace mecho::detail
