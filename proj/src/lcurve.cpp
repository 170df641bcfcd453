#include "mecho/lcurve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mecho/phantom.hpp"

namespace mecho {

namespace {

std::vector<double> safe_log(std::span<const double> v) {
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, x);
  const double floor = peak > 0 ? peak * 1e-12 : 1e-300;
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(std::log(std::max(x, floor)));
  return out;
}

void check_grid(const std::vector<double>& g, const std::string& name) {
  if (g.empty()) return;
  if (g.size() < 3) {
    throw InvalidArgument("lcurve: grid for " + name + " needs at least 3 values");
  }
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i] > g[i - 1])) throw InvalidArgument("lcurve: grid for " + name + " must be ascending");
  }
  for (double v : g) {
    if (!(v >= 0) || !std::isfinite(v)) {
      throw InvalidArgument("lcurve: grid for " + name + " has a negative or non-finite value");
    }
  }
}

}  // namespace

int select_corner(std::span<const double> residuals, std::span<const double> penalties) {
  const std::size_t n = residuals.size();
  if (n < 3 || penalties.size() != n) {
    throw InvalidArgument("select_corner: need at least 3 points of matching length");
  }
  const auto x = safe_log(residuals);
  const auto y = safe_log(penalties);
  int best = 1;
  double best_k = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double ax = x[k] - x[k - 1], ay = y[k] - y[k - 1];
    const double bx = x[k + 1] - x[k], by = y[k + 1] - y[k];
    const double cx = x[k + 1] - x[k - 1], cy = y[k + 1] - y[k - 1];
    const double denom = std::hypot(ax, ay) * std::hypot(bx, by) * std::hypot(cx, cy);
    const double kappa = denom > 0 ? 2.0 * (ax * by - ay * bx) / denom : 0.0;
    if (kappa > best_k) {
      best_k = kappa;
      best = static_cast<int>(k);
    }
  }
  return best;
}

int select_corner(std::span<const double> values, std::span<const double> residuals,
                  std::span<const double> penalties) {
  const std::size_t n = values.size();
  if (residuals.size() != n || penalties.size() != n) {
    throw InvalidArgument("select_corner: length mismatch");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> r, p;
  for (std::size_t i : order) {
    r.push_back(residuals[i]);
    p.push_back(penalties[i]);
  }
  return static_cast<int>(order[select_corner(r, p)]);
}

LcurveResult lcurve_greedy(const KSpaceData& y, Method method, const LcurveGrids& grids,
                           const ReconParams& base, const MultiEchoImage* reference) {
  check_grid(grids.mu, "mu");
  check_grid(grids.lambda, "lambda");
  check_grid(grids.gamma, "gamma");

  const bool uses_mu = method == Method::DlSparse || method == Method::DlRowSparse ||
                       method == Method::TlRowSparse;
  const bool uses_lambda = method != Method::ZeroFilled;
  const bool uses_gamma = method == Method::TlRowSparse;

  LcurveResult res{base, {}};
  ReconParams& p = res.params;
  // Later parameters start "off".
  if (uses_lambda && !grids.lambda.empty()) p.lambda = 0.0;
  if (uses_gamma && !grids.gamma.empty()) p.gamma = grids.gamma.front();

  auto tune = [&](const std::string& name, const std::vector<double>& grid, double ReconParams::*field) {
    if (grid.empty()) return;
    LcurveStage stage{name, {}, 0};
    for (double v : grid) {
      ReconParams trial = p;
      trial.*field = v;
      const ReconOutput out = run_method(method, y, trial);
      LcurvePoint pt{v, out.data_residual, out.sparsity_penalty, std::nullopt};
      if (reference) pt.snr_db = snr_db(*reference, out.image);
      stage.points.push_back(pt);
    }
    std::vector<double> vals, r, pen;
    for (const auto& pt : stage.points) {
      vals.push_back(pt.value);
      r.push_back(pt.residual);
      pen.push_back(pt.penalty);
    }
    stage.selected = select_corner(vals, r, pen);
    p.*field = stage.points[stage.selected].value;
    res.stages.push_back(std::move(stage));
  };

  if (uses_mu) tune("mu", grids.mu, &ReconParams::mu);
  if (uses_lambda) tune("lambda", grids.lambda, &ReconParams::lambda);
  if (uses_gamma) tune("gamma", grids.gamma, &ReconParams::gamma);
  return res;
}

}  // namespace mecho
