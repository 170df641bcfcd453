#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mecho/core.hpp"
#include "mecho/methods.hpp"

namespace mecho {

/// Index of the L-curve corner: the interior point of maximum signed
/// three-point (Menger) curvature of (log residual, log penalty), with points
/// taken in ascending parameter order. Needs at least 3 points.
int select_corner(std::span<const double> residuals, std::span<const double> penalties);

/// Same, for points given in any order; they are sorted by parameter value
/// first. Returns an index into the caller's arrays.
int select_corner(std::span<const double> values, std::span<const double> residuals,
                  std::span<const double> penalties);

struct LcurvePoint {
  double value = 0.0;
  double residual = 0.0;
  double penalty = 0.0;
  std::optional<double> snr_db;  ///< only when a reference image was supplied
};

struct LcurveStage {
  std::string parameter;
  std::vector<LcurvePoint> points;
  int selected = 0;
};

/// Ascending grids; an empty grid leaves that parameter at its base value.
struct LcurveGrids {
  std::vector<double> mu;
  std::vector<double> lambda;
  std::vector<double> gamma;
};

struct LcurveResult {
  ReconParams params;
  std::vector<LcurveStage> stages;
};

/// Greedy L-curve: tunes mu, then lambda, then gamma (whichever the method
/// uses). While a parameter is tuned, earlier ones keep their chosen values
/// and later ones are zero; gamma cannot be zero for the transform engine, so
/// it sits at its smallest grid value (or base value) until its own stage.
/// The reference image, when given, is only used to annotate points with SNR.
LcurveResult lcurve_greedy(const KSpaceData& y, Method method, const LcurveGrids& grids,
                           const ReconParams& base,
                           const MultiEchoImage* reference = nullptr);

}  // namespace mecho
