#pragma once

#include <cstdint>
#include <vector>

#include "mecho/core.hpp"

namespace mecho {

/// Ellipse in normalized coordinates: x runs left to right and y top to
/// bottom, both over [-1, 1] across the image. Angle in degrees.
struct Ellipse {
  double center_x = 0.0;
  double center_y = 0.0;
  double axis_x = 0.5;
  double axis_y = 0.5;
  double angle_deg = 0.0;

  bool contains(double x, double y) const;
};

struct PhantomRegion {
  Ellipse ellipse;
  double proton_density = 1.0;
  double t2_ms = 100.0;
};

/// Regions are painted in order; later regions overwrite earlier ones.
struct PhantomSpec {
  int height = 64;
  int width = 64;
  int echoes = 8;
  double delta_te_ms = 6.738;
  /// Sub-samples per pixel side; each pixel averages supersample^2 points,
  /// which models partial-volume blurring at region boundaries.
  int supersample = 4;
  std::vector<PhantomRegion> regions;
};

/// Five nested/offset ellipses with T2 in {30, 60, 90, 120, 200} ms.
PhantomSpec default_phantom_spec(int height = 64, int width = 64, int echoes = 8);

std::vector<std::string> validate(const PhantomSpec& spec);

/// Sample value at echo c (1-based) is rho * exp(-c * delta_te / T2) of the
/// topmost covering region, 0 outside every region; pixels average their
/// supersample^2 sample points.
MultiEchoImage generate_phantom(const PhantomSpec& spec);

/// apply_forward plus complex Gaussian noise, N(0, sigma^2) on each of the
/// real and imaginary parts.
KSpaceData simulate_acquisition(const MultiEchoImage& truth, const SamplingMask& mask,
                                double noise_sigma, std::uint64_t seed);

/// 20 log10(||ref|| / ||ref - rec||) over the whole stack; +infinity when the
/// reconstruction is exact.
double snr_db(const MultiEchoImage& reference, const MultiEchoImage& reconstruction);
std::vector<double> snr_db_per_echo(const MultiEchoImage& reference,
                                    const MultiEchoImage& reconstruction);

}  // namespace mecho
