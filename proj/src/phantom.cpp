#include "mecho/phantom.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mecho/operators.hpp"

namespace mecho {

bool Ellipse::contains(double x, double y) const {
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double dx = x - center_x;
  const double dy = y - center_y;
  const double u = std::cos(a) * dx + std::sin(a) * dy;
  const double v = -std::sin(a) * dx + std::cos(a) * dy;
  return (u * u) / (axis_x * axis_x) + (v * v) / (axis_y * axis_y) <= 1.0;
}

PhantomSpec default_phantom_spec(int height, int width, int echoes) {
  PhantomSpec s;
  s.height = height;
  s.width = width;
  s.echoes = echoes;
  s.regions = {
      {{0.0, 0.0, 0.78, 0.88, 0.0}, 0.55, 60.0},
      {{0.0, 0.02, 0.66, 0.74, 0.0}, 0.70, 90.0},
      {{-0.26, -0.12, 0.18, 0.34, 18.0}, 1.00, 200.0},
      {{0.24, 0.08, 0.16, 0.30, -18.0}, 0.85, 120.0},
      {{0.02, 0.50, 0.24, 0.11, 0.0}, 0.40, 30.0},
  };
  return s;
}

std::vector<std::string> validate(const PhantomSpec& spec) {
  std::vector<std::string> out;
  if (spec.height <= 0 || spec.width <= 0 || spec.echoes <= 0) {
    out.push_back("phantom dimensions must be positive");
  }
  if (!(spec.delta_te_ms > 0)) out.push_back("delta_te_ms must be positive");
  if (spec.supersample < 1) out.push_back("supersample must be at least 1");
  for (std::size_t i = 0; i < spec.regions.size(); ++i) {
    const auto& r = spec.regions[i];
    const std::string tag = "region " + std::to_string(i);
    if (!(r.t2_ms > 0)) out.push_back(tag + ": t2 must be positive");
    if (!(r.proton_density >= 0)) out.push_back(tag + ": proton density must be nonnegative");
    if (!(r.ellipse.axis_x > 0 && r.ellipse.axis_y > 0)) {
      out.push_back(tag + ": ellipse axes must be positive");
    }
  }
  return out;
}

MultiEchoImage generate_phantom(const PhantomSpec& spec) {
  require_valid(validate(spec), "generate_phantom");
  MultiEchoImage img(spec.height, spec.width, spec.echoes);
  std::vector<std::vector<double>> decay(spec.regions.size(), std::vector<double>(spec.echoes));
  for (std::size_t k = 0; k < spec.regions.size(); ++k) {
    const auto& region = spec.regions[k];
    for (int e = 0; e < spec.echoes; ++e) {
      decay[k][e] = region.proton_density * std::exp(-(e + 1) * spec.delta_te_ms / region.t2_ms);
    }
  }
  const int s = spec.supersample;
  const double weight = 1.0 / (s * s);
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      for (int sr = 0; sr < s; ++sr) {
        const double y = (r + (sr + 0.5) / s) / spec.height * 2.0 - 1.0;
        for (int sc = 0; sc < s; ++sc) {
          const double x = (c + (sc + 0.5) / s) / spec.width * 2.0 - 1.0;
          // Later regions paint over earlier ones.
          int top = -1;
          for (std::size_t k = 0; k < spec.regions.size(); ++k) {
            if (spec.regions[k].ellipse.contains(x, y)) top = static_cast<int>(k);
          }
          if (top < 0) continue;
          for (int e = 0; e < spec.echoes; ++e) img.at(r, c, e) += weight * decay[top][e];
        }
      }
    }
  }
  return img;
}

KSpaceData simulate_acquisition(const MultiEchoImage& truth, const SamplingMask& mask,
                                double noise_sigma, std::uint64_t seed) {
  if (!(noise_sigma >= 0)) throw InvalidArgument("simulate_acquisition: sigma must be nonnegative");
  KSpaceData y = apply_forward(truth, mask);
  if (noise_sigma == 0.0) return y;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  for (auto& v : y.samples()) {
    const double re = noise(rng);
    const double im = noise(rng);
    v += Complex(re, im);
  }
  return y;
}

namespace {

double snr_from_sums(double ref_sq, double err_sq) {
  if (err_sq == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ref_sq / err_sq);
}

}  // namespace

double snr_db(const MultiEchoImage& reference, const MultiEchoImage& reconstruction) {
  if (!(reference.shape() == reconstruction.shape())) {
    throw InvalidArgument("snr_db: shape mismatch");
  }
  double ref_sq = 0.0;
  double err_sq = 0.0;
  for (std::size_t i = 0; i < reference.data().size(); ++i) {
    const double r = reference.data()[i];
    const double d = r - reconstruction.data()[i];
    ref_sq += r * r;
    err_sq += d * d;
  }
  if (ref_sq == 0.0) throw InvalidArgument("snr_db: reference image is zero");
  return snr_from_sums(ref_sq, err_sq);
}

std::vector<double> snr_db_per_echo(const MultiEchoImage& reference,
                                    const MultiEchoImage& reconstruction) {
  if (!(reference.shape() == reconstruction.shape())) {
    throw InvalidArgument("snr_db_per_echo: shape mismatch");
  }
  std::vector<double> out;
  for (int e = 0; e < reference.echoes(); ++e) {
    double ref_sq = 0.0;
    double err_sq = 0.0;
    auto a = reference.echo(e);
    auto b = reconstruction.echo(e);
    for (std::size_t i = 0; i < a.size(); ++i) {
      ref_sq += a[i] * a[i];
      err_sq += (a[i] - b[i]) * (a[i] - b[i]);
    }
    if (ref_sq == 0.0) throw InvalidArgument("snr_db_per_echo: reference echo is zero");
    out.push_back(snr_from_sums(ref_sq, err_sq));
  }
  return out;
}

}  // namespace mecho
