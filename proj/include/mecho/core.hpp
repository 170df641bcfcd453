#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mecho {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RealPlane = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexPlane = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Error taxonomy. Everything derives from a std exception so callers that do
// not care about the distinction can catch std::exception.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateInput : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Shape {
  int height = 0;
  int width = 0;
  int echoes = 0;

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const { return plane_size() * echoes; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

/// Real-valued stack of echo images. Storage is echo-major, then row-major,
/// which is also the on-disk layout of the MEF format.
class MultiEchoImage {
 public:
  MultiEchoImage() = default;
  MultiEchoImage(int height, int width, int echoes);
  MultiEchoImage(int height, int width, int echoes, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  int echoes() const { return shape_.echoes; }

  double& at(int row, int col, int echo) { return data_[index(row, col, echo)]; }
  double at(int row, int col, int echo) const { return data_[index(row, col, echo)]; }

  std::span<double> echo(int e);
  std::span<const double> echo(int e) const;

  Eigen::Map<RealPlane> plane(int e);
  Eigen::Map<const RealPlane> plane(int e) const;

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const MultiEchoImage&) const = default;

 private:
  std::size_t index(int row, int col, int echo) const {
    return static_cast<std::size_t>(echo) * shape_.plane_size() +
           static_cast<std::size_t>(row) * shape_.width + col;
  }

  Shape shape_{};
  std::vector<double> data_;
};

/// Per-echo set of sampled k-space rows (frequency-encoding lines), stored in
/// unshifted FFT coordinates. The constructor does not validate; use
/// validate() or require_valid().
class SamplingMask {
 public:
  SamplingMask() = default;
  SamplingMask(int height, int width, std::vector<std::vector<int>> lines);

  int height() const { return height_; }
  int width() const { return width_; }
  int echoes() const { return static_cast<int>(lines_.size()); }
  Shape shape() const { return {height_, width_, echoes()}; }

  const std::vector<int>& lines(int echo) const { return lines_[echo]; }
  const std::vector<std::vector<int>>& all_lines() const { return lines_; }

  bool is_sampled(int echo, int row) const;
  std::size_t sample_count() const;
  double sampling_ratio() const;

  /// Row-major H x W boolean view of one echo's mask.
  std::vector<std::uint8_t> boolean_view(int echo) const;

  bool operator==(const SamplingMask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::vector<int>> lines_;
};

/// Complex k-space samples at the positions marked by a mask. Ordering is
/// echo-major, then ascending line index, then ascending column.
class KSpaceData {
 public:
  KSpaceData() = default;
  KSpaceData(SamplingMask mask, std::vector<Complex> samples);

  const SamplingMask& mask() const { return mask_; }
  Shape shape() const { return mask_.shape(); }

  std::span<Complex> echo_samples(int echo);
  std::span<const Complex> echo_samples(int echo) const;

  std::vector<Complex>& samples() { return samples_; }
  const std::vector<Complex>& samples() const { return samples_; }

 private:
  std::size_t echo_offset(int echo) const;

  SamplingMask mask_;
  std::vector<Complex> samples_;
};

/// Per-location multiple-measurement matrix: column c is the vectorized
/// (row-major) patch of echo c.
struct PatchMatrix {
  int location = 0;
  Matrix values;
};

struct Dictionary {
  Matrix atoms;
  int num_atoms() const { return static_cast<int>(atoms.cols()); }
};

struct Transform {
  Matrix matrix;
};

enum class StepOrder { CoefsDictImage, ImageDictCoefs };

struct ReconParams {
  double mu = 1.0;
  double lambda = 0.0;
  double gamma = 0.0;
  int patch_size = 8;
  int patch_stride = 4;
  int max_outer_iters = 50;
  double rel_cost_tol = 1e-4;
  double cg_tol = 1e-8;
  int cg_max_iters = 100;
  int inner_iters = 20;
  int wavelet_levels = 0;  ///< 0 selects the deepest Haar pyramid the image allows
  int cs_max_iters = 200;
  double cs_rel_tol = 1e-6;
  StepOrder order = StepOrder::CoefsDictImage;
  std::uint64_t seed = 0;
};

/// Sum of the Euclidean norms of the rows.
double l21_norm(const Matrix& m);

std::vector<std::string> validate(const MultiEchoImage& image);
std::vector<std::string> validate(const SamplingMask& mask);
std::vector<std::string> validate(const KSpaceData& kspace);
std::vector<std::string> validate(const ReconParams& params, const Shape& shape);

/// Throws InvalidArgument listing every violation when the list is non-empty.
void require_valid(const std::vector<std::string>& violations, const std::string& what);

}  // namespace mecho
