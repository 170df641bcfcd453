#include "mecho/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mecho {

std::string to_string(const Shape& s) {
  std::ostringstream os;
  os << s.height << "x" << s.width << "x" << s.echoes;
  return os.str();
}

MultiEchoImage::MultiEchoImage(int height, int width, int echoes)
    : MultiEchoImage(height, width, echoes,
                     std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                             std::max(width, 0) * std::max(echoes, 0),
                                         0.0)) {}

MultiEchoImage::MultiEchoImage(int height, int width, int echoes, std::vector<double> data)
    : shape_{height, width, echoes}, data_(std::move(data)) {
  if (height <= 0 || width <= 0 || echoes <= 0) {
    throw InvalidArgument("MultiEchoImage: dimensions must be positive, got " + to_string(shape_));
  }
  if (data_.size() != shape_.size()) {
    throw InvalidArgument("MultiEchoImage: data length " + std::to_string(data_.size()) +
                          " does not match " + to_string(shape_));
  }
}

std::span<double> MultiEchoImage::echo(int e) {
  return {data_.data() + static_cast<std::size_t>(e) * shape_.plane_size(), shape_.plane_size()};
}

std::span<const double> MultiEchoImage::echo(int e) const {
  return {data_.data() + static_cast<std::size_t>(e) * shape_.plane_size(), shape_.plane_size()};
}

Eigen::Map<RealPlane> MultiEchoImage::plane(int e) {
  return {echo(e).data(), shape_.height, shape_.width};
}

Eigen::Map<const RealPlane> MultiEchoImage::plane(int e) const {
  return {echo(e).data(), shape_.height, shape_.width};
}

SamplingMask::SamplingMask(int height, int width, std::vector<std::vector<int>> lines)
    : height_(height), width_(width), lines_(std::move(lines)) {}

bool SamplingMask::is_sampled(int echo, int row) const {
  const auto& l = lines_[echo];
  return std::binary_search(l.begin(), l.end(), row);
}

std::size_t SamplingMask::sample_count() const {
  std::size_t n = 0;
  for (const auto& l : lines_) n += l.size();
  return n * static_cast<std::size_t>(width_);
}

double SamplingMask::sampling_ratio() const {
  const Shape s = shape();
  return s.size() == 0 ? 0.0 : static_cast<double>(sample_count()) / static_cast<double>(s.size());
}

std::vector<std::uint8_t> SamplingMask::boolean_view(int echo) const {
  std::vector<std::uint8_t> view(static_cast<std::size_t>(height_) * width_, 0);
  for (int row : lines_[echo]) {
    if (row < 0 || row >= height_) continue;
    std::fill_n(view.begin() + static_cast<std::ptrdiff_t>(row) * width_, width_, 1);
  }
  return view;
}

KSpaceData::KSpaceData(SamplingMask mask, std::vector<Complex> samples)
    : mask_(std::move(mask)), samples_(std::move(samples)) {}

std::size_t KSpaceData::echo_offset(int echo) const {
  std::size_t off = 0;
  for (int e = 0; e < echo; ++e) off += mask_.lines(e).size() * static_cast<std::size_t>(mask_.width());
  return off;
}

std::span<Complex> KSpaceData::echo_samples(int echo) {
  return {samples_.data() + echo_offset(echo),
          mask_.lines(echo).size() * static_cast<std::size_t>(mask_.width())};
}

std::span<const Complex> KSpaceData::echo_samples(int echo) const {
  return {samples_.data() + echo_offset(echo),
          mask_.lines(echo).size() * static_cast<std::size_t>(mask_.width())};
}

double l21_norm(const Matrix& m) {
  if (!m.allFinite()) throw InvalidArgument("l21_norm: matrix contains non-finite values");
  return m.rowwise().norm().sum();
}

std::vector<std::string> validate(const MultiEchoImage& image) {
  std::vector<std::string> out;
  const Shape& s = image.shape();
  if (s.height <= 0 || s.width <= 0 || s.echoes <= 0) {
    out.push_back("image dimensions must be positive, got " + to_string(s));
  }
  if (image.data().size() != s.size()) {
    out.push_back("image data length " + std::to_string(image.data().size()) + " != " +
                  std::to_string(s.size()));
    return out;
  }
  const auto& d = image.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) {
      out.push_back("image value at index " + std::to_string(i) + " is not finite");
      break;
    }
  }
  return out;
}

std::vector<std::string> validate(const SamplingMask& mask) {
  std::vector<std::string> out;
  if (mask.height() <= 0 || mask.width() <= 0 || mask.echoes() <= 0) {
    out.push_back("mask dimensions must be positive, got " + to_string(mask.shape()));
    return out;
  }
  for (int e = 0; e < mask.echoes(); ++e) {
    const auto& l = mask.lines(e);
    const std::string tag = "mask echo " + std::to_string(e);
    for (std::size_t k = 0; k < l.size(); ++k) {
      if (l[k] < 0 || l[k] >= mask.height()) {
        out.push_back(tag + ": line index " + std::to_string(l[k]) + " out of range");
        break;
      }
    }
    const bool unsorted = !std::is_sorted(l.begin(), l.end());
    std::vector<int> sorted = l;
    std::sort(sorted.begin(), sorted.end());
    const bool dup = std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
    if (dup) out.push_back(tag + ": duplicated line index");
    if (unsorted) out.push_back(tag + ": line indices not sorted");
  }
  return out;
}

std::vector<std::string> validate(const KSpaceData& kspace) {
  auto out = validate(kspace.mask());
  if (!out.empty()) return out;
  if (kspace.samples().size() != kspace.mask().sample_count()) {
    out.push_back("k-space sample count " + std::to_string(kspace.samples().size()) +
                  " does not match mask count " + std::to_string(kspace.mask().sample_count()));
    return out;
  }
  const auto& s = kspace.samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i].real()) || !std::isfinite(s[i].imag())) {
      out.push_back("k-space sample at index " + std::to_string(i) + " is not finite");
      break;
    }
  }
  return out;
}

std::vector<std::string> validate(const ReconParams& p, const Shape& shape) {
  std::vector<std::string> out;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) out.push_back(msg);
  };
  check(std::isfinite(p.mu) && p.mu >= 0, "mu must be a nonnegative real");
  check(std::isfinite(p.lambda) && p.lambda >= 0, "lambda must be a nonnegative real");
  check(std::isfinite(p.gamma) && p.gamma >= 0, "gamma must be a nonnegative real");
  check(p.patch_size >= 1, "patch_size must be positive");
  check(p.patch_stride >= 1, "patch_stride must be >= 1");
  check(p.patch_size <= std::min(shape.height, shape.width),
        "patch_size " + std::to_string(p.patch_size) + " exceeds image size " + to_string(shape));
  check(p.max_outer_iters >= 1, "max_outer_iters must be positive");
  check(p.rel_cost_tol > 0, "rel_cost_tol must be positive");
  check(p.cg_tol > 0, "cg_tol must be positive");
  check(p.cg_max_iters >= 1, "cg_max_iters must be positive");
  check(p.inner_iters >= 1, "inner_iters must be positive");
  check(p.wavelet_levels >= 0, "wavelet_levels must be nonnegative");
  check(p.cs_max_iters >= 1, "cs_max_iters must be positive");
  check(p.cs_rel_tol > 0, "cs_rel_tol must be positive");
  return out;
}

void require_valid(const std::vector<std::string>& violations, const std::string& what) {
  if (violations.empty()) return;
  std::string msg = what + ": ";
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) msg += "; ";
    msg += violations[i];
  }
  throw InvalidArgument(msg);
}

}  // namespace mecho
