#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mecho/core.hpp"

namespace mecho {

enum class Method { ZeroFilled, CsAnalysis, DlSparse, DlRowSparse, TlRowSparse };

inline constexpr std::array<Method, 5> kAllMethods = {
    Method::ZeroFilled, Method::CsAnalysis, Method::DlSparse, Method::DlRowSparse,
    Method::TlRowSparse};

std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);
/// "zero_filled, cs_analysis, ..." for diagnostics.
std::string method_names();

/// Display label used in result tables.
std::string_view method_label(Method m);

/// Parameters tuned for the default 64x64x8 phantom.
ReconParams default_params(Method m);

struct ReconOutput {
  MultiEchoImage image;
  std::vector<double> cost_history;
  int iterations = 0;
  double data_residual = 0.0;     ///< ||y - A x||
  double sparsity_penalty = 0.0;  ///< l21 (or l1) of the method's coefficients
  double zero_row_fraction = 0.0;
  double zero_entry_fraction = 0.0;
};

ReconOutput run_method(Method m, const KSpaceData& y, const ReconParams& params);

}  // namespace mecho
