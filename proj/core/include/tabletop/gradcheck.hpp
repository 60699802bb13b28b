#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tabletop/network.hpp"

namespace tabletop {

struct ParameterCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  /// Entries whose perturbation flipped a ReLU mask or pooling argmax.
  std::size_t skipped = 0;
};

struct GradientCheckReport {
  std::vector<ParameterCheck> parameters;

  double max_rel_error() const;
  bool passes(double tolerance) const { return max_rel_error() < tolerance; }
};

struct GradientCheckOptions {
  double epsilon = 1e-5;
  /// 0 checks every entry; otherwise a seeded sample of this many per tensor.
  std::size_t max_entries_per_tensor = 0;
  std::uint64_t seed = 0;
};

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

/// One parameter tensor exposed to the generic checker.
struct CheckedParameter {
  std::string name;
  std::span<double> values;
  std::span<const double> analytic_grad;
};

/// Central differences (L(θ+ε) − L(θ−ε)) / 2ε against precomputed analytic
/// gradients. `branch` (optional) identifies the piecewise-linear region of the
/// loss; entries whose ± perturbations leave the region are skipped.
GradientCheckReport check_gradients(const std::function<double()>& loss, std::span<const CheckedParameter> params,
                                    const GradientCheckOptions& options,
                                    const std::function<std::uint64_t()>& branch = {});

/// Full-network check under softmax cross-entropy. Dropout is deactivated for
/// the duration of the check; throws NumericError on a non-finite loss.
GradientCheckReport gradient_check(Network<double>& net, const TensorD& input, std::size_t label,
                                   const GradientCheckOptions& options = {});

}  // namespace tabletop
