#include "tabletop/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tabletop {

double GradientCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& p : parameters) m = std::max(m, p.max_rel_error);
  return m;
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

GradientCheckReport check_gradients(const std::function<double()>& loss, std::span<const CheckedParameter> params,
                                    const GradientCheckOptions& options,
                                    const std::function<std::uint64_t()>& branch) {
  Rng rng(options.seed);
  const double eps = options.epsilon;
  const std::uint64_t base_branch = branch ? branch() : 0;
  GradientCheckReport report;
  for (const auto& p : params) {
    std::vector<std::size_t> idx(p.values.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (options.max_entries_per_tensor && idx.size() > options.max_entries_per_tensor) {
      rng.shuffle(idx);
      idx.resize(options.max_entries_per_tensor);
      std::sort(idx.begin(), idx.end());
    }
    ParameterCheck pc{p.name};
    for (auto i : idx) {
      const double orig = p.values[i];
      p.values[i] = orig + eps;
      const double lp = loss();
      const bool plus_ok = !branch || branch() == base_branch;
      p.values[i] = orig - eps;
      const double lm = loss();
      const bool minus_ok = !branch || branch() == base_branch;
      p.values[i] = orig;
      if (!std::isfinite(lp) || !std::isfinite(lm)) {
        throw NumericError("gradient check: non-finite loss perturbing " + p.name + "[" + std::to_string(i) + "]");
      }
      if (!plus_ok || !minus_ok) {
        ++pc.skipped;
        continue;
      }
      const double numeric = (lp - lm) / (2.0 * eps);
      pc.max_rel_error = std::max(pc.max_rel_error, relative_error(p.analytic_grad[i], numeric));
      ++pc.checked;
    }
    report.parameters.push_back(std::move(pc));
  }
  return report;
}

GradientCheckReport gradient_check(Network<double>& net, const TensorD& input, std::size_t label,
                                   const GradientCheckOptions& options) {
  net.set_dropout_active(false);
  const auto loss = [&] {
    const auto r = softmax_xent(net.forward(input, Mode::train), label);
    return r.loss;
  };

  net.zero_grad();
  const auto base = softmax_xent(net.forward(input, Mode::train), label);
  if (!std::isfinite(base.loss)) {
    net.set_dropout_active(true);
    throw NumericError("gradient check: non-finite loss at the unperturbed point");
  }
  net.backward(base.dlogits);

  // Snapshot grads: the perturbation passes only run forward, but keep the
  // analytic values independent of any later network state.
  std::vector<std::vector<double>> grads;
  std::vector<CheckedParameter> views;
  for (auto* p : net.parameters()) grads.emplace_back(p->grad.data().begin(), p->grad.data().end());
  std::size_t k = 0;
  for (auto* p : net.parameters()) {
    views.push_back({p->name, p->value.data(), grads[k]});
    ++k;
  }
  net.forward(input, Mode::train);
  auto report = check_gradients(loss, views, options, [&] { return net.branch_signature(); });
  net.set_dropout_active(true);
  return report;
}

}  // namespace tabletop
