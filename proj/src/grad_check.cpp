#include "avae/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace avae {

namespace {

double eval(const std::function<Var<double>()>& loss) {
  const double v = loss().item();
  if (!std::isfinite(v)) throw NumericError("grad_check: loss is not finite");
  return v;
}

}  // namespace

GradCheckReport grad_check(const std::function<Var<double>()>& loss, Params<double>& params,
                           double step) {
  if (!(step > 0.0)) throw UsageError("grad_check: step must be positive");
  for (auto& p : params) p.zero_grad();
  Var<double> root = loss();
  if (!std::isfinite(root.item())) throw NumericError("grad_check: loss is not finite");
  root.backward(params);

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    const std::size_t n = p.value().size();
    Tensor<double> analytic = p.has_grad() ? *p.grad() : Tensor<double>(p.shape(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double& x = p.mutable_value()[j];
      const double saved = x;
      x = saved + step;
      const double up = eval(loss);
      x = saved - step;
      const double down = eval(loss);
      x = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[j];
      const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.coordinates;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst = "param[" + std::to_string(pi) + "]/" + std::to_string(j);
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace avae
