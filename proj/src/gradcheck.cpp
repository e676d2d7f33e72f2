#include "segtron/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "segtron/errors.hpp"

namespace segtron {

std::string GradCheckReport::table() const {
  std::size_t width = 6;
  for (const auto& e : tensors) width = std::max(width, e.name.size());
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-*s  %s\n", static_cast<int>(width), "tensor",
                "max_rel_error");
  out += line;
  for (const auto& e : tensors) {
    std::snprintf(line, sizeof(line), "%-*s  %.3e\n", static_cast<int>(width), e.name.c_str(),
                  e.max_rel_error);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-*s  %.3e\n", static_cast<int>(width), "max",
                max_rel_error);
  out += line;
  return out;
}

GradCheckReport grad_check(const std::function<double()>& loss, const NamedParams& params,
                           const std::map<std::string, Tensor>& analytic, double step) {
  GradCheckReport report;
  for (const auto& [name, param] : params) {
    auto it = analytic.find(name);
    if (it == analytic.end()) {
      throw UsageError("grad_check: no analytic gradient for tensor " + name);
    }
    const Tensor& grad = it->second;
    if (!grad.same_shape(*param)) {
      throw UsageError("grad_check: analytic gradient shape mismatch for " + name);
    }
    GradCheckEntry entry{name, 0.0};
    double* data = param->data();
    for (std::size_t i = 0; i < param->size(); ++i) {
      const double saved = data[i];
      data[i] = saved + step;
      const double plus = loss();
      data[i] = saved - step;
      const double minus = loss();
      data[i] = saved;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        throw NumericError("grad_check: non-finite loss while probing " + name);
      }
      const double fd = (plus - minus) / (2.0 * step);
      const double a = grad.data()[i];
      const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8});
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.tensors.push_back(std::move(entry));
  }
  return report;
}

}  // namespace segtron
