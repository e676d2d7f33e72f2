#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "segtron/adam.hpp"
#include "segtron/tensor.hpp"

namespace segtron {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> tensors;
  double max_rel_error = 0.0;

  bool ok(double tolerance) const { return max_rel_error <= tolerance; }
  std::string table() const;  // aligned per-tensor text table
};

// Central differences (step 1e-5 by default) against the provided analytic
// gradients; relative error |a-f| / max(|a|,|f|,1e-8) per entry. The loss
// callable must be a pure, deterministic function of the parameter values.
// Throws NumericError when the loss goes non-finite.
GradCheckReport grad_check(const std::function<double()>& loss, const NamedParams& params,
                           const std::map<std::string, Tensor>& analytic, double step = 1e-5);

}  // namespace segtron
