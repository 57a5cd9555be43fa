#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "srb/tensor.hpp"

namespace srb {

struct GradCheckGroup {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::vector<GradCheckGroup> groups;
};

// Central-difference check of reverse-mode gradients.
//
// build_loss must rebuild the whole forward pass from the current
// parameter values on the tape it is given and return a scalar loss; it
// must be deterministic (dropout off). Analytic gradients come from one
// backward pass; numeric ones are Richardson-extrapolated central
// differences, (4 D(step/2) - D(step)) / 3 with D(h) = (f(p+h) -
// f(p-h)) / (2h) per element. Relative error is
// |a - n| / max(|a|, |n|, 1e-8).
//
// The default base step balances the two double-precision error
// sources for losses of magnitude ~10: smaller bases push forward
// round-off noise (~eps |f| / h) above tolerance against the 1e-8
// floor, larger ones bring back truncation.
GradCheckReport gradient_check(
    const std::function<Tensor(Tape&)>& build_loss,
    const std::vector<std::pair<std::string, Tensor>>& params,
    double step = 4e-3);

}  // namespace srb
