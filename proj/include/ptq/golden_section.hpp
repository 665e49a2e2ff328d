#pragma once

#include <cstddef>
#include <functional>

namespace ptq {

struct ScalarMinimum {
  double x = 0.0;
  double fx = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Golden-section search for a unimodal f on [lo, hi]. Stops when the
/// bracket is narrower than `tolerance` or after `max_evaluations` calls.
ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double tolerance, std::size_t max_evaluations);

}  // namespace ptq
