#include "ptq/golden_section.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace ptq {

ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double tolerance, std::size_t max_evaluations) {
  if (lo > hi) std::swap(lo, hi);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  ScalarMinimum result;

  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  result.evaluations = 2;

  while (b - a > tolerance) {
    if (result.evaluations >= max_evaluations) break;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++result.evaluations;
  }
  result.converged = b - a <= tolerance;

  // The endpoints are candidates too: a minimum on the boundary of [lo, hi]
  // is only approached, never sampled, by the interior probes.
  result.x = fc <= fd ? c : d;
  result.fx = std::min(fc, fd);
  for (double edge : {lo, hi}) {
    if (std::abs(result.x - edge) <= tolerance) {
      double fe = f(edge);
      ++result.evaluations;
      if (fe < result.fx) {
        result.x = edge;
        result.fx = fe;
      }
    }
  }
  return result;
}

}  // namespace ptq
