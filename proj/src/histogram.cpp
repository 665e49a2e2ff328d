#include "ptq/histogram.hpp"

#include <algorithm>
#include <cmath>

#include "ptq/error.hpp"

namespace ptq {

Histogram histogram_export(const Tensor& t, std::size_t bins) {
  if (bins < 1) throw Error(Errc::InvalidConfig, "histogram needs at least one bin");
  Histogram h;
  auto data = t.data();
  auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  h.min = *lo;
  h.max = *hi;
  h.counts.assign(bins, 0);
  h.edges.resize(bins + 1);
  const double width = (h.max - h.min) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = h.min + width * static_cast<double>(i);
  h.edges.back() = h.max;
  for (double v : data) {
    std::size_t b = 0;
    if (h.max > h.min) {
      double pos = (v - h.min) / (h.max - h.min) * static_cast<double>(bins);
      b = std::min(bins - 1, static_cast<std::size_t>(pos));
    }
    ++h.counts[b];
  }
  return h;
}

nlohmann::json histogram_to_json(const Histogram& h) {
  return {{"min", h.min}, {"max", h.max}, {"edges", h.edges}, {"counts", h.counts}};
}

}  // namespace ptq
