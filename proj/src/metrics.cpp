#include "gos/metrics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace gos {

double normalized_mutual_information(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("NMI: labelings differ in length");
  if (a.empty()) return 1.0;
  const auto n = static_cast<double>(a.size());
  std::map<std::uint32_t, double> pa, pb;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
    joint[{a[i], b[i]}] += 1.0;
  }
  auto entropy = [n](const std::map<std::uint32_t, double>& counts) {
    double h = 0.0;
    for (const auto& [label, c] : counts) h -= (c / n) * std::log(c / n);
    return h;
  };
  const double ha = entropy(pa);
  const double hb = entropy(pb);
  if (ha + hb == 0.0) return 1.0;
  double mi = 0.0;
  for (const auto& [key, c] : joint) mi += (c / n) * std::log(c * n / (pa[key.first] * pb[key.second]));
  return 2.0 * mi / (ha + hb);
}

}  // namespace gos
