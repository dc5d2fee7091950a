#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "gos/sbm.hpp"
#include "oracles.hpp"

namespace gos::testing {

// Visits every bipartite graph with n_o + n_r <= max_vertices and every
// type-pure partition of it. Returns the number of (graph, partition) cases.
template <typename Visit>
std::size_t for_each_small_case(std::size_t max_vertices, Visit visit) {
  std::size_t cases = 0;
  for (std::size_t n_o = 0; n_o <= max_vertices; ++n_o) {
    for (std::size_t n_r = 0; n_o + n_r <= max_vertices; ++n_r) {
      if (n_o + n_r == 0) continue;
      const std::size_t slots = n_o * n_r;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << slots); ++mask) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> local;
        for (std::size_t k = 0; k < slots; ++k)
          if (mask >> k & 1) local.emplace_back(static_cast<std::uint32_t>(k / n_r), static_cast<std::uint32_t>(k % n_r));
        BipartiteGraph g(n_o, n_r, local);
        oracle::for_each_set_partition(n_o, [&](const std::vector<std::uint32_t>& po) {
          oracle::for_each_set_partition(n_r, [&](const std::vector<std::uint32_t>& pr) {
            std::uint32_t offset = po.empty() ? 0 : *std::max_element(po.begin(), po.end()) + 1;
            std::vector<std::uint32_t> labels(po.begin(), po.end());
            for (auto l : pr) labels.push_back(l + offset);
            visit(g, labels);
            ++cases;
          });
        });
      }
    }
  }
  return cases;
}

}  // namespace gos::testing
