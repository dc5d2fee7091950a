#pragma once

#include <cstdint>
#include <span>

namespace gos {

/// Normalised mutual information with arithmetic-mean normalisation,
/// 2 I(X;Y) / (H(X) + H(Y)). Two constant labelings score 1.
double normalized_mutual_information(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

}  // namespace gos
