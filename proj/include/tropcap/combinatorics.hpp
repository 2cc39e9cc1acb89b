#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tropcap/bigint.hpp"

namespace tropcap {

/// All size-k subsets of {0..n-1} as ascending index lists, in
/// lexicographic order.
std::vector<std::vector<int>> k_subsets(int n, int k);

/// Advances `subset` to its lexicographic successor among size-k subsets of
/// {0..n-1}. Returns false after the last one.
bool next_k_subset(std::vector<int>& subset, int n);

/// C(n, k) as a machine integer, saturating at UINT64_MAX.
std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t k);

}  // namespace tropcap
