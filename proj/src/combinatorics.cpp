#include "tropcap/combinatorics.hpp"

#include <limits>
#include <numeric>

namespace tropcap {

bool next_k_subset(std::vector<int>& subset, int n) {
    const int k = static_cast<int>(subset.size());
    int i = k - 1;
    while (i >= 0 && subset[i] == n - k + i) --i;
    if (i < 0) return false;
    ++subset[i];
    for (int j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
    return true;
}

std::vector<std::vector<int>> k_subsets(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> s(k);
    std::iota(s.begin(), s.end(), 0);
    do {
        out.push_back(s);
    } while (next_k_subset(s, n));
    return out;
}

std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t k) {
    const BigInt b = binomial(n, k);
    if (b > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    return b.convert_to<std::uint64_t>();
}

}  // namespace tropcap
