#include "tropcap/bigint.hpp"

#include "tropcap/errors.hpp"

namespace tropcap {

BigInt binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt result = 1;
    for (std::uint64_t i = 0; i < k; ++i) {
        result *= (n - i);
        result /= (i + 1);
    }
    return result;
}

BigInt zaslavsky_phi(std::uint64_t n, std::uint64_t d) {
    // Running term C(n, j) updated in place; stops early once j > n.
    BigInt total = 0;
    BigInt term = 1;
    for (std::uint64_t j = 0; j <= d && j <= n; ++j) {
        if (j > 0) {
            term *= (n - j + 1);
            term /= j;
        }
        total += term;
    }
    return total;
}

BigInt from_decimal(const std::string& s) {
    if (s.empty() || s.find_first_not_of("-0123456789") != std::string::npos) {
        throw ContractViolation("not a decimal integer: '" + s + "'");
    }
    return BigInt(s);
}

double to_double(const BigInt& v) { return v.convert_to<double>(); }

}  // namespace tropcap
