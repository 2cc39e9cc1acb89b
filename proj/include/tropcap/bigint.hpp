#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

namespace tropcap {

using BigInt = boost::multiprecision::cpp_int;

/// Exact binomial coefficient; zero when k > n.
BigInt binomial(std::uint64_t n, std::uint64_t k);

/// Zaslavsky's function: sum_{j=0}^{d} C(n, j), the region count of a
/// general-position arrangement of n hyperplanes in R^d.
BigInt zaslavsky_phi(std::uint64_t n, std::uint64_t d);

inline std::string to_decimal(const BigInt& v) { return v.str(); }
BigInt from_decimal(const std::string& s);

/// Lossy conversion for ratios and log-fits.
double to_double(const BigInt& v);

}  // namespace tropcap
