#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "tropcap/linalg.hpp"

namespace tropcap {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a. Used for stream names and content hashes.
std::uint64_t fnv1a64(std::string_view bytes);

/// Seed for a named, indexed sub-stream of a master seed. Changing one
/// stream's usage (e.g. the sample count) never perturbs another stream.
std::uint64_t stream_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view stream, std::uint64_t index = 0) {
    return Rng(stream_seed(master, stream, index));
}

/// i.i.d. N(0, 1) entries, filled row-major so the draw order is fixed.
Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols);
Vector gaussian_vector(Rng& rng, Eigen::Index n);

/// Uniform point on the unit sphere S^{n-1}.
Vector uniform_sphere(Rng& rng, Eigen::Index n);

}  // namespace tropcap
