#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tropcap/arrangement.hpp"
#include "tropcap/parallel.hpp"

namespace tropcap::arrangement {

/// Where census samples come from. Points are drawn uniformly from the box
/// [-radius, radius]^d when `within` is all of R^d, otherwise by hit-and-run
/// inside within ∩ box. Anchor strata add small multi-scale clouds around
/// every intersection flat of the structure, so that thin regions near
/// vertices are still hit.
struct SamplingDomain {
    Eigen::Index dimension = 0;
    Polyhedron within{1};
    double radius = 1.0;
    std::vector<Vector> anchors;
    std::vector<Matrix> anchor_cones;  // parallel to anchors when present, see FlatAnchor
    double anchor_scale = 1.0;
    std::optional<Vector> interior;  // hit-and-run start
};

struct CensusOptions {
    bool anchor_strata = true;
    std::size_t block_size = 1 << 16;
    std::size_t max_anchors = 20000;
};

/// Builds a domain whose box contains every intersection flat anchor of
/// `structure` (and of within's faces). Throws EmptyDomain when `within`
/// has no interior point inside the box.
SamplingDomain make_sampling_domain(std::span<const Hyperplane> structure, const Polyhedron& within,
                                    const CensusOptions& options = {});

/// Anchor strata, filtered to within: one point in every local cone of
/// each anchor with at most 4 defining hyperplanes, then random jitter.
/// Deterministic in `seed`.
std::vector<Vector> strata_points(const SamplingDomain& domain, std::uint64_t seed, std::size_t max_points);

/// `count` points of block `block`; each block uses its own RNG stream so a
/// block's content does not depend on how many blocks are drawn.
std::vector<Vector> block_points(const SamplingDomain& domain, std::uint64_t seed, std::size_t block,
                                 std::size_t count);

/// Distinct labels over n_samples points of the domain. Up to half the
/// budget goes to anchor strata (when enabled), the rest to uniform blocks.
/// `label(x)` returns std::nullopt for points to skip (on a boundary).
template <class Label>
std::set<std::string> census_labels(const SamplingDomain& domain, std::size_t n_samples, std::uint64_t seed,
                                    const CensusOptions& options, Label&& label) {
    std::vector<Vector> strata;
    if (options.anchor_strata) strata = strata_points(domain, seed, n_samples / 2);
    const std::size_t uniform = n_samples - std::min(n_samples, strata.size());
    const std::size_t blocks = (uniform + options.block_size - 1) / options.block_size;

    std::vector<std::set<std::string>> found(blocks + 1);
    for (const auto& p : strata)
        if (auto key = label(p)) found[blocks].insert(std::move(*key));
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t count = std::min(options.block_size, uniform - b * options.block_size);
        for (const auto& p : block_points(domain, seed, b, count))
            if (auto key = label(p)) found[b].insert(std::move(*key));
    });
    std::set<std::string> merged;
    for (auto& s : found) merged.merge(s);
    return merged;
}

struct CensusResult {
    std::uint64_t distinct_count = 0;
    std::vector<SignVector> patterns;  // sorted
    std::size_t samples = 0;
};

/// Distinct sign vectors among sampled points of `within`; never exceeds
/// count_regions. Deterministic given the seed.
CensusResult sampling_region_census(const Arrangement& arr, const Polyhedron& within, std::size_t n_samples,
                                    std::uint64_t seed, const CensusOptions& options = {});

/// Same census over an explicit sample set (e.g. manifold samples).
CensusResult sampling_region_census(const Arrangement& arr, std::span<const Vector> points);

/// '+'/'-' key of x, or nullopt when x is within round-off of a hyperplane.
std::optional<std::string> sign_key(std::span<const Hyperplane> hyperplanes, const Vector& x);

}  // namespace tropcap::arrangement
