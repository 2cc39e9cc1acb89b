#include "tropcap/census.hpp"

#include <algorithm>
#include <cmath>

#include "tropcap/errors.hpp"
#include "tropcap/random.hpp"

namespace tropcap::arrangement {

std::optional<std::string> sign_key(std::span<const Hyperplane> hyperplanes, const Vector& x) {
    std::string key(hyperplanes.size(), '+');
    const double scale = 1.0 + x.cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < hyperplanes.size(); ++i) {
        const double v = hyperplanes[i].normalized_eval(x);
        if (std::abs(v) <= 1e-12 * (scale + std::abs(hyperplanes[i].offset()))) return std::nullopt;
        if (v < 0) key[i] = '-';
    }
    return key;
}

SamplingDomain make_sampling_domain(std::span<const Hyperplane> structure, const Polyhedron& within,
                                    const CensusOptions& options) {
    SamplingDomain domain;
    domain.dimension = within.dimension();
    domain.within = within;
    std::vector<Hyperplane> all(structure.begin(), structure.end());
    all.insert(all.end(), within.halfspaces().begin(), within.halfspaces().end());
    for (auto& a : flat_anchors(all, domain.dimension, options.max_anchors)) {
        domain.anchors.push_back(std::move(a.point));
        domain.anchor_cones.push_back(std::move(a.directions));
    }
    double extent = 0.0;
    for (const auto& a : domain.anchors) extent = std::max(extent, a.cwiseAbs().maxCoeff());
    domain.anchor_scale = std::max(1.0, extent);
    domain.radius = 2.0 * extent + 1.0;
    if (!within.is_whole_space()) {
        LpOptions lp;
        lp.box_radius = domain.radius;
        lp.max_box_radius = domain.radius;
        const auto f = strict_feasibility(within.halfspaces(), domain.dimension, lp);
        if (!f.feasible) throw EmptyDomain("sampling domain has no interior point");
        domain.interior = f.witness;
    }
    return domain;
}

std::vector<Vector> strata_points(const SamplingDomain& domain, std::uint64_t seed, std::size_t max_points) {
    constexpr std::size_t kScales = 5;
    constexpr Eigen::Index kMaxConeRank = 4;
    std::vector<Vector> out;
    if (domain.anchors.empty()) return out;
    auto keep = [&](Vector p) {
        if (domain.within.contains_strictly(p)) out.push_back(std::move(p));
    };

    if (domain.anchor_cones.size() == domain.anchors.size()) {
        for (std::size_t i = 0; i < domain.anchors.size() && out.size() < max_points; ++i) {
            const Matrix& dirs = domain.anchor_cones[i];
            const Eigen::Index j = dirs.cols();
            if (j == 0 || j > kMaxConeRank) continue;
            for (std::uint32_t mask = 0; mask < (1u << j) && out.size() < max_points; ++mask) {
                Vector s(j);
                for (Eigen::Index c = 0; c < j; ++c) s(c) = (mask >> c & 1u) ? 1.0 : -1.0;
                const Vector step = dirs * s;
                const double len = step.norm();
                if (!(len > 0.0)) continue;
                double r = domain.anchor_scale;
                for (std::size_t k = 0; k < kScales && out.size() < max_points; ++k) {
                    r *= 0.1;
                    keep(domain.anchors[i] + (0.5 * r / len) * step);
                }
            }
        }
    }

    const std::size_t budget = max_points - out.size();
    if (budget == 0) return out;
    // Spread the remaining budget evenly, 4 to 64 points per anchor and scale.
    const std::size_t per_scale = std::clamp<std::size_t>(budget / (domain.anchors.size() * kScales), 4, 64);
    Rng rng = make_rng(seed, "census-strata");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double dim = static_cast<double>(domain.dimension);
    for (const auto& a : domain.anchors) {
        double r = domain.anchor_scale;
        for (std::size_t s = 0; s < kScales; ++s) {
            r *= 0.1;
            for (std::size_t i = 0; i < per_scale; ++i) {
                if (out.size() >= max_points) return out;
                keep(a + r * std::pow(unit(rng), 1.0 / dim) * uniform_sphere(rng, domain.dimension));
            }
        }
    }
    return out;
}

namespace {

std::vector<Vector> box_block(const SamplingDomain& domain, Rng& rng, std::size_t count) {
    std::uniform_real_distribution<double> coord(-domain.radius, domain.radius);
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Vector p(domain.dimension);
        for (Eigen::Index j = 0; j < domain.dimension; ++j) p(j) = coord(rng);
        out.push_back(std::move(p));
    }
    return out;
}

/// One hit-and-run chain inside within ∩ box.
std::vector<Vector> hit_and_run_block(const SamplingDomain& domain, Rng& rng, std::size_t count) {
    constexpr std::size_t kBurnIn = 64;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector x = *domain.interior;
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t step = 0; out.size() < count; ++step) {
        const Vector u = uniform_sphere(rng, domain.dimension);
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < domain.dimension; ++j) {
            if (u(j) == 0.0) continue;
            const double a = (-domain.radius - x(j)) / u(j);
            const double b = (domain.radius - x(j)) / u(j);
            lo = std::max(lo, std::min(a, b));
            hi = std::min(hi, std::max(a, b));
        }
        for (const auto& h : domain.within.halfspaces()) {
            const double slope = h.normal().dot(u);
            const double value = h.eval(x);
            if (slope > 0) lo = std::max(lo, -value / slope);
            else if (slope < 0) hi = std::min(hi, -value / slope);
        }
        if (step > 100 * count + 1000) throw EmptyDomain("hit-and-run found no interior sample");
        if (!(hi > lo)) continue;
        x += (lo + (hi - lo) * unit(rng)) * u;
        if (step >= kBurnIn && domain.within.contains_strictly(x)) out.push_back(x);
    }
    return out;
}

}  // namespace

std::vector<Vector> block_points(const SamplingDomain& domain, std::uint64_t seed, std::size_t block,
                                 std::size_t count) {
    Rng rng = make_rng(seed, "census-block", block);
    if (domain.within.is_whole_space()) return box_block(domain, rng, count);
    return hit_and_run_block(domain, rng, count);
}

namespace {

CensusResult to_result(const std::set<std::string>& keys, std::size_t samples) {
    CensusResult r;
    r.distinct_count = keys.size();
    r.samples = samples;
    for (const auto& k : keys) r.patterns.push_back(sign_vector_from_string(k));
    return r;
}

}  // namespace

CensusResult sampling_region_census(const Arrangement& arr, const Polyhedron& within, std::size_t n_samples,
                                    std::uint64_t seed, const CensusOptions& options) {
    require_dimension(within.dimension(), arr.dimension(), "sampling census: polyhedron");
    if (n_samples == 0) throw ContractViolation("sampling census needs n_samples >= 1");
    const SamplingDomain domain = make_sampling_domain(arr.hyperplanes(), within, options);
    const auto& hs = arr.hyperplanes();
    const auto keys = census_labels(domain, n_samples, seed, options, [&](const Vector& x) { return sign_key(hs, x); });
    return to_result(keys, n_samples);
}

CensusResult sampling_region_census(const Arrangement& arr, std::span<const Vector> points) {
    std::set<std::string> keys;
    for (const auto& p : points) {
        require_dimension(p.size(), arr.dimension(), "sampling census point");
        if (auto k = sign_key(arr.hyperplanes(), p)) keys.insert(std::move(*k));
    }
    return to_result(keys, points.size());
}

}  // namespace tropcap::arrangement
