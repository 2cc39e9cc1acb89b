#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tropcap/bigint.hpp"
#include "tropcap/capacity.hpp"
#include "tropcap/linalg.hpp"

namespace tropcap::manifold {

enum class Kind { segment, circle, sphere2, affine_patch };
std::string to_string(Kind k);
Kind kind_from_string(const std::string& s);

/// Parametric manifold x = center + frame * s.
///   segment:      s in (-radius, radius), one frame column
///   circle:       s = radius (cos t, sin t), two columns
///   sphere2:      s = radius u, u on S^2, three columns
///   affine_patch: s in the open box prod (-extent_i, extent_i)
struct ManifoldSpec {
    Kind kind = Kind::segment;
    Vector center;
    Matrix frame;  // d_in x m, orthonormal columns
    double radius = 1.0;
    Vector extent;  // affine_patch only

    Eigen::Index ambient_dim() const { return center.size(); }
    int d_eff() const;
    void validate() const;
    /// Euclidean distance from the origin to the closure of the manifold.
    double origin_distance() const;
    bool operator==(const ManifoldSpec&) const = default;
};

/// Segment with the given endpoints.
ManifoldSpec segment(const Vector& p, const Vector& q);
ManifoldSpec circle(const Vector& center, const Matrix& frame, double radius);

/// Uniform in the intrinsic measure, endpoints excluded. Deterministic in seed.
std::vector<Vector> sample_manifold(const ManifoldSpec& m, std::size_t n, std::uint64_t seed);

/// Jittered points around the intersections of `structure` with a flat
/// manifold (segment or patch), in its intrinsic coordinates. Empty for
/// curved kinds.
std::vector<Vector> flat_strata(const ManifoldSpec& m, std::span<const arrangement::Hyperplane> structure,
                                std::size_t max_points, std::uint64_t seed);

using LayerSpec = std::variant<capacity::ExpertSpec, capacity::MoESpec>;

struct EffectiveCapacityReport {
    std::uint64_t distinct_patterns = 0;
    std::uint64_t distinct_coalitions = 0;
    std::uint64_t count_at_90pct = 0;  // plateau diagnostic
    bool plateau = false;
    std::optional<double> spherical_measure;
    std::optional<double> spherical_measure_se;
    BigInt bound_dense;                 // Φ(H, d_eff)
    std::optional<BigInt> bound_closed; // crossing ceiling for circles and spheres
    std::optional<double> bound_moe;    // measure · C(N,k) · Φ(kH, d_eff)
    std::size_t samples = 0;  // uniform samples plus intersection strata
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

struct EffectiveOptions {
    std::size_t measure_samples = 100000;
    double tube_angle = 0.05;
    bool measure = true;  // MoE only: estimate the spherical measure and bound_moe
};

EffectiveCapacityReport effective_census(const LayerSpec& spec, const ManifoldSpec& m, std::size_t n,
                                         std::uint64_t seed, const EffectiveOptions& options = {});

struct SphericalMeasure {
    double volume = 0.0;  // Vol(π(M)) / Vol(S^{d-1}); zero for positive codimension
    double volume_se = 0.0;
    std::optional<double> tube_density;  // positive codimension: tube fraction / tube volume
    std::optional<double> tube_density_se;
    double tube_fraction = 0.0;
    std::optional<double> direct;  // cells met by π(M) over cells met by the sphere
    std::optional<double> direct_se;
    double tube_angle = 0.0;
};

/// Monte-Carlo estimates of the projected manifold's share of the sphere.
/// `router` enables the direct estimator over `routers` isotropic routers
/// with its N and k. Throws Refusal when the manifold meets the origin.
SphericalMeasure spherical_measure(const ManifoldSpec& m, std::size_t n, std::uint64_t seed,
                                   const routing::RouterSpec* router = nullptr, std::size_t routers = 20,
                                   double tube_angle = 0.05);

struct ResilienceRow {
    std::uint64_t seed = 0;
    std::uint64_t dense_patterns = 0;
    std::uint64_t moe_patterns = 0;
    std::uint64_t moe_coalitions = 0;
    double ratio = 0.0;
};

struct ResilienceResult {
    int n = 0, k = 0, width = 0, input_dim = 0;
    std::vector<ResilienceRow> rows;
    double median_dense = 0.0;
    double median_moe = 0.0;
    double median_ratio = 0.0;
    double ceiling = 0.0;  // C(N,k) · k^{d_eff}
    bool rank_deficient = false;
};

/// Dense width-H layer against a Gaussian MoE(N, k, H) on the same manifold
/// for every seed. Flags rank deficiency when kH < d_eff.
ResilienceResult resilience_experiment(int n, int k, int width, const ManifoldSpec& m,
                                       const std::vector<std::uint64_t>& seeds, std::size_t samples);

double median(std::vector<double> v);

}  // namespace tropcap::manifold
