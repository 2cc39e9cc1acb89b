#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tropcap/arrangement.hpp"
#include "tropcap/bigint.hpp"
#include "tropcap/census.hpp"
#include "tropcap/routing.hpp"

namespace tropcap::capacity {

/// One ReLU layer of width H: neuron j is active where w_j·x + b_j > 0.
struct ExpertSpec {
    Matrix weights;  // H x d_in
    Vector bias;     // H

    Eigen::Index width() const { return weights.rows(); }
    Eigen::Index input_dim() const { return weights.cols(); }
    void validate() const;
    std::vector<arrangement::Hyperplane> hyperplanes() const;
    bool operator==(const ExpertSpec&) const = default;
};

struct MoESpec {
    routing::RouterSpec router;
    std::vector<ExpertSpec> experts;

    int k() const { return router.k; }
    Eigen::Index experts_count() const { return static_cast<Eigen::Index>(experts.size()); }
    Eigen::Index width() const { return experts.empty() ? 0 : experts.front().width(); }
    Eigen::Index input_dim() const { return router.input_dim(); }
    void validate() const;
    /// Neuron hyperplanes of the members of `coalition`, ordered by
    /// (expert, neuron).
    std::vector<arrangement::Hyperplane> active_hyperplanes(const routing::Coalition& coalition) const;
    bool operator==(const MoESpec&) const = default;
};

enum class Mode { dense, top1, topk };
std::string to_string(Mode m);

struct CellCount {
    routing::Coalition coalition;
    BigInt count;
    std::size_t essential_facets = 0;   // router facets of the cell
    std::optional<BigInt> refined_bound;  // Φ(kH + facets, d), router-cut mode only
};

struct CapacityReport {
    Mode mode = Mode::dense;
    std::optional<BigInt> exact_count;
    std::optional<BigInt> census_count;
    std::size_t census_samples = 0;
    std::optional<std::uint64_t> distinct_coalitions;  // from the census
    BigInt bound_upper;
    std::map<std::string, BigInt> bound_terms;
    std::vector<CellCount> per_cell;
    std::uint64_t params_active = 0;
    std::uint64_t params_total = 0;
    bool general_position = true;
    std::string general_position_violation;
    std::vector<std::string> warnings;
};

struct CountOptions {
    arrangement::EnumerationOptions enumeration;  // n_max is the per-cell budget
    routing::CellOptions cells;
    std::size_t census_samples = 0;  // 0 disables the cross-check census
    std::uint64_t seed = 0;
    arrangement::CensusOptions census;
};

/// Regions of one expert's arrangement inside `within`. Above n_max the
/// exact count is skipped and a census (at least 10^5 samples) runs instead.
CapacityReport count_dense_regions(const ExpertSpec& expert, const arrangement::Polyhedron& within,
                                   const CountOptions& options = {});

/// Sum over feasible routing cells of the regions cut by the active experts'
/// hyperplanes inside the cell. Requires router.k == 1.
CapacityReport count_top1_regions(const MoESpec& moe, const CountOptions& options = {});

/// Same decomposition for any k. With router cuts the per-cell refined
/// bound Φ(kH + facets, d) is also reported.
CapacityReport count_topk_regions(const MoESpec& moe, bool include_router_cuts, const CountOptions& options = {});

/// "{i,j}" coalition followed by the active sign pattern, or nullopt at a
/// routing tie or on a neuron boundary.
std::optional<std::string> pattern_label(const MoESpec& moe, const Vector& x);

struct PatternCensus {
    std::uint64_t distinct_patterns = 0;
    std::uint64_t distinct_coalitions = 0;
    std::size_t samples = 0;
};

/// Distinct activation patterns of the MoE over box samples covering every
/// expert and router intersection flat.
PatternCensus moe_pattern_census(const MoESpec& moe, std::size_t n_samples, std::uint64_t seed,
                                 const arrangement::CensusOptions& options = {});
/// Same over an explicit point set.
PatternCensus moe_pattern_census(const MoESpec& moe, std::span<const Vector> points);

struct BoundRow {
    std::string model;
    std::uint64_t params_active = 0;
    std::uint64_t params_total = 0;
    BigInt capacity;
    std::string asymptotic;
};

/// Dense, Top-1, Top-k and normalized Top-k rows of the comparison table.
std::vector<BoundRow> bound_table(int n, int k, int width, int input_dim);

/// W_r = [I_N | 0], b_r = 0, Gaussian experts from the "experts" stream.
/// Throws Refusal when d_in < N.
MoESpec lower_bound_construction(int n, int k, int width, int input_dim, std::uint64_t seed);

/// Gaussian router and experts from the "router" and "experts" streams.
MoESpec random_moe(int n, int k, int width, int input_dim, std::uint64_t seed);
ExpertSpec random_expert(int width, int input_dim, std::uint64_t seed);

/// Top-1 layer whose router directions are spread evenly over the unit
/// circle of the first two coordinates (b_r = 0) and whose expert i places
/// its hyperplanes through points clustered deep inside cell i.
MoESpec top1_fan_construction(int n, int width, int input_dim, std::uint64_t seed);

struct Zonotope {
    std::vector<Vector> generators;
};

struct ZonotopeCount {
    BigInt enumerated;       // vertices, from the regions of the central arrangement
    BigInt formula_generic;  // 2 Σ_{j<d} C(H-1, j)
    BigInt formula_literal;  // 2 Σ_{j<=d} C(H-1, j)
    bool generic = true;
    std::vector<Vector> vertices;  // sorted lexicographically
};

/// Throws Refusal above `max_generators`.
ZonotopeCount zonotope_vertex_count(const Zonotope& z, std::size_t max_generators = 16);

/// Generators [w_j; b_j] in R^{d+1}.
Zonotope newton_zonotope(const ExpertSpec& expert);

struct ScalingOptions {
    Mode mode = Mode::dense;
    std::string variable = "H";  // H, N or k
    std::vector<int> sweep;
    int width = 4;
    int experts = 4;
    int k = 1;
    int input_dim = 2;
    std::vector<std::uint64_t> seeds{0};
    std::size_t census_samples = 0;  // 0: exact counting
    bool normalized = false;         // topk: expert width H / k
    arrangement::EnumerationOptions enumeration;
};

struct ScalingPoint {
    int value = 0;
    std::vector<double> counts;  // per seed
    double mean = 0.0;
    BigInt coalitions;  // C(N, k)
};

struct ScalingResult {
    std::vector<ScalingPoint> points;
    double slope = 0.0;  // log mean count against log value
    double intercept = 0.0;
    std::vector<double> residuals;
    std::optional<double> slope_vs_coalitions;  // log mean count against log C(N, k)
};

/// Throws Refusal with fewer than three sweep points.
ScalingResult scaling_probe(const ScalingOptions& options);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> residuals;
};
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tropcap::capacity
