#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tropcap/arrangement.hpp"
#include "tropcap/linalg.hpp"

namespace tropcap::routing {

/// Affine router z = W x + b selecting the k largest logits.
struct RouterSpec {
    Matrix weights;  // N x d_in
    Vector bias;     // N
    int k = 1;

    Eigen::Index experts() const { return weights.rows(); }
    Eigen::Index input_dim() const { return weights.cols(); }
    /// Throws ContractViolation unless N >= 2, 1 <= k <= N, sizes agree and
    /// every entry is finite.
    void validate() const;
    bool operator==(const RouterSpec&) const = default;
};

/// Strictly increasing expert indices.
using Coalition = std::vector<int>;

std::string to_string(const Coalition& c);  // "{0,2}"
/// Throws ContractViolation unless c has k strictly increasing entries in [0, n).
void validate_coalition(const Coalition& c, int n, int k);

/// Indices of the k largest entries of z, ascending. Ties at the k-th value
/// go to the lowest index.
Coalition top_k(const Vector& z, int k);
Coalition route_top_k(const RouterSpec& router, const Vector& x);

struct GateVector {
    Vector weights;  // N entries, zero outside `active`
    Coalition active;
};

/// Softmax over the active logits with max subtraction.
GateVector gate_weights(const RouterSpec& router, const Vector& x);
GateVector gate_weights_from_logits(const Vector& z, int k);

/// Pairs (i, j), i < j, of identical router rows (same weights and bias).
std::vector<std::pair<int, int>> duplicate_rows(const RouterSpec& router);

struct RoutingCell {
    Coalition coalition;
    /// One half-space per swap (u in I, v not in I), in (u, v) lexicographic
    /// order: (w_u - w_v)·x + (b_u - b_v) >= 0.
    std::vector<arrangement::Hyperplane> halfspaces;
    std::vector<std::pair<int, int>> swaps;
    arrangement::FeasibilityResult feasibility;
    std::vector<std::string> warnings;

    arrangement::Polyhedron polyhedron() const;
};

/// Half-space box used for routing LPs: certified for the router's pairwise
/// boundaries.
arrangement::LpOptions routing_lp_options(const RouterSpec& router, const arrangement::LpOptions& base = {});

/// Builds the swap half-spaces of I and certifies positive-measure
/// non-emptiness. Swaps between identical rows have no half-space and
/// produce a degeneracy warning; the cell is then lower-dimensional and
/// reported infeasible.
RoutingCell build_routing_cell(const RouterSpec& router, const Coalition& coalition,
                               const arrangement::LpOptions& lp = {});

struct CellOptions {
    std::size_t max_coalitions = 100000;
    arrangement::LpOptions lp;
};

/// Feasible cells in coalition order. Throws Refusal when C(N, k) exceeds
/// the budget.
std::vector<RoutingCell> enumerate_routing_cells(const RouterSpec& router, const CellOptions& options = {});

struct RedundancyFailure {
    Coalition competitor;
    double excess = 0.0;  // max of (S_J - S_I) over the cell, per unit ‖∇‖
};

struct RedundancyReport {
    Coalition coalition;
    std::size_t competitors_checked = 0;
    double max_excess = -std::numeric_limits<double>::infinity();
    std::vector<RedundancyFailure> failures;  // LP excess above 10·eps_lp
    std::size_t sample_points = 0;
    std::size_t sample_violations = 0;  // points where some S_J > S_I
    bool ok() const { return failures.empty() && sample_violations == 0; }
};

/// Checks that every aggregate inequality S_I >= S_J with |I \ J| > 1 is
/// implied by the swap half-spaces of I. Competitors are enumerated when
/// N <= 8 and otherwise sampled (up to `max_sampled` per swap depth).
/// `trials` hit-and-run points inside the cell are also checked directly.
/// Throws ContractViolation when the cell is infeasible.
RedundancyReport verify_redundancy(const RouterSpec& router, const Coalition& coalition, std::size_t trials,
                                   std::uint64_t seed, const arrangement::LpOptions& lp = {},
                                   std::size_t max_sampled = 256);

struct HypersimplexVertex {
    Coalition coalition;
    Vector vertex;  // sum of the member rows of W
    bool is_extreme = false;
};

/// v_I for every coalition and whether it is a vertex of conv{v_J}, decided
/// by an LP over all competitors. Throws Refusal above the budget.
std::vector<HypersimplexVertex> hypersimplex_projection(const RouterSpec& router,
                                                        std::size_t max_coalitions = 100000);

struct FanAdjacency {
    Coalition from;
    Coalition to;
    int swap_out = -1;
    int swap_in = -1;
    std::size_t symmetric_difference = 0;
};

/// For each feasible cell and each non-redundant facet, steps across the
/// facet from a relative-interior point and routes the result. The audit
/// records the neighbouring coalition and |I Δ J|.
std::vector<FanAdjacency> fan_adjacency(const RouterSpec& router, const std::vector<RoutingCell>& cells,
                                        const arrangement::LpOptions& lp = {});

/// W = [I_N | 0], b = 0. Throws Refusal when d_in < N.
RouterSpec identity_router(int n, int k, int input_dim);

}  // namespace tropcap::routing
