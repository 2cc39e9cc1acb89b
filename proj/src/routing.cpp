#include "tropcap/routing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "tropcap/census.hpp"
#include "tropcap/combinatorics.hpp"
#include "tropcap/errors.hpp"
#include "tropcap/lp.hpp"
#include "tropcap/parallel.hpp"
#include "tropcap/random.hpp"

namespace tropcap::routing {

using arrangement::Hyperplane;

void RouterSpec::validate() const {
    if (weights.rows() < 2) throw ContractViolation("router needs N >= 2 experts");
    if (bias.size() != weights.rows())
        throw ContractViolation("router bias has " + std::to_string(bias.size()) + " entries, expected " +
                                std::to_string(weights.rows()));
    if (weights.cols() < 1) throw ContractViolation("router input dimension must be >= 1");
    if (k < 1 || k > weights.rows())
        throw ContractViolation("router k=" + std::to_string(k) + " outside [1, " + std::to_string(weights.rows()) +
                                "]");
    if (!weights.allFinite() || !bias.allFinite()) throw ContractViolation("router weights must be finite");
}

std::string to_string(const Coalition& c) {
    std::string s = "{";
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(c[i]);
    }
    return s + "}";
}

void validate_coalition(const Coalition& c, int n, int k) {
    if (static_cast<int>(c.size()) != k)
        throw ContractViolation("coalition " + to_string(c) + " must have " + std::to_string(k) + " members");
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] < 0 || c[i] >= n || (i > 0 && c[i] <= c[i - 1]))
            throw ContractViolation("coalition " + to_string(c) + " is not a strictly increasing subset of [0, " +
                                    std::to_string(n) + ")");
    }
}

Coalition top_k(const Vector& z, int k) {
    const int n = static_cast<int>(z.size());
    if (k < 1 || k > n) throw ContractViolation("top_k: k out of range");
    Coalition idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                      [&](int a, int b) { return z(a) > z(b) || (z(a) == z(b) && a < b); });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Coalition route_top_k(const RouterSpec& router, const Vector& x) {
    require_dimension(x.size(), router.input_dim(), "route_top_k input");
    return top_k(router.weights * x + router.bias, router.k);
}

GateVector gate_weights_from_logits(const Vector& z, int k) {
    GateVector g;
    g.active = top_k(z, k);
    g.weights = Vector::Zero(z.size());
    double top = -std::numeric_limits<double>::infinity();
    for (int i : g.active) top = std::max(top, z(i));
    double total = 0.0;
    for (int i : g.active) total += (g.weights(i) = std::exp(z(i) - top));
    for (int i : g.active) g.weights(i) /= total;
    return g;
}

GateVector gate_weights(const RouterSpec& router, const Vector& x) {
    require_dimension(x.size(), router.input_dim(), "gate_weights input");
    return gate_weights_from_logits(router.weights * x + router.bias, router.k);
}

std::vector<std::pair<int, int>> duplicate_rows(const RouterSpec& router) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < router.experts(); ++i)
        for (int j = i + 1; j < router.experts(); ++j)
            if (router.weights.row(i) == router.weights.row(j) && router.bias(i) == router.bias(j))
                out.emplace_back(i, j);
    return out;
}

arrangement::Polyhedron RoutingCell::polyhedron() const {
    const Eigen::Index d = feasibility.witness ? feasibility.witness->size()
                                               : (halfspaces.empty() ? 0 : halfspaces.front().dimension());
    return arrangement::Polyhedron(d, halfspaces);
}

namespace {

std::vector<Hyperplane> pairwise_boundaries(const RouterSpec& router) {
    std::vector<Hyperplane> out;
    for (int i = 0; i < router.experts(); ++i)
        for (int j = i + 1; j < router.experts(); ++j) {
            const Vector w = (router.weights.row(i) - router.weights.row(j)).transpose();
            if (w.squaredNorm() > 0) out.emplace_back(w, router.bias(i) - router.bias(j));
        }
    return out;
}

double coalition_score(const Vector& z, const Coalition& c) {
    double s = 0.0;
    for (int i : c) s += z(i);
    return s;
}

}  // namespace

arrangement::LpOptions routing_lp_options(const RouterSpec& router, const arrangement::LpOptions& base) {
    arrangement::LpOptions lp = base;
    const auto boundaries = pairwise_boundaries(router);
    lp.box_radius = arrangement::certified_box_radius(boundaries, router.input_dim(), base);
    return lp;
}

RoutingCell build_routing_cell(const RouterSpec& router, const Coalition& coalition, const arrangement::LpOptions& lp) {
    router.validate();
    const int n = static_cast<int>(router.experts());
    validate_coalition(coalition, n, router.k);
    RoutingCell cell;
    cell.coalition = coalition;
    std::vector<bool> member(n, false);
    for (int i : coalition) member[i] = true;
    bool empty = false;
    for (int u : coalition) {
        for (int v = 0; v < n; ++v) {
            if (member[v]) continue;
            const Vector w = (router.weights.row(u) - router.weights.row(v)).transpose();
            const double b = router.bias(u) - router.bias(v);
            if (w.squaredNorm() == 0.0) {
                if (b == 0.0) {
                    cell.warnings.push_back("degenerate router: experts " + std::to_string(u) + " and " +
                                            std::to_string(v) + " have identical logits");
                    empty = true;
                } else if (b < 0.0) {
                    empty = true;
                }
                continue;
            }
            cell.halfspaces.emplace_back(w, b);
            cell.swaps.emplace_back(u, v);
        }
    }
    if (empty) {
        cell.feasibility = arrangement::FeasibilityResult{};
        return cell;
    }
    cell.feasibility = arrangement::strict_feasibility(cell.halfspaces, router.input_dim(), lp);
    return cell;
}

std::vector<RoutingCell> enumerate_routing_cells(const RouterSpec& router, const CellOptions& options) {
    router.validate();
    const int n = static_cast<int>(router.experts());
    const std::uint64_t total = binomial_u64(n, router.k);
    if (total > options.max_coalitions)
        throw Refusal("C(" + std::to_string(n) + "," + std::to_string(router.k) + ") = " + std::to_string(total) +
                      " coalitions exceeds the coalition budget " + std::to_string(options.max_coalitions));
    const auto coalitions = k_subsets(n, router.k);
    const auto lp = routing_lp_options(router, options.lp);
    std::vector<RoutingCell> cells(coalitions.size());
    parallel_for(coalitions.size(), [&](std::size_t i) { cells[i] = build_routing_cell(router, coalitions[i], lp); });
    std::vector<RoutingCell> feasible;
    for (auto& c : cells)
        if (c.feasibility.feasible) feasible.push_back(std::move(c));
    return feasible;
}

namespace {

std::vector<Coalition> competitors(const Coalition& coalition, int n, std::uint64_t seed, std::size_t max_sampled) {
    const int k = static_cast<int>(coalition.size());
    auto overlap = [&](const Coalition& j) {
        int common = 0;
        for (int x : j) common += std::binary_search(coalition.begin(), coalition.end(), x);
        return common;
    };
    std::vector<Coalition> out;
    if (n <= 8) {
        for (auto& j : k_subsets(n, k))
            if (k - overlap(j) > 1) out.push_back(std::move(j));
        return out;
    }
    Rng rng = make_rng(seed, "redundancy-competitors");
    std::vector<int> outside;
    for (int i = 0; i < n; ++i)
        if (!std::binary_search(coalition.begin(), coalition.end(), i)) outside.push_back(i);
    std::set<Coalition> seen;
    for (int m = 2; m <= std::min(k, n - k); ++m) {
        std::size_t found = 0;
        for (std::size_t attempt = 0; attempt < 20 * max_sampled && found < max_sampled; ++attempt) {
            Coalition keep = coalition;
            std::shuffle(keep.begin(), keep.end(), rng);
            keep.resize(k - m);
            Coalition add = outside;
            std::shuffle(add.begin(), add.end(), rng);
            keep.insert(keep.end(), add.begin(), add.begin() + m);
            std::sort(keep.begin(), keep.end());
            if (seen.insert(keep).second) {
                out.push_back(keep);
                ++found;
            }
        }
    }
    return out;
}

}  // namespace

RedundancyReport verify_redundancy(const RouterSpec& router, const Coalition& coalition, std::size_t trials,
                                   std::uint64_t seed, const arrangement::LpOptions& lp_base,
                                   std::size_t max_sampled) {
    const auto lp_opts = routing_lp_options(router, lp_base);
    const RoutingCell cell = build_routing_cell(router, coalition, lp_opts);
    if (!cell.feasibility.feasible)
        throw ContractViolation("verify_redundancy: cell " + to_string(coalition) + " is not feasible");
    const int n = static_cast<int>(router.experts());
    const Eigen::Index d = router.input_dim();
    const auto rivals = competitors(coalition, n, seed, max_sampled);

    RedundancyReport report;
    report.coalition = coalition;
    report.competitors_checked = rivals.size();

    // max (S_J - S_I)(x) subject to the swap half-spaces, as A x <= rhs.
    lp::LinearProgram base;
    base.constraints.resize(static_cast<Eigen::Index>(cell.halfspaces.size()), d);
    base.rhs.resize(static_cast<Eigen::Index>(cell.halfspaces.size()));
    for (std::size_t i = 0; i < cell.halfspaces.size(); ++i) {
        base.constraints.row(static_cast<Eigen::Index>(i)) = -cell.halfspaces[i].normal().transpose();
        base.rhs(static_cast<Eigen::Index>(i)) = cell.halfspaces[i].offset();
    }
    base.lower = Vector::Constant(d, -lp_opts.box_radius);
    base.upper = Vector::Constant(d, lp_opts.box_radius);
    Vector sum_i = Vector::Zero(d);
    double bias_i = 0.0;
    for (int i : coalition) {
        sum_i += router.weights.row(i).transpose();
        bias_i += router.bias(i);
    }
    std::vector<double> excess(rivals.size());
    parallel_for(rivals.size(), [&](std::size_t r) {
        lp::LinearProgram program = base;
        Vector sum_j = Vector::Zero(d);
        double bias_j = 0.0;
        for (int j : rivals[r]) {
            sum_j += router.weights.row(j).transpose();
            bias_j += router.bias(j);
        }
        program.objective = sum_j - sum_i;
        const lp::Solution sol = lp::solve(program);
        if (!sol.feasible) throw NumericFailure("redundancy LP infeasible on a feasible cell", -1);
        const double scale = std::max(1.0, program.objective.norm());
        excess[r] = (sol.objective + bias_j - bias_i) / scale;
    });
    for (std::size_t r = 0; r < rivals.size(); ++r) {
        report.max_excess = std::max(report.max_excess, excess[r]);
        if (excess[r] > 10.0 * lp_opts.eps_lp) report.failures.push_back({rivals[r], excess[r]});
    }

    if (trials > 0) {
        arrangement::SamplingDomain domain;
        domain.dimension = d;
        domain.within = cell.polyhedron();
        domain.interior = cell.feasibility.witness;
        domain.radius = 10.0 * (1.0 + cell.feasibility.witness->cwiseAbs().maxCoeff());
        const auto points = arrangement::block_points(domain, stream_seed(seed, "redundancy-samples"), 0, trials);
        for (const auto& x : points) {
            const Vector z = router.weights * x + router.bias;
            const double s_i = coalition_score(z, coalition);
            bool bad = false;
            for (const auto& j : rivals) {
                const double s_j = coalition_score(z, j);
                if (s_j > s_i + 1e-9 * (1.0 + std::abs(s_i))) bad = true;
            }
            report.sample_violations += bad;
        }
        report.sample_points = points.size();
    }
    return report;
}

std::vector<HypersimplexVertex> hypersimplex_projection(const RouterSpec& router, std::size_t max_coalitions) {
    router.validate();
    const int n = static_cast<int>(router.experts());
    const std::uint64_t total = binomial_u64(n, router.k);
    if (total > max_coalitions)
        throw Refusal(std::to_string(total) + " coalitions exceeds the coalition budget " +
                      std::to_string(max_coalitions));
    const auto coalitions = k_subsets(n, router.k);
    std::vector<HypersimplexVertex> out(coalitions.size());
    for (std::size_t i = 0; i < coalitions.size(); ++i) {
        out[i].coalition = coalitions[i];
        out[i].vertex = Vector::Zero(router.input_dim());
        for (int m : coalitions[i]) out[i].vertex += router.weights.row(m).transpose();
    }
    // v_I is extreme iff some direction c has c·(v_I - v_J) > 0 for all J != I.
    arrangement::LpOptions cone;
    cone.box_radius = 1.0;
    cone.max_box_radius = 1.0;
    parallel_for(out.size(), [&](std::size_t i) {
        std::vector<Hyperplane> separating;
        for (std::size_t j = 0; j < out.size(); ++j) {
            if (j == i) continue;
            const Vector diff = out[i].vertex - out[j].vertex;
            if (diff.squaredNorm() == 0.0) return;  // coincident vertex, not extreme
            separating.emplace_back(diff, 0.0);
        }
        out[i].is_extreme = arrangement::strict_feasibility(separating, router.input_dim(), cone).feasible;
    });
    return out;
}

std::vector<FanAdjacency> fan_adjacency(const RouterSpec& router, const std::vector<RoutingCell>& cells,
                                        const arrangement::LpOptions& lp_base) {
    const auto lp = routing_lp_options(router, lp_base);
    std::vector<std::vector<FanAdjacency>> per_cell(cells.size());
    parallel_for(cells.size(), [&](std::size_t c) {
        const auto& cell = cells[c];
        const Eigen::Index d = router.input_dim();
        for (std::size_t f : arrangement::essential_facets(cell.halfspaces, d, lp)) {
            const auto p = arrangement::facet_witness(cell.halfspaces, f, d, lp);
            if (!p) continue;
            const Vector& normal = cell.halfspaces[f].normal();
            const Vector x = *p - 1e-8 * (1.0 + p->cwiseAbs().maxCoeff()) * normal / normal.norm();
            FanAdjacency a;
            a.from = cell.coalition;
            a.to = route_top_k(router, x);
            a.swap_out = cell.swaps[f].first;
            a.swap_in = cell.swaps[f].second;
            std::vector<int> diff;
            std::set_symmetric_difference(a.from.begin(), a.from.end(), a.to.begin(), a.to.end(),
                                          std::back_inserter(diff));
            a.symmetric_difference = diff.size();
            per_cell[c].push_back(std::move(a));
        }
    });
    std::vector<FanAdjacency> out;
    for (auto& v : per_cell)
        for (auto& a : v) out.push_back(std::move(a));
    return out;
}

RouterSpec identity_router(int n, int k, int input_dim) {
    if (input_dim < n)
        throw Refusal("identity router needs d_in >= N to give every coalition a full-dimensional cell (d_in=" +
                      std::to_string(input_dim) + ", N=" + std::to_string(n) + ")");
    RouterSpec r;
    r.weights = Matrix::Zero(n, input_dim);
    r.weights.leftCols(n).setIdentity();
    r.bias = Vector::Zero(n);
    r.k = k;
    r.validate();
    return r;
}

}  // namespace tropcap::routing
