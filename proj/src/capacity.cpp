#include "tropcap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tropcap/combinatorics.hpp"
#include "tropcap/errors.hpp"
#include "tropcap/parallel.hpp"
#include "tropcap/random.hpp"

namespace tropcap::capacity {

using arrangement::Arrangement;
using arrangement::Hyperplane;
using arrangement::Polyhedron;
using routing::Coalition;

void ExpertSpec::validate() const {
    if (weights.rows() < 1) throw ContractViolation("expert width H must be >= 1");
    if (bias.size() != weights.rows())
        throw ContractViolation("expert bias has " + std::to_string(bias.size()) + " entries, expected " +
                                std::to_string(weights.rows()));
    if (!weights.allFinite() || !bias.allFinite()) throw ContractViolation("expert weights must be finite");
    for (Eigen::Index j = 0; j < weights.rows(); ++j)
        if (weights.row(j).squaredNorm() == 0.0)
            throw ContractViolation("expert neuron " + std::to_string(j) + " has a zero weight row");
}

std::vector<Hyperplane> ExpertSpec::hyperplanes() const {
    std::vector<Hyperplane> out;
    out.reserve(static_cast<std::size_t>(width()));
    for (Eigen::Index j = 0; j < width(); ++j) out.emplace_back(weights.row(j).transpose(), bias(j));
    return out;
}

void MoESpec::validate() const {
    router.validate();
    if (static_cast<Eigen::Index>(experts.size()) != router.experts())
        throw ContractViolation("MoE has " + std::to_string(experts.size()) + " experts but the router has " +
                                std::to_string(router.experts()) + " rows");
    for (const auto& e : experts) {
        e.validate();
        if (e.width() != experts.front().width()) throw ContractViolation("experts must share the width H");
        if (e.input_dim() != router.input_dim())
            throw ContractViolation("expert input dimension differs from the router's");
    }
}

std::vector<Hyperplane> MoESpec::active_hyperplanes(const Coalition& coalition) const {
    std::vector<Hyperplane> out;
    for (int i : coalition) {
        auto hs = experts[static_cast<std::size_t>(i)].hyperplanes();
        out.insert(out.end(), hs.begin(), hs.end());
    }
    return out;
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::dense: return "dense";
        case Mode::top1: return "top1";
        case Mode::topk: return "topk";
    }
    return "unknown";
}

namespace {

std::uint64_t u64(Eigen::Index v) { return static_cast<std::uint64_t>(v); }

std::vector<Hyperplane> router_boundaries(const routing::RouterSpec& r) {
    std::vector<Hyperplane> out;
    for (Eigen::Index i = 0; i < r.experts(); ++i)
        for (Eigen::Index j = i + 1; j < r.experts(); ++j) {
            const Vector w = (r.weights.row(i) - r.weights.row(j)).transpose();
            if (w.squaredNorm() > 0) out.emplace_back(w, r.bias(i) - r.bias(j));
        }
    return out;
}

std::set<std::string> coalition_prefixes(const std::set<std::string>& labels) {
    std::set<std::string> out;
    for (const auto& l : labels) out.insert(l.substr(0, l.find('}') + 1));
    return out;
}

}  // namespace

std::optional<std::string> pattern_label(const MoESpec& moe, const Vector& x) {
    const Vector z = moe.router.weights * x + moe.router.bias;
    const int k = moe.k();
    const auto n = z.size();
    if (k < n) {
        // Skip points within round-off of a routing boundary.
        Vector sorted = z;
        std::sort(sorted.data(), sorted.data() + n, std::greater<>());
        const double gap = sorted(k - 1) - sorted(k);
        if (gap <= 1e-12 * (1.0 + std::abs(sorted(k - 1)))) return std::nullopt;
    }
    const Coalition c = routing::top_k(z, k);
    auto key = arrangement::sign_key(moe.active_hyperplanes(c), x);
    if (!key) return std::nullopt;
    return routing::to_string(c) + *key;
}

PatternCensus moe_pattern_census(const MoESpec& moe, std::size_t n_samples, std::uint64_t seed,
                                 const arrangement::CensusOptions& options) {
    moe.validate();
    if (n_samples == 0) throw ContractViolation("pattern census needs n_samples >= 1");
    std::vector<Hyperplane> structure = router_boundaries(moe.router);
    for (const auto& e : moe.experts) {
        auto hs = e.hyperplanes();
        structure.insert(structure.end(), hs.begin(), hs.end());
    }
    const auto domain = arrangement::make_sampling_domain(structure, Polyhedron::whole_space(moe.input_dim()), options);
    const auto labels = arrangement::census_labels(domain, n_samples, seed, options,
                                                   [&](const Vector& x) { return pattern_label(moe, x); });
    return PatternCensus{labels.size(), coalition_prefixes(labels).size(), n_samples};
}

PatternCensus moe_pattern_census(const MoESpec& moe, std::span<const Vector> points) {
    moe.validate();
    std::set<std::string> labels;
    for (const auto& p : points) {
        require_dimension(p.size(), moe.input_dim(), "pattern census point");
        if (auto l = pattern_label(moe, p)) labels.insert(std::move(*l));
    }
    return PatternCensus{labels.size(), coalition_prefixes(labels).size(), points.size()};
}

CapacityReport count_dense_regions(const ExpertSpec& expert, const Polyhedron& within, const CountOptions& options) {
    expert.validate();
    require_dimension(within.dimension(), expert.input_dim(), "dense count: polyhedron");
    const Eigen::Index h = expert.width();
    const Eigen::Index d = expert.input_dim();
    const Arrangement arr(d, expert.hyperplanes());
    CapacityReport rep;
    rep.mode = Mode::dense;
    rep.bound_upper = zaslavsky_phi(u64(h), u64(d));
    rep.bound_terms["phi(H,d)"] = rep.bound_upper;
    rep.params_active = rep.params_total = u64(h * d);
    const auto gp = arrangement::is_general_position(arr);
    rep.general_position = gp.general;
    rep.general_position_violation = gp.violation;
    std::size_t samples = options.census_samples;
    if (static_cast<std::size_t>(h) <= options.enumeration.n_max) {
        rep.exact_count = arrangement::count_regions(arr, within, options.enumeration);
    } else {
        rep.warnings.push_back("H=" + std::to_string(h) + " exceeds n_max=" +
                               std::to_string(options.enumeration.n_max) + "; census only");
        samples = std::max<std::size_t>(samples, 100000);
    }
    if (samples > 0) {
        const auto c = arrangement::sampling_region_census(arr, within, samples, options.seed, options.census);
        rep.census_count = BigInt(c.distinct_count);
        rep.census_samples = samples;
        if (rep.exact_count && *rep.census_count > *rep.exact_count)
            throw PropertyFailure("dense census " + to_decimal(*rep.census_count) + " exceeds exact count " +
                                  to_decimal(*rep.exact_count));
    }
    return rep;
}

namespace {

CapacityReport count_sliced(const MoESpec& moe, Mode mode, bool include_router_cuts, const CountOptions& options) {
    moe.validate();
    const int n = static_cast<int>(moe.experts_count());
    const int k = moe.k();
    const Eigen::Index h = moe.width();
    const Eigen::Index d = moe.input_dim();
    const std::uint64_t active = u64(k * h);
    const std::uint64_t swaps = static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n - k);
    if (active + swaps > options.enumeration.n_max)
        throw Refusal("per-cell arrangement kH + k(N-k) = " + std::to_string(active + swaps) +
                      " exceeds the exact-mode budget n_max=" + std::to_string(options.enumeration.n_max));

    CapacityReport rep;
    rep.mode = mode;
    const BigInt coalitions = binomial(u64(n), u64(k));
    rep.bound_terms["C(N,k)"] = coalitions;
    rep.bound_terms["phi(kH,d)"] = zaslavsky_phi(active, u64(d));
    rep.bound_terms["phi(kH+k(N-k),d)"] = zaslavsky_phi(active + swaps, u64(d));
    rep.bound_terms["C(N,k)*phi(kH+k(N-k),d)"] = coalitions * rep.bound_terms["phi(kH+k(N-k),d)"];
    if (mode == Mode::top1) {
        rep.bound_terms["phi(H,d)"] = zaslavsky_phi(u64(h), u64(d));
        rep.bound_upper = BigInt(n) * rep.bound_terms["phi(H,d)"];
    } else {
        rep.bound_upper = coalitions * rep.bound_terms["phi(kH,d)"];
    }
    rep.params_active = active * u64(d) + u64(n * d);
    rep.params_total = u64(n * h * d + n * d);
    for (const auto& [i, j] : routing::duplicate_rows(moe.router))
        rep.warnings.push_back("degenerate router: rows " + std::to_string(i) + " and " + std::to_string(j) +
                               " are identical");

    std::vector<Hyperplane> pooled;
    for (const auto& e : moe.experts) {
        auto hs = e.hyperplanes();
        pooled.insert(pooled.end(), hs.begin(), hs.end());
    }
    if (pooled.size() <= 48) {
        const auto gp = arrangement::is_general_position(Arrangement(d, pooled));
        rep.general_position = gp.general;
        rep.general_position_violation = gp.violation;
    }

    const auto cells = routing::enumerate_routing_cells(moe.router, options.cells);
    const auto lp = routing::routing_lp_options(moe.router, options.cells.lp);
    rep.per_cell.resize(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        CellCount& out = rep.per_cell[c];
        out.coalition = cell.coalition;
        const Arrangement local(d, moe.active_hyperplanes(cell.coalition));
        out.count = arrangement::count_regions(local, cell.polyhedron(), options.enumeration);
        if (include_router_cuts) {
            out.essential_facets = arrangement::essential_facets(cell.halfspaces, d, lp).size();
            out.refined_bound = zaslavsky_phi(active + out.essential_facets, u64(d));
        }
    }
    BigInt total = 0;
    BigInt refined = 0;
    for (const auto& pc : rep.per_cell) {
        total += pc.count;
        if (pc.refined_bound) refined += *pc.refined_bound;
    }
    rep.exact_count = total;
    if (include_router_cuts) rep.bound_terms["sum_cells phi(kH+facets,d)"] = refined;

    if (options.census_samples > 0) {
        const auto census = moe_pattern_census(moe, options.census_samples, options.seed, options.census);
        rep.census_count = BigInt(census.distinct_patterns);
        rep.census_samples = options.census_samples;
        rep.distinct_coalitions = census.distinct_coalitions;
        if (*rep.census_count > total)
            throw PropertyFailure("pattern census " + to_decimal(*rep.census_count) + " exceeds the per-cell sum " +
                                  to_decimal(total));
    }
    return rep;
}

}  // namespace

CapacityReport count_top1_regions(const MoESpec& moe, const CountOptions& options) {
    if (moe.k() != 1) throw ContractViolation("count_top1_regions requires k = 1");
    return count_sliced(moe, Mode::top1, true, options);
}

CapacityReport count_topk_regions(const MoESpec& moe, bool include_router_cuts, const CountOptions& options) {
    return count_sliced(moe, Mode::topk, include_router_cuts, options);
}

std::vector<BoundRow> bound_table(int n, int k, int width, int input_dim) {
    if (n < 1 || k < 1 || k > n || width < 1 || input_dim < 1)
        throw ContractViolation("bound table needs N >= 1, 1 <= k <= N, H >= 1, d >= 1");
    const std::uint64_t N = u64(n), K = u64(k), H = u64(width), D = u64(input_dim);
    const BigInt c = binomial(N, K);
    return {
        {"dense", H * D, H * D, zaslavsky_phi(H, D), "Theta(H^d)"},
        {"moe_top1", H * D + N * D, N * H * D + N * D, BigInt(N) * zaslavsky_phi(H, D), "Theta(N * H^d)"},
        {"moe_topk", K * H * D + N * D, N * H * D + N * D, c * zaslavsky_phi(K * H, D),
         "Theta(C(N,k) * (kH)^d)"},
        {"moe_topk_normalized", H * D + N * D, N * H * D + N * D, c * zaslavsky_phi(H, D),
         "Theta(C(N,k) * H^d)"},
    };
}

ExpertSpec random_expert(int width, int input_dim, std::uint64_t seed) {
    if (width < 1 || input_dim < 1) throw ContractViolation("expert needs H >= 1 and d >= 1");
    Rng rng = make_rng(seed, "experts");
    ExpertSpec e;
    e.weights = gaussian_matrix(rng, width, input_dim);
    e.bias = gaussian_vector(rng, width);
    return e;
}

namespace {

std::vector<ExpertSpec> gaussian_experts(int n, int width, int input_dim, std::uint64_t seed) {
    Rng rng = make_rng(seed, "experts");
    std::vector<ExpertSpec> out;
    for (int i = 0; i < n; ++i) {
        ExpertSpec e;
        e.weights = gaussian_matrix(rng, width, input_dim);
        e.bias = gaussian_vector(rng, width);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace

MoESpec lower_bound_construction(int n, int k, int width, int input_dim, std::uint64_t seed) {
    MoESpec m;
    m.router = routing::identity_router(n, k, input_dim);
    m.experts = gaussian_experts(n, width, input_dim, seed);
    m.validate();
    return m;
}

MoESpec random_moe(int n, int k, int width, int input_dim, std::uint64_t seed) {
    MoESpec m;
    Rng rng = make_rng(seed, "router");
    m.router.weights = gaussian_matrix(rng, n, input_dim);
    m.router.bias = gaussian_vector(rng, n);
    m.router.k = k;
    m.experts = gaussian_experts(n, width, input_dim, seed);
    m.validate();
    return m;
}

MoESpec top1_fan_construction(int n, int width, int input_dim, std::uint64_t seed) {
    if (input_dim < 2) throw Refusal("fan construction needs d_in >= 2");
    if (n < 2 || width < 1) throw ContractViolation("fan construction needs N >= 2 and H >= 1");
    MoESpec m;
    m.router.weights = Matrix::Zero(n, input_dim);
    m.router.bias = Vector::Zero(n);
    m.router.k = 1;
    Rng rng = make_rng(seed, "experts");
    const double half_angle = M_PI / n;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * i / n;
        m.router.weights(i, 0) = std::cos(a);
        m.router.weights(i, 1) = std::sin(a);
        // Cell i is the wedge of half-angle pi/N around direction a; the
        // expert's hyperplanes pass through points well inside it.
        Vector center = Vector::Zero(input_dim);
        center(0) = std::cos(a);
        center(1) = std::sin(a);
        const double spread = 0.2 * std::sin(std::min(half_angle, M_PI / 2));
        ExpertSpec e;
        e.weights = gaussian_matrix(rng, width, input_dim);
        e.bias.resize(width);
        for (int j = 0; j < width; ++j) {
            const Vector through = center + spread * gaussian_vector(rng, input_dim);
            e.bias(j) = -e.weights.row(j).dot(through);
        }
        m.experts.push_back(std::move(e));
    }
    m.validate();
    return m;
}

ZonotopeCount zonotope_vertex_count(const Zonotope& z, std::size_t max_generators) {
    if (z.generators.empty()) throw ContractViolation("zonotope needs at least one generator");
    if (z.generators.size() > max_generators)
        throw Refusal(std::to_string(z.generators.size()) + " generators exceeds the zonotope budget " +
                      std::to_string(max_generators));
    const Eigen::Index d = z.generators.front().size();
    std::vector<Hyperplane> central;
    for (const auto& g : z.generators) {
        require_dimension(g.size(), d, "zonotope generator");
        central.emplace_back(g, 0.0);  // rejects zero generators
    }
    const Arrangement arr(d, central);
    arrangement::EnumerationOptions opts;
    opts.n_max = max_generators;
    const auto regions = arrangement::enumerate_regions_detailed(arr, Polyhedron::whole_space(d), opts);
    ZonotopeCount out;
    out.enumerated = BigInt(regions.size());
    const std::uint64_t h = z.generators.size();
    for (std::uint64_t j = 0; j + 1 <= static_cast<std::uint64_t>(d); ++j) out.formula_generic += binomial(h - 1, j);
    out.formula_generic *= 2;
    for (std::uint64_t j = 0; j <= static_cast<std::uint64_t>(d); ++j) out.formula_literal += binomial(h - 1, j);
    out.formula_literal *= 2;
    // Generic: every min(H, d)-subset of generators is independent.
    for (const auto& sub : k_subsets(static_cast<int>(h), static_cast<int>(std::min<std::uint64_t>(h, d)))) {
        Matrix m(static_cast<Eigen::Index>(sub.size()), d);
        for (std::size_t r = 0; r < sub.size(); ++r)
            m.row(static_cast<Eigen::Index>(r)) = z.generators[sub[r]].normalized().transpose();
        Eigen::JacobiSVD<Matrix> svd(m);
        if (svd.singularValues().minCoeff() < 1e-8) out.generic = false;
    }
    for (const auto& r : regions) {
        Vector v = Vector::Zero(d);
        for (std::size_t i = 0; i < central.size(); ++i)
            if (r.signs[i] > 0) v += z.generators[i];
            else v -= z.generators[i];
        out.vertices.push_back(std::move(v));
    }
    std::sort(out.vertices.begin(), out.vertices.end(), [](const Vector& a, const Vector& b) {
        return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
    });
    return out;
}

Zonotope newton_zonotope(const ExpertSpec& expert) {
    expert.validate();
    Zonotope z;
    for (Eigen::Index j = 0; j < expert.width(); ++j) {
        Vector g(expert.input_dim() + 1);
        g.head(expert.input_dim()) = expert.weights.row(j).transpose();
        g(expert.input_dim()) = expert.bias(j);
        z.generators.push_back(std::move(g));
    }
    return z;
}

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ContractViolation("least squares needs >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw ContractViolation("least squares needs distinct abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) f.residuals.push_back(y[i] - (f.intercept + f.slope * x[i]));
    return f;
}

ScalingResult scaling_probe(const ScalingOptions& o) {
    if (o.sweep.size() < 3)
        throw Refusal("scaling probe needs at least 3 sweep points, got " + std::to_string(o.sweep.size()));
    if (o.seeds.empty()) throw ContractViolation("scaling probe needs at least one seed");
    if (o.variable != "H" && o.variable != "N" && o.variable != "k")
        throw ContractViolation("scaling variable must be H, N or k");
    ScalingResult res;
    for (int v : o.sweep) {
        int width = o.width, n = o.experts, k = o.k;
        if (o.variable == "H") width = v;
        if (o.variable == "N") n = v;
        if (o.variable == "k") k = v;
        if (o.mode == Mode::dense) n = k = 1;
        if (o.mode == Mode::top1) k = 1;
        if (o.mode == Mode::topk && o.normalized) width = std::max(1, width / k);
        ScalingPoint pt;
        pt.value = v;
        pt.coalitions = binomial(u64(n), u64(k));
        pt.counts.resize(o.seeds.size());
        parallel_for(o.seeds.size(), [&](std::size_t s) {
            const std::uint64_t seed = o.seeds[s];
            CountOptions co;
            co.enumeration = o.enumeration;
            co.seed = seed;
            double count = 0.0;
            if (o.mode == Mode::dense) {
                const auto e = random_expert(width, o.input_dim, seed);
                const Arrangement arr(o.input_dim, e.hyperplanes());
                const auto whole = Polyhedron::whole_space(o.input_dim);
                count = o.census_samples > 0
                            ? static_cast<double>(
                                  arrangement::sampling_region_census(arr, whole, o.census_samples, seed).distinct_count)
                            : to_double(arrangement::count_regions(arr, whole, o.enumeration));
            } else if (o.mode == Mode::top1) {
                const auto m = top1_fan_construction(n, width, o.input_dim, seed);
                count = o.census_samples > 0
                            ? static_cast<double>(moe_pattern_census(m, o.census_samples, seed).distinct_patterns)
                            : to_double(*count_top1_regions(m, co).exact_count);
            } else {
                const auto m = o.input_dim >= n ? lower_bound_construction(n, k, width, o.input_dim, seed)
                                                : random_moe(n, k, width, o.input_dim, seed);
                count = o.census_samples > 0
                            ? static_cast<double>(moe_pattern_census(m, o.census_samples, seed).distinct_patterns)
                            : to_double(*count_topk_regions(m, false, co).exact_count);
            }
            pt.counts[s] = count;
        });
        for (double c : pt.counts) pt.mean += c;
        pt.mean /= static_cast<double>(pt.counts.size());
        res.points.push_back(std::move(pt));
    }
    std::vector<double> lx, ly, lc;
    for (const auto& p : res.points) {
        lx.push_back(std::log(static_cast<double>(p.value)));
        ly.push_back(std::log(p.mean));
        lc.push_back(std::log(to_double(p.coalitions)));
    }
    const LineFit fit = least_squares(lx, ly);
    res.slope = fit.slope;
    res.intercept = fit.intercept;
    res.residuals = fit.residuals;
    if (o.mode != Mode::dense && std::set<double>(lc.begin(), lc.end()).size() > 1)
        res.slope_vs_coalitions = least_squares(lc, ly).slope;
    return res;
}

}  // namespace tropcap::capacity
