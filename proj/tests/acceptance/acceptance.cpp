// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "../oracles.hpp"
#include "tropcap/arrangement.hpp"
#include "tropcap/capacity.hpp"
#include "tropcap/errors.hpp"
#include "tropcap/manifold.hpp"
#include "tropcap/routing.hpp"
#include "tropcap/tropical.hpp"

using namespace tropcap;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

class Gauss {
public:
    explicit Gauss(std::uint64_t seed) : rng_(seed) {}
    double operator()() { return dist_(rng_); }
    Eigen::VectorXd vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = (*this)();
        return v;
    }
    Eigen::MatrixXd matrix(Eigen::Index r, Eigen::Index c) {
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = (*this)();
        return m;
    }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> dist_;
};

std::uint64_t pascal_binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::vector<std::uint64_t> row(static_cast<std::size_t>(n) + 1, 0);
    row[0] = 1;
    for (int i = 1; i <= n; ++i)
        for (int j = i; j >= 1; --j) row[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j) - 1];
    return row[static_cast<std::size_t>(k)];
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    return sxy / sxx;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v, int digits = 3) {
    std::ostringstream os;
    os.precision(digits);
    os << std::fixed << v;
    return os.str();
}

const auto kWhole2 = arrangement::Polyhedron::whole_space(2);

// 1
Verdict zaslavsky() {
    Verdict v;
    std::size_t trials = 0, bad = 0, non_generic = 0;
    for (int d = 2; d <= 3; ++d) {
        for (int n = 2; n <= 10; ++n) {
            Gauss g(1000 * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(n));
            for (int t = 0; t < 100; ++t, ++trials) {
                std::vector<arrangement::Hyperplane> hs;
                for (int i = 0; i < n; ++i) hs.emplace_back(g.vector(d), g());
                const arrangement::Arrangement arr(d, hs);
                if (!arrangement::is_general_position(arr).general) {
                    ++non_generic;
                    continue;
                }
                const auto count = arrangement::count_regions(arr, arrangement::Polyhedron::whole_space(d));
                if (count != oracle::pascal_phi(n, d)) ++bad;
            }
        }
    }
    v.pass = bad == 0 && non_generic == 0;
    v.detail = std::to_string(trials) + " arrangements, " + std::to_string(bad) + " mismatches, " +
               std::to_string(non_generic) + " not in general position";
    return v;
}

// 2
Verdict degenerate() {
    Verdict v;
    std::size_t bad = 0, cases = 0;
    Gauss g(2);
    for (int d = 1; d <= 3; ++d) {
        for (int n = 1; n <= 12; ++n, cases += 2) {
            const Eigen::VectorXd w = g.vector(d);
            std::vector<arrangement::Hyperplane> par, coin;
            const double c0 = g();
            for (int i = 0; i < n; ++i) {
                par.emplace_back(w, c0 + 0.37 * i);
                const double scale = (i % 2 ? -1.0 : 1.0) * (1.0 + 0.5 * i);
                coin.emplace_back(scale * w, scale * c0);
            }
            const auto all = arrangement::Polyhedron::whole_space(d);
            if (arrangement::count_regions(arrangement::Arrangement(d, par), all) != n + 1) ++bad;
            if (arrangement::count_regions(arrangement::Arrangement(d, coin), all) != 2) ++bad;
        }
    }
    v.pass = bad == 0;
    v.detail = std::to_string(cases) + " parallel/coincident families, " + std::to_string(bad) + " mismatches";
    return v;
}

// 3
Verdict topk_sort() {
    Verdict v;
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick_n(2, 12);
    Gauss g(33);
    std::map<std::pair<int, int>, tropical::Polynomial> sym;
    std::size_t bad = 0, comparisons = 0;
    for (int t = 0; t < 100000; ++t) {
        const int n = pick_n(rng);
        const Eigen::VectorXd z = g.vector(n);
        const auto best = oracle::best_subsets_by_size(z);
        const routing::RouterSpec identity{Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n), 1};
        for (int k = 1; k <= n; ++k, ++comparisons) {
            const double brute = best[static_cast<std::size_t>(k)].sum;
            const double sorted = oracle::sorted_top_k_sum(z, k);
            routing::RouterSpec r = identity;
            r.k = k;
            const auto coalition = routing::route_top_k(r, z);
            std::uint64_t mask = 0;
            for (int i : coalition) mask |= std::uint64_t{1} << i;
            const double tol = 1e-12 * (1.0 + std::abs(brute));
            if (std::abs(brute - sorted) > tol || mask != best[static_cast<std::size_t>(k)].mask) ++bad;
        }
        const int k = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        auto it = sym.find({n, k});
        if (it == sym.end())
            it = sym.emplace(std::make_pair(n, k), tropical::build_sym_trop_k(Eigen::MatrixXd::Identity(n, n),
                                                                              Eigen::VectorXd::Zero(n), k))
                     .first;
        const double poly = it->second.eval(z).value;
        if (std::abs(poly - best[static_cast<std::size_t>(k)].sum) > 1e-12 * (1.0 + std::abs(poly))) ++bad;
    }
    v.pass = bad == 0;
    v.detail = std::to_string(comparisons) + " (vector, k) pairs plus 100000 polynomial evaluations, " +
               std::to_string(bad) + " mismatches";
    return v;
}

// 4
Verdict redundancy() {
    Verdict v;
    std::size_t cells = 0, violations = 0, sample_violations = 0;
    double worst = -1e300;
    for (int t = 0; t < 100; ++t) {
        const int n = 2 + t % 5;
        Gauss g(4000 + static_cast<std::uint64_t>(t));
        const Eigen::MatrixXd w = g.matrix(n, n);
        const Eigen::VectorXd b = g.vector(n);
        for (int k = 1; k <= n; ++k) {
            const routing::RouterSpec router{w, b, k};
            routing::CellOptions o;
            o.lp = routing::routing_lp_options(router);
            for (const auto& cell : routing::enumerate_routing_cells(router, o)) {
                const auto rep = routing::verify_redundancy(router, cell.coalition, 100,
                                                            static_cast<std::uint64_t>(t * 16 + k), o.lp);
                ++cells;
                violations += rep.failures.size();
                sample_violations += rep.sample_violations;
                if (rep.competitors_checked > 0) worst = std::max(worst, rep.max_excess);
            }
        }
    }
    v.pass = violations == 0 && sample_violations == 0;
    v.detail = std::to_string(cells) + " cells over 100 routers, LP violations " + std::to_string(violations) +
               ", sample violations " + std::to_string(sample_violations) + ", max normalized excess " +
               std::to_string(worst);
    return v;
}

// 5
Verdict reachability() {
    Verdict v;
    std::string detail;
    for (int n = 3; n <= 6; ++n) {
        for (int k = 1; k <= n; ++k) {
            const auto router = routing::identity_router(n, k, n);
            routing::CellOptions o;
            o.lp = routing::routing_lp_options(router);
            const auto cells = routing::enumerate_routing_cells(router, o);
            bool witnesses = true;
            for (const auto& c : cells)
                witnesses = witnesses && c.feasibility.witness &&
                            routing::route_top_k(router, *c.feasibility.witness) == c.coalition;
            if (cells.size() != pascal_binomial(n, k) || !witnesses) {
                v.pass = false;
                detail += " N=" + std::to_string(n) + ",k=" + std::to_string(k) + ":" + std::to_string(cells.size());
            }
        }
    }
    v.detail = v.pass ? "C(N,k) cells with routing witnesses for N in 3..6, all k" : "mismatch at" + detail;
    return v;
}

capacity::MoESpec gaussian_moe(int n, int k, int h, int d, std::uint64_t seed) {
    Gauss g(seed);
    capacity::MoESpec m;
    m.router = routing::RouterSpec{g.matrix(n, d), g.vector(n), k};
    for (int i = 0; i < n; ++i) m.experts.push_back(capacity::ExpertSpec{g.matrix(h, d), g.vector(h)});
    return m;
}

// 6
Verdict slicing() {
    Verdict v;
    std::size_t bound_bad = 0, sum_bad = 0, census_bad = 0;
    for (int t = 0; t < 50; ++t) {
        const int n = 2 + t % 4, k = std::min(n, 1 + (t / 4) % 2), h = 1 + (t / 8) % 3;
        const auto moe = gaussian_moe(n, k, h, 2, 6000 + static_cast<std::uint64_t>(t));
        const auto rep = capacity::count_topk_regions(moe, true);
        const std::uint64_t bound = pascal_binomial(n, k) * oracle::pascal_phi(k * h + k * (n - k), 2);
        const BigInt exact = rep.exact_count.value_or(-1);
        if (exact < 0 || exact > bound) ++bound_bad;
        BigInt sum = 0;
        for (const auto& c : rep.per_cell) sum += c.count;
        if (sum != exact) ++sum_bad;
        const auto census = capacity::moe_pattern_census(moe, 1000000, static_cast<std::uint64_t>(t));
        if (BigInt(census.distinct_patterns) != exact) ++census_bad;
    }
    v.pass = bound_bad == 0 && sum_bad == 0 && census_bad == 0;
    v.detail = "50 instances: bound violations " + std::to_string(bound_bad) + ", per-cell sum mismatches " +
               std::to_string(sum_bad) + ", census mismatches " + std::to_string(census_bad);
    return v;
}

// 7
Verdict dense_scaling() {
    Verdict v;
    std::size_t bad = 0, trials = 0;
    for (int h = 1; h <= 12; ++h) {
        for (int t = 0; t < 10; ++t, ++trials) {
            Gauss g(7000 + 100 * static_cast<std::uint64_t>(h) + static_cast<std::uint64_t>(t));
            const capacity::ExpertSpec e{g.matrix(h, 2), g.vector(h)};
            const auto rep = capacity::count_dense_regions(e, kWhole2);
            if (!rep.general_position || !rep.exact_count || *rep.exact_count != oracle::pascal_phi(h, 2)) ++bad;
        }
    }
    capacity::ScalingOptions o;
    o.mode = capacity::Mode::dense;
    o.variable = "H";
    o.sweep = {4, 8, 16, 32};
    o.census_samples = 1000000;
    o.seeds = {0, 1, 2, 3, 4};
    const auto result = capacity::scaling_probe(o);
    std::vector<double> x, y;
    std::string means;
    for (const auto& p : result.points) {
        x.push_back(std::log(p.value));
        y.push_back(std::log(p.mean));
        means += " " + fmt(p.mean, 1);
    }
    const double slope = fit_slope(x, y);
    v.pass = bad == 0 && std::abs(slope - 2.0) <= 0.15;
    v.detail = std::to_string(trials) + " exact instances, " + std::to_string(bad) + " below phi(H,2); census means" +
               means + ", slope " + fmt(slope, 4);
    return v;
}

// 8
Verdict top1_linearity() {
    Verdict v;
    capacity::ScalingOptions o;
    o.mode = capacity::Mode::top1;
    o.variable = "N";
    o.sweep = {2, 4, 8};
    o.width = 3;
    o.input_dim = 2;
    o.seeds.clear();
    for (std::uint64_t s = 0; s < 20; ++s) o.seeds.push_back(s);
    const auto result = capacity::scaling_probe(o);
    std::string detail = "means";
    for (const auto& p : result.points) detail += " " + fmt(p.mean, 2);
    detail += ", ratios";
    for (std::size_t i = 1; i < result.points.size(); ++i) {
        const double ratio = result.points[i].mean / result.points[i - 1].mean;
        detail += " " + fmt(ratio, 3);
        if (std::abs(ratio - 2.0) > 0.3 * 2.0) v.pass = false;
    }
    v.detail = detail;
    return v;
}

// 9
Verdict zonotope() {
    Verdict v;
    std::size_t bad = 0, hull_bad = 0, literal_mismatch = 0, trials = 0;
    for (int t = 0; trials < 50; ++t) {
        Gauss g(9000 + static_cast<std::uint64_t>(t));
        const int d = 2 + t % 2;
        const int h = 2 + (t / 2) % 7;
        capacity::Zonotope z;
        for (int i = 0; i < h; ++i) z.generators.push_back(g.vector(d));
        const auto c = capacity::zonotope_vertex_count(z);
        if (!c.generic) continue;
        ++trials;
        std::uint64_t generic = 0, literal = 0;
        for (int j = 0; j < d; ++j) generic += pascal_binomial(h - 1, j);
        for (int j = 0; j <= d; ++j) literal += pascal_binomial(h - 1, j);
        generic *= 2;
        literal *= 2;
        if (c.enumerated != generic || c.formula_generic != generic) ++bad;
        if (c.enumerated != literal) ++literal_mismatch;
        if (d == 2) {
            std::vector<Eigen::Vector2d> gens;
            for (const auto& gv : z.generators) gens.emplace_back(gv(0), gv(1));
            if (c.enumerated != oracle::hull_vertex_count_2d(oracle::zonotope_corner_candidates(gens))) ++hull_bad;
        }
    }
    v.pass = bad == 0 && hull_bad == 0;
    v.detail = std::to_string(trials) + " generic zonotopes, " + std::to_string(bad) + " formula mismatches, " +
               std::to_string(hull_bad) + " hull mismatches; literal index bound differs in " +
               std::to_string(literal_mismatch) + " (logged)";
    return v;
}

// 10
Verdict softmax() {
    Verdict v;
    std::mt19937_64 rng(10);
    Gauss g(1010);
    std::size_t bad = 0;
    for (int t = 0; t < 100000; ++t) {
        const int n = 2 + static_cast<int>(rng() % 11);
        const Eigen::VectorXd z = 3.0 * g.vector(n);
        const double m = z.maxCoeff();
        Eigen::VectorXd p(n);
        double s = 0;
        for (int i = 0; i < n; ++i) s += (p(i) = std::exp(z(i) - m));
        p /= s;
        for (int k = 1; k <= n; ++k) {
            const auto before = routing::top_k(z, k);
            if (routing::top_k(p, k) != before || routing::gate_weights_from_logits(z, k).active != before) ++bad;
        }
    }
    v.pass = bad == 0;
    v.detail = "100000 logit vectors, all k, " + std::to_string(bad) + " set differences";
    return v;
}

// 11
Verdict effective() {
    Verdict v;
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 20; ++s) seeds.push_back(s);

    std::size_t seg_bad = 0, seg_cases = 0;
    for (int h : {2, 4, 8, 16}) {
        for (std::uint64_t s : seeds) {
            Gauss g(11000 + 100 * static_cast<std::uint64_t>(h) + s);
            const capacity::ExpertSpec e{g.matrix(h, 2), g.vector(h)};
            const Eigen::VectorXd p = 1.5 * g.vector(2), q = 1.5 * g.vector(2);
            manifold::EffectiveOptions o;
            o.measure = false;
            const auto rep = manifold::effective_census(e, manifold::segment(p, q), 20000, s, o);
            const int crossings = oracle::segment_crossings(e.weights, e.bias, p, q);
            ++seg_cases;
            if (rep.distinct_patterns != static_cast<std::uint64_t>(crossings) + 1 || crossings > h) ++seg_bad;
        }
    }

    const auto circ = manifold::circle(Eigen::Vector2d(0.5, 0.0), Eigen::MatrixXd::Identity(2, 2), 2.0);
    std::vector<double> x, y;
    std::string circle_medians;
    for (int h : {4, 8, 16, 32}) {
        std::vector<double> counts;
        for (std::uint64_t s : seeds) {
            manifold::EffectiveOptions o;
            o.measure = false;
            counts.push_back(static_cast<double>(
                manifold::effective_census(capacity::random_expert(h, 2, s), circ, 20000, s, o).distinct_patterns));
        }
        const double med = median_of(counts);
        circle_medians += " " + fmt(med, 1);
        x.push_back(std::log(h));
        y.push_back(std::log(med));
    }
    const double slope = fit_slope(x, y);

    const auto seg = manifold::segment(Eigen::Vector2d(-2.0, -0.7), Eigen::Vector2d(2.5, 1.3));
    std::vector<double> ratios;
    for (int n : {2, 4, 6}) {
        const auto r = manifold::resilience_experiment(n, 2, 4, seg, seeds, 20000);
        std::vector<double> per_seed;
        for (const auto& row : r.rows) per_seed.push_back(static_cast<double>(row.moe_patterns) / row.dense_patterns);
        ratios.push_back(median_of(per_seed));
    }
    const bool monotone = ratios[0] < ratios[1] && ratios[1] < ratios[2];

    v.pass = seg_bad == 0 && std::abs(slope - 1.0) <= 0.2 && monotone;
    v.detail = "segment " + std::to_string(seg_cases - seg_bad) + "/" + std::to_string(seg_cases) +
               " exact; circle medians" + circle_medians + " slope " + fmt(slope, 3) + "; resilience medians " +
               fmt(ratios[0]) + " " + fmt(ratios[1]) + " " + fmt(ratios[2]);
    return v;
}

// 12
Verdict determinism() {
    Verdict v;
    const fs::path dir = fs::temp_directory_path() / ("tropcap_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto run = [&](const std::string& name, int threads) {
        const fs::path out = dir / name;
        const std::string cmd = std::string("\"") + TROPCAP_CLI_PATH + "\" verify-all --seed 12 --threads " +
                                std::to_string(threads) + " --out \"" + out.string() + "\" > /dev/null";
        const int status = std::system(cmd.c_str());
        std::ifstream in(out, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return std::make_pair(status, ss.str());
    };
    const auto a = run("first.json", 1);
    const auto b = run("second.json", 1);
    const auto c = run("third.json", 4);
    fs::remove_all(dir);
    v.pass = a.first == 0 && b.first == 0 && c.first == 0 && !a.second.empty() && a.second == b.second &&
             a.second == c.second;
    v.detail = "verify-all twice (and once with 4 threads): exit " + std::to_string(a.first) + "/" +
               std::to_string(b.first) + "/" + std::to_string(c.first) + ", " + std::to_string(a.second.size()) +
               " bytes, " + (a.second == b.second && a.second == c.second ? "identical" : "different");
    return v;
}

struct Criterion {
    int id;
    std::string name;
    double limit_seconds;  // 0: none
    std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "zaslavsky equivalence", 60, zaslavsky},
        {2, "degenerate counting", 0, degenerate},
        {3, "top-k / sort equivalence", 10, topk_sort},
        {4, "swap redundancy", 120, redundancy},
        {5, "reachability construction", 0, reachability},
        {6, "combinatorial slicing", 300, slicing},
        {7, "dense tightness and scaling", 0, dense_scaling},
        {8, "top-1 linearity in N", 0, top1_linearity},
        {9, "zonotope duality", 0, zonotope},
        {10, "softmax rank preservation", 0, softmax},
        {11, "effective capacity", 300, effective},
        {12, "determinism", 0, determinism},
    };
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_seconds > 0 && secs > c.limit_seconds) {
            v.pass = false;
            v.detail += "; time limit " + fmt(c.limit_seconds, 0) + " s exceeded";
        }
        failed += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << v.detail
                  << " [" << fmt(secs, 2) << " s]" << std::endl;
    }
    return failed;
}
