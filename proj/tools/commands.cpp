#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "tropcap/arrangement.hpp"
#include "tropcap/capacity.hpp"
#include "tropcap/combinatorics.hpp"
#include "tropcap/errors.hpp"
#include "tropcap/manifold.hpp"
#include "tropcap/random.hpp"
#include "tropcap/routing.hpp"

#ifndef TROPCAP_FIXTURE_DIR
#define TROPCAP_FIXTURE_DIR "fixtures"
#endif

namespace tropcap::cli {

namespace fs = std::filesystem;
using capacity::ExpertSpec;
using capacity::MoESpec;
using routing::RouterSpec;

namespace {

class Timer {
public:
    explicit Timer(std::vector<Stage>& stages) : stages_(stages), start_(std::chrono::steady_clock::now()) {}
    void lap(const std::string& name) {
        const auto now = std::chrono::steady_clock::now();
        stages_.push_back({name, std::chrono::duration<double>(now - start_).count()});
        start_ = now;
    }

private:
    std::vector<Stage>& stages_;
    std::chrono::steady_clock::time_point start_;
};

template <class T>
T param(const Request& r, const char* key, T fallback) {
    if (!r.params.contains(key) || r.params[key].is_null()) return fallback;
    try {
        return r.params[key].get<T>();
    } catch (const Json::exception&) {
        throw ContractViolation(std::string("parameter '") + key + "' has the wrong type");
    }
}

int positive_param(const Request& r, const char* key, int fallback) {
    const int v = param<int>(r, key, fallback);
    if (v < 1) throw ContractViolation(std::string("parameter '") + key + "' must be >= 1");
    return v;
}

std::vector<std::uint64_t> seed_list(const Request& r, std::size_t fallback_count) {
    std::vector<std::uint64_t> seeds;
    if (r.params.contains("seeds") && r.params["seeds"].is_array()) {
        for (const auto& s : r.params["seeds"]) seeds.push_back(s.get<std::uint64_t>());
    } else {
        const auto n = param<std::size_t>(r, "seeds", fallback_count);
        for (std::size_t i = 0; i < n; ++i) seeds.push_back(r.seed + i);
    }
    if (seeds.empty()) throw ContractViolation("at least one seed is required");
    return seeds;
}

const Json& require_spec(const Request& r) {
    if (r.spec.is_null()) throw ContractViolation(r.command + " requires --spec");
    return r.spec;
}

capacity::CountOptions count_options(const Request& r) {
    capacity::CountOptions o;
    o.enumeration.n_max = r.budgets.n_max;
    o.enumeration.seed = r.seed;
    o.cells.max_coalitions = r.budgets.coalitions;
    o.census_samples = r.samples.value_or(0);
    o.seed = r.seed;
    return o;
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from) {
    to.insert(to.end(), from.begin(), from.end());
}

RouterSpec router_of(const Json& spec) {
    const std::string kind = io::spec_kind(spec);
    if (kind == "router") return io::router_from_json(spec);
    if (kind == "moe") return io::moe_from_json(spec).router;
    throw ContractViolation("expected a router or moe spec, got " + kind);
}

ExpertSpec expert_from_arrangement(const arrangement::Arrangement& arr) {
    if (arr.size() == 0) throw ContractViolation("arrangement has no hyperplanes");
    ExpertSpec e;
    e.weights.resize(static_cast<Eigen::Index>(arr.size()), arr.dimension());
    e.bias.resize(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        e.weights.row(idx) = arr.hyperplanes()[i].normal().transpose();
        e.bias(idx) = arr.hyperplanes()[i].offset();
    }
    e.validate();
    return e;
}

Outcome count_regions_cmd(const Request& r) {
    Outcome out;
    Timer timer(out.stages);
    const Json& spec = require_spec(r);
    const std::string kind = io::spec_kind(spec);
    const auto opts = count_options(r);
    capacity::CapacityReport report;
    if (kind == "arrangement" || kind == "expert") {
        const ExpertSpec e =
            kind == "expert" ? io::expert_from_json(spec) : expert_from_arrangement(io::arrangement_from_json(spec));
        timer.lap("load");
        report = capacity::count_dense_regions(e, arrangement::Polyhedron::whole_space(e.input_dim()), opts);
    } else if (kind == "moe") {
        const MoESpec moe = io::moe_from_json(spec);
        timer.lap("load");
        const bool cuts = param<bool>(r, "include_router_cuts", true);
        report = (moe.k() == 1 && !cuts) ? capacity::count_top1_regions(moe, opts)
                                         : capacity::count_topk_regions(moe, cuts, opts);
    } else {
        throw ContractViolation("count-regions expects an arrangement, expert or moe spec, got " + kind);
    }
    timer.lap("count");
    out.report = io::to_json(report);
    out.report["spec_hash"] = io::content_hash(spec);
    out.table = "per_cell";
    append(out.warnings, report.warnings);
    if (!report.general_position) out.warnings.push_back("DEGENERATE: " + report.general_position_violation);
    return out;
}

Outcome enumerate_cells_cmd(const Request& r) {
    Outcome out;
    Timer timer(out.stages);
    const RouterSpec router = router_of(require_spec(r));
    timer.lap("load");
    routing::CellOptions opts;
    opts.max_coalitions = r.budgets.coalitions;
    opts.lp = routing::routing_lp_options(router);
    const auto cells = routing::enumerate_routing_cells(router, opts);
    timer.lap("cells");

    Json rows = Json::array();
    for (const auto& c : cells) {
        rows.push_back(io::to_json(c));
        for (const auto& w : c.warnings) out.warnings.push_back(routing::to_string(c.coalition) + ": " + w);
    }
    Json dup = Json::array();
    for (const auto& [i, j] : routing::duplicate_rows(router)) {
        dup.push_back(Json{i, j});
        out.warnings.push_back("DUPLICATE_ROUTER_ROWS: " + std::to_string(i) + "," + std::to_string(j));
    }
    out.report = Json{{"N", router.experts()},
                      {"k", router.k},
                      {"d_in", router.input_dim()},
                      {"coalitions_total", io::big_json(binomial(static_cast<std::uint64_t>(router.experts()),
                                                                 static_cast<std::uint64_t>(router.k)))},
                      {"feasible_cells", cells.size()},
                      {"duplicate_rows", dup},
                      {"cells", rows},
                      {"spec_hash", io::content_hash(r.spec)}};
    if (param<bool>(r, "adjacency", true)) {
        Json adj = Json::array();
        for (const auto& a : routing::fan_adjacency(router, cells, opts.lp)) adj.push_back(io::to_json(a));
        out.report["adjacency"] = adj;
        timer.lap("adjacency");
    }
    if (param<bool>(r, "hypersimplex", false)) {
        Json hs = Json::array();
        for (const auto& v : routing::hypersimplex_projection(router, r.budgets.coalitions))
            hs.push_back(io::to_json(v));
        out.report["hypersimplex"] = hs;
        timer.lap("hypersimplex");
    }
    out.table = "cells";
    return out;
}

Outcome bounds_cmd(const Request& r) {
    Outcome out;
    Timer timer(out.stages);
    const int n = positive_param(r, "N", 8), k = positive_param(r, "k", 2), h = positive_param(r, "H", 8),
              d = positive_param(r, "d", 2);
    if (k > n) throw ContractViolation("k must not exceed N");
    Json rows = Json::array();
    for (const auto& row : capacity::bound_table(n, k, h, d)) rows.push_back(io::to_json(row));
    out.report = Json{{"N", n}, {"k", k}, {"H", h}, {"d", d}, {"rows", rows}};
    timer.lap("bounds");
    return out;
}

Outcome verify_redundancy_cmd(const Request& r) {
    Outcome out;
    Timer timer(out.stages);
    const RouterSpec router = router_of(require_spec(r));
    const auto lp = routing::routing_lp_options(router);
    const auto trials = param<std::size_t>(r, "trials", r.samples.value_or(1000));
    std::vector<routing::Coalition> targets;
    if (r.params.contains("coalition") && !r.params["coalition"].is_null()) {
        targets.push_back(param<routing::Coalition>(r, "coalition", {}));
        routing::validate_coalition(targets.back(), static_cast<int>(router.experts()), router.k);
    } else {
        routing::CellOptions opts;
        opts.max_coalitions = r.budgets.coalitions;
        opts.lp = lp;
        for (const auto& c : routing::enumerate_routing_cells(router, opts)) targets.push_back(c.coalition);
    }
    timer.lap("cells");
    Json rows = Json::array();
    std::size_t violations = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto rep = routing::verify_redundancy(router, targets[i], trials, r.seed + i, lp);
        violations += rep.failures.size() + rep.sample_violations;
        for (const auto& f : rep.failures)
            out.warnings.push_back("REDUNDANCY_VIOLATION: " + routing::to_string(rep.coalition) + " vs " +
                                   routing::to_string(f.competitor));
        rows.push_back(io::to_json(rep));
    }
    timer.lap("verify");
    out.report = Json{{"rows", rows}, {"violations", violations}, {"ok", violations == 0},
                      {"spec_hash", io::content_hash(r.spec)}};
    if (violations > 0) out.exit_code = 3;
    return out;
}

Outcome zonotope_cmd(const Request& r) {
    Outcome out;
    Timer timer(out.stages);
    const Json& spec = require_spec(r);
    const std::string kind = io::spec_kind(spec);
    capacity::Zonotope z;
    if (kind == "zonotope") z = io::zonotope_from_json(spec);
    else if (kind == "expert") z = capacity::newton_zonotope(io::expert_from_json(spec));
    else throw ContractViolation("zonotope expects a zonotope or expert spec, got " + kind);
    const auto count = capacity::zonotope_vertex_count(z);
    timer.lap("enumerate");
    out.report = io::to_json(count);
    out.report["generators"] = z.generators.size();
    out.report["dimension"] = z.generators.empty() ? 0 : z.generators.front().size();
    out.table = "vertices";
    if (count.enumerated != count.formula_literal)
        out.warnings.push_back("LITERAL_FORMULA_MISMATCH: enumerated " + to_decimal(count.enumerated) +
                               ", literal " + to_decimal(count.formula_literal));
    if (!count.generic) out.warnings.push_back("NONGENERIC_GENERATORS");
    else if (count.enumerated != count.formula_generic)
        throw PropertyFailure("generic zonotope vertex count " + to_decimal(count.enumerated) +
                              " differs from the closed form " + to_decimal(count.formula_generic));
    return out;
}

capacity::Mode mode_from_string(const std::string& s) {
    if (s == "dense") return capacity::Mode::dense;
    if (s == "top1") return capacity::Mode::top1;
    if (s == "topk") return capacity::Mode::topk;
    throw ContractViolation("mode must be dense, top1 or topk");
}

Outcome scaling_cmd(const Request& r) {
    Outcome out;
    Timer timer(out.stages);
    capacity::ScalingOptions o;
    o.mode = mode_from_string(param<std::string>(r, "mode", "dense"));
    o.variable = param<std::string>(r, "variable", "H");
    o.sweep = param<std::vector<int>>(r, "sweep", {});
    o.width = positive_param(r, "H", 4);
    o.experts = positive_param(r, "N", 4);
    o.k = positive_param(r, "k", 1);
    o.input_dim = positive_param(r, "d", 2);
    o.seeds = seed_list(r, 1);
    o.census_samples = r.samples.value_or(0);
    o.normalized = param<bool>(r, "normalized", false);
    o.enumeration.n_max = r.budgets.n_max;
    const auto result = capacity::scaling_probe(o);
    timer.lap("sweep");
    out.report = io::to_json(result);
    out.report["mode"] = capacity::to_string(o.mode);
    out.report["variable"] = o.variable;
    out.report["seeds"] = o.seeds;
    return out;
}

manifold::ManifoldSpec require_manifold(const Request& r) {
    if (r.manifold.is_null()) throw ContractViolation(r.command + " requires --manifold");
    return io::manifold_from_json(r.manifold);
}

Outcome effective_cmd(const Request& r) {
    Outcome out;
    Timer timer(out.stages);
    const Json& spec = require_spec(r);
    const std::string kind = io::spec_kind(spec);
    manifold::LayerSpec layer;
    if (kind == "moe") layer = io::moe_from_json(spec);
    else if (kind == "expert") layer = io::expert_from_json(spec);
    else throw ContractViolation("effective-capacity expects an expert or moe spec, got " + kind);
    const auto m = require_manifold(r);
    timer.lap("load");
    manifold::EffectiveOptions opts;
    opts.measure_samples = param<std::size_t>(r, "measure_samples", opts.measure_samples);
    opts.tube_angle = param<double>(r, "tube_angle", opts.tube_angle);
    opts.measure = param<bool>(r, "measure", true);
    const auto report = manifold::effective_census(layer, m, r.samples.value_or(1000000), r.seed, opts);
    timer.lap("census");
    out.report = io::to_json(report);
    out.report["spec_hash"] = io::content_hash(spec);
    out.report["manifold_hash"] = io::content_hash(r.manifold);
    append(out.warnings, report.warnings);
    if (!report.plateau) out.warnings.push_back("NO_PLATEAU: pattern count still rising in the last 10% of samples");
    return out;
}

Outcome resilience_cmd(const Request& r) {
    Outcome out;
    Timer timer(out.stages);
    const auto m = require_manifold(r);
    const int n = positive_param(r, "N", 4), k = positive_param(r, "k", 2), h = positive_param(r, "H", 4);
    const auto result =
        manifold::resilience_experiment(n, k, h, m, seed_list(r, 20), r.samples.value_or(100000));
    timer.lap("experiment");
    out.report = io::to_json(result);
    out.report["manifold_hash"] = io::content_hash(r.manifold);
    if (result.rank_deficient) out.warnings.push_back("RANK_DEFICIENT: kH < d_eff");
    return out;
}

// verify-all: a fast self-check over bundled fixtures and small random
// instances. Every check yields one row; a failing row sets exit code 3.

struct Check {
    std::string name;
    std::function<std::string()> run;  // detail on success; throws PropertyFailure on failure
};

void expect(bool ok, const std::string& message) {
    if (!ok) throw PropertyFailure(message);
}

arrangement::Arrangement random_arrangement(std::size_t n, Eigen::Index d, std::uint64_t seed) {
    Rng rng = make_rng(seed, "verify-arrangement");
    std::vector<arrangement::Hyperplane> hs;
    for (std::size_t i = 0; i < n; ++i) {
        const Vector w = gaussian_vector(rng, d);
        hs.emplace_back(w, gaussian_vector(rng, 1)(0));
    }
    return arrangement::Arrangement(d, std::move(hs));
}

std::vector<Check> verify_checks(const Request& r, const std::string& fixtures) {
    const std::uint64_t seed = r.seed;
    std::vector<Check> checks;
    checks.push_back({"fixture_five_lines", [fixtures] {
                          const auto arr = io::arrangement_from_json(io::read_file(fixtures + "/arrangement_5lines.json"));
                          const auto count = arrangement::count_regions(arr, arrangement::Polyhedron::whole_space(2));
                          expect(count == 16 && zaslavsky_phi(5, 2) == 16, "five-line fixture count " + to_decimal(count));
                          return std::string("exact 16 = phi(5,2)");
                      }});
    checks.push_back({"fixture_fan_router", [fixtures] {
                          const auto router = io::router_from_json(io::read_file(fixtures + "/router_fan5.json"));
                          routing::CellOptions o;
                          o.lp = routing::routing_lp_options(router);
                          const auto cells = routing::enumerate_routing_cells(router, o);
                          expect(cells.size() == 5, "fan router cells " + std::to_string(cells.size()));
                          return std::string("5 feasible cells");
                      }});
    checks.push_back({"fixture_moe_bounds", [fixtures, seed] {
                          const auto moe = io::moe_from_json(io::read_file(fixtures + "/moe_small.json"));
                          expect(io::moe_from_json(io::to_json(moe)) == moe, "moe round trip");
                          capacity::CountOptions o;
                          o.seed = seed;
                          const auto rep = capacity::count_topk_regions(moe, true, o);
                          const BigInt bound = rep.bound_terms.at("C(N,k)*phi(kH+k(N-k),d)");
                          expect(rep.exact_count && *rep.exact_count <= bound, "slicing bound violated");
                          return "exact " + to_decimal(*rep.exact_count) + " <= " + to_decimal(bound);
                      }});
    checks.push_back({"zaslavsky", [seed] {
                          std::size_t trials = 0;
                          for (std::size_t n = 2; n <= 10; ++n)
                              for (Eigen::Index d = 2; d <= 3; ++d)
                                  for (std::uint64_t t = 0; t < 10; ++t, ++trials) {
                                      const auto arr = random_arrangement(n, d, stream_seed(seed, "zaslavsky", trials));
                                      const auto c = arrangement::count_regions(arr, arrangement::Polyhedron::whole_space(d));
                                      expect(c == zaslavsky_phi(n, static_cast<std::uint64_t>(d)),
                                             "n=" + std::to_string(n) + " d=" + std::to_string(d) + " count " +
                                                 to_decimal(c));
                                  }
                          return std::to_string(trials) + " arrangements equal phi(n,d)";
                      }});
    checks.push_back({"degenerate", [] {
                          for (int n = 1; n <= 6; ++n) {
                              std::vector<arrangement::Hyperplane> par, coin;
                              for (int i = 0; i < n; ++i) {
                                  par.emplace_back(Vector::Unit(2, 0), static_cast<double>(i));
                                  coin.emplace_back(Vector::Unit(2, 0) * (i + 1.0), 0.5 * (i + 1.0));
                              }
                              const auto all = arrangement::Polyhedron::whole_space(2);
                              expect(arrangement::count_regions(arrangement::Arrangement(2, par), all) == n + 1,
                                     "parallel count");
                              expect(arrangement::count_regions(arrangement::Arrangement(2, coin), all) == 2,
                                     "coincident count");
                          }
                          return std::string("parallel n+1, coincident 2 for n <= 6");
                      }});
    checks.push_back({"topk_sort_softmax", [seed] {
                          Rng rng = make_rng(seed, "verify-logits");
                          std::size_t vectors = 0;
                          for (int n = 2; n <= 12; ++n)
                              for (int v = 0; v < 500; ++v, ++vectors) {
                                  const Vector z = gaussian_vector(rng, n);
                                  std::vector<double> sorted(z.data(), z.data() + n);
                                  std::sort(sorted.rbegin(), sorted.rend());
                                  const Vector soft = (z.array() - z.maxCoeff()).exp() /
                                                      (z.array() - z.maxCoeff()).exp().sum();
                                  for (int k = 1; k <= n; ++k) {
                                      const auto I = routing::top_k(z, k);
                                      double s = 0, best = -1e300;
                                      for (int i : I) s += z(i);
                                      for (const auto& J : k_subsets(n, k)) {
                                          double t = 0;
                                          for (int j : J) t += z(j);
                                          best = std::max(best, t);
                                      }
                                      const double top = std::accumulate(sorted.begin(), sorted.begin() + k, 0.0);
                                      expect(std::abs(s - best) <= 1e-12 * (1 + std::abs(best)) &&
                                                 std::abs(top - best) <= 1e-12 * (1 + std::abs(best)),
                                             "coalition sum mismatch");
                                      expect(routing::top_k(soft, k) == I, "softmax changed the top-k set");
                                  }
                              }
                          return std::to_string(vectors) + " logit vectors, all k";
                      }});
    checks.push_back({"redundancy", [seed] {
                          std::size_t cells = 0;
                          for (std::uint64_t t = 0; t < 20; ++t) {
                              const int n = 3 + static_cast<int>(t % 4);
                              const int k = 1 + static_cast<int>(t % static_cast<std::uint64_t>(n - 1));
                              const auto router = capacity::random_moe(n, k, 1, n, stream_seed(seed, "redundancy", t)).router;
                              routing::CellOptions o;
                              o.lp = routing::routing_lp_options(router);
                              for (const auto& c : routing::enumerate_routing_cells(router, o)) {
                                  const auto rep = routing::verify_redundancy(router, c.coalition, 20, seed + t, o.lp);
                                  expect(rep.ok(), "redundancy violation in " + routing::to_string(c.coalition));
                                  ++cells;
                              }
                          }
                          return std::to_string(cells) + " cells, zero violations";
                      }});
    checks.push_back({"reachability", [] {
                          for (int n = 3; n <= 6; ++n)
                              for (int k = 1; k <= n; ++k) {
                                  const auto router = routing::identity_router(n, k, n);
                                  routing::CellOptions o;
                                  o.lp = routing::routing_lp_options(router);
                                  const auto cells = routing::enumerate_routing_cells(router, o);
                                  expect(cells.size() == binomial_u64(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k)),
                                         "identity router N=" + std::to_string(n) + " k=" + std::to_string(k));
                              }
                          return std::string("C(N,k) cells for N in 3..6");
                      }});
    checks.push_back({"slicing_census", [seed] {
                          for (std::uint64_t t = 0; t < 8; ++t) {
                              const int n = 2 + static_cast<int>(t % 4), k = 1 + static_cast<int>(t % 2),
                                        h = 1 + static_cast<int>(t % 3);
                              const auto moe = capacity::random_moe(n, std::min(k, n), h, 2, stream_seed(seed, "slicing", t));
                              capacity::CountOptions o;
                              o.seed = seed;
                              const auto rep = capacity::count_topk_regions(moe, true, o);
                              const auto census = capacity::moe_pattern_census(moe, 1000000, seed + t);
                              expect(rep.exact_count && *rep.exact_count <= rep.bound_terms.at("C(N,k)*phi(kH+k(N-k),d)"),
                                     "slicing bound violated");
                              expect(BigInt(census.distinct_patterns) == *rep.exact_count,
                                     "census " + std::to_string(census.distinct_patterns) + " vs exact " +
                                         to_decimal(*rep.exact_count));
                          }
                          return std::string("8 instances: per-cell sum equals global census");
                      }});
    checks.push_back({"dense_tightness", [seed] {
                          for (int h = 1; h <= 12; ++h) {
                              const auto e = capacity::random_expert(h, 2, stream_seed(seed, "dense", static_cast<std::uint64_t>(h)));
                              const auto rep = capacity::count_dense_regions(e, arrangement::Polyhedron::whole_space(2));
                              expect(rep.exact_count && *rep.exact_count == zaslavsky_phi(static_cast<std::uint64_t>(h), 2),
                                     "H=" + std::to_string(h));
                          }
                          return std::string("phi(H,2) attained for H <= 12");
                      }});
    checks.push_back({"zonotope", [seed] {
                          for (std::uint64_t t = 0; t < 20; ++t) {
                              Rng rng = make_rng(seed, "verify-zonotope", t);
                              const Eigen::Index d = 2 + static_cast<Eigen::Index>(t % 2);
                              capacity::Zonotope z;
                              for (std::uint64_t g = 0; g < 3 + t % 6; ++g) z.generators.push_back(gaussian_vector(rng, d));
                              const auto c = capacity::zonotope_vertex_count(z);
                              expect(!c.generic || c.enumerated == c.formula_generic, "zonotope trial " + std::to_string(t));
                          }
                          return std::string("20 zonotopes match the closed form when generic");
                      }});
    checks.push_back({"effective_segment", [seed] {
                          const auto e = capacity::random_expert(6, 2, seed);
                          Vector p(2), q(2);
                          p << -2.0, -0.7;
                          q << 2.5, 1.3;
                          std::size_t crossings = 0;
                          for (const auto& h : e.hyperplanes()) crossings += (h.eval(p) > 0) != (h.eval(q) > 0);
                          manifold::EffectiveOptions o;
                          o.measure = false;
                          const auto rep = manifold::effective_census(e, manifold::segment(p, q), 20000, seed, o);
                          expect(rep.distinct_patterns == crossings + 1 && crossings <= 6,
                                 "patterns " + std::to_string(rep.distinct_patterns) + " crossings " +
                                     std::to_string(crossings));
                          return std::to_string(crossings) + " crossings, " + std::to_string(rep.distinct_patterns) +
                                 " patterns";
                      }});
    checks.push_back({"bound_table", [] {
                          const auto rows = capacity::bound_table(8, 2, 8, 2);
                          expect(rows.size() == 4 && rows[0].capacity == 37 && rows[0].params_active == 16 &&
                                     rows[2].capacity == 3836 && rows[3].capacity == 1036,
                                 "table rows differ");
                          return std::string("37, 3836, 1036");
                      }});
    return checks;
}

Outcome verify_all_cmd(const Request& r) {
    Outcome out;
    Timer timer(out.stages);
    const std::string fixtures = param<std::string>(r, "fixtures", TROPCAP_FIXTURE_DIR);
    Json rows = Json::array();
    bool all = true;
    for (const auto& check : verify_checks(r, fixtures)) {
        Json row{{"name", check.name}};
        try {
            row["detail"] = check.run();
            row["passed"] = true;
        } catch (const Error& e) {
            row["detail"] = std::string(e.kind()) + ": " + e.what();
            row["passed"] = false;
            all = false;
            out.warnings.push_back("CHECK_FAILED: " + check.name);
        }
        rows.push_back(row);
        timer.lap(check.name);
    }
    out.report = Json{{"seed", r.seed}, {"rows", rows}, {"passed", all}};
    if (!all) out.exit_code = 3;
    return out;
}

Outcome generate_cmd(const Request& r) {
    Outcome out;
    Timer timer(out.stages);
    out.report = generate_spec(param<std::string>(r, "kind", "topk"), positive_param(r, "N", 4),
                               positive_param(r, "k", 2), positive_param(r, "H", 3), positive_param(r, "d", 2), r.seed);
    timer.lap("generate");
    return out;
}

using Handler = Outcome (*)(const Request&);

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table{
        {"count-regions", count_regions_cmd}, {"enumerate-cells", enumerate_cells_cmd},
        {"bounds", bounds_cmd},               {"verify-redundancy", verify_redundancy_cmd},
        {"zonotope", zonotope_cmd},           {"scaling", scaling_cmd},
        {"effective-capacity", effective_cmd}, {"resilience", resilience_cmd},
        {"verify-all", verify_all_cmd},       {"generate", generate_cmd}};
    return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, h] : handlers()) v.push_back(name);
        return v;
    }();
    return names;
}

Outcome execute(const Request& request) {
    const auto it = handlers().find(request.command);
    if (it == handlers().end()) throw ContractViolation("unknown command '" + request.command + "'");
    if (request.budgets.n_max == 0 || request.budgets.coalitions == 0)
        throw ContractViolation("budgets must be positive");
    if (request.samples && *request.samples == 0) throw ContractViolation("--samples must be positive");
    return it->second(request);
}

Json generate_spec(const std::string& kind, int n, int k, int width, int input_dim, std::uint64_t seed) {
    if (kind == "dense") return io::to_json(capacity::random_expert(width, input_dim, seed));
    if (kind == "top1") return io::to_json(capacity::random_moe(n, 1, width, input_dim, seed));
    if (kind == "topk") return io::to_json(capacity::random_moe(n, k, width, input_dim, seed));
    if (kind == "lower-bound-construction")
        return io::to_json(capacity::lower_bound_construction(n, k, width, input_dim, seed));
    throw ContractViolation("generate kind must be dense, top1, topk or lower-bound-construction");
}

Json resolve_reference(const Json& value, const std::string& base_dir) {
    if (value.is_null() || value.is_object()) return value;
    if (!value.is_string()) throw ContractViolation("a spec reference must be an object or a path string");
    fs::path p(value.get<std::string>());
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    if (!fs::exists(p)) throw ContractViolation("referenced file does not exist: " + p.string());
    return io::read_file(p.string());
}

Request request_from_config(const Json& config, const std::string& base_dir) {
    if (!config.is_object()) throw ContractViolation("config must be a JSON object");
    static const std::set<std::string> known{"command", "spec", "manifold", "seed", "budgets",
                                             "output",  "params", "samples"};
    for (auto it = config.begin(); it != config.end(); ++it)
        if (!known.count(it.key())) throw ContractViolation("unknown config field '" + it.key() + "'");
    Request r;
    if (!config.contains("command") || !config["command"].is_string())
        throw ContractViolation("config requires a string 'command'");
    r.command = config["command"].get<std::string>();
    if (!handlers().count(r.command)) throw ContractViolation("unknown command '" + r.command + "'");
    r.spec = resolve_reference(config.value("spec", Json()), base_dir);
    r.manifold = resolve_reference(config.value("manifold", Json()), base_dir);
    try {
        r.seed = config.value("seed", std::uint64_t{0});
        if (config.contains("budgets")) {
            const auto& b = config["budgets"];
            if (!b.is_object()) throw ContractViolation("budgets must be an object");
            for (auto it = b.begin(); it != b.end(); ++it) {
                if (!it.value().is_number_integer() || it.value().get<long long>() <= 0)
                    throw ContractViolation("budget '" + it.key() + "' must be a positive integer");
                if (it.key() == "n_max") r.budgets.n_max = it.value().get<std::size_t>();
                else if (it.key() == "coalitions") r.budgets.coalitions = it.value().get<std::size_t>();
                else throw ContractViolation("unknown budget '" + it.key() + "'");
            }
        }
        if (config.contains("samples")) r.samples = config["samples"].get<std::size_t>();
        if (config.contains("params")) {
            if (!config["params"].is_object()) throw ContractViolation("params must be an object");
            r.params = config["params"];
        }
        if (config.contains("output")) {
            const auto& o = config["output"];
            r.out = o.value("path", std::string());
            if (!r.out.empty() && fs::path(r.out).is_relative() && !base_dir.empty())
                r.out = (fs::path(base_dir) / r.out).string();
            r.format = o.value("format", std::string("json"));
        }
    } catch (const Json::exception& e) {
        throw ContractViolation(std::string("malformed config: ") + e.what());
    }
    if (r.format != "json" && r.format != "csv") throw ContractViolation("format must be json or csv");
    return r;
}

Json request_identity(const Request& r) {
    Json j{{"command", r.command},
           {"spec", r.spec},
           {"manifold", r.manifold},
           {"seed", r.seed},
           {"budgets", Json{{"n_max", r.budgets.n_max}, {"coalitions", r.budgets.coalitions}}},
           {"params", r.params},
           {"format", r.format}};
    j["samples"] = r.samples ? Json(*r.samples) : Json();
    return j;
}

std::string render(const Outcome& outcome, const std::string& format) {
    if (format == "csv") return io::to_csv(outcome.report, outcome.table);
    return io::canonical_dump(outcome.report);
}

Json manifest(const Request& request, const Outcome* outcome, const std::vector<std::string>& errors,
              const std::string& report_file, int exit_code, std::size_t threads) {
    Json stages = Json::array();
    Json warnings = Json::array();
    if (outcome) {
        for (const auto& s : outcome->stages) stages.push_back(Json{{"name", s.name}, {"wall_seconds", s.wall_seconds}});
        for (const auto& w : outcome->warnings) warnings.push_back(w);
    }
    for (const auto& e : errors) warnings.push_back(e);
    Json j{{"config_hash", io::content_hash(request_identity(request))},
           {"tool_version", kToolVersion},
           {"command", request.command},
           {"seed", request.seed},
           {"format", request.format},
           {"threads", threads},
           {"stages", stages},
           {"warnings", warnings},
           {"exit_code", exit_code}};
    j["report"] = report_file.empty() ? Json() : Json(report_file);
    return j;
}

Json error_json(const std::exception& e, int exit_code) {
    Json err{{"message", e.what()}, {"exit_code", exit_code}, {"kind", "error"}};
    if (const auto* te = dynamic_cast<const Error*>(&e)) err["kind"] = te->kind();
    if (const auto* ne = dynamic_cast<const NumericFailure*>(&e)) err["constraint_index"] = ne->constraint_index();
    return Json{{"error", err}};
}

}  // namespace tropcap::cli
