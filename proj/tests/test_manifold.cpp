#include "doctest.h"

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "tropcap/capacity.hpp"
#include "tropcap/errors.hpp"
#include "tropcap/manifold.hpp"
#include "tropcap/random.hpp"

using namespace tropcap;
using namespace tropcap::manifold;

namespace {

/// Labels at the midpoints between consecutive crossing parameters along
/// p + t (q - p), t in (0, 1).
template <class Label>
std::set<std::string> segment_walk(const std::vector<arrangement::Hyperplane>& planes, const Vector& p,
                                   const Vector& q, Label label) {
    std::vector<double> ts{0.0, 1.0};
    for (const auto& h : planes) {
        const double a = h.eval(p), b = h.eval(q);
        if ((a > 0) != (b > 0)) ts.push_back(a / (a - b));
    }
    std::sort(ts.begin(), ts.end());
    std::set<std::string> out;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        if (ts[i + 1] - ts[i] < 1e-12) continue;
        const Vector x = p + 0.5 * (ts[i] + ts[i + 1]) * (q - p);
        if (auto l = label(x)) out.insert(*l);
    }
    return out;
}

std::vector<arrangement::Hyperplane> router_planes(const routing::RouterSpec& r) {
    std::vector<arrangement::Hyperplane> out;
    for (Eigen::Index i = 0; i < r.experts(); ++i)
        for (Eigen::Index j = i + 1; j < r.experts(); ++j)
            out.emplace_back((r.weights.row(i) - r.weights.row(j)).transpose(), r.bias(i) - r.bias(j));
    return out;
}

Matrix frame3(int a, int b) {
    Matrix f = Matrix::Zero(3, 2);
    f(a, 0) = 1;
    f(b, 1) = 1;
    return f;
}

}  // namespace

TEST_CASE("manifold validation") {
    ManifoldSpec m = segment(Eigen::Vector2d(0, 1), Eigen::Vector2d(2, 1));
    CHECK(m.d_eff() == 1);
    CHECK(m.origin_distance() == doctest::Approx(1.0));
    m.frame(0, 0) = 2;
    CHECK_THROWS_AS(m.validate(), ContractViolation);
    CHECK_THROWS_AS(circle(Eigen::Vector3d(2, 0, 0), Matrix::Identity(3, 1), 1), ContractViolation);
    CHECK_THROWS_AS(circle(Eigen::Vector3d(2, 0, 0), frame3(0, 1), -1), ContractViolation);
    CHECK(kind_from_string("sphere2") == Kind::sphere2);
    CHECK_THROWS_AS(kind_from_string("torus"), ContractViolation);
}

TEST_CASE("manifold sampling") {
    const auto seg = segment(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0));
    for (const auto& x : sample_manifold(seg, 1000, 1)) {
        CHECK(x(0) > 0.0);
        CHECK(x(0) < 1.0);
    }
    const auto c = circle(Eigen::Vector3d(2, 0, 0), frame3(0, 1), 1.0);
    for (const auto& x : sample_manifold(c, 1000, 2)) {
        CHECK((x - c.center).norm() == doctest::Approx(1.0));
        CHECK(x.norm() >= 1.0 - 1e-12);
        CHECK(x.norm() <= 3.0 + 1e-12);
    }
    CHECK(sample_manifold(c, 50, 3) == sample_manifold(c, 50, 3));

    // Archimedes: the height on a sphere is uniform.
    ManifoldSpec s;
    s.kind = Kind::sphere2;
    s.center = Eigen::Vector3d(0, 0, 5);
    s.frame = Matrix::Identity(3, 3);
    s.radius = 2.0;
    const std::size_t n = 100000;
    std::vector<int> bins(10, 0);
    for (const auto& x : sample_manifold(s, n, 4)) {
        const double h = (x(2) - 5.0) / 2.0;  // in [-1, 1]
        bins[std::min(9, static_cast<int>((h + 1.0) * 5.0))]++;
    }
    double chi2 = 0.0;
    for (int b : bins) chi2 += (b - n / 10.0) * (b - n / 10.0) / (n / 10.0);
    CHECK(chi2 < 27.88);  // 9 degrees of freedom, p = 0.001
}

TEST_CASE("dense layer on a segment: crossings + 1") {
    const Vector p = Eigen::Vector2d(-2.0, -0.7), q = Eigen::Vector2d(2.5, 1.3);
    const auto seg = segment(p, q);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const int h = 2 + static_cast<int>(seed % 10);
        const auto e = capacity::random_expert(h, 2, seed);
        const auto rep = effective_census(e, seg, 20000, seed);
        const int crossings = oracle::segment_crossings(e.weights, e.bias, p, q);
        CHECK(rep.distinct_patterns == static_cast<std::uint64_t>(crossings + 1));
        CHECK(rep.distinct_patterns <= static_cast<std::uint64_t>(h + 1));
        CHECK(rep.bound_dense == h + 1);
        CHECK(rep.distinct_coalitions == 1);
    }
}

TEST_CASE("circle against one line through it") {
    capacity::ExpertSpec e;
    e.weights = Eigen::RowVector2d(1, 0.3);
    e.bias = Vector::Constant(1, -2.1);
    const auto c = circle(Eigen::Vector2d(2, 0), Matrix::Identity(2, 2), 1.0);
    const auto rep = effective_census(e, c, 10000, 0);
    CHECK(rep.distinct_patterns == 2);
    CHECK(*rep.bound_closed == 2);
}

TEST_CASE("MoE on a segment: coalitions match a segment walk") {
    const Vector p = Eigen::Vector3d(-1.5, 0.4, 0.9), q = Eigen::Vector3d(1.8, -0.6, -0.3);
    const auto seg = segment(p, q);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = capacity::random_moe(5, 2, 3, 3, seed);
        EffectiveOptions opts;
        opts.measure = false;
        const auto rep = effective_census(m, seg, 20000, seed, opts);
        const auto coalitions = segment_walk(router_planes(m.router), p, q, [&](const Vector& x) {
            return std::optional<std::string>(routing::to_string(routing::route_top_k(m.router, x)));
        });
        CHECK(rep.distinct_coalitions == coalitions.size());
        auto planes = router_planes(m.router);
        for (const auto& e : m.experts) {
            auto hs = e.hyperplanes();
            planes.insert(planes.end(), hs.begin(), hs.end());
        }
        const auto patterns = segment_walk(planes, p, q, [&](const Vector& x) { return capacity::pattern_label(m, x); });
        CHECK(rep.distinct_patterns == patterns.size());
        CHECK(rep.distinct_coalitions <= std::min<std::uint64_t>(10, rep.distinct_patterns));
    }
}

TEST_CASE("effective count never exceeds the ambient count") {
    const auto c = circle(Eigen::Vector2d(0.3, -0.2), Matrix::Identity(2, 2), 1.5);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto e = capacity::random_expert(6, 2, seed);
        const auto rep = effective_census(e, c, 20000, seed);
        const auto exact =
            arrangement::count_regions(arrangement::Arrangement(2, e.hyperplanes()), arrangement::Polyhedron::whole_space(2));
        CHECK(BigInt(rep.distinct_patterns) <= exact);
        CHECK(rep.distinct_patterns <= 12);  // a line meets a circle twice
    }
}

TEST_CASE("pattern count is monotone in the sample count") {
    const auto c = circle(Eigen::Vector2d(0.3, -0.2), Matrix::Identity(2, 2), 1.5);
    const auto m = capacity::random_moe(4, 2, 3, 2, 5);
    EffectiveOptions opts;
    opts.measure = false;
    std::uint64_t last = 0;
    for (std::size_t n : {10, 100, 1000, 10000}) {
        const auto rep = effective_census(m, c, n, 7, opts);
        CHECK(rep.distinct_patterns >= last);
        last = rep.distinct_patterns;
    }
}

TEST_CASE("spherical measure") {
    ManifoldSpec sphere;
    sphere.kind = Kind::sphere2;
    sphere.center = Eigen::Vector3d::Zero();
    sphere.frame = Matrix::Identity(3, 3);
    sphere.radius = 1.0;
    CHECK(spherical_measure(sphere, 10000, 1).volume == 1.0);

    // A wide plane patch at height 1 covers the upper hemisphere.
    ManifoldSpec patch;
    patch.kind = Kind::affine_patch;
    patch.center = Eigen::Vector3d(0, 0, 1);
    patch.frame = frame3(0, 1);
    patch.extent = Eigen::Vector2d(1e4, 1e4);
    const auto h = spherical_measure(patch, 100000, 2);
    CHECK(std::abs(h.volume - 0.5) <= 3 * h.volume_se);

    // Great circle in R^3: no volume, tube density of about one half.
    const auto great = circle(Eigen::Vector3d::Zero(), frame3(0, 1), 1.0);
    const auto g = spherical_measure(great, 100000, 3);
    CHECK(g.volume == 0.0);
    REQUIRE(g.tube_density);
    const double se = std::sqrt(std::sin(0.05) * (1 - std::sin(0.05)) / 100000);
    CHECK(std::abs(g.tube_fraction - std::sin(0.05)) <= 4 * se);
    CHECK(*g.tube_density == doctest::Approx(0.5).epsilon(0.05));

    // Segment in the plane: the arc it subtends.
    const auto seg = segment(Eigen::Vector2d(1, -1), Eigen::Vector2d(1, 1));
    const auto s = spherical_measure(seg, 100000, 4);
    CHECK(std::abs(s.volume - 0.25) <= 4 * s.volume_se);

    // Through the origin: refused.
    CHECK_THROWS_AS(spherical_measure(segment(Eigen::Vector2d(-1, 0), Eigen::Vector2d(1, 0)), 100, 0), Refusal);
}

TEST_CASE("direct estimator") {
    routing::RouterSpec r = routing::identity_router(4, 2, 4);
    ManifoldSpec sphere;
    sphere.kind = Kind::sphere2;
    sphere.center = Eigen::Vector3d::Zero();
    sphere.frame = Matrix::Identity(3, 3);
    sphere.radius = 1.0;
    r.weights = Matrix::Identity(4, 3);  // only N and k are used
    const auto full = spherical_measure(sphere, 20000, 5, &r, 5);
    REQUIRE(full.direct);
    CHECK(*full.direct == doctest::Approx(1.0).epsilon(0.02));
    const auto narrow = circle(Eigen::Vector3d(0, 0, 5), frame3(0, 1), 0.2);
    const auto small = spherical_measure(narrow, 20000, 6, &r, 5);
    CHECK(*small.direct < *full.direct);
}

TEST_CASE("resilience experiment") {
    const auto seg = segment(Eigen::Vector2d(-2.0, -0.7), Eigen::Vector2d(2.5, 1.3));
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 20; ++s) seeds.push_back(s);
    const auto r2 = resilience_experiment(2, 2, 4, seg, seeds, 5000);
    CHECK(r2.ceiling == doctest::Approx(2.0));  // C(2,2) * 2^1
    CHECK_FALSE(r2.rank_deficient);
    const auto r6 = resilience_experiment(6, 2, 4, seg, seeds, 5000);
    CHECK(r6.median_ratio > 1.0);
    CHECK(r6.median_ratio > r2.median_ratio);
    ManifoldSpec patch;
    patch.kind = Kind::affine_patch;
    patch.center = Eigen::Vector3d(0, 0, 1);
    patch.frame = Matrix::Identity(3, 3);
    patch.extent = Eigen::Vector3d(1, 1, 1);
    CHECK(resilience_experiment(2, 1, 1, patch, {0}, 100).rank_deficient);
    CHECK(median({3, 1, 2}) == 2);
    CHECK(median({4, 1, 2, 3}) == 2.5);
}
