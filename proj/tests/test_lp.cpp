#include "doctest.h"

#include <vector>

#include "tropcap/arrangement.hpp"
#include "tropcap/errors.hpp"
#include "tropcap/lp.hpp"
#include "tropcap/random.hpp"

using namespace tropcap;

namespace {

lp::LinearProgram box_program(Eigen::Index n, double lo, double hi) {
    lp::LinearProgram p;
    p.constraints = Matrix::Zero(0, n);
    p.rhs = Vector::Zero(0);
    p.objective = Vector::Zero(n);
    p.lower = Vector::Constant(n, lo);
    p.upper = Vector::Constant(n, hi);
    return p;
}

}  // namespace

TEST_CASE("simplex on a textbook program") {
    // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 ; optimum (2, 6), 36.
    auto p = box_program(2, 0, 100);
    p.constraints.resize(3, 2);
    p.constraints << 1, 0, 0, 2, 3, 2;
    p.rhs = Eigen::Vector3d(4, 12, 18);
    p.objective = Eigen::Vector2d(3, 5);
    const auto s = lp::solve(p);
    REQUIRE(s.feasible);
    CHECK(s.objective == doctest::Approx(36));
    CHECK(s.point(0) == doctest::Approx(2));
    CHECK(s.point(1) == doctest::Approx(6));
}

TEST_CASE("negative rhs needs phase one") {
    // x + y >= 2 written as -x - y <= -2, min x + 2y -> (2, 0).
    auto p = box_program(2, -10, 10);
    p.lower = Eigen::Vector2d(0, 0);
    p.constraints.resize(1, 2);
    p.constraints << -1, -1;
    p.rhs = Vector::Constant(1, -2);
    p.objective = Eigen::Vector2d(-1, -2);
    const auto s = lp::solve(p);
    REQUIRE(s.feasible);
    CHECK(s.point(0) == doctest::Approx(2));
    CHECK(s.point(1) == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("infeasible program") {
    auto p = box_program(1, -5, 5);
    p.constraints.resize(2, 1);
    p.constraints << 1, -1;
    p.rhs = Eigen::Vector2d(1, -2);  // x <= 1 and x >= 2
    CHECK_FALSE(lp::solve(p).feasible);
}

TEST_CASE("degenerate vertex does not cycle") {
    // Beale-style degenerate program; Bland's rule must terminate.
    auto p = box_program(4, 0, 1e3);
    p.constraints.resize(3, 4);
    p.constraints << 0.25, -8, -1, 9, 0.5, -12, -0.5, 3, 0, 0, 1, 0;
    p.rhs = Eigen::Vector3d(0, 0, 1);
    p.objective = Eigen::Vector4d(0.75, -20, 0.5, -6);
    const auto s = lp::solve(p);
    REQUIRE(s.feasible);
    CHECK(s.objective == doctest::Approx(1.25));
}

TEST_CASE("random programs agree with vertex enumeration in the plane") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 6;
        auto p = box_program(2, -3, 3);
        p.constraints = gaussian_matrix(rng, m, 2);
        p.rhs = gaussian_vector(rng, m).cwiseAbs();  // origin feasible
        p.objective = gaussian_vector(rng, 2);
        // Oracle: best feasible pairwise intersection of all constraint lines.
        Matrix all(m + 4, 2);
        Vector rhs(m + 4);
        all.topRows(m) = p.constraints;
        rhs.head(m) = p.rhs;
        all.bottomRows(4) << 1, 0, -1, 0, 0, 1, 0, -1;
        rhs.tail(4) << 3, 3, 3, 3;
        double best = -1e300;
        for (int i = 0; i < m + 4; ++i)
            for (int j = i + 1; j < m + 4; ++j) {
                Eigen::Matrix2d a;
                a << all.row(i), all.row(j);
                if (std::abs(a.determinant()) < 1e-12) continue;
                const Eigen::Vector2d v = a.inverse() * Eigen::Vector2d(rhs(i), rhs(j));
                if (((all * v - rhs).array() <= 1e-9).all()) best = std::max(best, p.objective.dot(v));
            }
        const auto s = lp::solve(p);
        REQUIRE(s.feasible);
        CHECK(s.objective == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("strict feasibility examples") {
    using arrangement::Hyperplane;
    // x > 0 and -x + 1 > 0 : the interval (0, 1), Chebyshev slack 0.5.
    const std::vector<Hyperplane> interval{Hyperplane(Vector::Constant(1, 1), 0),
                                           Hyperplane(Vector::Constant(1, -1), 1)};
    const auto r = arrangement::strict_feasibility(interval, 1);
    CHECK(r.feasible);
    REQUIRE(r.witness);
    CHECK((*r.witness)(0) > 0);
    CHECK((*r.witness)(0) < 1);
    CHECK(r.slack == doctest::Approx(0.5));

    // x > 0 and -x > 0 is empty.
    const std::vector<Hyperplane> empty{Hyperplane(Vector::Constant(1, 1), 0), Hyperplane(Vector::Constant(1, -1), 0)};
    CHECK_FALSE(arrangement::strict_feasibility(empty, 1).feasible);

    // A sliver thinner than eps_lp is treated as empty.
    const std::vector<Hyperplane> sliver{Hyperplane(Vector::Constant(1, 1), 0),
                                         Hyperplane(Vector::Constant(1, -1), 1e-8)};
    CHECK_FALSE(arrangement::strict_feasibility(sliver, 1).feasible);

    // No constraints: all of R^d.
    CHECK(arrangement::strict_feasibility({}, 3).feasible);
}

TEST_CASE("strict feasibility witness satisfies every constraint") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Vector x0 = gaussian_vector(rng, 3);
        std::vector<arrangement::Hyperplane> hs;
        for (int i = 0; i < 8; ++i) {
            const Vector w = gaussian_vector(rng, 3);
            hs.emplace_back(w, -w.dot(x0) + 0.1);  // x0 strictly inside
        }
        const auto r = arrangement::strict_feasibility(hs, 3);
        REQUIRE(r.feasible);
        for (const auto& h : hs) CHECK(h.normalized_eval(*r.witness) >= r.slack - 1e-12);
    }
}
