#include "tropcap/arrangement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "tropcap/combinatorics.hpp"
#include "tropcap/errors.hpp"
#include "tropcap/lp.hpp"
#include "tropcap/parallel.hpp"
#include "tropcap/random.hpp"

namespace tropcap::arrangement {

Hyperplane::Hyperplane(Vector normal, double offset) : normal_(std::move(normal)), offset_(offset) {
    if (!(normal_.norm() > 0.0) || !normal_.allFinite() || !std::isfinite(offset_)) {
        throw ContractViolation("hyperplane normal must be finite and nonzero");
    }
}

Arrangement::Arrangement(Eigen::Index dimension, std::vector<Hyperplane> hyperplanes)
    : dimension_(dimension), hyperplanes_(std::move(hyperplanes)) {
    if (dimension_ < 1) throw ContractViolation("arrangement dimension must be >= 1");
    for (const auto& h : hyperplanes_) require_dimension(h.dimension(), dimension_, "arrangement hyperplane");
}

Polyhedron::Polyhedron(Eigen::Index dimension, std::vector<Hyperplane> halfspaces)
    : dimension_(dimension), halfspaces_(std::move(halfspaces)) {
    if (dimension_ < 1) throw ContractViolation("polyhedron dimension must be >= 1");
    for (const auto& h : halfspaces_) require_dimension(h.dimension(), dimension_, "polyhedron half-space");
}

bool Polyhedron::contains_strictly(const Vector& x) const {
    return std::all_of(halfspaces_.begin(), halfspaces_.end(), [&](const Hyperplane& h) { return h.eval(x) > 0.0; });
}

Polyhedron Polyhedron::intersected(const Polyhedron& other) const {
    require_dimension(other.dimension(), dimension_, "polyhedron intersection");
    auto hs = halfspaces_;
    hs.insert(hs.end(), other.halfspaces().begin(), other.halfspaces().end());
    return Polyhedron(dimension_, std::move(hs));
}

std::string to_string(const SignVector& s) {
    std::string out(s.size(), '+');
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] > 0 ? '+' : '-';
    return out;
}

SignVector sign_vector_from_string(const std::string& s) {
    SignVector out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '+') out[i] = 1;
        else if (s[i] == '-') out[i] = -1;
        else throw ContractViolation("sign vector characters must be '+' or '-'");
    }
    return out;
}

FeasibilityResult strict_feasibility(std::span<const Hyperplane> constraints, Eigen::Index dimension,
                                     const LpOptions& options) {
    const auto m = static_cast<Eigen::Index>(constraints.size());
    const Eigen::Index nv = dimension + 1;  // x, then t
    const double radius = options.box_radius;

    lp::LinearProgram program;
    program.constraints.resize(m, nv);
    program.rhs.resize(m);
    double max_offset = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& h = constraints[i];
        require_dimension(h.dimension(), dimension, "feasibility constraint");
        const double norm = h.normal().norm();
        program.constraints.row(i).head(dimension) = -h.normal().transpose() / norm;
        program.constraints(i, dimension) = 1.0;
        program.rhs(i) = h.offset() / norm;
        max_offset = std::max(max_offset, std::abs(program.rhs(i)));
    }
    program.objective = Vector::Unit(nv, dimension);
    program.lower = Vector::Constant(nv, -radius);
    program.upper = Vector::Constant(nv, radius);
    program.lower(dimension) = -(radius * std::sqrt(static_cast<double>(dimension)) + max_offset + 1.0);
    program.upper(dimension) = 1.0;

    const lp::Solution sol = lp::solve(program);
    FeasibilityResult result;
    if (!sol.feasible) {
        throw NumericFailure("strict feasibility program reported infeasible despite a feasible start", -1);
    }
    Vector x = sol.point.head(dimension);
    const double t_lp = sol.point(dimension);
    double slack = 1.0;
    long argmin = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double s = constraints[i].normalized_eval(x);
        if (s < slack) {
            slack = s;
            argmin = static_cast<long>(i);
        }
    }
    if (std::abs(slack - t_lp) > 1e-6 * (1.0 + std::abs(t_lp))) {
        throw NumericFailure("strict feasibility: witness slack " + std::to_string(slack) +
                                 " disagrees with LP optimum " + std::to_string(t_lp),
                             argmin);
    }
    result.witness = std::move(x);
    result.slack = slack;
    result.feasible = slack > options.eps_lp;
    return result;
}

namespace {

struct CoincidenceClasses {
    std::vector<Hyperplane> representatives;  // canonical orientation
    std::vector<std::size_t> class_of;
    std::vector<std::int8_t> orientation;  // original = orientation * representative
};

CoincidenceClasses coincidence_classes(const Arrangement& arr) {
    CoincidenceClasses out;
    std::vector<Vector> canon;  // (w, b) / ||w||, first significant coordinate positive
    for (const auto& h : arr.hyperplanes()) {
        const double norm = h.normal().norm();
        Vector v(h.dimension() + 1);
        v.head(h.dimension()) = h.normal() / norm;
        v(h.dimension()) = h.offset() / norm;
        std::int8_t orient = 1;
        for (Eigen::Index j = 0; j < h.dimension(); ++j) {
            if (std::abs(v(j)) > 1e-12) {
                if (v(j) < 0) orient = -1;
                break;
            }
        }
        v *= orient;
        std::size_t cls = canon.size();
        for (std::size_t c = 0; c < canon.size(); ++c) {
            const double tol = 1e-10 * (1.0 + std::abs(v(h.dimension())));
            if ((canon[c] - v).cwiseAbs().maxCoeff() <= tol) {
                cls = c;
                break;
            }
        }
        if (cls == canon.size()) {
            canon.push_back(v);
            out.representatives.emplace_back(v.head(h.dimension()), v(h.dimension()));
        }
        out.class_of.push_back(cls);
        out.orientation.push_back(orient);
    }
    return out;
}

std::vector<Hyperplane> region_constraints(const Polyhedron& within, const std::vector<Hyperplane>& reps,
                                           const SignVector& reduced) {
    std::vector<Hyperplane> cs = within.halfspaces();
    cs.reserve(cs.size() + reps.size());
    for (std::size_t c = 0; c < reps.size(); ++c) cs.push_back(reduced[c] > 0 ? reps[c] : reps[c].flipped());
    return cs;
}

std::optional<SignVector> reduced_signs_at(const std::vector<Hyperplane>& reps, const Vector& x) {
    SignVector s(reps.size());
    for (std::size_t c = 0; c < reps.size(); ++c) {
        const double v = reps[c].eval(x);
        if (std::abs(v) <= 1e-12 * (1.0 + std::abs(reps[c].offset()) + x.norm())) return std::nullopt;
        s[c] = v > 0 ? 1 : -1;
    }
    return s;
}

}  // namespace

std::vector<Region> enumerate_regions_detailed(const Arrangement& arr, const Polyhedron& within,
                                               const EnumerationOptions& options) {
    require_dimension(within.dimension(), arr.dimension(), "enumerate_regions: polyhedron");
    if (arr.size() > options.n_max) {
        throw Refusal("arrangement has " + std::to_string(arr.size()) + " hyperplanes, above n_max = " +
                      std::to_string(options.n_max) + "; use the sampling census instead");
    }
    const Eigen::Index d = arr.dimension();
    const CoincidenceClasses classes = coincidence_classes(arr);
    const auto& reps = classes.representatives;

    std::vector<Hyperplane> all = reps;
    all.insert(all.end(), within.halfspaces().begin(), within.halfspaces().end());
    LpOptions lp_opts = options.lp;
    lp_opts.box_radius = certified_box_radius(all, d, options.lp);

    auto certify = [&](const SignVector& reduced) {
        const auto cs = region_constraints(within, reps, reduced);
        return strict_feasibility(cs, d, lp_opts);
    };

    std::vector<Region> reduced_regions;
    std::set<SignVector> seen;
    std::vector<std::size_t> frontier;

    // Seeds: the interior witness of `within`, then random points around it.
    const FeasibilityResult base = strict_feasibility(within.halfspaces(), d, lp_opts);
    if (!base.feasible) return {};
    std::vector<Vector> seed_points{*base.witness};
    {
        Rng rng = make_rng(options.seed, "enumerate-seeds");
        const double spread = 1.0 + max_vertex_coordinate(all, d);
        for (std::size_t i = 0; i < options.seed_samples; ++i) {
            Vector p = *base.witness + spread * gaussian_vector(rng, d);
            if (within.contains_strictly(p)) seed_points.push_back(std::move(p));
        }
    }
    for (const auto& p : seed_points) {
        auto s = reduced_signs_at(reps, p);
        if (!s || seen.count(*s)) continue;
        seen.insert(*s);
        FeasibilityResult r = certify(*s);
        if (!r.feasible) continue;
        frontier.push_back(reduced_regions.size());
        reduced_regions.push_back(Region{*s, *r.witness, r.slack});
    }
    if (reduced_regions.empty() && !reps.empty()) {
        throw NumericFailure("enumerate_regions: no seed point landed strictly inside a region", -1);
    }
    if (reps.empty() && reduced_regions.empty()) {
        reduced_regions.push_back(Region{SignVector{}, *base.witness, base.slack});
    }

    // Level-synchronous flip BFS. Candidates are generated serially, so the
    // visiting order and the output are independent of the thread count.
    while (!frontier.empty()) {
        std::vector<SignVector> candidates;
        for (std::size_t idx : frontier) {
            for (std::size_t c = 0; c < reps.size(); ++c) {
                SignVector s = reduced_regions[idx].signs;
                s[c] = static_cast<std::int8_t>(-s[c]);
                if (seen.insert(s).second) candidates.push_back(std::move(s));
            }
        }
        std::vector<FeasibilityResult> verdicts(candidates.size());
        parallel_for(candidates.size(), [&](std::size_t i) { verdicts[i] = certify(candidates[i]); });
        frontier.clear();
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (!verdicts[i].feasible) continue;
            frontier.push_back(reduced_regions.size());
            reduced_regions.push_back(Region{std::move(candidates[i]), *verdicts[i].witness, verdicts[i].slack});
        }
    }

    std::vector<Region> out;
    out.reserve(reduced_regions.size());
    for (auto& r : reduced_regions) {
        SignVector full(arr.size());
        for (std::size_t i = 0; i < arr.size(); ++i) {
            full[i] = static_cast<std::int8_t>(classes.orientation[i] * r.signs[classes.class_of[i]]);
        }
        out.push_back(Region{std::move(full), std::move(r.witness), r.slack});
    }
    std::sort(out.begin(), out.end(), [](const Region& a, const Region& b) { return a.signs < b.signs; });
    return out;
}

std::vector<SignVector> enumerate_regions(const Arrangement& arr, const Polyhedron& within,
                                          const EnumerationOptions& options) {
    std::vector<SignVector> out;
    for (auto& r : enumerate_regions_detailed(arr, within, options)) out.push_back(std::move(r.signs));
    return out;
}

BigInt count_regions(const Arrangement& arr, const Polyhedron& within, const EnumerationOptions& options) {
    return BigInt(enumerate_regions_detailed(arr, within, options).size());
}

namespace {

double smallest_singular_value(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

std::string subset_string(const std::vector<int>& s) {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << '}';
    return os.str();
}

}  // namespace

GeneralPositionReport is_general_position(const Arrangement& arr, double eps_gp) {
    const int n = static_cast<int>(arr.size());
    const int d = static_cast<int>(arr.dimension());
    Matrix normals(n, d);
    Vector offsets(n);
    for (int i = 0; i < n; ++i) {
        const auto& h = arr.hyperplanes()[i];
        const double norm = h.normal().norm();
        normals.row(i) = h.normal().transpose() / norm;
        offsets(i) = h.offset() / norm;
    }
    GeneralPositionReport report;
    auto fail = [&](std::string why) {
        report.general = false;
        report.violation = std::move(why);
        return report;
    };

    if (d >= 2) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                Matrix pair(2, d);
                pair.row(0) = normals.row(i);
                pair.row(1) = normals.row(j);
                if (smallest_singular_value(pair) <= eps_gp) {
                    return fail("parallel pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
                }
            }
        }
    }
    // Full rank of every min(n, d)-subset implies it for all smaller subsets.
    const int r = std::min(n, d);
    if (r >= 3) {
        std::vector<int> s(r);
        std::iota(s.begin(), s.end(), 0);
        do {
            Matrix sub(r, d);
            for (int i = 0; i < r; ++i) sub.row(i) = normals.row(s[i]);
            if (smallest_singular_value(sub) <= eps_gp) return fail("rank-deficient subset " + subset_string(s));
        } while (next_k_subset(s, n));
    }
    if (n >= d + 1) {
        std::vector<int> s(d + 1);
        std::iota(s.begin(), s.end(), 0);
        do {
            Matrix aug(d + 1, d + 1);
            for (int i = 0; i <= d; ++i) {
                aug.row(i).head(d) = normals.row(s[i]);
                aug(i, d) = offsets(s[i]);
            }
            if (smallest_singular_value(aug) <= eps_gp) return fail("common intersection of " + subset_string(s));
        } while (next_k_subset(s, n));
    }
    return report;
}

std::vector<FlatAnchor> flat_anchors(std::span<const Hyperplane> hyperplanes, Eigen::Index dimension,
                                     std::size_t max_points) {
    const int n = static_cast<int>(hyperplanes.size());
    const int d = static_cast<int>(dimension);
    std::vector<FlatAnchor> out;
    for (int j = 1; j <= std::min(n, d); ++j) {
        const std::uint64_t count = binomial_u64(n, j);
        if (out.size() + count > max_points) break;
        std::vector<int> s(j);
        std::iota(s.begin(), s.end(), 0);
        do {
            Matrix a(j, d);
            Vector rhs(j);
            for (int i = 0; i < j; ++i) {
                const auto& h = hyperplanes[s[i]];
                const double norm = h.normal().norm();
                a.row(i) = h.normal().transpose() / norm;
                rhs(i) = -h.offset() / norm;
            }
            const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
            if (cod.rank() < j) continue;
            Vector x = cod.solve(rhs);
            if ((a * x - rhs).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff())) continue;
            out.push_back({std::move(x), cod.pseudoInverse()});
        } while (next_k_subset(s, n));
    }
    return out;
}

std::vector<Vector> flat_anchor_points(std::span<const Hyperplane> hyperplanes, Eigen::Index dimension,
                                       std::size_t max_points) {
    std::vector<Vector> out;
    for (auto& a : flat_anchors(hyperplanes, dimension, max_points)) out.push_back(std::move(a.point));
    return out;
}

double max_vertex_coordinate(std::span<const Hyperplane> hyperplanes, Eigen::Index dimension,
                             std::size_t max_subsets) {
    const int n = static_cast<int>(hyperplanes.size());
    const int d = static_cast<int>(dimension);
    double best = 0.0;
    for (const auto& h : hyperplanes) best = std::max(best, std::abs(h.offset()) / h.normal().norm());
    if (n < d || binomial_u64(n, d) > max_subsets) return best;
    std::vector<int> s(d);
    std::iota(s.begin(), s.end(), 0);
    do {
        Matrix a(d, d);
        Vector rhs(d);
        for (int i = 0; i < d; ++i) {
            a.row(i) = hyperplanes[s[i]].normal().transpose();
            rhs(i) = -hyperplanes[s[i]].offset();
        }
        const Eigen::FullPivLU<Matrix> lu(a);
        if (!lu.isInvertible()) continue;
        const Vector x = lu.solve(rhs);
        if (x.allFinite()) best = std::max(best, x.cwiseAbs().maxCoeff());
    } while (next_k_subset(s, n));
    return best;
}

double certified_box_radius(std::span<const Hyperplane> hyperplanes, Eigen::Index dimension,
                            const LpOptions& options) {
    const double v = max_vertex_coordinate(hyperplanes, dimension);
    double r = options.box_radius;
    while (r < 10.0 * v && r < options.max_box_radius) r *= 10.0;
    return std::min(r, std::max(options.box_radius, options.max_box_radius));
}


namespace {

// +1 when g has the same normalized (w, b) as h, -1 when opposite, 0 otherwise.
int coincidence(const Hyperplane& h, const Hyperplane& g) {
    const double nh = h.normal().norm();
    const double ng = g.normal().norm();
    const double tol = 1e-10 * (1.0 + std::abs(h.offset() / nh));
    for (int orient : {1, -1}) {
        const double dw = (h.normal() / nh - orient * g.normal() / ng).cwiseAbs().maxCoeff();
        const double db = std::abs(h.offset() / nh - orient * g.offset() / ng);
        if (dw <= tol && db <= tol) return orient;
    }
    return 0;
}

}  // namespace

std::optional<Vector> facet_witness(std::span<const Hyperplane> halfspaces, std::size_t index,
                                    Eigen::Index dimension, const LpOptions& options) {
    const Hyperplane& facet = halfspaces[index];
    require_dimension(facet.dimension(), dimension, "facet witness");
    const Vector& a = facet.normal();
    const Vector x0 = -facet.offset() / a.squaredNorm() * a;
    Matrix basis;
    if (dimension > 1) {
        Eigen::HouseholderQR<Matrix> qr(a);
        const Matrix q = qr.householderQ();
        basis = q.rightCols(dimension - 1);
    }
    std::vector<Hyperplane> projected;
    for (std::size_t j = 0; j < halfspaces.size(); ++j) {
        if (j == index) continue;
        const Hyperplane& h = halfspaces[j];
        const int c = coincidence(facet, h);
        if (c == 1) continue;
        if (c == -1) return std::nullopt;
        const double norm = h.normal().norm();
        const double constant = h.eval(x0);
        const Vector reduced = dimension > 1 ? Vector(basis.transpose() * h.normal()) : Vector();
        if (dimension == 1 || reduced.norm() <= 1e-12 * norm) {
            if (constant / norm <= options.eps_lp) return std::nullopt;
            continue;
        }
        projected.emplace_back(reduced, constant);
    }
    if (dimension == 1) return x0;
    const FeasibilityResult r = strict_feasibility(projected, dimension - 1, options);
    if (!r.feasible) return std::nullopt;
    return Vector(x0 + basis * *r.witness);
}

std::vector<std::size_t> essential_facets(std::span<const Hyperplane> halfspaces, Eigen::Index dimension,
                                          const LpOptions& options) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < halfspaces.size(); ++i) {
        bool repeat = false;
        for (std::size_t j = 0; j < i && !repeat; ++j) repeat = coincidence(halfspaces[i], halfspaces[j]) == 1;
        if (repeat) continue;
        if (facet_witness(halfspaces, i, dimension, options)) out.push_back(i);
    }
    return out;
}

}  // namespace tropcap::arrangement
