#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tropcap/bigint.hpp"
#include "tropcap/linalg.hpp"

namespace tropcap::arrangement {

/// Affine functional w·x + b. As an arrangement member it denotes the
/// hyperplane {w·x + b = 0}; as a polyhedron face, the half-space
/// {w·x + b >= 0}. Zero normals are rejected.
class Hyperplane {
public:
    Hyperplane(Vector normal, double offset);

    const Vector& normal() const { return normal_; }
    double offset() const { return offset_; }
    Eigen::Index dimension() const { return normal_.size(); }

    double eval(const Vector& x) const { return normal_.dot(x) + offset_; }
    /// Signed Euclidean distance to the hyperplane.
    double normalized_eval(const Vector& x) const { return eval(x) / normal_.norm(); }
    Hyperplane flipped() const { return Hyperplane(-normal_, -offset_); }

private:
    Vector normal_;
    double offset_;
};

class Arrangement {
public:
    explicit Arrangement(Eigen::Index dimension, std::vector<Hyperplane> hyperplanes = {});

    Eigen::Index dimension() const { return dimension_; }
    const std::vector<Hyperplane>& hyperplanes() const { return hyperplanes_; }
    std::size_t size() const { return hyperplanes_.size(); }

private:
    Eigen::Index dimension_;
    std::vector<Hyperplane> hyperplanes_;
};

/// H-representation {x : w_i·x + b_i >= 0 for all i}. An empty list is all
/// of R^d; the set may also be empty or unbounded.
class Polyhedron {
public:
    explicit Polyhedron(Eigen::Index dimension, std::vector<Hyperplane> halfspaces = {});
    static Polyhedron whole_space(Eigen::Index dimension) { return Polyhedron(dimension); }

    Eigen::Index dimension() const { return dimension_; }
    const std::vector<Hyperplane>& halfspaces() const { return halfspaces_; }
    bool is_whole_space() const { return halfspaces_.empty(); }
    bool contains_strictly(const Vector& x) const;

    Polyhedron intersected(const Polyhedron& other) const;

private:
    Eigen::Index dimension_;
    std::vector<Hyperplane> halfspaces_;
};

/// +1 / -1 per hyperplane; names the open region
/// {x : sign_i (w_i·x + b_i) > 0 for all i}.
using SignVector = std::vector<std::int8_t>;

std::string to_string(const SignVector& s);  // e.g. "+-+"
SignVector sign_vector_from_string(const std::string& s);

struct LpOptions {
    double box_radius = 1e6;       // starting half-width of the bounding box
    double max_box_radius = 1e12;  // auto-grow ceiling (x10 steps)
    double eps_lp = 1e-7;          // strictness threshold on normalized slack
};

struct FeasibilityResult {
    bool feasible = false;
    std::optional<Vector> witness;  // present whenever the LP was solvable
    double slack = 0.0;             // min normalized slack at the witness
};

/// maximize t s.t. (w_i·x + b_i)/||w_i|| >= t, |x_j| <= box_radius, t <= 1.
/// Feasible iff the optimal t exceeds eps_lp. The reported slack is
/// recomputed from the witness, so every constraint holds with at least that
/// normalized slack.
FeasibilityResult strict_feasibility(std::span<const Hyperplane> constraints, Eigen::Index dimension,
                                     const LpOptions& options = {});

struct EnumerationOptions {
    std::size_t n_max = 24;
    LpOptions lp;
    std::size_t seed_samples = 8;
    std::uint64_t seed = 0;
};

struct Region {
    SignVector signs;
    Vector witness;
    double slack = 0.0;
};

/// All regions of `arr` whose open set meets the interior of `within`,
/// each certified by strict_feasibility, sorted by sign vector.
/// Coincident hyperplanes are grouped so that crossing a facet flips the
/// whole group. Throws Refusal when arr.size() > n_max.
std::vector<Region> enumerate_regions_detailed(const Arrangement& arr, const Polyhedron& within,
                                               const EnumerationOptions& options = {});

std::vector<SignVector> enumerate_regions(const Arrangement& arr, const Polyhedron& within,
                                          const EnumerationOptions& options = {});

BigInt count_regions(const Arrangement& arr, const Polyhedron& within, const EnumerationOptions& options = {});

struct GeneralPositionReport {
    bool general = true;
    std::string violation;  // empty when general
};

/// Checks pairwise non-parallelism, full rank of every min(n, d)-subset of
/// normals and empty common intersection of every (d+1)-subset, with
/// tolerance eps_gp on the smallest singular value of the row-normalized
/// submatrices. Reports the first violation found.
GeneralPositionReport is_general_position(const Arrangement& arr, double eps_gp = 1e-8);

/// Points spread over the arrangement's intersection structure: for every
/// subset of j <= d hyperplanes with a proper intersection flat, the point
/// of that flat nearest the origin. Subsets are visited by increasing j and
/// the walk stops once `max_points` would be exceeded.
std::vector<Vector> flat_anchor_points(std::span<const Hyperplane> hyperplanes, Eigen::Index dimension,
                                       std::size_t max_points = 200000);

/// Anchor point plus a d x j matrix D with A D = I, where A holds the unit
/// normals of the j defining hyperplanes. a + D s moves off the flat into
/// the local cone with sign vector s.
struct FlatAnchor {
    Vector point;
    Matrix directions;
};

/// Same walk as flat_anchor_points, keeping the cone directions.
std::vector<FlatAnchor> flat_anchors(std::span<const Hyperplane> hyperplanes, Eigen::Index dimension,
                                     std::size_t max_points = 200000);

/// Largest |coordinate| over the vertices (d-subset intersections) of the
/// given hyperplanes, or 0 when there are none or too many to visit.
double max_vertex_coordinate(std::span<const Hyperplane> hyperplanes, Eigen::Index dimension,
                             std::size_t max_subsets = 100000);

/// Box half-width that contains every vertex with a x10 margin, starting at
/// options.box_radius and growing x10 up to options.max_box_radius.
double certified_box_radius(std::span<const Hyperplane> hyperplanes, Eigen::Index dimension,
                            const LpOptions& options);

}  // namespace tropcap::arrangement

namespace tropcap::arrangement {

/// A point of the relative interior of facet `index` of the polyhedron
/// {x : h_i(x) >= 0}: h_index(x) = 0 and every other constraint strictly
/// positive by more than eps_lp. Constraints coincident with the facet are
/// ignored. Returns nullopt when the facet is redundant or lower-dimensional.
std::optional<Vector> facet_witness(std::span<const Hyperplane> halfspaces, std::size_t index,
                                    Eigen::Index dimension, const LpOptions& options = {});

/// Indices of the non-redundant facets, keeping one representative of
/// every group of coincident half-spaces.
std::vector<std::size_t> essential_facets(std::span<const Hyperplane> halfspaces, Eigen::Index dimension,
                                          const LpOptions& options = {});

}  // namespace tropcap::arrangement
