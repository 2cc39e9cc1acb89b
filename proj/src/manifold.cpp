#include "tropcap/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tropcap/census.hpp"
#include "tropcap/errors.hpp"
#include "tropcap/random.hpp"

namespace tropcap::manifold {

std::string to_string(Kind k) {
    switch (k) {
        case Kind::segment: return "segment";
        case Kind::circle: return "circle";
        case Kind::sphere2: return "sphere2";
        case Kind::affine_patch: return "affine_patch";
    }
    return "unknown";
}

Kind kind_from_string(const std::string& s) {
    for (Kind k : {Kind::segment, Kind::circle, Kind::sphere2, Kind::affine_patch})
        if (to_string(k) == s) return k;
    throw ContractViolation("unknown manifold kind '" + s + "'");
}

int ManifoldSpec::d_eff() const {
    switch (kind) {
        case Kind::segment:
        case Kind::circle: return 1;
        case Kind::sphere2: return 2;
        case Kind::affine_patch: return static_cast<int>(frame.cols());
    }
    return 0;
}

namespace {

Eigen::Index expected_columns(const ManifoldSpec& m) {
    switch (m.kind) {
        case Kind::segment: return 1;
        case Kind::circle: return 2;
        case Kind::sphere2: return 3;
        case Kind::affine_patch: return m.frame.cols();
    }
    return 0;
}

/// Box half-widths in frame coordinates for the flat kinds.
Vector flat_extent(const ManifoldSpec& m) {
    return m.kind == Kind::segment ? Vector::Constant(1, m.radius) : m.extent;
}

bool is_flat(const ManifoldSpec& m) { return m.kind == Kind::segment || m.kind == Kind::affine_patch; }

}  // namespace

void ManifoldSpec::validate() const {
    const Eigen::Index d = center.size();
    if (d < 1) throw ContractViolation("manifold center must be non-empty");
    if (!center.allFinite() || !frame.allFinite()) throw ContractViolation("manifold parameters must be finite");
    if (frame.rows() != d)
        throw ContractViolation("manifold frame has " + std::to_string(frame.rows()) + " rows, expected " +
                                std::to_string(d));
    if (frame.cols() < 1 || frame.cols() != expected_columns(*this))
        throw ContractViolation(to_string(kind) + " needs " + std::to_string(expected_columns(*this)) +
                                " frame columns, got " + std::to_string(frame.cols()));
    if (frame.cols() > d) throw ContractViolation("manifold frame has more columns than the ambient dimension");
    const double err = (frame.transpose() * frame - Matrix::Identity(frame.cols(), frame.cols())).cwiseAbs().maxCoeff();
    if (err > 1e-10) throw ContractViolation("manifold frame columns are not orthonormal (error " + std::to_string(err) + ")");
    if (kind == Kind::affine_patch) {
        if (extent.size() != frame.cols() || !extent.allFinite() || (extent.array() <= 0).any())
            throw ContractViolation("affine patch needs one positive extent per frame column");
    } else if (!(radius > 0) || !std::isfinite(radius)) {
        throw ContractViolation(to_string(kind) + " needs a positive radius");
    }
}

double ManifoldSpec::origin_distance() const {
    const Vector o = -center;
    const Vector along = frame.transpose() * o;
    const double perp2 = std::max(0.0, (o - frame * along).squaredNorm());
    if (is_flat(*this)) {
        const Vector e = flat_extent(*this);
        const Vector clamped = along.cwiseMax(-e).cwiseMin(e);
        return std::sqrt(perp2 + (along - clamped).squaredNorm());
    }
    const double radial = along.norm() - radius;
    return std::sqrt(perp2 + radial * radial);
}

ManifoldSpec segment(const Vector& p, const Vector& q) {
    require_dimension(q.size(), p.size(), "segment endpoint");
    const double len = (q - p).norm();
    if (!(len > 0)) throw ContractViolation("segment endpoints must differ");
    ManifoldSpec m;
    m.kind = Kind::segment;
    m.center = 0.5 * (p + q);
    m.frame = (q - p) / len;
    m.radius = 0.5 * len;
    m.validate();
    return m;
}

ManifoldSpec circle(const Vector& center, const Matrix& frame, double radius) {
    ManifoldSpec m;
    m.kind = Kind::circle;
    m.center = center;
    m.frame = frame;
    m.radius = radius;
    m.validate();
    return m;
}

namespace {

double open_unit(std::uniform_real_distribution<double>& u, Rng& rng) {
    double v;
    do v = u(rng);
    while (v == 0.0);
    return v;
}

Vector point_at(const ManifoldSpec& m, const Vector& s) { return m.center + m.frame * s; }

}  // namespace

std::vector<Vector> sample_manifold(const ManifoldSpec& m, std::size_t n, std::uint64_t seed) {
    m.validate();
    if (n < 1) throw ContractViolation("sample_manifold needs n >= 1");
    Rng rng = make_rng(seed, "manifold");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector s(m.frame.cols());
        switch (m.kind) {
            case Kind::segment:
            case Kind::affine_patch: {
                const Vector e = flat_extent(m);
                for (Eigen::Index j = 0; j < s.size(); ++j) s(j) = e(j) * (2.0 * open_unit(unit, rng) - 1.0);
                break;
            }
            case Kind::circle: {
                const double t = 2.0 * M_PI * unit(rng);
                s << m.radius * std::cos(t), m.radius * std::sin(t);
                break;
            }
            case Kind::sphere2: s = m.radius * uniform_sphere(rng, 3); break;
        }
        out.push_back(point_at(m, s));
    }
    return out;
}

namespace {

/// True when the open ray {t u : t > 0} meets the manifold. Only used when
/// π(M) is full-dimensional in the sphere.
bool ray_hits(const ManifoldSpec& m, const Vector& u) {
    const Eigen::Index d = m.ambient_dim();
    if (!is_flat(m)) {
        // |t u - c|^2 = r^2 within the span of the frame, which is all of R^d here.
        const double uc = u.dot(m.center);
        const double disc = uc * uc - (m.center.squaredNorm() - m.radius * m.radius);
        return disc >= 0.0 && uc + std::sqrt(disc) > 0.0;
    }
    const Vector e = flat_extent(m);
    if (m.frame.cols() == d) {
        // Slab test in frame coordinates: s(t) = F^T (t u - c).
        const Vector a = m.frame.transpose() * u;
        const Vector c = m.frame.transpose() * m.center;
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < d; ++j) {
            if (a(j) == 0.0) {
                if (std::abs(c(j)) >= e(j)) return false;
                continue;
            }
            const double t1 = (c(j) - e(j)) / a(j), t2 = (c(j) + e(j)) / a(j);
            lo = std::max(lo, std::min(t1, t2));
            hi = std::min(hi, std::max(t1, t2));
        }
        return hi > lo;
    }
    // Hyperplane patch: solve t u - F s = c.
    Matrix a(d, d);
    a.col(0) = u;
    a.rightCols(d - 1) = -m.frame;
    const Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible()) return false;
    const Vector sol = lu.solve(m.center);
    if (sol(0) <= 0.0) return false;
    return (sol.tail(d - 1).cwiseAbs().array() < e.array()).all();
}

double unit_ball_volume(int c) { return std::pow(M_PI, 0.5 * c) / std::tgamma(0.5 * c + 1.0); }

/// Unit directions along a curve, spaced finely against the tube angle.
std::vector<Vector> curve_directions(const ManifoldSpec& m, double tube_angle) {
    auto at = [&](double t) {
        Vector s(m.frame.cols());
        if (m.kind == Kind::segment) s(0) = m.radius * (2.0 * t - 1.0);
        else s << m.radius * std::cos(2 * M_PI * t), m.radius * std::sin(2 * M_PI * t);
        return Vector(point_at(m, s).normalized());
    };
    double length = 0.0;
    Vector prev = at(0.0);
    for (int i = 1; i <= 1000; ++i) {
        const Vector cur = at(i / 1000.0);
        length += std::acos(std::clamp(prev.dot(cur), -1.0, 1.0));
        prev = cur;
    }
    const auto count = static_cast<std::size_t>(std::clamp(std::ceil(40.0 * length / tube_angle), 1000.0, 200000.0));
    std::vector<Vector> out;
    for (std::size_t i = 0; i <= count; ++i) out.push_back(at(static_cast<double>(i) / count));
    return out;
}

}  // namespace

SphericalMeasure spherical_measure(const ManifoldSpec& m, std::size_t n, std::uint64_t seed,
                                   const routing::RouterSpec* router, std::size_t routers, double tube_angle) {
    m.validate();
    if (n < 1) throw ContractViolation("spherical_measure needs n >= 1");
    const Eigen::Index d = m.ambient_dim();
    if (m.origin_distance() <= 1e-12 * (1.0 + m.center.norm()))
        throw Refusal("manifold meets the origin; the radial projection is undefined");
    SphericalMeasure out;
    out.tube_angle = tube_angle;
    const int codim = static_cast<int>(d - 1) - m.d_eff();
    Rng rng = make_rng(seed, "sphere-directions");
    if (codim <= 0) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) hits += ray_hits(m, uniform_sphere(rng, d));
        const double p = static_cast<double>(hits) / n;
        out.volume = p;
        out.volume_se = std::sqrt(p * (1 - p) / n);
    } else if (m.d_eff() == 1) {
        const auto dirs = curve_directions(m, tube_angle);
        const double cos_t = std::cos(tube_angle);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vector u = uniform_sphere(rng, d);
            for (const auto& v : dirs)
                if (u.dot(v) >= cos_t) {
                    ++hits;
                    break;
                }
        }
        const double f = static_cast<double>(hits) / n;
        const double tube = unit_ball_volume(codim) * std::pow(tube_angle, codim);
        out.tube_fraction = f;
        out.tube_density = f / tube;
        out.tube_density_se = std::sqrt(f * (1 - f) / n) / tube;
    }
    if (router) {
        router->validate();
        const auto nn = router->experts();
        const std::size_t probes = std::min<std::size_t>(n, 20000);
        std::vector<double> ratios;
        const auto points = sample_manifold(m, probes, stream_seed(seed, "direct-manifold"));
        for (std::size_t r = 0; r < routers; ++r) {
            Rng rr = make_rng(seed, "isotropic-router", r);
            const Matrix w = gaussian_matrix(rr, nn, d);
            std::set<routing::Coalition> sphere_cells, manifold_cells;
            for (std::size_t i = 0; i < probes; ++i) {
                sphere_cells.insert(routing::top_k(w * uniform_sphere(rr, d), router->k));
                manifold_cells.insert(routing::top_k(w * points[i], router->k));
            }
            ratios.push_back(static_cast<double>(manifold_cells.size()) / sphere_cells.size());
        }
        double mean = 0.0, var = 0.0;
        for (double x : ratios) mean += x;
        mean /= ratios.size();
        for (double x : ratios) var += (x - mean) * (x - mean);
        out.direct = mean;
        out.direct_se = ratios.size() > 1 ? std::sqrt(var / (ratios.size() - 1) / ratios.size()) : 0.0;
    }
    return out;
}

std::vector<Vector> flat_strata(const ManifoldSpec& m, std::span<const arrangement::Hyperplane> structure,
                                std::size_t max_points, std::uint64_t seed) {
    m.validate();
    if (!is_flat(m)) return {};
    const Eigen::Index dim = m.frame.cols();
    const Vector e = flat_extent(m);
    // Restrict each hyperplane to the flat: (F^T w)·s + (w·c + b).
    std::vector<arrangement::Hyperplane> local;
    for (const auto& h : structure) {
        const Vector w = m.frame.transpose() * h.normal();
        if (w.norm() <= 1e-12 * h.normal().norm()) continue;
        local.emplace_back(w, h.eval(m.center));
    }
    std::vector<arrangement::Hyperplane> box;
    for (Eigen::Index j = 0; j < dim; ++j) {
        box.emplace_back(Vector::Unit(dim, j), e(j));
        box.emplace_back(-Vector::Unit(dim, j), e(j));
    }
    arrangement::SamplingDomain domain;
    domain.dimension = dim;
    domain.within = arrangement::Polyhedron(dim, box);
    for (auto& a : arrangement::flat_anchors(local, dim, 20000)) {
        domain.anchors.push_back(std::move(a.point));
        domain.anchor_cones.push_back(std::move(a.directions));
    }
    domain.anchor_scale = e.maxCoeff();
    std::vector<Vector> out;
    for (const auto& s : arrangement::strata_points(domain, seed, max_points)) out.push_back(point_at(m, s));
    return out;
}

EffectiveCapacityReport effective_census(const LayerSpec& spec, const ManifoldSpec& m, std::size_t n,
                                         std::uint64_t seed, const EffectiveOptions& options) {
    m.validate();
    if (n < 1) throw ContractViolation("effective census needs n >= 1");
    EffectiveCapacityReport rep;
    rep.seed = seed;
    std::set<std::string> labels, coalitions;
    std::size_t width = 0;
    const auto* moe = std::get_if<capacity::MoESpec>(&spec);
    std::vector<arrangement::Hyperplane> dense_planes;
    if (moe) {
        moe->validate();
        require_dimension(moe->input_dim(), m.ambient_dim(), "effective census: MoE input");
        width = static_cast<std::size_t>(moe->width());
    } else {
        const auto& e = std::get<capacity::ExpertSpec>(spec);
        e.validate();
        require_dimension(e.input_dim(), m.ambient_dim(), "effective census: expert input");
        width = static_cast<std::size_t>(e.width());
        dense_planes = e.hyperplanes();
    }
    std::vector<arrangement::Hyperplane> structure = dense_planes;
    if (moe) {
        for (const auto& e : moe->experts) {
            auto hs = e.hyperplanes();
            structure.insert(structure.end(), hs.begin(), hs.end());
        }
        const auto& r = moe->router;
        for (Eigen::Index i = 0; i < r.experts(); ++i)
            for (Eigen::Index j = i + 1; j < r.experts(); ++j) {
                const Vector w = (r.weights.row(i) - r.weights.row(j)).transpose();
                if (w.squaredNorm() > 0) structure.emplace_back(w, r.bias(i) - r.bias(j));
            }
    }
    // Strata do not depend on n, so the sample list for n is a prefix-
    // extension of the one for any smaller n.
    auto points = flat_strata(m, structure, 200000, stream_seed(seed, "manifold-strata"));
    const auto uniform = sample_manifold(m, n, seed);
    points.insert(points.end(), uniform.begin(), uniform.end());
    rep.samples = points.size();
    const std::size_t cut = points.size() - points.size() / 10;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i == cut) rep.count_at_90pct = labels.size();
        auto key = moe ? capacity::pattern_label(*moe, points[i]) : arrangement::sign_key(dense_planes, points[i]);
        if (!key) continue;
        if (moe) coalitions.insert(key->substr(0, key->find('}') + 1));
        labels.insert(std::move(*key));
    }
    if (cut >= points.size()) rep.count_at_90pct = labels.size();
    rep.distinct_patterns = labels.size();
    rep.distinct_coalitions = moe ? coalitions.size() : 1;
    rep.plateau = rep.count_at_90pct == rep.distinct_patterns;
    const auto d_eff = static_cast<std::uint64_t>(m.d_eff());
    rep.bound_dense = zaslavsky_phi(width, d_eff);
    if (m.kind == Kind::circle) rep.bound_closed = BigInt(std::max<std::size_t>(1, 2 * width));
    if (m.kind == Kind::sphere2) rep.bound_closed = BigInt(width * (width - 1) + 2);
    if (moe) {
        const int k = moe->k();
        if (static_cast<std::size_t>(k) * width < d_eff)
            rep.warnings.push_back("RANK_DEFICIENT: kH < d_eff");
        if (options.measure) {
            const auto sm = spherical_measure(m, options.measure_samples, seed, nullptr, 0, options.tube_angle);
            const double measure = sm.tube_density ? *sm.tube_density : sm.volume;
            rep.spherical_measure = measure;
            rep.spherical_measure_se = sm.tube_density ? *sm.tube_density_se : sm.volume_se;
            rep.bound_moe = measure * to_double(binomial(moe->experts_count(), k)) *
                            to_double(zaslavsky_phi(static_cast<std::uint64_t>(k) * width, d_eff));
        }
    }
    if (!rep.plateau) rep.warnings.push_back("pattern count still rising over the last 10% of samples");
    return rep;
}

double median(std::vector<double> v) {
    if (v.empty()) throw ContractViolation("median of an empty list");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

ResilienceResult resilience_experiment(int n, int k, int width, const ManifoldSpec& m,
                                       const std::vector<std::uint64_t>& seeds, std::size_t samples) {
    m.validate();
    if (seeds.empty()) throw ContractViolation("resilience experiment needs at least one seed");
    ResilienceResult res;
    res.n = n;
    res.k = k;
    res.width = width;
    res.input_dim = static_cast<int>(m.ambient_dim());
    res.rank_deficient = k * width < m.d_eff();
    res.ceiling = to_double(binomial(n, k)) * std::pow(static_cast<double>(k), m.d_eff());
    std::vector<double> dense, moe, ratio;
    for (std::uint64_t seed : seeds) {
        const auto expert = capacity::random_expert(width, res.input_dim, seed);
        const auto layer = capacity::random_moe(n, k, width, res.input_dim, seed);
        EffectiveOptions opts;
        opts.measure = false;
        const auto dense_rep = effective_census(expert, m, samples, seed, opts);
        const auto moe_rep = effective_census(layer, m, samples, seed, opts);
        ResilienceRow row;
        row.seed = seed;
        row.dense_patterns = dense_rep.distinct_patterns;
        row.moe_patterns = moe_rep.distinct_patterns;
        row.moe_coalitions = moe_rep.distinct_coalitions;
        row.ratio = static_cast<double>(row.moe_patterns) / std::max<std::uint64_t>(1, row.dense_patterns);
        dense.push_back(static_cast<double>(row.dense_patterns));
        moe.push_back(static_cast<double>(row.moe_patterns));
        ratio.push_back(row.ratio);
        res.rows.push_back(row);
    }
    res.median_dense = median(dense);
    res.median_moe = median(moe);
    res.median_ratio = median(ratio);
    return res;
}

}  // namespace tropcap::manifold
