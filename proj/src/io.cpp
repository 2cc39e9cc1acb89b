#include "tropcap/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tropcap/errors.hpp"
#include "tropcap/random.hpp"

namespace tropcap::io {

namespace {

std::string format_double(double v) {
    if (!std::isfinite(v)) throw ContractViolation("cannot serialize a non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void dump(const Json& j, std::string& out, int depth) {
    const std::string pad(2 * (depth + 1), ' ');
    const std::string close(2 * depth, ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
                if (!first) out += ",\n";
                first = false;
                out += pad + Json(it.key()).dump() + ": ";
                dump(it.value(), out, depth + 1);
            }
            out += "\n" + close + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            bool scalars = true;
            for (const auto& e : j) scalars = scalars && !e.is_structured();
            if (scalars) {
                out += "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) out += ", ";
                    dump(j[i], out, depth + 1);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                dump(j[i], out, depth + 1);
            }
            out += "\n" + close + "]";
            return;
        }
        case Json::value_t::number_float: out += format_double(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ContractViolation(message);
}

const Json& field(const Json& j, const char* key, const char* what) {
    require(j.is_object() && j.contains(key), std::string(what) + ": missing field '" + key + "'");
    return j.at(key);
}

}  // namespace

std::string canonical_dump(const Json& j) {
    std::string out;
    dump(j, out, 0);
    out += "\n";
    return out;
}

Json parse(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ContractViolation(std::string("invalid JSON: ") + e.what());
    }
}

Json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractViolation("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ContractViolation("cannot write '" + path + "'");
    out << content;
}

std::string content_hash(const Json& j) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_dump(j))));
    return buf;
}

Json to_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json to_json(const Matrix& m) {
    Json a = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vector(m.row(r).transpose())));
    return a;
}

Vector vector_from_json(const Json& j, const char* what) {
    require(j.is_array(), std::string(what) + " must be an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        require(j[i].is_number(), std::string(what) + " must contain only numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Matrix matrix_from_json(const Json& j, const char* what) {
    require(j.is_array() && !j.empty(), std::string(what) + " must be a non-empty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Vector row = vector_from_json(j[r], what);
        require(static_cast<std::size_t>(row.size()) == cols, std::string(what) + " rows must have equal length");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

Json big_json(const BigInt& v) { return to_decimal(v); }

BigInt bigint_from_json(const Json& j) {
    if (j.is_number_integer()) return BigInt(j.get<long long>());
    require(j.is_string(), "big integer must be a decimal string");
    return from_decimal(j.get<std::string>());
}

Json to_json(const arrangement::Hyperplane& h) { return Json{{"w", to_json(h.normal())}, {"b", h.offset()}}; }

Json to_json(const arrangement::Arrangement& a) {
    Json hs = Json::array();
    for (const auto& h : a.hyperplanes()) hs.push_back(to_json(h));
    return Json{{"dimension", a.dimension()}, {"hyperplanes", hs}};
}

namespace {

std::vector<arrangement::Hyperplane> hyperplanes_from_json(const Json& j, const char* what) {
    require(j.is_array(), std::string(what) + " must be an array");
    std::vector<arrangement::Hyperplane> out;
    for (const auto& h : j) {
        const auto& b = field(h, "b", what);
        require(b.is_number(), std::string(what) + ": 'b' must be a number");
        out.emplace_back(vector_from_json(field(h, "w", what), what), b.get<double>());
    }
    return out;
}

Eigen::Index dimension_field(const Json& j, const char* what) {
    const auto& d = field(j, "dimension", what);
    require(d.is_number_integer() && d.get<long long>() >= 1, std::string(what) + ": dimension must be >= 1");
    return d.get<Eigen::Index>();
}

}  // namespace

arrangement::Arrangement arrangement_from_json(const Json& j) {
    return arrangement::Arrangement(dimension_field(j, "arrangement"),
                                    hyperplanes_from_json(field(j, "hyperplanes", "arrangement"), "arrangement"));
}

Json to_json(const arrangement::Polyhedron& p) {
    Json hs = Json::array();
    for (const auto& h : p.halfspaces()) hs.push_back(to_json(h));
    return Json{{"dimension", p.dimension()}, {"halfspaces", hs}};
}

arrangement::Polyhedron polyhedron_from_json(const Json& j) {
    return arrangement::Polyhedron(dimension_field(j, "polyhedron"),
                                   hyperplanes_from_json(field(j, "halfspaces", "polyhedron"), "polyhedron"));
}

Json to_json(const routing::RouterSpec& r) {
    return Json{{"W_r", to_json(r.weights)}, {"b_r", to_json(r.bias)}, {"k", r.k}};
}

routing::RouterSpec router_from_json(const Json& j) {
    routing::RouterSpec r;
    r.weights = matrix_from_json(field(j, "W_r", "router"), "router W_r");
    r.bias = vector_from_json(field(j, "b_r", "router"), "router b_r");
    const auto& k = field(j, "k", "router");
    require(k.is_number_integer(), "router k must be an integer");
    r.k = k.get<int>();
    r.validate();
    return r;
}

Json to_json(const capacity::ExpertSpec& e) { return Json{{"W", to_json(e.weights)}, {"b", to_json(e.bias)}}; }

capacity::ExpertSpec expert_from_json(const Json& j) {
    capacity::ExpertSpec e;
    e.weights = matrix_from_json(field(j, "W", "expert"), "expert W");
    e.bias = vector_from_json(field(j, "b", "expert"), "expert b");
    e.validate();
    return e;
}

Json to_json(const capacity::MoESpec& m) {
    Json experts = Json::array();
    for (const auto& e : m.experts) experts.push_back(to_json(e));
    return Json{{"router", to_json(m.router)}, {"experts", experts}, {"H", m.width()}};
}

capacity::MoESpec moe_from_json(const Json& j) {
    capacity::MoESpec m;
    m.router = router_from_json(field(j, "router", "moe"));
    const auto& experts = field(j, "experts", "moe");
    require(experts.is_array(), "moe experts must be an array");
    for (const auto& e : experts) m.experts.push_back(expert_from_json(e));
    m.validate();
    if (j.contains("H"))
        require(j["H"].is_number_integer() && j["H"].get<Eigen::Index>() == m.width(),
                "moe H does not match the expert width");
    return m;
}

Json to_json(const manifold::ManifoldSpec& m) {
    Json frame = Json::array();
    for (Eigen::Index c = 0; c < m.frame.cols(); ++c) frame.push_back(to_json(Vector(m.frame.col(c))));
    Json j{{"kind", manifold::to_string(m.kind)}, {"center", to_json(m.center)}, {"frame", frame},
           {"d_eff", m.d_eff()}};
    if (m.kind == manifold::Kind::affine_patch) j["extent"] = to_json(m.extent);
    else j["radius"] = m.radius;
    return j;
}

manifold::ManifoldSpec manifold_from_json(const Json& j) {
    manifold::ManifoldSpec m;
    const auto& kind = field(j, "kind", "manifold");
    require(kind.is_string(), "manifold kind must be a string");
    m.kind = manifold::kind_from_string(kind.get<std::string>());
    m.center = vector_from_json(field(j, "center", "manifold"), "manifold center");
    const Matrix cols = matrix_from_json(field(j, "frame", "manifold"), "manifold frame");
    m.frame = cols.transpose();
    if (m.kind == manifold::Kind::affine_patch) {
        m.extent = vector_from_json(field(j, "extent", "manifold"), "manifold extent");
    } else {
        const auto& r = field(j, "radius", "manifold");
        require(r.is_number(), "manifold radius must be a number");
        m.radius = r.get<double>();
    }
    m.validate();
    if (j.contains("d_eff"))
        require(j["d_eff"].is_number_integer() && j["d_eff"].get<int>() == m.d_eff(),
                "manifold d_eff does not match its kind and frame");
    return m;
}

Json to_json(const capacity::Zonotope& z) {
    Json g = Json::array();
    for (const auto& v : z.generators) g.push_back(to_json(v));
    return Json{{"generators", g}};
}

capacity::Zonotope zonotope_from_json(const Json& j) {
    capacity::Zonotope z;
    for (const auto& g : field(j, "generators", "zonotope")) z.generators.push_back(vector_from_json(g, "generator"));
    return z;
}

std::string spec_kind(const Json& j) {
    require(j.is_object(), "spec must be a JSON object");
    if (j.contains("hyperplanes")) return "arrangement";
    if (j.contains("router") && j.contains("experts")) return "moe";
    if (j.contains("W_r")) return "router";
    if (j.contains("W")) return "expert";
    if (j.contains("kind") && j.contains("frame")) return "manifold";
    if (j.contains("generators")) return "zonotope";
    throw ContractViolation("unrecognized spec: expected an arrangement, router, expert, moe, manifold or zonotope");
}

namespace {

Json coalition_json(const routing::Coalition& c) { return Json(c); }

}  // namespace

Json to_json(const routing::RoutingCell& c) {
    Json hs = Json::array();
    for (std::size_t i = 0; i < c.halfspaces.size(); ++i) {
        Json h = to_json(c.halfspaces[i]);
        h["swap"] = Json{c.swaps[i].first, c.swaps[i].second};
        hs.push_back(h);
    }
    Json j{{"coalition", coalition_json(c.coalition)},
           {"halfspaces", hs},
           {"feasible", c.feasibility.feasible},
           {"slack", c.feasibility.slack},
           {"warnings", c.warnings}};
    j["witness"] = c.feasibility.witness ? to_json(*c.feasibility.witness) : Json();
    return j;
}

Json to_json(const routing::RedundancyReport& r) {
    Json failures = Json::array();
    for (const auto& f : r.failures) failures.push_back(Json{{"competitor", f.competitor}, {"excess", f.excess}});
    return Json{{"coalition", r.coalition},
                {"competitors_checked", r.competitors_checked},
                {"max_excess", std::isfinite(r.max_excess) ? Json(r.max_excess) : Json()},
                {"failures", failures},
                {"sample_points", r.sample_points},
                {"sample_violations", r.sample_violations},
                {"ok", r.ok()}};
}

Json to_json(const routing::FanAdjacency& a) {
    return Json{{"from", a.from},
                {"to", a.to},
                {"swap_out", a.swap_out},
                {"swap_in", a.swap_in},
                {"symmetric_difference", a.symmetric_difference}};
}

Json to_json(const routing::HypersimplexVertex& v) {
    return Json{{"coalition", v.coalition}, {"vertex", to_json(v.vertex)}, {"is_extreme", v.is_extreme}};
}

Json to_json(const capacity::CapacityReport& r) {
    Json terms = Json::object();
    for (const auto& [k, v] : r.bound_terms) terms[k] = big_json(v);
    Json cells = Json::array();
    for (const auto& c : r.per_cell) {
        Json row{{"coalition", c.coalition}, {"count", big_json(c.count)}, {"essential_facets", c.essential_facets}};
        row["refined_bound"] = c.refined_bound ? big_json(*c.refined_bound) : Json();
        cells.push_back(row);
    }
    Json j{{"mode", capacity::to_string(r.mode)},
           {"bound_upper", big_json(r.bound_upper)},
           {"bound_terms", terms},
           {"per_cell", cells},
           {"params_active", r.params_active},
           {"params_total", r.params_total},
           {"general_position", r.general_position},
           {"general_position_violation", r.general_position_violation},
           {"census_samples", r.census_samples},
           {"warnings", r.warnings}};
    j["exact_count"] = r.exact_count ? big_json(*r.exact_count) : Json();
    j["census_count"] = r.census_count ? big_json(*r.census_count) : Json();
    j["distinct_coalitions"] = r.distinct_coalitions ? Json(*r.distinct_coalitions) : Json();
    return j;
}

Json to_json(const capacity::BoundRow& r) {
    return Json{{"model", r.model},
                {"params_active", r.params_active},
                {"params_total", r.params_total},
                {"capacity", big_json(r.capacity)},
                {"asymptotic", r.asymptotic}};
}

Json to_json(const capacity::ZonotopeCount& z) {
    Json verts = Json::array();
    for (const auto& v : z.vertices) verts.push_back(to_json(v));
    return Json{{"enumerated", big_json(z.enumerated)},
                {"formula_generic", big_json(z.formula_generic)},
                {"formula_literal", big_json(z.formula_literal)},
                {"generic", z.generic},
                {"matches_generic", z.enumerated == z.formula_generic},
                {"matches_literal", z.enumerated == z.formula_literal},
                {"vertices", verts}};
}

Json to_json(const capacity::ScalingResult& s) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        const auto& p = s.points[i];
        rows.push_back(Json{{"value", p.value},
                            {"counts", p.counts},
                            {"mean", p.mean},
                            {"coalitions", big_json(p.coalitions)},
                            {"residual", s.residuals[i]}});
    }
    Json j{{"rows", rows}, {"slope", s.slope}, {"intercept", s.intercept}};
    j["slope_vs_coalitions"] = s.slope_vs_coalitions ? Json(*s.slope_vs_coalitions) : Json();
    return j;
}

Json to_json(const manifold::EffectiveCapacityReport& r) {
    Json j{{"distinct_patterns", r.distinct_patterns},
           {"distinct_coalitions", r.distinct_coalitions},
           {"count_at_90pct", r.count_at_90pct},
           {"plateau", r.plateau},
           {"bound_dense", big_json(r.bound_dense)},
           {"samples", r.samples},
           {"seed", r.seed},
           {"warnings", r.warnings}};
    j["spherical_measure_estimate"] = r.spherical_measure ? Json(*r.spherical_measure) : Json();
    j["spherical_measure_se"] = r.spherical_measure_se ? Json(*r.spherical_measure_se) : Json();
    j["bound_closed"] = r.bound_closed ? big_json(*r.bound_closed) : Json();
    j["bound_moe"] = r.bound_moe ? Json(*r.bound_moe) : Json();
    return j;
}

Json to_json(const manifold::SphericalMeasure& m) {
    Json j{{"volume", m.volume}, {"volume_se", m.volume_se}, {"tube_fraction", m.tube_fraction},
           {"tube_angle", m.tube_angle}};
    j["tube_density"] = m.tube_density ? Json(*m.tube_density) : Json();
    j["tube_density_se"] = m.tube_density_se ? Json(*m.tube_density_se) : Json();
    j["direct"] = m.direct ? Json(*m.direct) : Json();
    j["direct_se"] = m.direct_se ? Json(*m.direct_se) : Json();
    return j;
}

Json to_json(const manifold::ResilienceResult& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back(Json{{"seed", row.seed},
                            {"dense_patterns", row.dense_patterns},
                            {"moe_patterns", row.moe_patterns},
                            {"moe_coalitions", row.moe_coalitions},
                            {"ratio", row.ratio}});
    return Json{{"N", r.n},
                {"k", r.k},
                {"H", r.width},
                {"d_in", r.input_dim},
                {"rows", rows},
                {"median_dense", r.median_dense},
                {"median_moe", r.median_moe},
                {"median_ratio", r.median_ratio},
                {"ceiling", r.ceiling},
                {"flags", r.rank_deficient ? Json::array({"RANK_DEFICIENT"}) : Json::array()}};
}

namespace {

std::string csv_cell(const Json& v) {
    std::string s;
    if (v.is_string()) s = v.get<std::string>();
    else if (v.is_number_float()) s = canonical_dump(v), s.pop_back();
    else s = v.dump();
    if (s.find_first_of(",\"\n") != std::string::npos) {
        std::string q = "\"";
        for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    return s;
}

}  // namespace

std::string to_csv(const Json& report, const std::string& table) {
    std::vector<Json> rows;
    if (report.is_object() && report.contains(table) && report[table].is_array() && !report[table].empty()) {
        for (const auto& r : report[table]) rows.push_back(r);
    } else {
        Json flat = Json::object();
        for (auto it = report.begin(); it != report.end(); ++it)
            if (!it.value().is_structured()) flat[it.key()] = it.value();
        rows.push_back(flat);
    }
    std::vector<std::string> columns;
    for (const auto& r : rows)
        for (auto it = r.begin(); it != r.end(); ++it)
            if (std::find(columns.begin(), columns.end(), it.key()) == columns.end()) columns.push_back(it.key());
    std::sort(columns.begin(), columns.end());
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
    out += "\n";
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out += ",";
            if (r.contains(columns[c])) out += csv_cell(r[columns[c]]);
        }
        out += "\n";
    }
    return out;
}

}  // namespace tropcap::io
