#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tropcap/arrangement.hpp"
#include "tropcap/capacity.hpp"
#include "tropcap/manifold.hpp"
#include "tropcap/routing.hpp"

namespace tropcap::io {

using Json = nlohmann::json;

/// Sorted keys, two-space indent, doubles with 17 significant digits,
/// trailing newline. Identical values always give identical bytes.
std::string canonical_dump(const Json& j);
/// Throws ContractViolation with the parser message.
Json parse(const std::string& text);
Json read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// 16 hex digits of FNV-1a over the canonical dump.
std::string content_hash(const Json& j);

Json to_json(const Vector& v);
Json to_json(const Matrix& m);  // list of rows
Vector vector_from_json(const Json& j, const char* what);
Matrix matrix_from_json(const Json& j, const char* what);
Json big_json(const BigInt& v);  // decimal string
BigInt bigint_from_json(const Json& j);

Json to_json(const arrangement::Hyperplane& h);
Json to_json(const arrangement::Arrangement& a);
arrangement::Arrangement arrangement_from_json(const Json& j);
Json to_json(const arrangement::Polyhedron& p);
arrangement::Polyhedron polyhedron_from_json(const Json& j);

Json to_json(const routing::RouterSpec& r);
routing::RouterSpec router_from_json(const Json& j);
Json to_json(const capacity::ExpertSpec& e);
capacity::ExpertSpec expert_from_json(const Json& j);
Json to_json(const capacity::MoESpec& m);
capacity::MoESpec moe_from_json(const Json& j);
Json to_json(const manifold::ManifoldSpec& m);
manifold::ManifoldSpec manifold_from_json(const Json& j);
Json to_json(const capacity::Zonotope& z);
capacity::Zonotope zonotope_from_json(const Json& j);

/// "arrangement", "router", "expert", "moe", "manifold" or "zonotope",
/// decided by the distinguishing keys. Throws ContractViolation otherwise.
std::string spec_kind(const Json& j);

Json to_json(const routing::RoutingCell& c);
Json to_json(const routing::RedundancyReport& r);
Json to_json(const routing::FanAdjacency& a);
Json to_json(const routing::HypersimplexVertex& v);
Json to_json(const capacity::CapacityReport& r);
Json to_json(const capacity::BoundRow& r);
Json to_json(const capacity::ZonotopeCount& z);
Json to_json(const capacity::ScalingResult& s);
Json to_json(const manifold::EffectiveCapacityReport& r);
Json to_json(const manifold::SphericalMeasure& m);
Json to_json(const manifold::ResilienceResult& r);

/// CSV projection: the array-of-objects field `table` becomes the table,
/// otherwise the scalar top-level fields form a single row. Columns are
/// sorted; nested values are written as compact JSON.
std::string to_csv(const Json& report, const std::string& table = "rows");

}  // namespace tropcap::io
