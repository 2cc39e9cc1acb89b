#include "doctest.h"

#include <random>

#include "tropcap/errors.hpp"
#include "tropcap/io.hpp"
#include "tropcap/random.hpp"

using namespace tropcap;
using io::Json;

TEST_CASE("canonical dump sorts keys and round-trips doubles bit-exactly") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int t = 0; t < 2000; ++t) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        const Json j{{"z", v}, {"a", Json::array({v, -v})}};
        const std::string s = io::canonical_dump(j);
        CHECK(s.find("\"a\"") < s.find("\"z\""));
        const Json back = io::parse(s);
        CHECK(back["z"].get<double>() == v);
        CHECK(io::canonical_dump(back) == s);
    }
    CHECK(io::canonical_dump(Json{{"x", 1.0}}) == "{\n  \"x\": 1.0\n}\n");
    CHECK_THROWS_AS(io::canonical_dump(Json{{"x", std::nan("")}}), ContractViolation);
}

TEST_CASE("big integers serialize as decimal strings") {
    const BigInt big = BigInt(1) << 200;
    const Json j = io::big_json(big);
    CHECK(j.is_string());
    CHECK(io::bigint_from_json(j) == big);
    CHECK(io::bigint_from_json(Json(42)) == 42);
}

TEST_CASE("spec round trips") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto moe = capacity::random_moe(2 + static_cast<int>(seed % 4), 1 + static_cast<int>(seed % 2), 3, 2 + static_cast<int>(seed % 3), seed);
        const Json j = io::to_json(moe);
        CHECK(io::spec_kind(j) == "moe");
        const auto back = io::moe_from_json(io::parse(io::canonical_dump(j)));
        CHECK(back == moe);
        CHECK(io::router_from_json(io::to_json(moe.router)) == moe.router);
        CHECK(io::expert_from_json(io::to_json(moe.experts[0])) == moe.experts[0]);
        CHECK(io::content_hash(io::to_json(back)) == io::content_hash(j));
    }
    Matrix f(3, 2);
    f << 1, 0, 0, 1, 0, 0;
    Vector c(3);
    c << 0.5, 0.25, 2;
    const auto circ = manifold::circle(c, f, 1.5);
    CHECK(io::manifold_from_json(io::to_json(circ)) == circ);
    Vector p(2), q(2);
    p << -1, 0.5;
    q << 2, -0.25;
    const auto seg = manifold::segment(p, q);
    const Json sj = io::to_json(seg);
    CHECK(io::spec_kind(sj) == "manifold");
    CHECK(io::manifold_from_json(sj) == seg);

    arrangement::Arrangement arr(2, {arrangement::Hyperplane(p, 1.0), arrangement::Hyperplane(q, -2.0)});
    const auto back = io::arrangement_from_json(io::to_json(arr));
    REQUIRE(back.size() == 2);
    CHECK(back.hyperplanes()[1].normal() == q);
    CHECK(back.hyperplanes()[1].offset() == -2.0);
}

TEST_CASE("malformed specs are rejected") {
    CHECK_THROWS_AS(io::parse("{\"W_r\": [[1"), ContractViolation);
    CHECK_THROWS_AS(io::router_from_json(Json{{"W_r", {{1.0, 0.0}}}, {"b_r", {0.0}}, {"k", 2}}), ContractViolation);
    CHECK_THROWS_AS(io::router_from_json(Json{{"W_r", {{1.0, 0.0}, {1.0}}}, {"b_r", {0.0, 0.0}}, {"k", 1}}),
                    ContractViolation);
    CHECK_THROWS_AS(io::expert_from_json(Json{{"W", {{1.0, "a"}}}, {"b", {0.0}}}), ContractViolation);
    CHECK_THROWS_AS(io::spec_kind(Json{{"foo", 1}}), ContractViolation);
    const auto moe = capacity::random_moe(3, 1, 2, 2, 1);
    Json j = io::to_json(moe);
    j["H"] = 5;
    CHECK_THROWS_AS(io::moe_from_json(j), ContractViolation);
}

TEST_CASE("reports serialize and project to CSV") {
    const auto moe = capacity::random_moe(3, 1, 2, 2, 3);
    const auto report = capacity::count_topk_regions(moe, false);
    const Json j = io::to_json(report);
    CHECK(j["exact_count"].is_string());
    CHECK(j["mode"] == "topk");
    const std::string csv = io::to_csv(j, "per_cell");
    CHECK(csv.rfind("coalition,count,essential_facets,refined_bound\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(report.per_cell.size()));

    Json table{{"rows", Json::array()}};
    for (const auto& r : capacity::bound_table(4, 2, 3, 2)) table["rows"].push_back(io::to_json(r));
    const std::string tcsv = io::to_csv(table);
    CHECK(tcsv.rfind("asymptotic,capacity,model,params_active,params_total\n", 0) == 0);
    CHECK(io::to_csv(Json{{"a", 1}, {"b", "x,y"}}) == "a,b\n1,\"x,y\"\n");
}
