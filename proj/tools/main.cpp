#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "tropcap/errors.hpp"
#include "tropcap/parallel.hpp"

namespace fs = std::filesystem;
using namespace tropcap;
using cli::Json;

namespace {

struct Common {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    std::size_t threads = 0;
    std::optional<std::size_t> n_max;
    std::optional<std::size_t> coalitions;
    std::optional<std::size_t> samples;
    std::vector<std::string> params;  // key=value, value parsed as JSON when possible
};

struct Dims {
    std::optional<int> n, k, h, d;
    void add(CLI::App* sub) {
        sub->add_option("-N,--experts", n, "number of experts N");
        sub->add_option("-k,--top-k", k, "active experts per input");
        sub->add_option("-H,--width", h, "expert width H");
        sub->add_option("-d,--input-dim", d, "input dimension d_in");
    }
    void into(Json& p) const {
        if (n) p["N"] = *n;
        if (k) p["k"] = *k;
        if (h) p["H"] = *h;
        if (d) p["d"] = *d;
    }
};

Json param_value(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error&) {
        return text;
    }
}

void emit_error(const std::exception& e, int code) {
    std::cerr << cli::error_json(e, code).dump() << "\n";
}

int finish(const cli::Request& request, const cli::Outcome* outcome, const std::vector<std::string>& errors,
           int code) {
    const std::size_t threads = thread_count();
    if (outcome && request.out.empty()) std::cout << cli::render(*outcome, request.format);
    if (request.out.empty()) return code;
    std::string report_file;
    if (outcome) {
        io::write_file(request.out, cli::render(*outcome, request.format));
        report_file = fs::path(request.out).filename().string();
    }
    io::write_file(request.out + ".manifest.json",
                   io::canonical_dump(cli::manifest(request, outcome, errors, report_file, code, threads)));
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact region counting and capacity analysis for ReLU and Top-k MoE layers", "tropcap"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cli::kToolVersion));

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "master seed");
        sub->add_option("--out", common.out, "report path; a manifest is written next to it");
        sub->add_option("--format", common.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--threads", common.threads, "worker threads (default: TROPCAP_THREADS or all cores)");
        sub->add_option("--budget-nmax", common.n_max, "hyperplanes per exact enumeration");
        sub->add_option("--budget-coalitions", common.coalitions, "coalitions per router");
        sub->add_option("--samples", common.samples, "census or trial sample count");
        sub->add_option("--param", common.params, "extra parameter key=value");
    };

    std::string spec_path, manifold_path, config_path;
    Json params = Json::object();

    auto* count = app.add_subcommand("count-regions", "exact region count of an arrangement, expert or MoE");
    bool no_cuts = false;
    count->add_option("--spec", spec_path, "arrangement, expert or moe JSON")->required()->check(CLI::ExistingFile);
    count->add_flag("--no-router-cuts", no_cuts, "MoE: count per cell without router facets");

    auto* cells = app.add_subcommand("enumerate-cells", "feasible Top-k routing cells of a router");
    bool no_adjacency = false, hypersimplex = false;
    cells->add_option("--spec", spec_path, "router or moe JSON")->required()->check(CLI::ExistingFile);
    cells->add_flag("--no-adjacency", no_adjacency, "skip the facet adjacency audit");
    cells->add_flag("--hypersimplex", hypersimplex, "add the hypersimplex vertex projection");

    auto* bounds = app.add_subcommand("bounds", "capacity and parameter table");
    Dims bounds_dims;
    bounds_dims.add(bounds);

    auto* redundancy = app.add_subcommand("verify-redundancy", "LP check that multi-swap inequalities are implied");
    std::vector<int> coalition;
    std::optional<std::size_t> trials;
    redundancy->add_option("--spec", spec_path, "router or moe JSON")->required()->check(CLI::ExistingFile);
    redundancy->add_option("--coalition", coalition, "single coalition, e.g. 0,2")->delimiter(',');
    redundancy->add_option("--trials", trials, "interior sample points per cell");

    auto* zono = app.add_subcommand("zonotope", "zonotope vertex count against the closed form");
    zono->add_option("--spec", spec_path, "zonotope or expert JSON")->required()->check(CLI::ExistingFile);

    auto* scaling = app.add_subcommand("scaling", "log-log scaling sweep");
    Dims scaling_dims;
    scaling_dims.add(scaling);
    std::string mode = "dense", variable = "H";
    std::vector<int> sweep;
    std::optional<std::size_t> seeds;
    bool normalized = false;
    scaling->add_option("--mode", mode, "dense, top1 or topk")->check(CLI::IsMember({"dense", "top1", "topk"}));
    scaling->add_option("--variable", variable, "H, N or k")->check(CLI::IsMember({"H", "N", "k"}));
    scaling->add_option("--sweep", sweep, "sweep values, e.g. 4,8,16,32")->delimiter(',')->required();
    scaling->add_option("--seeds", seeds, "seeds per sweep point");
    scaling->add_flag("--normalized", normalized, "topk: expert width H/k");

    auto* effective = app.add_subcommand("effective-capacity", "pattern census on a manifold");
    std::optional<std::size_t> measure_samples;
    std::optional<double> tube_angle;
    bool no_measure = false;
    effective->add_option("--spec", spec_path, "expert or moe JSON")->required()->check(CLI::ExistingFile);
    effective->add_option("--manifold", manifold_path, "manifold JSON")->required()->check(CLI::ExistingFile);
    effective->add_option("--measure-samples", measure_samples, "spherical-measure samples");
    effective->add_option("--tube-angle", tube_angle, "tube half-width in radians");
    effective->add_flag("--no-measure", no_measure, "skip the spherical measure");

    auto* resilience = app.add_subcommand("resilience", "dense versus MoE effective counts on a manifold");
    Dims resilience_dims;
    resilience_dims.add(resilience);
    resilience->add_option("--manifold", manifold_path, "manifold JSON")->required()->check(CLI::ExistingFile);
    resilience->add_option("--seeds", seeds, "number of seeds (default 20)");

    auto* verify = app.add_subcommand("verify-all", "self-check suite over the bundled fixtures");
    std::string fixtures;
    verify->add_option("--fixtures", fixtures, "fixture directory")->check(CLI::ExistingDirectory);

    auto* generate = app.add_subcommand("generate", "write a random or constructed spec");
    Dims generate_dims;
    generate_dims.add(generate);
    std::string kind = "topk";
    generate->add_option("--kind", kind, "dense, top1, topk or lower-bound-construction")
        ->check(CLI::IsMember({"dense", "top1", "topk", "lower-bound-construction"}));

    auto* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("--config", config_path, "experiment config JSON")->required()->check(CLI::ExistingFile);

    for (auto* sub : app.get_subcommands({})) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        emit_error(ContractViolation(e.what()), 1);
        return 1;
    }

    CLI::App* chosen = app.get_subcommands().front();
    cli::Request request;
    std::vector<std::string> errors;
    try {
        if (common.threads > 0) set_thread_count(common.threads);
        if (chosen == run) {
            const fs::path cfg(config_path);
            request = cli::request_from_config(io::read_file(cfg.string()), cfg.parent_path().string());
            if (!common.out.empty()) request.out = common.out;
            if (!common.format.empty()) request.format = common.format;
        } else {
            request.command = chosen->get_name();
            if (!spec_path.empty()) request.spec = io::read_file(spec_path);
            if (!manifold_path.empty()) request.manifold = io::read_file(manifold_path);
            request.seed = common.seed.value_or(0);
            if (common.n_max) request.budgets.n_max = *common.n_max;
            if (common.coalitions) request.budgets.coalitions = *common.coalitions;
            request.samples = common.samples;
            request.out = common.out;
            request.format = common.format.empty() ? "json" : common.format;

            Json& p = request.params;
            if (chosen == count && no_cuts) p["include_router_cuts"] = false;
            if (chosen == cells) {
                if (no_adjacency) p["adjacency"] = false;
                if (hypersimplex) p["hypersimplex"] = true;
            }
            if (chosen == bounds) bounds_dims.into(p);
            if (chosen == redundancy) {
                if (!coalition.empty()) p["coalition"] = coalition;
                if (trials) p["trials"] = *trials;
            }
            if (chosen == scaling) {
                scaling_dims.into(p);
                p["mode"] = mode;
                p["variable"] = variable;
                p["sweep"] = sweep;
                if (seeds) p["seeds"] = *seeds;
                if (normalized) p["normalized"] = true;
            }
            if (chosen == effective) {
                if (measure_samples) p["measure_samples"] = *measure_samples;
                if (tube_angle) p["tube_angle"] = *tube_angle;
                if (no_measure) p["measure"] = false;
            }
            if (chosen == resilience) {
                resilience_dims.into(p);
                if (seeds) p["seeds"] = *seeds;
            }
            if (chosen == verify && !fixtures.empty()) p["fixtures"] = fixtures;
            if (chosen == generate) {
                generate_dims.into(p);
                p["kind"] = kind;
            }
            for (const auto& kv : common.params) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos || eq == 0) throw ContractViolation("--param expects key=value");
                p[kv.substr(0, eq)] = param_value(kv.substr(eq + 1));
            }
        }
        const cli::Outcome outcome = cli::execute(request);
        return finish(request, &outcome, errors, outcome.exit_code);
    } catch (const Error& e) {
        emit_error(e, e.exit_code());
        errors.push_back(std::string(e.kind()) + ": " + e.what());
        try {
            return finish(request, nullptr, errors, e.exit_code());
        } catch (const std::exception&) {
            return e.exit_code();
        }
    } catch (const std::exception& e) {
        emit_error(e, 1);
        return 1;
    }
}
