#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tropcap/io.hpp"

namespace tropcap::cli {

using io::Json;

inline constexpr const char* kToolVersion = "0.1.0";

struct Budgets {
    std::size_t n_max = 24;
    std::size_t coalitions = 100000;
};

/// One fully resolved command invocation. `spec` and `manifold` hold parsed
/// JSON (null when absent); file references are resolved before this point.
struct Request {
    std::string command;
    Json spec;
    Json manifold;
    std::uint64_t seed = 0;
    Budgets budgets;
    std::optional<std::size_t> samples;
    Json params = Json::object();
    std::string out;  // empty: stdout
    std::string format = "json";
};

struct Stage {
    std::string name;
    double wall_seconds = 0.0;
};

struct Outcome {
    Json report;
    std::string table = "rows";  // CSV table key
    std::vector<std::string> warnings;
    std::vector<Stage> stages;
    int exit_code = 0;  // 3 when the report records a property failure
};

const std::vector<std::string>& command_names();

/// Dispatches on request.command. Library errors propagate.
Outcome execute(const Request& request);

/// Spec generator: kind in {dense, top1, topk, lower-bound-construction}.
Json generate_spec(const std::string& kind, int n, int k, int width, int input_dim, std::uint64_t seed);

/// Loads an inline object or a path string (relative to base_dir).
Json resolve_reference(const Json& value, const std::string& base_dir);

/// Parses an experiment config file into a request. Validates the command,
/// positive budgets and the existence of every referenced file.
Request request_from_config(const Json& config, const std::string& base_dir);

/// Canonical JSON of everything that determines the report bytes.
Json request_identity(const Request& request);

/// Report text in the requested format.
std::string render(const Outcome& outcome, const std::string& format);

Json manifest(const Request& request, const Outcome* outcome, const std::vector<std::string>& errors,
              const std::string& report_file, int exit_code, std::size_t threads);

/// {"error": {...}} line for the error stream.
Json error_json(const std::exception& e, int exit_code);

}  // namespace tropcap::cli
