#pragma once

#include "degenctl/carleman.hpp"
#include "degenctl/profile.hpp"
#include "degenctl/solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace degenctl::cli {

inline constexpr int kSchemaVersion = 1;

/// Malformed configuration; `path` names the offending field (e.g. "grid.n").
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Initial datum from a small registry: "zero" or amplitude * sin(mode pi x).
struct InitialDatum {
    std::string kind = "sine";
    int mode = 1;
    double amplitude = 1.0;

    SpaceSlice sample(const Grid& g) const;
    friend bool operator==(const InitialDatum&, const InitialDatum&) = default;
};

struct GridSettings {
    int n = 199;
    int m = 400;
    double T = 0.5;
    friend bool operator==(const GridSettings&, const GridSettings&) = default;
};

struct CarlemanSettings {
    std::vector<double> s_list{4.0, 8.0, 16.0};
    std::vector<double> lambda_list{2.0, 4.0};
    int sample_count = 20;
    std::uint64_t seed = 12345;
    /// Single (s, lambda) used by observability and identity-check.
    double s = 2.0;
    double lambda = 1.0;
    friend bool operator==(const CarlemanSettings&, const CarlemanSettings&) = default;
};

struct HumSettings {
    std::vector<double> eps_list{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    double eps = 1e-4;
    double tol = 1e-8;
    int max_iter = 500;
    friend bool operator==(const HumSettings&, const HumSettings&) = default;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    DiffusionProfile profile = DiffusionProfile::power_law(0.4, 0.6, 2.0, 2.0);
    Interval omega{0.3, 0.7};
    double delta = 0.15;
    Potential potential = Potential::zero();
    InitialDatum u0;
    GridSettings grid;
    CarlemanSettings carleman;
    HumSettings hum;
    std::string output_dir = "out";

    Grid build() const { return build_grid(grid.n, grid.m, grid.T); }
    ControlProblem problem(const Grid& g) const;
    /// Carleman parameters centered on the profile with the given (s, lambda).
    CarlemanParams carleman_params(double s, double lambda) const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::json to_json(const RunConfig& config);
/// Strict parse: unknown keys, wrong types and out-of-range values throw ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

}  // namespace degenctl::cli
