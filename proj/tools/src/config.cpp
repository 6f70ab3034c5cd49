#include "degenctl_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>

namespace degenctl::cli {

namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

/// Strict view of one JSON object: tracks its path and rejects unknown keys.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        for (const auto& [key, _] : j_.items())
            if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
                throw ConfigError(join(path_, key), "unknown key");
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& raw(const char* key) const {
        if (!j_.contains(key)) throw ConfigError(join(path_, key), "missing required field");
        return j_.at(key);
    }
    Section sub(const char* key) const { return Section(raw(key), join(path_, key)); }
    std::string path(const char* key) const { return join(path_, key); }

    double number(const char* key) const {
        const json& v = raw(key);
        if (!v.is_number()) throw ConfigError(path(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(path(key), "must be finite");
        return d;
    }
    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    std::int64_t integer(const char* key) const {
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
        return v.get<std::int64_t>();
    }

    std::string string(const char* key) const {
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(path(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const char* key) const {
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(path(key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
                throw ConfigError(path(key) + "[" + std::to_string(i) + "]", "expected a finite number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ConfigError(path, what);
}

Potential parse_potential(const Section& s) {
    const std::string kind = s.string("kind");
    if (kind == "zero") {
        s.allow({"kind"});
        return Potential::zero();
    }
    if (kind == "constant") {
        s.allow({"kind", "value"});
        return Potential::constant(s.number("value"));
    }
    if (kind == "sin_cos") {
        s.allow({"kind", "amplitude"});
        return Potential::sin_cos(s.number("amplitude", 1.0));
    }
    throw ConfigError(s.path("kind"), "unknown potential '" + kind + "' (zero|constant|sin_cos)");
}

json potential_json(const Potential& c) {
    json j{{"kind", to_string(c.kind())}};
    if (c.kind() == Potential::Kind::constant) j["value"] = c.value();
    if (c.kind() == Potential::Kind::sin_cos) j["amplitude"] = c.value();
    return j;
}

InitialDatum parse_u0(const Section& s) {
    InitialDatum d;
    d.kind = s.string("kind");
    if (d.kind == "zero") {
        s.allow({"kind"});
        d.mode = 0;
        d.amplitude = 0.0;
        return d;
    }
    if (d.kind == "sine") {
        s.allow({"kind", "mode", "amplitude"});
        d.mode = s.has("mode") ? static_cast<int>(s.integer("mode")) : 1;
        d.amplitude = s.number("amplitude", 1.0);
        require(d.mode >= 1, s.path("mode"), "must be >= 1");
        return d;
    }
    throw ConfigError(s.path("kind"), "unknown initial datum '" + d.kind + "' (zero|sine)");
}

json u0_json(const InitialDatum& d) {
    if (d.kind == "zero") return json{{"kind", "zero"}};
    return json{{"kind", d.kind}, {"mode", d.mode}, {"amplitude", d.amplitude}};
}

}  // namespace

SpaceSlice InitialDatum::sample(const Grid& g) const {
    if (kind == "zero") return SpaceSlice::zeros(g);
    return SpaceSlice::sample(
        g, [&](double x) { return amplitude * std::sin(mode * std::numbers::pi * x); });
}

ControlProblem RunConfig::problem(const Grid& g) const {
    return {profile, potential, omega, g.T, u0.sample(g)};
}

CarlemanParams RunConfig::carleman_params(double s, double lambda) const {
    return CarlemanParams::for_profile(profile, s, lambda, grid.T, delta);
}

json to_json(const RunConfig& c) {
    return json{
        {"schema_version", c.schema_version},
        {"profile", degenctl::to_json(c.profile)},
        {"omega", {c.omega.lo, c.omega.hi}},
        {"delta", c.delta},
        {"potential", potential_json(c.potential)},
        {"u0", u0_json(c.u0)},
        {"grid", {{"n", c.grid.n}, {"m", c.grid.m}, {"T", c.grid.T}}},
        {"carleman",
         {{"s_list", c.carleman.s_list},
          {"lambda_list", c.carleman.lambda_list},
          {"sample_count", c.carleman.sample_count},
          {"seed", c.carleman.seed},
          {"s", c.carleman.s},
          {"lambda", c.carleman.lambda}}},
        {"hum",
         {{"eps_list", c.hum.eps_list},
          {"eps", c.hum.eps},
          {"tol", c.hum.tol},
          {"max_iter", c.hum.max_iter}}},
        {"output_dir", c.output_dir},
    };
}

RunConfig config_from_json(const json& j) {
    const Section root(j, "");
    root.allow({"schema_version", "profile", "omega", "delta", "potential", "u0", "grid", "carleman",
                "hum", "output_dir"});
    RunConfig c;

    c.schema_version = static_cast<int>(root.integer("schema_version"));
    require(c.schema_version == kSchemaVersion, "schema_version",
            "unsupported version " + std::to_string(c.schema_version) + " (expected " +
                std::to_string(kSchemaVersion) + ")");

    try {
        c.profile = profile_from_json(root.raw("profile"));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("profile", e.what());
    }

    const auto omega = root.numbers("omega");
    require(omega.size() == 2, "omega", "expected [lo, hi]");
    c.omega = {omega[0], omega[1]};
    require(0.0 <= c.omega.lo && c.omega.lo < c.omega.hi && c.omega.hi <= 1.0, "omega",
            "need 0 <= lo < hi <= 1");

    c.delta = root.number("delta");
    require(c.delta > 0.0, "delta", "must be > 0");

    c.potential = root.has("potential") ? parse_potential(root.sub("potential")) : Potential::zero();
    c.u0 = root.has("u0") ? parse_u0(root.sub("u0")) : InitialDatum{};

    const Section grid = root.sub("grid");
    grid.allow({"n", "m", "T"});
    c.grid.n = static_cast<int>(grid.integer("n"));
    c.grid.m = static_cast<int>(grid.integer("m"));
    c.grid.T = grid.number("T");
    require(c.grid.n >= 3, "grid.n", "must be >= 3");
    require(c.grid.m >= 3, "grid.m", "must be >= 3");
    require(c.grid.T > 0.0, "grid.T", "must be > 0");

    if (root.has("carleman")) {
        const Section s = root.sub("carleman");
        s.allow({"s_list", "lambda_list", "sample_count", "seed", "s", "lambda"});
        auto& k = c.carleman;
        if (s.has("s_list")) k.s_list = s.numbers("s_list");
        if (s.has("lambda_list")) k.lambda_list = s.numbers("lambda_list");
        if (s.has("sample_count")) k.sample_count = static_cast<int>(s.integer("sample_count"));
        if (s.has("seed")) {
            const auto seed = s.integer("seed");
            require(seed >= 0, "carleman.seed", "must be >= 0");
            k.seed = static_cast<std::uint64_t>(seed);
        }
        k.s = s.number("s", k.s);
        k.lambda = s.number("lambda", k.lambda);
        require(!k.s_list.empty(), "carleman.s_list", "must not be empty");
        require(!k.lambda_list.empty(), "carleman.lambda_list", "must not be empty");
        for (double v : k.s_list) require(v > 0.0, "carleman.s_list", "entries must be > 0");
        for (double v : k.lambda_list) require(v > 0.0, "carleman.lambda_list", "entries must be > 0");
        require(k.sample_count >= 1, "carleman.sample_count", "must be >= 1");
        require(k.s >= 0.0, "carleman.s", "must be >= 0");
        require(k.lambda > 0.0, "carleman.lambda", "must be > 0");
    }

    if (root.has("hum")) {
        const Section s = root.sub("hum");
        s.allow({"eps_list", "eps", "tol", "max_iter"});
        auto& h = c.hum;
        if (s.has("eps_list")) h.eps_list = s.numbers("eps_list");
        h.eps = s.number("eps", h.eps);
        h.tol = s.number("tol", h.tol);
        if (s.has("max_iter")) h.max_iter = static_cast<int>(s.integer("max_iter"));
        require(!h.eps_list.empty(), "hum.eps_list", "must not be empty");
        for (std::size_t i = 0; i < h.eps_list.size(); ++i) {
            require(h.eps_list[i] > 0.0, "hum.eps_list", "entries must be > 0");
            require(i == 0 || h.eps_list[i] < h.eps_list[i - 1], "hum.eps_list",
                    "must be strictly decreasing");
        }
        require(h.eps > 0.0, "hum.eps", "must be > 0");
        require(h.tol > 0.0, "hum.tol", "must be > 0");
        require(h.max_iter >= 0, "hum.max_iter", "must be >= 0");
    }

    if (root.has("output_dir")) c.output_dir = root.string("output_dir");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    return config_from_json(j);
}

}  // namespace degenctl::cli
