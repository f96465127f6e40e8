#include "cpmfit/app/config.hpp"

#include <charconv>
#include <cstdlib>
#include <string>

#include <nlohmann/json.hpp>

#include "cpmfit/metrics.hpp"

namespace cpmfit::app {

namespace {

using nlohmann::json;

template <class T>
T get_as(const json& value, std::string_view key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + std::string(key) + "' has the wrong type");
    }
}

std::size_t get_count(const json& value, std::string_view key) {
    if (!value.is_number_unsigned()) {
        throw ConfigError("config key '" + std::string(key) + "' must be a non-negative integer");
    }
    return value.get<std::size_t>();
}

template <class Parse>
auto get_enum(const json& value, std::string_view key, Parse parse) {
    const auto text = get_as<std::string>(value, key);
    try {
        return parse(text);
    } catch (const std::exception& e) {
        throw ConfigError("config key '" + std::string(key) + "': " + e.what());
    }
}

}  // namespace

std::uint64_t RunConfig::resolved_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("CPMFIT_SEED"); env != nullptr && *env != '\0') {
        const std::string_view text(env);
        std::uint64_t value = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            throw ConfigError("CPMFIT_SEED is not a non-negative integer: '" + std::string(text) + "'");
        }
        return value;
    }
    return 0;
}

void apply_json(RunConfig& cfg, std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    for (const auto& [key, value] : doc.items()) {
        if (key == "input") {
            cfg.input = get_as<std::string>(value, key);
        } else if (key == "out") {
            cfg.out_dir = get_as<std::string>(value, key);
        } else if (key == "seed") {
            if (!value.is_number_unsigned()) throw ConfigError("config key 'seed' must be a non-negative integer");
            cfg.seed = value.get<std::uint64_t>();
        } else if (key == "metric") {
            cfg.fit.metric = get_enum(value, key, parse_metric);
        } else if (key == "init") {
            cfg.fit.init_strategy = get_enum(value, key, parse_init);
        } else if (key == "solver") {
            cfg.fit.local_solver = get_enum(value, key, parse_solver);
        } else if (key == "mode") {
            cfg.fit.mode = get_enum(value, key, parse_mode);
            cfg.predict.eval_mode = cfg.fit.mode;
        } else if (key == "degree") {
            cfg.predict.degree = get_count(value, key);
        } else if (key == "normalize_speed") {
            cfg.predict.normalize_speed = get_as<bool>(value, key);
        } else if (key == "enforce_cur_min") {
            cfg.predict.enforce_cur_min = get_as<double>(value, key);
        } else if (key == "enforce_nonneg") {
            cfg.predict.enforce_nonneg = get_as<bool>(value, key);
        } else if (key == "normalize") {
            cfg.normalize = get_as<bool>(value, key);
        } else if (key == "speed_tolerance") {
            cfg.speed_tolerance = get_as<double>(value, key);
        } else if (key == "target") {
            cfg.target = get_as<double>(value, key);
        } else if (key == "repeats") {
            cfg.repeats = get_count(value, key);
        } else if (key == "bench_baseline") {
            cfg.bench_baseline = get_as<bool>(value, key);
        } else if (key == "de_population") {
            cfg.fit.de_population = get_count(value, key);
        } else if (key == "de_max_iters") {
            cfg.fit.de_max_iters = get_count(value, key);
        } else if (key == "pso_particles") {
            cfg.fit.pso_particles = get_count(value, key);
        } else if (key == "pso_iters") {
            cfg.fit.pso_iters = get_count(value, key);
        } else if (key == "local_max_iters") {
            cfg.fit.local_max_iters = get_count(value, key);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
}

}  // namespace cpmfit::app
