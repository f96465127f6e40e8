#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "cpmfit/optimize.hpp"
#include "cpmfit/predict.hpp"

namespace cpmfit::app {

struct RunConfig {
    std::filesystem::path input;
    std::filesystem::path out_dir = "cpmfit_out";
    std::optional<std::uint64_t> seed;
    FitConfig fit;
    PredictionConfig predict;
    // Min-max normalization of the whole map before fitting.
    bool normalize = true;
    double speed_tolerance = 1e-6;
    std::optional<double> target;
    std::size_t repeats = 10;
    bool bench_baseline = true;

    // Seed actually used: explicit value, else CPMFIT_SEED, else 0.
    std::uint64_t resolved_seed() const;
};

// Applies the keys of a JSON object onto `cfg`. Unknown keys and ill-typed
// values throw ConfigError.
void apply_json(RunConfig& cfg, std::string_view json_text);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cpmfit::app
