#pragma once

#include <iosfwd>
#include <optional>

#include "cpmfit/app/config.hpp"
#include "cpmfit/dataio.hpp"
#include "cpmfit/types.hpp"

namespace cpmfit::app::detail {

struct LoadedMap {
    CompressorMap map;
    std::optional<ScaleRecord> scale;
};

LoadedMap load_map(const RunConfig& cfg);

int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_crossval(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace cpmfit::app::detail
