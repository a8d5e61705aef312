#pragma once

#include <optional>
#include <string>

#include "btm/meter_panel.hpp"
#include "btm/scenario.hpp"

namespace btm {

// Panel directory layout:
//   with_pv_net.csv        net demand, one column per C_w customer
//   without_pv_native.csv  native demand, one column per C_o customer
//   truth_native.csv       ground truth (optional)
//   truth_generation.csv   ground truth (optional)
//   metadata.json          scenario config, seed, noise provenance
// CSV schema: a "# btm-panel v1" comment line, then "timestamp,<id>,...",
// ISO-8601 hour timestamps, kW values with 10 significant digits.

void write_panel(const MeterPanel& panel, const std::string& dir,
                 const std::optional<ScenarioConfig>& scenario);

struct LoadedPanel {
    MeterPanel panel;
    std::optional<ScenarioConfig> scenario;
};

LoadedPanel read_panel(const std::string& dir);

// Shared low-level helpers (temp file + rename so readers never see a
// partial file).
void write_file_atomic(const std::string& path, const std::string& content);
std::string format_kw(double v);

} // namespace btm
