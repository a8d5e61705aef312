#include "btm/panel_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "btm/errors.hpp"

namespace btm {

namespace fs = std::filesystem;
using nlohmann::json;

void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out << content;
        if (!out) throw IoError("write failed for '" + tmp + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string format_kw(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

namespace {

std::string render_table(const std::vector<std::string>& ids,
                         const std::vector<HourlySeries>& series) {
    std::ostringstream out;
    out << "# btm-panel v1\n";
    out << "timestamp";
    for (const auto& id : ids) out << ',' << id;
    out << '\n';
    std::size_t hours = series.front().size();
    for (std::size_t t = 0; t < hours; ++t) {
        out << format_hour_stamp(series.front().stamp_at(t));
        for (const auto& s : series) out << ',' << format_kw(s.values[t]);
        out << '\n';
    }
    return out.str();
}

struct Table {
    std::vector<std::string> ids;
    std::vector<HourlySeries> series;
};

Table parse_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open panel file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty panel file '" + path + "'");
    if (!line.empty() && line[0] == '#') {
        if (!std::getline(in, line)) throw IoError("missing header row in '" + path + "'");
    }

    Table table;
    {
        std::istringstream head(line);
        std::string cell;
        if (!std::getline(head, cell, ',') || cell != "timestamp")
            throw IoError("'" + path + "': header must start with 'timestamp'");
        while (std::getline(head, cell, ',')) table.ids.push_back(cell);
    }
    if (table.ids.empty()) throw IoError("'" + path + "': no customer columns");
    table.series.resize(table.ids.size());

    HourStamp prev = 0;
    bool first = true;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        std::istringstream cells(line);
        std::string cell;
        if (!std::getline(cells, cell, ','))
            throw IoError("'" + path + "': malformed row " + std::to_string(row));
        HourStamp stamp = parse_hour_stamp(cell);
        if (first) {
            for (auto& s : table.series) s.start = stamp;
            first = false;
        } else if (stamp != prev + 1) {
            throw IoError("'" + path + "': readings are not strictly hourly at row " +
                          std::to_string(row) + " (" + cell + ")");
        }
        prev = stamp;
        for (auto& s : table.series) {
            if (!std::getline(cells, cell, ','))
                throw IoError("'" + path + "': short row " + std::to_string(row));
            std::size_t used = 0;
            double v = std::stod(cell, &used);
            if (used == 0) throw IoError("'" + path + "': bad value at row " + std::to_string(row));
            s.values.push_back(v);
        }
    }
    if (first) throw IoError("'" + path + "': no data rows");
    return table;
}

} // namespace

void write_panel(const MeterPanel& panel, const std::string& dir,
                 const std::optional<ScenarioConfig>& scenario) {
    panel.validate();
    fs::create_directories(dir);
    write_file_atomic(dir + "/with_pv_net.csv", render_table(panel.pv_ids, panel.pv_net));
    write_file_atomic(dir + "/without_pv_native.csv",
                      render_table(panel.nopv_ids, panel.nopv_native));
    if (panel.has_truth()) {
        write_file_atomic(dir + "/truth_native.csv", render_table(panel.pv_ids, panel.truth_native));
        write_file_atomic(dir + "/truth_generation.csv",
                          render_table(panel.pv_ids, panel.truth_generation));
    }

    json meta = {{"schema", "btm-panel-meta v1"},
                 {"customers_with_pv", panel.pv_ids.size()},
                 {"customers_without_pv", panel.nopv_ids.size()},
                 {"hours", panel.hours()},
                 {"start", format_hour_stamp(panel.start())},
                 {"has_truth", panel.has_truth()},
                 {"noisy_measurements", panel.noisy_measurements}};
    if (scenario) meta["scenario"] = json::parse(scenario->to_json());
    write_file_atomic(dir + "/metadata.json", meta.dump(2) + "\n");
}

LoadedPanel read_panel(const std::string& dir) {
    if (!fs::exists(dir + "/with_pv_net.csv"))
        throw IoError("panel file '" + dir + "/with_pv_net.csv' does not exist");
    if (!fs::exists(dir + "/without_pv_native.csv"))
        throw IoError("panel file '" + dir + "/without_pv_native.csv' does not exist");

    LoadedPanel loaded;
    Table net = parse_table(dir + "/with_pv_net.csv");
    loaded.panel.pv_ids = std::move(net.ids);
    loaded.panel.pv_net = std::move(net.series);
    Table native = parse_table(dir + "/without_pv_native.csv");
    loaded.panel.nopv_ids = std::move(native.ids);
    loaded.panel.nopv_native = std::move(native.series);

    if (fs::exists(dir + "/truth_native.csv") && fs::exists(dir + "/truth_generation.csv")) {
        loaded.panel.truth_native = parse_table(dir + "/truth_native.csv").series;
        loaded.panel.truth_generation = parse_table(dir + "/truth_generation.csv").series;
    }

    std::string meta_path = dir + "/metadata.json";
    if (fs::exists(meta_path)) {
        std::ifstream in(meta_path);
        json meta;
        try {
            in >> meta;
        } catch (const json::exception& e) {
            throw IoError("bad metadata in '" + meta_path + "': " + e.what());
        }
        if (meta.contains("noisy_measurements"))
            loaded.panel.noisy_measurements = meta["noisy_measurements"].get<bool>();
        if (meta.contains("scenario"))
            loaded.scenario = ScenarioConfig::from_json_string(meta["scenario"].dump());
    }
    loaded.panel.validate();
    return loaded;
}

} // namespace btm
