#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "ambientloc/battery.hpp"
#include "ambientloc/eval.hpp"
#include "ambientloc/selection.hpp"
#include "ambientloc/sim.hpp"
#include "ambientloc/types.hpp"
#include "ambientloc/util.hpp"
#include "ambientloc/version.hpp"

namespace ambientloc {

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot open for writing: " + path);
    out << content;
    out.flush();
    require(out.good(), "write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current += c;
        }
    }
    fields.push_back(current);
    return fields;
}

inline nlohmann::json parse_json(const std::string& text, const std::string& context) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail("invalid JSON in " + context + ": " + e.what());
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// RawScan CSV: session_id, device_id, grid_index, x, y, tech, channel,
// rssi_dbm, sample_index
// ---------------------------------------------------------------------------

inline std::string scans_to_csv(const std::vector<RawScan>& scans) {
    std::string out = "session_id,device_id,grid_index,x,y,tech,channel,rssi_dbm,sample_index\n";
    for (const RawScan& scan : scans) {
        for (const auto& [id, samples] : scan.readings) {
            for (std::size_t s = 0; s < samples.size(); ++s) {
                out += scan.session_id;
                out += ',';
                out += scan.device_id;
                out += ',';
                out += std::to_string(scan.location.grid_index);
                out += ',';
                out += fmt_double(scan.location.x);
                out += ',';
                out += fmt_double(scan.location.y);
                out += ',';
                out += to_string(id.technology);
                out += ',';
                out += std::to_string(id.channel);
                out += ',';
                out += fmt_double(samples[s]);
                out += ',';
                out += std::to_string(s);
                out += '\n';
            }
        }
    }
    return out;
}

inline void write_scans_csv(const std::string& path, const std::vector<RawScan>& scans) {
    write_text_file(path, scans_to_csv(scans));
}

inline std::vector<RawScan> read_scans_csv(const std::string& path,
                                           const std::string& environment_id = "") {
    std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "empty scans file: " + path);
    require(detail::split_csv_line(line).size() == 9,
            "unexpected scans CSV header in " + path);

    // Key: (session, device, grid index) -> one scan accumulating its readings.
    std::map<std::tuple<std::string, std::string, int>, RawScan> grouped;
    std::map<std::tuple<std::string, std::string, int>,
             std::map<BeaconId, std::map<int, double>>>
        ordered_samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        std::vector<std::string> f = detail::split_csv_line(line);
        require(f.size() == 9,
                "bad scans CSV row at " + path + ":" + std::to_string(line_no));
        auto key = std::make_tuple(f[0], f[1], static_cast<int>(parse_int(f[2])));
        RawScan& scan = grouped[key];
        scan.session_id = f[0];
        scan.device_id = f[1];
        scan.location.grid_index = static_cast<int>(parse_int(f[2]));
        scan.location.x = parse_double(f[3]);
        scan.location.y = parse_double(f[4]);
        scan.location.environment_id = environment_id;
        BeaconId id;
        id.technology = parse_technology(f[5]);
        id.channel = parse_int(f[6]);
        ordered_samples[key][id][static_cast<int>(parse_int(f[8]))] = parse_double(f[7]);
    }
    require(!grouped.empty(), "no scan rows in " + path);

    std::vector<RawScan> scans;
    scans.reserve(grouped.size());
    for (auto& [key, scan] : grouped) {
        for (const auto& [id, by_index] : ordered_samples[key]) {
            std::vector<double>& samples = scan.readings[id];
            for (const auto& [idx, value] : by_index)
                samples.push_back(value);
        }
        scans.push_back(std::move(scan));
    }
    return scans;
}

// ---------------------------------------------------------------------------
// Radio map JSON
// ---------------------------------------------------------------------------

inline nlohmann::json radio_map_to_json(const RadioMap& map) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["environment"] = map.environment_id;
    j["device_id"] = map.device_id;
    j["session_id"] = map.session_id;
    j["beacons"] = nlohmann::json::array();
    for (const BeaconId& b : map.beacons)
        j["beacons"].push_back(
            {{"tech", to_string(b.technology)}, {"channel", b.channel}, {"label", b.label}});
    j["norm"] = nlohmann::json::object();
    for (const auto& [tech, range] : map.norm.ranges)
        j["norm"][to_string(tech)] = {{"min", range.min_dbm}, {"max", range.max_dbm}};
    j["fingerprints"] = nlohmann::json::array();
    for (const Fingerprint& fp : map.fingerprints)
        j["fingerprints"].push_back({{"grid_index", fp.location->grid_index},
                                     {"x", fp.location->x},
                                     {"y", fp.location->y},
                                     {"values", fp.values}});
    return j;
}

inline void write_radio_map_json(const std::string& path, const RadioMap& map) {
    write_text_file(path, radio_map_to_json(map).dump(2) + "\n");
}

inline RadioMap read_radio_map_json(const std::string& path) {
    nlohmann::json j = detail::parse_json(read_text_file(path), path);
    try {
        require(j.at("schema_version").get<int>() == 1,
                "unsupported radio map schema in " + path);
        RadioMap map;
        map.environment_id = j.at("environment").get<std::string>();
        map.device_id = j.value("device_id", "");
        map.session_id = j.value("session_id", "");
        for (const auto& jb : j.at("beacons")) {
            BeaconId b;
            b.technology = parse_technology(jb.at("tech").get<std::string>());
            b.channel = jb.at("channel").get<std::int64_t>();
            b.label = jb.value("label", "");
            map.beacons.push_back(b);
        }
        for (const auto& [tech_name, jr] : j.at("norm").items())
            map.norm.ranges[parse_technology(tech_name)] =
                TechRange{jr.at("min").get<double>(), jr.at("max").get<double>()};
        for (const auto& jf : j.at("fingerprints")) {
            Fingerprint fp;
            Location loc;
            loc.grid_index = jf.at("grid_index").get<int>();
            loc.x = jf.at("x").get<double>();
            loc.y = jf.at("y").get<double>();
            loc.environment_id = map.environment_id;
            fp.location = loc;
            fp.values = jf.at("values").get<std::vector<double>>();
            map.fingerprints.push_back(std::move(fp));
        }
        map.validate();
        return map;
    } catch (const nlohmann::json::exception& e) {
        fail("malformed radio map " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Environment JSON: either {"preset": "room"|"floor", "seed": N} or a full
// world spec with beacons and a grid block.
// ---------------------------------------------------------------------------

inline nlohmann::json grid_to_json(const GridSpec& grid) {
    nlohmann::json j;
    if (grid.kind == GridSpec::Kind::Grid) {
        j["kind"] = "grid";
        j["spacing_m"] = grid.spacing_m;
    } else if (grid.kind == GridSpec::Kind::PerimeterPath) {
        j["kind"] = "perimeter";
        j["path_spacing_m"] = grid.path_spacing_m;
    } else {
        j["kind"] = "points";
        j["points"] = nlohmann::json::array();
        for (const auto& [x, y] : grid.points)
            j["points"].push_back({x, y});
    }
    return j;
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
    GridSpec grid;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "grid") {
        grid.kind = GridSpec::Kind::Grid;
        grid.spacing_m = j.value("spacing_m", 1.0);
    } else if (kind == "perimeter") {
        grid.kind = GridSpec::Kind::PerimeterPath;
        grid.path_spacing_m = j.value("path_spacing_m", 1.6);
    } else if (kind == "points") {
        grid.kind = GridSpec::Kind::Points;
        for (const auto& jp : j.at("points"))
            grid.points.emplace_back(jp.at(0).get<double>(), jp.at(1).get<double>());
    } else {
        fail("unknown grid kind: " + kind);
    }
    return grid;
}

inline nlohmann::json preset_to_json(const SimPreset& preset) {
    const Environment& env = preset.env;
    nlohmann::json j;
    j["schema_version"] = 1;
    j["environment_id"] = env.environment_id;
    j["width"] = env.width;
    j["height"] = env.height;
    j["seed"] = env.seed;
    j["shadowing_sigma_db"] = env.shadowing_sigma_db;
    j["shared_shadowing_sigma_db"] = env.shared_shadowing_sigma_db;
    j["shadowing_correlation_m"] = env.shadowing_correlation_m;
    j["measurement_sigma_db"] = env.measurement_sigma_db;
    j["session_power_sigma_db"] = env.session_power_sigma_db;
    j["session_jitter_m"] = env.session_jitter_m;
    j["quantize_rssi"] = env.quantize_rssi;
    j["sensitivity_dbm"] = nlohmann::json::object();
    for (const auto& [tech, dbm] : env.sensitivity_dbm)
        j["sensitivity_dbm"][to_string(tech)] = dbm;
    j["beacons"] = nlohmann::json::array();
    for (const SimBeacon& b : env.beacons)
        j["beacons"].push_back({{"tech", to_string(b.id.technology)},
                                {"channel", b.id.channel},
                                {"label", b.id.label},
                                {"x", b.x},
                                {"y", b.y},
                                {"tx_power_dbm", b.tx_power_dbm},
                                {"wavelength_m", b.wavelength_m},
                                {"multipath_components", b.multipath_components},
                                {"rician_k", b.rician_k}});
    j["grid"] = grid_to_json(preset.grid);
    return j;
}

inline void write_environment_json(const std::string& path, const SimPreset& preset) {
    write_text_file(path, preset_to_json(preset).dump(2) + "\n");
}

inline SimPreset read_environment_json(const std::string& path) {
    nlohmann::json j = detail::parse_json(read_text_file(path), path);
    try {
        if (j.contains("preset"))
            return make_preset(j.at("preset").get<std::string>(),
                               j.value("seed", std::uint64_t{0}));

        SimPreset preset;
        Environment& env = preset.env;
        env.environment_id = j.at("environment_id").get<std::string>();
        env.width = j.at("width").get<double>();
        env.height = j.at("height").get<double>();
        env.seed = j.value("seed", std::uint64_t{0});
        env.shadowing_sigma_db = j.value("shadowing_sigma_db", env.shadowing_sigma_db);
        env.shared_shadowing_sigma_db =
            j.value("shared_shadowing_sigma_db", env.shared_shadowing_sigma_db);
        env.shadowing_correlation_m =
            j.value("shadowing_correlation_m", env.shadowing_correlation_m);
        env.measurement_sigma_db = j.value("measurement_sigma_db", env.measurement_sigma_db);
        env.session_power_sigma_db =
            j.value("session_power_sigma_db", env.session_power_sigma_db);
        env.session_jitter_m = j.value("session_jitter_m", env.session_jitter_m);
        env.quantize_rssi = j.value("quantize_rssi", false);
        if (j.contains("sensitivity_dbm"))
            for (const auto& [tech_name, dbm] : j.at("sensitivity_dbm").items())
                env.sensitivity_dbm[parse_technology(tech_name)] = dbm.get<double>();
        for (const auto& jb : j.at("beacons")) {
            SimBeacon b;
            b.id.technology = parse_technology(jb.at("tech").get<std::string>());
            b.id.channel = jb.at("channel").get<std::int64_t>();
            b.id.label = jb.value("label", "");
            b.x = jb.at("x").get<double>();
            b.y = jb.at("y").get<double>();
            b.tx_power_dbm = jb.at("tx_power_dbm").get<double>();
            b.wavelength_m = jb.at("wavelength_m").get<double>();
            b.multipath_components = jb.value("multipath_components", 32);
            b.rician_k = jb.value("rician_k", 0.0);
            env.beacons.push_back(b);
        }
        preset.grid = j.contains("grid") ? grid_from_json(j.at("grid")) : GridSpec{};
        env.validate();
        return preset;
    } catch (const nlohmann::json::exception& e) {
        fail("malformed environment " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Result writers
// ---------------------------------------------------------------------------

inline nlohmann::json stats_to_json(const ErrorStats& stats) {
    nlohmann::json j;
    j["n"] = stats.n;
    j["classification_rate"] = stats.classification_rate;
    if (stats.snap_rate)
        j["snap_rate"] = *stats.snap_rate;
    j["median_m"] = stats.median;
    j["p90_m"] = stats.p90;
    j["p95_m"] = stats.p95;
    j["cdf"] = nlohmann::json::array();
    for (const auto& [error_m, fraction] : stats.cdf)
        j["cdf"].push_back({error_m, fraction});
    return j;
}

inline std::string records_to_csv(const std::vector<LocalizationRecord>& records) {
    std::string out = "grid_index,true_x,true_y,est_x,est_y,error_m\n";
    for (const LocalizationRecord& r : records) {
        out += std::to_string(r.grid_index);
        out += ',';
        out += fmt_double(r.true_x);
        out += ',';
        out += fmt_double(r.true_y);
        out += ',';
        out += fmt_double(r.est_x);
        out += ',';
        out += fmt_double(r.est_y);
        out += ',';
        out += fmt_double(r.error_m);
        out += '\n';
    }
    return out;
}

inline std::string cdf_to_csv(const ErrorStats& stats) {
    std::string out = "error_m,cumulative_fraction\n";
    for (const auto& [error_m, fraction] : stats.cdf) {
        out += fmt_double(error_m);
        out += ',';
        out += fmt_double(fraction);
        out += '\n';
    }
    return out;
}

inline std::string study_to_csv(const std::vector<SubsetStudyResult>& results) {
    std::string out = "n,trial,median_error_m\n";
    for (const SubsetStudyResult& r : results) {
        for (std::size_t t = 0; t < r.median_errors.size(); ++t) {
            out += std::to_string(r.n_stations);
            out += ',';
            out += std::to_string(t);
            out += ',';
            out += fmt_double(r.median_errors[t]);
            out += '\n';
        }
    }
    return out;
}

inline nlohmann::json study_summary_to_json(const std::vector<SubsetStudyResult>& results) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SubsetStudyResult& r : results)
        arr.push_back({{"n_stations", r.n_stations},
                       {"trials", r.trials},
                       {"mean_of_medians", r.mean_of_medians},
                       {"min_of_medians", r.min_of_medians},
                       {"max_of_medians", r.max_of_medians}});
    return arr;
}

inline std::string battery_sweep_to_csv(const PowerModel& model,
                                        const std::vector<double>& intervals_s) {
    std::string out = "interval_s,life_h\n";
    for (double t : intervals_s) {
        out += fmt_double(t);
        out += ',';
        out += fmt_double(predict_life(model, t));
        out += '\n';
    }
    return out;
}

inline nlohmann::json battery_sweep_to_json(const PowerModel& model,
                                            const std::vector<double>& intervals_s) {
    nlohmann::json arr = nlohmann::json::array();
    for (double t : intervals_s)
        arr.push_back({{"interval_s", t}, {"life_h", predict_life(model, t)}});
    return arr;
}

inline nlohmann::json beacons_to_json(const std::vector<BeaconId>& beacons) {
    nlohmann::json arr = nlohmann::json::array();
    for (const BeaconId& b : beacons)
        arr.push_back(
            {{"tech", to_string(b.technology)}, {"channel", b.channel}, {"label", b.label}});
    return arr;
}

// ---------------------------------------------------------------------------
// Run manifest: one per output directory.
// ---------------------------------------------------------------------------

struct RunManifest {
    std::string command;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double duration_seconds = 0.0;
};

inline void write_manifest_json(const std::string& path, const RunManifest& manifest) {
    nlohmann::json j;
    j["command"] = manifest.command;
    std::ostringstream hash_hex;
    hash_hex << std::hex << manifest.config_hash;
    j["config_hash"] = hash_hex.str();
    j["seed"] = manifest.seed;
    j["inputs"] = manifest.inputs;
    j["outputs"] = manifest.outputs;
    j["tool_version"] = kVersion;
    j["duration_seconds"] = manifest.duration_seconds;
    write_text_file(path, j.dump(2) + "\n");
}

}
