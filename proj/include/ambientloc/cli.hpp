#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ambientloc/battery.hpp"
#include "ambientloc/eval.hpp"
#include "ambientloc/io.hpp"
#include "ambientloc/model_io.hpp"
#include "ambientloc/selection.hpp"
#include "ambientloc/sim.hpp"
#include "ambientloc/version.hpp"

namespace ambientloc {

namespace climpl {

struct CommonOpts {
    std::uint64_t seed = 0;
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "csv";
};

inline void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "Master seed; all randomness derives from it");
    cmd->add_option("--config", opts.config_path, "JSON config file (flags override it)");
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--format", opts.format, "Table format for sweep outputs")
        ->check(CLI::IsMember({"csv", "json"}));
}

inline nlohmann::json load_config(const std::string& path) {
    if (path.empty())
        return nlohmann::json::object();
    return detail::parse_json(read_text_file(path), path);
}

/// Engine block of a config file: {engine, k, metric, transform, ratio_epsilon,
/// ratio_log, svm: {c, kernel, gamma}, gp: {lengthscale, signal, noise,
/// grid_search}}. Missing keys keep the built-in defaults.
inline EngineConfig engine_from_json(const nlohmann::json& root) {
    EngineConfig cfg;
    if (!root.contains("engine_config"))
        return cfg;
    const nlohmann::json& j = root.at("engine_config");
    if (j.contains("engine"))
        cfg.engine = parse_engine(j.at("engine").get<std::string>());
    cfg.k = j.value("k", cfg.k);
    if (j.contains("metric"))
        cfg.metric = parse_metric(j.at("metric").get<std::string>());
    if (j.contains("transform"))
        cfg.transform = parse_transform(j.at("transform").get<std::string>());
    cfg.ratio_epsilon = j.value("ratio_epsilon", cfg.ratio_epsilon);
    cfg.ratio_log = j.value("ratio_log", cfg.ratio_log);
    if (j.contains("svm")) {
        const nlohmann::json& js = j.at("svm");
        cfg.svm.c = js.value("c", cfg.svm.c);
        if (js.contains("kernel"))
            cfg.svm.kernel = parse_svm_kernel(js.at("kernel").get<std::string>());
        cfg.svm.gamma = js.value("gamma", cfg.svm.gamma);
    }
    if (j.contains("gp")) {
        const nlohmann::json& jg = j.at("gp");
        cfg.gp.lengthscale = jg.value("lengthscale", cfg.gp.lengthscale);
        cfg.gp.signal_variance = jg.value("signal", cfg.gp.signal_variance);
        cfg.gp.noise_variance = jg.value("noise", cfg.gp.noise_variance);
        cfg.gp.grid_search = jg.value("grid_search", cfg.gp.grid_search);
    }
    return cfg;
}

inline DeviceProfile device_from_json(const nlohmann::json& root) {
    DeviceProfile device;
    if (!root.contains("device"))
        return device;
    const nlohmann::json& j = root.at("device");
    device.device_id = j.value("device_id", device.device_id);
    device.gain = j.value("gain", device.gain);
    device.offset_db = j.value("offset_db", device.offset_db);
    device.noise_sigma_db = j.value("noise_sigma_db", device.noise_sigma_db);
    return device;
}

/// "5", "1,2,5", "1..50", and "all" (resolved against the beacon count later).
inline std::vector<int> parse_n_spec(const std::string& spec, int all_value) {
    std::vector<int> ns;
    std::string token;
    std::istringstream in(spec);
    while (std::getline(in, token, ',')) {
        require(!token.empty(), "empty token in --n spec");
        if (token == "all") {
            ns.push_back(all_value);
        } else if (auto dots = token.find(".."); dots != std::string::npos) {
            int lo = static_cast<int>(parse_int(token.substr(0, dots)));
            int hi = static_cast<int>(parse_int(token.substr(dots + 2)));
            require(lo >= 1 && hi >= lo, "bad range in --n spec: " + token);
            for (int n = lo; n <= hi; ++n)
                ns.push_back(n);
        } else {
            ns.push_back(static_cast<int>(parse_int(token)));
        }
    }
    require(!ns.empty(), "--n spec resolved to no values");
    return ns;
}

inline std::vector<double> parse_sweep(const std::string& spec) {
    // start:stop:step, all in seconds
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in(spec);
    while (std::getline(in, token, ':'))
        parts.push_back(token);
    require(parts.size() == 3, "--sweep expects start:stop:step");
    double start = parse_double(parts[0]);
    double stop = parse_double(parts[1]);
    double step = parse_double(parts[2]);
    require(start > 0.0 && stop >= start && step > 0.0, "bad --sweep range");
    std::vector<double> intervals;
    for (double t = start; t <= stop + 1e-9; t += step)
        intervals.push_back(t);
    return intervals;
}

inline std::vector<Technology> parse_tech_list(const std::vector<std::string>& names) {
    std::vector<Technology> techs;
    techs.reserve(names.size());
    for (const std::string& name : names)
        techs.push_back(parse_technology(name));
    return techs;
}

class ManifestScope {
public:
    ManifestScope(const CommonOpts& opts, std::string command, nlohmann::json effective_config)
        : opts_(opts),
          start_(std::chrono::steady_clock::now()) {
        manifest_.command = std::move(command);
        manifest_.seed = opts.seed;
        manifest_.config_hash = fnv1a64(effective_config.dump());
        std::filesystem::create_directories(opts.out_dir);
    }

    std::string out_path(const std::string& name) {
        std::string path = (std::filesystem::path(opts_.out_dir) / name).string();
        manifest_.outputs.push_back(name);
        return path;
    }

    void add_input(const std::string& path) { manifest_.inputs.push_back(path); }

    void finish() {
        manifest_.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_manifest_json((std::filesystem::path(opts_.out_dir) / "manifest.json").string(),
                            manifest_);
    }

private:
    const CommonOpts& opts_;
    RunManifest manifest_;
    std::chrono::steady_clock::time_point start_;
};

/// Shared evaluate/subset-study/select front half: load scans, filter, build
/// aligned train/test maps over the common channels.
struct MapPair {
    RadioMap train;
    RadioMap test;
};

inline MapPair build_map_pair(const std::string& train_path, const std::string& test_path,
                              const std::vector<Technology>& techs) {
    std::vector<RawScan> train_scans = read_scans_csv(train_path);
    std::vector<RawScan> test_scans = read_scans_csv(test_path);
    std::vector<RawScan> train = detail::filter_technologies(train_scans, techs);
    std::vector<RawScan> test = detail::filter_technologies(test_scans, techs);
    require(!train.empty(), "no training scans after technology filter");
    require(!test.empty(), "no test scans after technology filter");
    std::vector<BeaconId> common =
        intersect_channels(detail::observed_beacons(train), detail::observed_beacons(test));
    std::vector<RawScan> restricted = train;
    for (RawScan& scan : restricted) {
        std::map<BeaconId, std::vector<double>> kept;
        for (const auto& [id, samples] : scan.readings)
            if (std::binary_search(common.begin(), common.end(), id))
                kept[id] = samples;
        scan.readings = std::move(kept);
    }
    NormalizationParams norm = fit_normalization(restricted);
    MapPair maps;
    maps.train = build_radio_map(train, common, norm);
    maps.test = build_radio_map(test, common, norm);
    return maps;
}

// -- simulate ---------------------------------------------------------------

struct SimulateOpts {
    CommonOpts common;
    std::string preset;
    std::string env_path;
    int session = 1;
    int samples = 10;
    DeviceProfile device;
    // Which device flags the user actually passed; config fills the rest.
    bool id_set = false, gain_set = false, offset_set = false, noise_set = false;
};

inline void run_simulate(const SimulateOpts& opts) {
    nlohmann::json config = load_config(opts.common.config_path);
    DeviceProfile device = device_from_json(config);
    if (opts.id_set)
        device.device_id = opts.device.device_id;
    if (opts.gain_set)
        device.gain = opts.device.gain;
    if (opts.offset_set)
        device.offset_db = opts.device.offset_db;
    if (opts.noise_set)
        device.noise_sigma_db = opts.device.noise_sigma_db;

    SimPreset preset;
    if (!opts.env_path.empty()) {
        preset = read_environment_json(opts.env_path);
    } else {
        require(!opts.preset.empty(), "simulate: give --preset or --env");
        preset = make_preset(opts.preset, opts.common.seed);
    }

    std::uint64_t session_seed =
        derive_seed(opts.common.seed, "session", static_cast<std::uint64_t>(opts.session));
    std::vector<RawScan> scans =
        generate_dataset(preset.env, preset.grid, device, opts.samples, session_seed);

    nlohmann::json effective = {{"preset", opts.preset},
                                {"env", opts.env_path},
                                {"session", opts.session},
                                {"samples", opts.samples},
                                {"device_id", device.device_id},
                                {"gain", device.gain},
                                {"offset_db", device.offset_db},
                                {"noise_sigma_db", device.noise_sigma_db}};
    ManifestScope manifest(opts.common, "simulate", effective);
    if (!opts.env_path.empty())
        manifest.add_input(opts.env_path);
    write_scans_csv(manifest.out_path("scans.csv"), scans);
    write_environment_json(manifest.out_path("environment.json"), preset);
    manifest.finish();
    std::cout << "simulate: " << scans.size() << " locations, "
              << preset.env.beacons.size() << " beacons -> " << opts.common.out_dir << "\n";
}

// -- evaluate ---------------------------------------------------------------

struct EvaluateOpts {
    CommonOpts common;
    std::string train_path;
    std::string test_path;
    std::vector<std::string> tech_names;
    std::string engine_name;
    std::string metric_name;
    std::string method_name;
    int k = 0;
    double snap_radius = -1.0;
    bool save_model = false;
};

inline void run_evaluate(const EvaluateOpts& opts) {
    nlohmann::json config = load_config(opts.common.config_path);
    EngineConfig engine = engine_from_json(config);
    if (!opts.engine_name.empty())
        engine.engine = parse_engine(opts.engine_name);
    if (!opts.metric_name.empty())
        engine.metric = parse_metric(opts.metric_name);
    if (!opts.method_name.empty())
        engine.transform = parse_transform(opts.method_name);
    if (opts.k > 0)
        engine.k = opts.k;

    ExperimentConfig experiment;
    experiment.engine = engine;
    if (opts.snap_radius > 0.0)
        experiment.snap_radius = opts.snap_radius;

    nlohmann::json effective = {{"train", opts.train_path},
                                {"test", opts.test_path},
                                {"tech", opts.tech_names},
                                {"engine", to_string(engine.engine)},
                                {"metric", to_string(engine.metric)},
                                {"method", to_string(engine.transform)},
                                {"k", engine.k}};
    ManifestScope manifest(opts.common, "evaluate", effective);
    manifest.add_input(opts.train_path);
    manifest.add_input(opts.test_path);

    std::vector<RawScan> train_scans = read_scans_csv(opts.train_path);
    std::vector<RawScan> test_scans = read_scans_csv(opts.test_path);

    // One run per named technology, or one combined run when none was named.
    std::vector<std::pair<std::string, std::vector<Technology>>> runs;
    if (opts.tech_names.empty()) {
        runs.emplace_back("all", std::vector<Technology>{});
    } else {
        for (const std::string& name : opts.tech_names)
            runs.emplace_back(name, std::vector<Technology>{parse_technology(name)});
    }

    nlohmann::json stats_rows = nlohmann::json::array();
    for (const auto& [label, techs] : runs) {
        experiment.technologies = techs;
        ExperimentResult result = run_experiment(train_scans, test_scans, experiment);
        nlohmann::json row = stats_to_json(result.stats);
        row["technology"] = label;
        row["beacons"] = result.beacons.size();
        stats_rows.push_back(row);
        write_text_file(manifest.out_path("records_" + label + ".csv"),
                        records_to_csv(result.records));
        write_text_file(manifest.out_path("cdf_" + label + ".csv"), cdf_to_csv(result.stats));
        if (opts.save_model) {
            // The kNN "model" is the radio map itself; SVM and GP get
            // dedicated artifacts that reload to bit-identical predictors.
            std::string model_path = manifest.out_path("model_" + label + ".json");
            if (engine.engine == EngineKind::SVM)
                write_model_json(model_path,
                                 svm_model_to_json(svm_train(result.train_map, engine)));
            else if (engine.engine == EngineKind::GP)
                write_model_json(model_path,
                                 gp_model_to_json(gp_train(result.train_map, engine)));
            else
                write_radio_map_json(model_path, result.train_map);
        }
        std::cout << "evaluate[" << label << "]: n=" << result.stats.n
                  << " classification_rate=" << result.stats.classification_rate
                  << " median=" << result.stats.median << " m p95=" << result.stats.p95
                  << " m\n";
    }
    write_text_file(manifest.out_path("stats.json"), stats_rows.dump(2) + "\n");
    manifest.finish();
}

// -- subset-study -----------------------------------------------------------

struct SubsetStudyOpts {
    CommonOpts common;
    std::string train_path;
    std::string test_path;
    std::vector<std::string> tech_names;
    std::string n_spec = "all";
    int trials = 500;
};

inline void run_subset_study(const SubsetStudyOpts& opts) {
    std::vector<Technology> techs = parse_tech_list(opts.tech_names);
    MapPair maps = build_map_pair(opts.train_path, opts.test_path, techs);
    int beacon_count = static_cast<int>(maps.train.beacons.size());
    std::vector<int> ns = parse_n_spec(opts.n_spec, beacon_count);

    nlohmann::json effective = {{"train", opts.train_path},
                                {"test", opts.test_path},
                                {"tech", opts.tech_names},
                                {"n", opts.n_spec},
                                {"trials", opts.trials}};
    ManifestScope manifest(opts.common, "subset-study", effective);
    manifest.add_input(opts.train_path);
    manifest.add_input(opts.test_path);

    std::vector<SubsetStudyResult> results;
    results.reserve(ns.size());
    for (int n : ns) {
        results.push_back(
            random_subset_study(maps.train, maps.test, n, opts.trials, opts.common.seed));
        const SubsetStudyResult& r = results.back();
        std::cout << "subset-study n=" << r.n_stations << ": mean median "
                  << r.mean_of_medians << " m (min " << r.min_of_medians << ", max "
                  << r.max_of_medians << ")\n";
    }
    write_text_file(manifest.out_path("study.csv"), study_to_csv(results));
    write_text_file(manifest.out_path("summary.json"),
                    study_summary_to_json(results).dump(2) + "\n");
    manifest.finish();
}

// -- battery ----------------------------------------------------------------

struct BatteryOpts {
    CommonOpts common;
    std::string technology = "wifi";
    double baseline = 0.0;
    double fit_interval = 0.0;
    double fit_life = 0.0;
    int beacons = 3;
    std::string sweep = "1:60:1";
};

inline void run_battery(const BatteryOpts& opts) {
    PowerModel model;
    if (opts.baseline > 0.0 || opts.fit_interval > 0.0 || opts.fit_life > 0.0) {
        require(opts.baseline > 0.0 && opts.fit_interval > 0.0 && opts.fit_life > 0.0,
                "battery: custom fits need --baseline, --fit-interval, and --fit-life");
        model = fit_scan_cost(opts.baseline, opts.fit_interval, opts.fit_life,
                              opts.technology);
    } else if (opts.technology == "wifi") {
        model = wifi_power_model();
    } else if (opts.technology == "fm") {
        model = fm_power_model(opts.beacons);
    } else {
        fail("battery: no built-in model for '" + opts.technology +
             "' (use --baseline/--fit-interval/--fit-life)");
    }

    std::vector<double> intervals = parse_sweep(opts.sweep);
    nlohmann::json effective = {{"technology", opts.technology},
                                {"baseline", model.baseline_life_h},
                                {"scan_cost", model.scan_cost},
                                {"sweep", opts.sweep}};
    ManifestScope manifest(opts.common, "battery", effective);
    if (opts.common.format == "json") {
        write_text_file(manifest.out_path("battery.json"),
                        battery_sweep_to_json(model, intervals).dump(2) + "\n");
    } else {
        write_text_file(manifest.out_path("battery.csv"),
                        battery_sweep_to_csv(model, intervals));
    }
    manifest.finish();
    std::cout << "battery[" << opts.technology << "]: baseline " << model.baseline_life_h
              << " h, scan cost " << model.scan_cost << ", " << intervals.size()
              << " sweep points\n";
}

// -- select -----------------------------------------------------------------

struct SelectOpts {
    CommonOpts common;
    std::string train_path;
    std::string test_path;
    std::vector<std::string> tech_names;
    std::string mode = "strongest";
    int n = 5;
};

inline void run_select(const SelectOpts& opts) {
    std::vector<Technology> techs = parse_tech_list(opts.tech_names);
    std::string test_path = opts.test_path.empty() ? opts.train_path : opts.test_path;
    MapPair maps = build_map_pair(opts.train_path, test_path, techs);

    std::vector<BeaconId> picked;
    if (opts.mode == "strongest") {
        picked = select_strongest(maps.train, opts.n);
    } else if (opts.mode == "weakest") {
        picked = select_weakest(maps.train, opts.n);
    } else if (opts.mode == "greedy") {
        require(!opts.test_path.empty(), "select: greedy mode needs --test (held-out data)");
        picked = greedy_select(maps.train, maps.test, opts.n);
    } else {
        fail("select: unknown mode '" + opts.mode + "'");
    }

    nlohmann::json effective = {{"train", opts.train_path},
                                {"test", opts.test_path},
                                {"mode", opts.mode},
                                {"n", opts.n}};
    ManifestScope manifest(opts.common, "select", effective);
    manifest.add_input(opts.train_path);
    if (!opts.test_path.empty())
        manifest.add_input(opts.test_path);
    nlohmann::json out = {{"mode", opts.mode}, {"n", opts.n},
                          {"beacons", beacons_to_json(picked)}};
    write_text_file(manifest.out_path("selection.json"), out.dump(2) + "\n");
    manifest.finish();
    std::cout << "select[" << opts.mode << "]: " << picked.size() << " beacons\n";
}

}  // namespace climpl

/// Full command-line surface; argv[0] excluded. Returns the process exit code.
inline int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"ambient radio fingerprint localization toolkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    climpl::SimulateOpts sim_opts;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic scan dataset");
    climpl::add_common(sim_cmd, sim_opts.common);
    sim_cmd->add_option("--preset", sim_opts.preset, "Built-in world: room or floor");
    sim_cmd->add_option("--env", sim_opts.env_path, "Environment JSON (overrides --preset)");
    sim_cmd->add_option("--session", sim_opts.session,
                        "Session ordinal; different values model different days");
    sim_cmd->add_option("--samples", sim_opts.samples, "Samples per beacon per location");
    sim_cmd->add_option("--device-id", sim_opts.device.device_id, "Receiver name");
    sim_cmd->add_option("--device-gain", sim_opts.device.gain, "Receiver RSSI gain");
    sim_cmd->add_option("--device-offset", sim_opts.device.offset_db, "Receiver RSSI offset, dB");
    sim_cmd->add_option("--device-noise", sim_opts.device.noise_sigma_db,
                        "Receiver noise sigma, dB");

    climpl::EvaluateOpts eval_opts;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "Localize a test set against a train set");
    climpl::add_common(eval_cmd, eval_opts.common);
    eval_cmd->add_option("--train", eval_opts.train_path, "Training scans CSV")->required();
    eval_cmd->add_option("--test", eval_opts.test_path, "Test scans CSV")->required();
    eval_cmd->add_option("--tech", eval_opts.tech_names,
                         "Technology filter (repeatable: fm, wifi, gsm)");
    eval_cmd->add_option("--engine", eval_opts.engine_name, "knn, svm, or gp");
    eval_cmd->add_option("--metric", eval_opts.metric_name, "euclidean or correlation");
    eval_cmd->add_option("--method", eval_opts.method_name,
                         "Cross-device method: basic, ratio, or correlation");
    eval_cmd->add_option("--k", eval_opts.k, "Neighbor count for kNN");
    eval_cmd->add_option("--snap-radius", eval_opts.snap_radius,
                         "Report the fraction of estimates within this distance");
    eval_cmd->add_flag("--save-model", eval_opts.save_model,
                       "Write the trained model artifact next to the stats");

    climpl::SubsetStudyOpts study_opts;
    CLI::App* study_cmd =
        app.add_subcommand("subset-study", "Random station-subset accuracy study");
    climpl::add_common(study_cmd, study_opts.common);
    study_cmd->add_option("--train", study_opts.train_path, "Training scans CSV")->required();
    study_cmd->add_option("--test", study_opts.test_path, "Test scans CSV")->required();
    study_cmd->add_option("--tech", study_opts.tech_names, "Technology filter (repeatable)");
    study_cmd->add_option("--n", study_opts.n_spec,
                          "Station counts: e.g. 5, 1..20, 1,2,5,all");
    study_cmd->add_option("--trials", study_opts.trials, "Random subsets per station count");

    climpl::BatteryOpts battery_opts;
    CLI::App* battery_cmd = app.add_subcommand("battery", "Battery life vs scan interval");
    climpl::add_common(battery_cmd, battery_opts.common);
    battery_cmd->add_option("--technology", battery_opts.technology,
                            "Built-in model: wifi or fm");
    battery_cmd->add_option("--baseline", battery_opts.baseline, "Baseline life, hours");
    battery_cmd->add_option("--fit-interval", battery_opts.fit_interval,
                            "Fit point: scan interval, seconds");
    battery_cmd->add_option("--fit-life", battery_opts.fit_life, "Fit point: life, hours");
    battery_cmd->add_option("--beacons", battery_opts.beacons,
                            "FM stations scanned per cycle (scan cost scales linearly)");
    battery_cmd->add_option("--sweep", battery_opts.sweep, "Interval sweep start:stop:step");

    climpl::SelectOpts select_opts;
    CLI::App* select_cmd = app.add_subcommand("select", "Pick a station subset");
    climpl::add_common(select_cmd, select_opts.common);
    select_cmd->add_option("--train", select_opts.train_path, "Training scans CSV")->required();
    select_cmd->add_option("--test", select_opts.test_path, "Held-out scans CSV (greedy mode)");
    select_cmd->add_option("--tech", select_opts.tech_names, "Technology filter (repeatable)");
    select_cmd->add_option("--mode", select_opts.mode, "strongest, weakest, or greedy");
    select_cmd->add_option("--n", select_opts.n, "Subset size");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    sim_opts.id_set = sim_cmd->count("--device-id") > 0;
    sim_opts.gain_set = sim_cmd->count("--device-gain") > 0;
    sim_opts.offset_set = sim_cmd->count("--device-offset") > 0;
    sim_opts.noise_set = sim_cmd->count("--device-noise") > 0;

    try {
        if (sim_cmd->parsed())
            climpl::run_simulate(sim_opts);
        else if (eval_cmd->parsed())
            climpl::run_evaluate(eval_opts);
        else if (study_cmd->parsed())
            climpl::run_subset_study(study_opts);
        else if (battery_cmd->parsed())
            climpl::run_battery(battery_opts);
        else if (select_cmd->parsed())
            climpl::run_select(select_opts);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

inline int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run_cli(args);
}

}
