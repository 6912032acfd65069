#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ambientloc/calibration.hpp"
#include "ambientloc/cross_device.hpp"
#include "ambientloc/gp.hpp"
#include "ambientloc/knn.hpp"
#include "ambientloc/svm.hpp"
#include "ambientloc/util.hpp"

namespace ambientloc {

/// Localization-quality summary over one batch of test queries.
struct ErrorStats {
    std::size_t n = 0;
    double classification_rate = 0.0;  // fraction with exactly 0 m error (1e-9 tolerance)
    std::optional<double> snap_rate;   // fraction within half the grid spacing, continuous engines only
    double median = 0.0;
    double p90 = 0.0;
    double p95 = 0.0;
    std::vector<std::pair<double, double>> cdf;  // (error m, cumulative fraction), unique sorted errors
};

inline double error_distance(const LocalizationEstimate& estimate, const Location& truth) {
    require(estimate.environment_id == truth.environment_id,
            "error_distance: estimate and truth are from different environments");
    double dx = estimate.x - truth.x;
    double dy = estimate.y - truth.y;
    return std::sqrt(dx * dx + dy * dy);
}

/// Nearest-rank percentile: the ceil(p*n)-th order statistic of a sorted list.
inline double percentile_nearest_rank(const std::vector<double>& sorted_ascending, double p) {
    require(!sorted_ascending.empty(), "percentile: empty list");
    require(p > 0.0 && p <= 1.0, "percentile: p must be in (0, 1]");
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(sorted_ascending.size())));
    if (rank < 1)
        rank = 1;
    return sorted_ascending[rank - 1];
}

inline ErrorStats compute_stats(const std::vector<double>& errors,
                                std::optional<double> snap_radius = std::nullopt) {
    require(!errors.empty(), "compute_stats: empty error list");
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());

    ErrorStats s;
    s.n = sorted.size();
    std::size_t zeros = 0;
    for (double e : sorted)
        if (std::abs(e) <= 1e-9)
            ++zeros;
    s.classification_rate = static_cast<double>(zeros) / static_cast<double>(s.n);
    if (snap_radius) {
        std::size_t snapped = 0;
        for (double e : sorted)
            if (e <= *snap_radius)
                ++snapped;
        s.snap_rate = static_cast<double>(snapped) / static_cast<double>(s.n);
    }
    s.median = percentile_nearest_rank(sorted, 0.50);
    s.p90 = percentile_nearest_rank(sorted, 0.90);
    s.p95 = percentile_nearest_rank(sorted, 0.95);

    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i])
            ++j;
        s.cdf.emplace_back(sorted[i], static_cast<double>(j) / static_cast<double>(s.n));
        i = j;
    }
    return s;
}

/// One localized test point, for machine-readable experiment output.
struct LocalizationRecord {
    int grid_index = 0;  // ground-truth grid point
    double true_x = 0.0;
    double true_y = 0.0;
    double est_x = 0.0;
    double est_y = 0.0;
    double error_m = 0.0;
};

struct ExperimentConfig {
    std::vector<Technology> technologies;  // empty = use every technology present
    EngineConfig engine;
    std::optional<std::vector<BeaconId>> subset;  // project both maps before training
    std::optional<double> snap_radius;            // enables snap_rate for continuous engines
};

struct ExperimentResult {
    ErrorStats stats;
    std::vector<LocalizationRecord> records;
    std::vector<BeaconId> beacons;  // the common channels actually used
    RadioMap train_map;
    RadioMap test_map;
    BuildReport train_report;
    BuildReport test_report;
};

namespace detail {

inline std::vector<RawScan> filter_technologies(const std::vector<RawScan>& scans,
                                                const std::vector<Technology>& keep) {
    if (keep.empty())
        return scans;
    std::vector<RawScan> out;
    for (const RawScan& scan : scans) {
        RawScan filtered = scan;
        filtered.readings.clear();
        for (const auto& [id, samples] : scan.readings)
            if (std::find(keep.begin(), keep.end(), id.technology) != keep.end())
                filtered.readings[id] = samples;
        if (!filtered.readings.empty())
            out.push_back(std::move(filtered));
    }
    return out;
}

inline std::vector<BeaconId> observed_beacons(const std::vector<RawScan>& scans) {
    std::vector<BeaconId> ids;
    for (const RawScan& scan : scans)
        for (const auto& [id, samples] : scan.readings)
            ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

template <typename Fn>
auto labeled_step(const char* step, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        fail(std::string("run_experiment[") + step + "]: " + e.what());
    }
}

}  // namespace detail

/// Full pipeline: intersect channels, build maps, train, localize every test
/// fingerprint, summarize. Train and test are raw scan lists from the same
/// environment (typically different sessions or devices).
inline ExperimentResult run_experiment(const std::vector<RawScan>& train_scans,
                                       const std::vector<RawScan>& test_scans,
                                       const ExperimentConfig& config) {
    config.engine.validate();
    require(config.engine.engine == EngineKind::KNN ||
                config.engine.transform == FingerprintTransform::Basic,
            "run_experiment: ratio/correlation methods are defined for the kNN engine");

    std::vector<RawScan> train = detail::filter_technologies(train_scans, config.technologies);
    std::vector<RawScan> test = detail::filter_technologies(test_scans, config.technologies);
    require(!train.empty(), "run_experiment: no training scans after technology filter");
    require(!test.empty(), "run_experiment: no test scans after technology filter");

    ExperimentResult result;
    result.beacons = detail::labeled_step("intersect", [&] {
        return intersect_channels(detail::observed_beacons(train), detail::observed_beacons(test));
    });

    NormalizationParams norm = detail::labeled_step("normalize", [&] {
        // Fit on the training session only; test values clamp into [0,1].
        std::vector<RawScan> common = train;
        for (RawScan& scan : common) {
            std::map<BeaconId, std::vector<double>> kept;
            for (const auto& [id, samples] : scan.readings)
                if (std::binary_search(result.beacons.begin(), result.beacons.end(), id))
                    kept[id] = samples;
            scan.readings = std::move(kept);
        }
        return fit_normalization(common);
    });

    result.train_map = detail::labeled_step("build-train-map", [&] {
        return build_radio_map(train, result.beacons, norm, &result.train_report);
    });
    result.test_map = detail::labeled_step("build-test-map", [&] {
        return build_radio_map(test, result.beacons, norm, &result.test_report);
    });

    if (config.subset) {
        detail::labeled_step("subset-projection", [&] {
            result.train_map = project_radio_map(result.train_map, *config.subset);
            result.test_map = project_radio_map(result.test_map, *config.subset);
            result.beacons = *config.subset;
            return 0;
        });
    }

    const std::vector<Fingerprint>& queries = result.test_map.fingerprints;
    result.records.resize(queries.size());

    auto fill_record = [&](std::size_t i, const LocalizationEstimate& est) {
        LocalizationRecord& r = result.records[i];
        r.grid_index = queries[i].location->grid_index;
        r.true_x = queries[i].location->x;
        r.true_y = queries[i].location->y;
        r.est_x = est.x;
        r.est_y = est.y;
        r.error_m = error_distance(est, *queries[i].location);
    };

    if (config.engine.engine == EngineKind::KNN) {
        EngineConfig knn_cfg = config.engine;
        RadioMap ratio_map;
        if (config.engine.transform == FingerprintTransform::Ratio) {
            ratio_map = detail::labeled_step("ratio-transform", [&] {
                return make_ratio_map(result.train_map, config.engine.ratio_epsilon,
                                      config.engine.ratio_log);
            });
            knn_cfg.metric = Metric::Euclidean;
        } else if (config.engine.transform == FingerprintTransform::Correlation) {
            knn_cfg.metric = Metric::Correlation;
        }
        const RadioMap& search_map =
            config.engine.transform == FingerprintTransform::Ratio ? ratio_map : result.train_map;
        detail::labeled_step("localize", [&] {
            parallel_for(queries.size(), [&](std::size_t i) {
                LocalizationEstimate est;
                if (config.engine.transform == FingerprintTransform::Ratio) {
                    Fingerprint rq = ratio_transform(queries[i], config.engine.ratio_epsilon,
                                                     config.engine.ratio_log);
                    est = knn_localize(search_map, rq, knn_cfg);
                } else {
                    est = knn_localize(search_map, queries[i], knn_cfg);
                }
                fill_record(i, est);
            });
            return 0;
        });
    } else if (config.engine.engine == EngineKind::SVM) {
        SvmModel model = detail::labeled_step("train", [&] {
            return svm_train(result.train_map, config.engine);
        });
        detail::labeled_step("localize", [&] {
            parallel_for(queries.size(),
                         [&](std::size_t i) { fill_record(i, svm_localize(model, queries[i])); });
            return 0;
        });
    } else {
        GpModel model = detail::labeled_step("train", [&] {
            return gp_train(result.train_map, config.engine);
        });
        detail::labeled_step("localize", [&] {
            parallel_for(queries.size(),
                         [&](std::size_t i) { fill_record(i, gp_localize(model, queries[i])); });
            return 0;
        });
    }

    std::vector<double> errors(result.records.size());
    for (std::size_t i = 0; i < errors.size(); ++i)
        errors[i] = result.records[i].error_m;
    result.stats = compute_stats(errors, config.snap_radius);
    return result;
}

}
