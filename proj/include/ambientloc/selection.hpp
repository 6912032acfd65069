#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "ambientloc/calibration.hpp"
#include "ambientloc/eval.hpp"
#include "ambientloc/knn.hpp"
#include "ambientloc/rng.hpp"
#include "ambientloc/util.hpp"

namespace ambientloc {

namespace detail {

/// Mean normalized RSSI per beacon slot over all calibration locations.
inline std::vector<double> slot_means(const RadioMap& map) {
    require(!map.fingerprints.empty(), "slot_means: empty radio map");
    std::vector<double> means(map.beacons.size(), 0.0);
    for (const Fingerprint& fp : map.fingerprints)
        for (std::size_t i = 0; i < means.size(); ++i)
            means[i] += fp.values[i];
    for (double& m : means)
        m /= static_cast<double>(map.fingerprints.size());
    return means;
}

inline std::vector<BeaconId> select_by_mean(const RadioMap& map, int n, bool strongest) {
    require(n >= 1 && static_cast<std::size_t>(n) <= map.beacons.size(),
            "select: n out of range [1, beacon count]");
    std::vector<double> means = slot_means(map);
    std::vector<std::size_t> order(map.beacons.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    // Beacons are already (technology, channel)-sorted, so a stable sort on the
    // mean leaves ties in lowest-channel order.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return strongest ? means[a] > means[b] : means[a] < means[b];
    });
    std::vector<BeaconId> picked;
    picked.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        picked.push_back(map.beacons[order[static_cast<std::size_t>(i)]]);
    std::sort(picked.begin(), picked.end());
    return picked;
}

/// Median kNN error of the test map against the train map, both projected onto
/// the given beacons. The workhorse of every selection strategy here.
inline double projected_median_error(const RadioMap& train, const RadioMap& test,
                                     const std::vector<BeaconId>& beacons,
                                     const EngineConfig& config) {
    RadioMap ptrain = project_radio_map(train, beacons);
    RadioMap ptest = project_radio_map(test, beacons);
    std::vector<double> errors;
    errors.reserve(ptest.fingerprints.size());
    for (const Fingerprint& q : ptest.fingerprints) {
        LocalizationEstimate est = knn_localize(ptrain, q, config);
        errors.push_back(error_distance(est, *q.location));
    }
    std::sort(errors.begin(), errors.end());
    return percentile_nearest_rank(errors, 0.50);
}

}  // namespace detail

/// The n beacons with the highest mean normalized RSSI over all calibration
/// locations; ties go to the lowest channel. Result sorted by (tech, channel).
inline std::vector<BeaconId> select_strongest(const RadioMap& map, int n) {
    return detail::select_by_mean(map, n, true);
}

/// Mirror of select_strongest: the n lowest-mean beacons.
inline std::vector<BeaconId> select_weakest(const RadioMap& map, int n) {
    return detail::select_by_mean(map, n, false);
}

/// Statistics of the per-trial median localization error when n channels are
/// drawn at random without replacement.
struct SubsetStudyResult {
    int n_stations = 0;
    int trials = 0;
    std::vector<double> median_errors;  // one per trial
    double mean_of_medians = 0.0;
    double min_of_medians = 0.0;
    double max_of_medians = 0.0;
};

/// For each trial, draw n distinct common beacons, project both maps onto them,
/// localize every test fingerprint with kNN, and record the median error.
/// Per-trial seeds derive from the master seed, so parallel and serial
/// schedules produce identical results.
inline SubsetStudyResult random_subset_study(const RadioMap& train, const RadioMap& test, int n,
                                             int trials, std::uint64_t seed,
                                             const EngineConfig& config = {}) {
    std::vector<BeaconId> common = intersect_channels(train.beacons, test.beacons);
    require(n >= 1 && static_cast<std::size_t>(n) <= common.size(),
            "random_subset_study: n exceeds the common beacon count");
    require(trials >= 1, "random_subset_study: trials must be >= 1");

    SubsetStudyResult result;
    result.n_stations = n;
    result.trials = trials;
    result.median_errors.resize(static_cast<std::size_t>(trials));

    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        Rng rng(derive_seed(seed, "subset-trial", t));
        std::vector<std::size_t> pick =
            rng.sample_without_replacement(common.size(), static_cast<std::size_t>(n));
        std::vector<BeaconId> chosen;
        chosen.reserve(pick.size());
        for (std::size_t idx : pick)
            chosen.push_back(common[idx]);
        std::sort(chosen.begin(), chosen.end());
        result.median_errors[t] = detail::projected_median_error(train, test, chosen, config);
    });

    result.min_of_medians = *std::min_element(result.median_errors.begin(),
                                              result.median_errors.end());
    result.max_of_medians = *std::max_element(result.median_errors.begin(),
                                              result.median_errors.end());
    double sum = 0.0;
    for (double m : result.median_errors)
        sum += m;
    result.mean_of_medians = sum / static_cast<double>(trials);
    return result;
}

/// Forward greedy selection: repeatedly add the beacon that minimizes the kNN
/// median error on the held-out test map. Ties go to the lowest channel
/// (candidates are scanned in (technology, channel) order with strict <).
inline std::vector<BeaconId> greedy_select(const RadioMap& train, const RadioMap& test, int n,
                                           const EngineConfig& config = {}) {
    std::vector<BeaconId> common = intersect_channels(train.beacons, test.beacons);
    require(n >= 1 && static_cast<std::size_t>(n) <= common.size(),
            "greedy_select: n out of range [1, beacon count]");

    std::vector<BeaconId> selected;
    std::vector<bool> used(common.size(), false);
    for (int round = 0; round < n; ++round) {
        double best_err = std::numeric_limits<double>::infinity();
        std::size_t best_idx = common.size();
        for (std::size_t c = 0; c < common.size(); ++c) {
            if (used[c])
                continue;
            std::vector<BeaconId> candidate = selected;
            candidate.push_back(common[c]);
            std::sort(candidate.begin(), candidate.end());
            double err = detail::projected_median_error(train, test, candidate, config);
            if (err < best_err) {
                best_err = err;
                best_idx = c;
            }
        }
        used[best_idx] = true;
        selected.push_back(common[best_idx]);
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

}
