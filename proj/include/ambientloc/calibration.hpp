#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ambientloc/types.hpp"

namespace ambientloc {

/// Beacons present in both lists, sorted by (technology, channel).
/// Only these are usable for localization across two sessions.
inline std::vector<BeaconId> intersect_channels(const std::vector<BeaconId>& train,
                                                const std::vector<BeaconId>& test) {
    require(!train.empty() && !test.empty(), "intersect_channels: empty beacon list");
    std::set<BeaconId> a(train.begin(), train.end());
    std::set<BeaconId> b(test.begin(), test.end());
    std::vector<BeaconId> out;
    for (const auto& id : a)
        if (b.count(id))
            out.push_back(id);
    if (out.empty())
        fail("intersect_channels: no common channels between the two sessions; "
             "localization impossible");
    return out;
}

/// Per-technology min/max of the raw samples over all scans. Fitting is done
/// on the training dataset only; later values clamp into this range.
inline NormalizationParams fit_normalization(const std::vector<RawScan>& scans) {
    require(!scans.empty(), "fit_normalization: no scans");
    std::map<Technology, std::set<double>> distinct;
    NormalizationParams params;
    for (const auto& scan : scans) {
        for (const auto& [beacon, samples] : scan.readings) {
            for (double v : samples) {
                auto [it, inserted] = params.ranges.try_emplace(beacon.technology,
                                                                TechRange{v, v});
                if (!inserted) {
                    it->second.min_dbm = std::min(it->second.min_dbm, v);
                    it->second.max_dbm = std::max(it->second.max_dbm, v);
                }
                auto& seen = distinct[beacon.technology];
                if (seen.size() < 2)
                    seen.insert(v);
            }
        }
    }
    require(!params.ranges.empty(), "fit_normalization: scans contain no samples");
    for (const auto& [tech, seen] : distinct)
        require(seen.size() >= 2, std::string("fit_normalization: constant RSSI for ") +
                                      to_string(tech) + "; range is degenerate");
    return params;
}

/// Clamp to the fitted range, then map affinely onto [0, 1].
inline double normalize_value(const NormalizationParams& params, Technology tech, double raw_dbm) {
    const TechRange& r = params.range(tech);
    double v = std::clamp(raw_dbm, r.min_dbm, r.max_dbm);
    return (v - r.min_dbm) / (r.max_dbm - r.min_dbm);
}

inline double denormalize_value(const NormalizationParams& params, Technology tech, double u) {
    const TechRange& r = params.range(tech);
    return r.min_dbm + u * (r.max_dbm - r.min_dbm);
}

/// Data-quality notes produced while building a radio map.
struct BuildReport {
    std::size_t unknown_beacon_samples = 0;  // samples whose beacon is outside the index
    std::size_t rejected_locations = 0;
    std::size_t low_sample_beacons = 0;  // beacon/location pairs seen with 1..9 samples
    std::size_t duplicate_fingerprints = 0;
    std::vector<std::string> warnings;
};

/// Build the calibration database: one fingerprint per location, each slot
/// the mean of that beacon's normalized samples, 0 where the beacon was
/// never observed. Samples outside the index are counted and ignored.
inline RadioMap build_radio_map(const std::vector<RawScan>& scans,
                                const std::vector<BeaconId>& beacons,
                                const NormalizationParams& norm,
                                BuildReport* report = nullptr) {
    require(!beacons.empty(), "build_radio_map: empty beacon index");
    norm.validate();
    BuildReport local;
    BuildReport& rep = report ? *report : local;

    std::vector<BeaconId> index = beacons;
    std::sort(index.begin(), index.end());
    for (std::size_t i = 1; i < index.size(); ++i)
        require(index[i - 1] < index[i], "build_radio_map: duplicate beacon in index");

    std::map<BeaconId, std::size_t> slot;
    for (std::size_t i = 0; i < index.size(); ++i)
        slot[index[i]] = i;

    // Merge all scans of the same grid point (several sessions may revisit it).
    std::map<int, std::vector<const RawScan*>> by_location;
    std::string environment;
    for (const auto& scan : scans) {
        if (environment.empty())
            environment = scan.location.environment_id;
        else
            require(environment == scan.location.environment_id,
                    "build_radio_map: scans span multiple environments");
        by_location[scan.location.grid_index].push_back(&scan);
    }

    RadioMap map;
    map.beacons = index;
    map.norm = norm;
    map.environment_id = environment;
    if (!scans.empty()) {
        map.device_id = scans.front().device_id;
        map.session_id = scans.front().session_id;
    }

    for (const auto& [grid_index, location_scans] : by_location) {
        std::vector<std::vector<double>> normalized(index.size());
        bool reject = false;
        for (const RawScan* scan : location_scans) {
            for (const auto& [beacon, samples] : scan->readings) {
                if (samples.empty()) {
                    // A listed beacon with no samples means the scan is unusable.
                    reject = true;
                    continue;
                }
                auto it = slot.find(beacon);
                if (it == slot.end()) {
                    rep.unknown_beacon_samples += samples.size();
                    continue;
                }
                for (double v : samples)
                    normalized[it->second].push_back(
                        normalize_value(norm, beacon.technology, v));
            }
        }
        if (reject) {
            ++rep.rejected_locations;
            rep.warnings.push_back("location " + std::to_string(grid_index) +
                                   " rejected: beacon listed with no samples");
            continue;
        }
        Fingerprint fp;
        fp.values.assign(index.size(), 0.0);
        fp.location = location_scans.front()->location;
        for (std::size_t i = 0; i < index.size(); ++i) {
            auto& samples = normalized[i];
            if (samples.empty())
                continue;  // invisible beacon: slot stays exactly 0
            if (samples.size() < 10)
                ++rep.low_sample_beacons;
            // Sum in sorted order so the mean is bit-identical regardless of
            // the order samples arrived in (scan files, merged sessions).
            std::sort(samples.begin(), samples.end());
            double sum = 0.0;
            for (double v : samples)
                sum += v;
            fp.values[i] = sum / static_cast<double>(samples.size());
        }
        map.fingerprints.push_back(std::move(fp));
    }

    require(!map.fingerprints.empty(), "build_radio_map: zero usable scans");
    if (rep.unknown_beacon_samples > 0)
        rep.warnings.push_back(std::to_string(rep.unknown_beacon_samples) +
                               " sample(s) referenced beacons outside the index");
    if (rep.low_sample_beacons > 0)
        rep.warnings.push_back(std::to_string(rep.low_sample_beacons) +
                               " beacon/location pair(s) had fewer than 10 samples");

    // Identical fingerprints at different locations cannot be told apart.
    for (std::size_t i = 0; i < map.fingerprints.size(); ++i) {
        for (std::size_t j = i + 1; j < map.fingerprints.size(); ++j) {
            if (map.fingerprints[i].values == map.fingerprints[j].values) {
                ++rep.duplicate_fingerprints;
                rep.warnings.push_back(
                    "ambiguous calibration: locations " +
                    std::to_string(map.fingerprints[i].location->grid_index) + " and " +
                    std::to_string(map.fingerprints[j].location->grid_index) +
                    " have identical fingerprints");
            }
        }
    }
    return map;
}

/// Restrict a map to a subset of its beacons, keeping fingerprint slots aligned
/// to the subset's (technology, channel) order. Every requested beacon must be
/// present in the source map.
inline RadioMap project_radio_map(const RadioMap& map, std::vector<BeaconId> subset) {
    require(!subset.empty(), "project_radio_map: empty beacon subset");
    std::sort(subset.begin(), subset.end());
    subset.erase(std::unique(subset.begin(), subset.end()), subset.end());

    std::vector<std::size_t> slots;
    slots.reserve(subset.size());
    for (const BeaconId& id : subset) {
        auto it = std::lower_bound(map.beacons.begin(), map.beacons.end(), id);
        require(it != map.beacons.end() && !(id < *it),
                std::string("project_radio_map: beacon not present in map: ") +
                    to_string(id.technology) + ":" + std::to_string(id.channel));
        slots.push_back(static_cast<std::size_t>(it - map.beacons.begin()));
    }

    RadioMap out;
    out.environment_id = map.environment_id;
    out.device_id = map.device_id;
    out.session_id = map.session_id;
    out.norm = map.norm;
    out.beacons = std::move(subset);
    out.fingerprints.reserve(map.fingerprints.size());
    for (const Fingerprint& fp : map.fingerprints) {
        Fingerprint pfp;
        pfp.location = fp.location;
        pfp.values.reserve(slots.size());
        for (std::size_t s : slots)
            pfp.values.push_back(fp.values[s]);
        out.fingerprints.push_back(std::move(pfp));
    }
    return out;
}

}
