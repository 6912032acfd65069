#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ambientloc/error.hpp"

namespace ambientloc {

enum class Technology { FM, WiFi, GSM };

inline const char* to_string(Technology t) {
    switch (t) {
    case Technology::FM: return "fm";
    case Technology::WiFi: return "wifi";
    case Technology::GSM: return "gsm";
    }
    fail("unknown technology enum value");
}

inline Technology parse_technology(std::string_view s) {
    std::string lower;
    lower.reserve(s.size());
    for (char c : s)
        lower.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    if (lower == "fm") return Technology::FM;
    if (lower == "wifi") return Technology::WiFi;
    if (lower == "gsm") return Technology::GSM;
    fail("unknown technology: '" + std::string(s) + "' (expected fm|wifi|gsm)");
}

/// One transmitter/channel of one radio technology. Identity is the
/// (technology, channel) pair; the label is display-only.
struct BeaconId {
    Technology technology = Technology::FM;
    std::int64_t channel = 0;  // FM centre frequency in kHz, Wi-Fi BSSID ordinal, GSM cell id
    std::string label;

    friend bool operator==(const BeaconId& a, const BeaconId& b) {
        return a.technology == b.technology && a.channel == b.channel;
    }
    friend bool operator!=(const BeaconId& a, const BeaconId& b) { return !(a == b); }
    friend bool operator<(const BeaconId& a, const BeaconId& b) {
        if (a.technology != b.technology)
            return a.technology < b.technology;
        return a.channel < b.channel;
    }
};

inline std::string to_string(const BeaconId& b) {
    return std::string(to_string(b.technology)) + ":" + std::to_string(b.channel);
}

struct Location {
    double x = 0.0;  // meters
    double y = 0.0;  // meters
    std::string environment_id;
    int grid_index = 0;  // unique per environment

    friend bool operator==(const Location& a, const Location& b) {
        return a.x == b.x && a.y == b.y && a.environment_id == b.environment_id &&
               a.grid_index == b.grid_index;
    }
};

/// One calibration visit to one location: per-beacon lists of raw RSSI
/// samples in dBm. A complete scan holds 10 samples per channel; fewer are
/// permitted and flagged by validation.
struct RawScan {
    Location location;
    std::string device_id;
    std::string session_id;
    std::map<BeaconId, std::vector<double>> readings;
    double timestamp_s = 0.0;
};

struct TechRange {
    double min_dbm = 0.0;
    double max_dbm = 0.0;
};

/// Per-technology raw-RSSI extrema used for the 0..1 normalization.
struct NormalizationParams {
    std::map<Technology, TechRange> ranges;

    const TechRange& range(Technology t) const {
        auto it = ranges.find(t);
        if (it == ranges.end())
            fail(std::string("no normalization range for technology ") + to_string(t));
        return it->second;
    }

    void validate() const {
        for (const auto& [tech, r] : ranges)
            require(r.max_dbm > r.min_dbm,
                    std::string("degenerate normalization range for ") + to_string(tech));
    }
};

/// Vector of mean normalized RSSI values aligned to a shared beacon index.
/// Entries are in [0, 1]; beacons invisible at the location hold exactly 0.
struct Fingerprint {
    std::vector<double> values;
    std::optional<Location> location;  // present for calibration fingerprints
};

/// Calibration database: beacon index plus one located fingerprint per
/// grid point, with the normalization that produced the values.
struct RadioMap {
    std::vector<BeaconId> beacons;  // sorted by (technology, channel)
    std::vector<Fingerprint> fingerprints;
    NormalizationParams norm;
    std::string environment_id;
    std::string device_id;
    std::string session_id;

    std::optional<std::size_t> beacon_slot(const BeaconId& id) const {
        for (std::size_t i = 0; i < beacons.size(); ++i)
            if (beacons[i] == id)
                return i;
        return std::nullopt;
    }

    const Fingerprint* at_grid(int grid_index) const {
        for (const auto& f : fingerprints)
            if (f.location && f.location->grid_index == grid_index)
                return &f;
        return nullptr;
    }

    void validate() const {
        norm.validate();
        for (std::size_t i = 1; i < beacons.size(); ++i)
            require(beacons[i - 1] < beacons[i], "radio map beacon index not sorted/unique");
        for (const auto& f : fingerprints) {
            require(f.values.size() == beacons.size(),
                    "fingerprint length does not match beacon index");
            require(f.location.has_value(), "calibration fingerprint lacks a location");
            for (double v : f.values)
                require(v >= 0.0 && v <= 1.0, "fingerprint value outside [0, 1]");
        }
        for (std::size_t i = 0; i < fingerprints.size(); ++i)
            for (std::size_t j = i + 1; j < fingerprints.size(); ++j)
                require(fingerprints[i].location->grid_index !=
                            fingerprints[j].location->grid_index,
                        "two fingerprints share a grid index");
    }
};

}
