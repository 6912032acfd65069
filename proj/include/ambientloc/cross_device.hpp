#pragma once

#include <cstdint>

#include "ambientloc/knn.hpp"
#include "ambientloc/metrics.hpp"
#include "ambientloc/types.hpp"

namespace ambientloc {

/// Re-express every map fingerprint as pairwise ratios. The transformed width
/// is n(n-1)/2, so the beacon list is replaced by synthetic pair slots to keep
/// validation and kNN alignment checks meaningful.
inline RadioMap make_ratio_map(const RadioMap& map, double epsilon, bool use_log = false) {
    RadioMap out = map;
    for (auto& fp : out.fingerprints)
        fp = ratio_transform(fp, epsilon, use_log);
    std::size_t width =
        out.fingerprints.empty() ? 0 : out.fingerprints.front().values.size();
    out.beacons.clear();
    for (std::size_t i = 0; i < width; ++i)
        out.beacons.push_back(BeaconId{Technology::FM, static_cast<std::int64_t>(i + 1), ""});
    return out;
}

/// Localize a query that may come from a different device than the map.
///   Basic:       raw fingerprints, Euclidean kNN.
///   Ratio:       pairwise-ratio transform on both sides, Euclidean kNN.
///   Correlation: raw fingerprints ranked by Pearson similarity.
/// For batch Ratio runs, build the ratio map once with make_ratio_map and
/// query it directly; this convenience entry re-transforms the map per call.
inline LocalizationEstimate cross_device_localize(const RadioMap& map, const Fingerprint& query,
                                                  FingerprintTransform method,
                                                  const EngineConfig& base) {
    EngineConfig config = base;
    config.engine = EngineKind::KNN;
    config.transform = method;
    switch (method) {
        case FingerprintTransform::Basic:
            config.metric = Metric::Euclidean;
            return knn_localize(map, query, config);
        case FingerprintTransform::Correlation:
            config.metric = Metric::Correlation;
            return knn_localize(map, query, config);
        case FingerprintTransform::Ratio:
            break;
    }
    RadioMap ratio_map = make_ratio_map(map, config.ratio_epsilon, config.ratio_log);
    Fingerprint ratio_query = ratio_transform(query, config.ratio_epsilon, config.ratio_log);
    config.metric = Metric::Euclidean;
    return knn_localize(ratio_map, ratio_query, config);
}

}
