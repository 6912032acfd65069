#pragma once

#include <algorithm>
#include <vector>

#include "ambientloc/engine_config.hpp"
#include "ambientloc/metrics.hpp"
#include "ambientloc/types.hpp"

namespace ambientloc {

struct RankedNeighbor {
    std::size_t fingerprint_index = 0;
    double key = 0.0;  // distance, or 1 - r for the correlation metric
};

/// All calibration fingerprints ranked best-first for the query under the
/// given metric. Ties break toward the lowest grid index so rankings are
/// deterministic.
inline std::vector<RankedNeighbor> rank_neighbors(const RadioMap& map,
                                                  std::span<const double> query,
                                                  Metric metric) {
    require(!map.fingerprints.empty(), "rank_neighbors: empty radio map");
    std::vector<RankedNeighbor> ranked;
    ranked.reserve(map.fingerprints.size());
    for (std::size_t i = 0; i < map.fingerprints.size(); ++i) {
        const auto& fp = map.fingerprints[i];
        double key = metric == Metric::Euclidean
                         ? euclidean_distance(std::span<const double>(fp.values), query)
                         : 1.0 - pearson_similarity(std::span<const double>(fp.values), query);
        ranked.push_back({i, key});
    }
    std::sort(ranked.begin(), ranked.end(),
              [&](const RankedNeighbor& a, const RankedNeighbor& b) {
                  if (a.key != b.key)
                      return a.key < b.key;
                  return map.fingerprints[a.fingerprint_index].location->grid_index <
                         map.fingerprints[b.fingerprint_index].location->grid_index;
              });
    return ranked;
}

/// k-nearest-neighbor localization. k = 1 returns the best-matching grid
/// point; k > 1 returns the unweighted centroid of the k neighbor locations.
inline LocalizationEstimate knn_localize(const RadioMap& map, const Fingerprint& query,
                                         const EngineConfig& config) {
    config.validate();
    require(!map.fingerprints.empty(), "knn_localize: empty radio map");
    require(static_cast<std::size_t>(config.k) <= map.fingerprints.size(),
            "knn_localize: k exceeds number of calibration fingerprints");
    require(query.values.size() == map.beacons.size(),
            "knn_localize: query not aligned to the map's beacon index");

    auto ranked = rank_neighbors(map, std::span<const double>(query.values), config.metric);

    LocalizationEstimate est;
    est.environment_id = map.environment_id;
    if (config.k == 1) {
        const auto& fp = map.fingerprints[ranked.front().fingerprint_index];
        est.x = fp.location->x;
        est.y = fp.location->y;
        est.matched_grid_index = fp.location->grid_index;
        est.score = ranked.front().key;
        return est;
    }
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < config.k; ++i) {
        const auto& fp = map.fingerprints[ranked[static_cast<std::size_t>(i)].fingerprint_index];
        sx += fp.location->x;
        sy += fp.location->y;
    }
    est.x = sx / config.k;
    est.y = sy / config.k;
    est.score = ranked.front().key;
    return est;
}

}
