#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "ambientloc/knn.hpp"

using namespace ambientloc;

namespace {

// Small hand-built map: one synthetic Wi-Fi beacon per slot, fingerprints
// given directly as normalized values.
RadioMap make_map(const std::vector<std::vector<double>>& rows,
                  const std::vector<Location>& locations) {
    RadioMap map;
    map.environment_id = locations.empty() ? "env" : locations.front().environment_id;
    for (std::size_t i = 0; i < rows.front().size(); ++i)
        map.beacons.push_back(BeaconId{Technology::WiFi, static_cast<std::int64_t>(i + 1), ""});
    map.norm.ranges[Technology::WiFi] = TechRange{-90.0, -30.0};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Fingerprint fp;
        fp.values = rows[i];
        fp.location = locations[i];
        map.fingerprints.push_back(fp);
    }
    return map;
}

Fingerprint query(std::vector<double> values) {
    Fingerprint q;
    q.values = std::move(values);
    return q;
}

const std::vector<Location> kTriangle = {
    Location{0.0, 0.0, "env", 0},
    Location{4.0, 0.0, "env", 1},
    Location{0.0, 4.0, "env", 2},
};

const std::vector<std::vector<double>> kTriangleRows = {
    {0.9, 0.1, 0.1},
    {0.1, 0.9, 0.1},
    {0.1, 0.1, 0.9},
};

}  // namespace

TEST_CASE("a memorized fingerprint localizes to its own grid point") {
    RadioMap map = make_map(kTriangleRows, kTriangle);
    EngineConfig config;

    LocalizationEstimate est = knn_localize(map, query({0.1, 0.9, 0.1}), config);
    REQUIRE(est.matched_grid_index.has_value());
    CHECK(*est.matched_grid_index == 1);
    CHECK(est.x == 4.0);
    CHECK(est.y == 0.0);
    CHECK(est.score == 0.0);
}

TEST_CASE("k=1 picks the candidate an exhaustive scan picks") {
    RadioMap map = make_map(kTriangleRows, kTriangle);
    EngineConfig config;

    // Nudged toward the first fingerprint by construction.
    LocalizationEstimate est = knn_localize(map, query({0.8, 0.2, 0.15}), config);
    REQUIRE(est.matched_grid_index.has_value());
    CHECK(*est.matched_grid_index == 0);
    CHECK(est.x == 0.0);
    CHECK(est.y == 0.0);
}

TEST_CASE("k=3 returns the unweighted centroid of all three locations") {
    RadioMap map = make_map(kTriangleRows, kTriangle);
    EngineConfig config;
    config.k = 3;

    LocalizationEstimate est = knn_localize(map, query({0.8, 0.2, 0.15}), config);
    CHECK_FALSE(est.matched_grid_index.has_value());
    CHECK(est.x == Catch::Approx(4.0 / 3.0));
    CHECK(est.y == Catch::Approx(4.0 / 3.0));
}

TEST_CASE("distance ties break toward the lowest grid index") {
    // Two fingerprints equidistant from the query on purpose.
    RadioMap map = make_map({{0.4, 0.6}, {0.6, 0.4}},
                            {Location{0.0, 0.0, "env", 3}, Location{5.0, 5.0, "env", 1}});
    EngineConfig config;

    LocalizationEstimate est = knn_localize(map, query({0.5, 0.5}), config);
    REQUIRE(est.matched_grid_index.has_value());
    CHECK(*est.matched_grid_index == 1);
}

TEST_CASE("correlation metric ranks by shape, not by level") {
    // The query equals the second fingerprint plus a large constant offset.
    // Euclidean prefers the first (closer in absolute level); correlation
    // recovers the second.
    RadioMap map = make_map({{0.5, 0.5, 0.52}, {0.1, 0.3, 0.2}},
                            {Location{0.0, 0.0, "env", 0}, Location{6.0, 0.0, "env", 1}});
    Fingerprint q = query({0.6, 0.8, 0.7});

    EngineConfig euclid;
    EngineConfig corr;
    corr.metric = Metric::Correlation;

    CHECK(*knn_localize(map, q, euclid).matched_grid_index == 0);
    CHECK(*knn_localize(map, q, corr).matched_grid_index == 1);
}

TEST_CASE("rank_neighbors orders every candidate best-first") {
    RadioMap map = make_map(kTriangleRows, kTriangle);
    Fingerprint q = query({0.85, 0.12, 0.11});

    auto ranked = rank_neighbors(map, std::span<const double>(q.values), Metric::Euclidean);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].fingerprint_index == 0);
    for (std::size_t i = 1; i < ranked.size(); ++i)
        CHECK(ranked[i - 1].key <= ranked[i].key);
}

TEST_CASE("self-test over the whole map gives a perfect classification rate") {
    std::vector<std::vector<double>> rows;
    std::vector<Location> locations;
    for (int i = 0; i < 12; ++i) {
        rows.push_back({0.05 * i, 1.0 - 0.05 * i, 0.5 + 0.02 * i});
        locations.push_back(Location{static_cast<double>(i), 0.0, "env", i});
    }
    RadioMap map = make_map(rows, locations);
    EngineConfig config;

    for (const auto& fp : map.fingerprints) {
        Fingerprint q;
        q.values = fp.values;
        LocalizationEstimate est = knn_localize(map, q, config);
        CHECK(*est.matched_grid_index == fp.location->grid_index);
    }
}

TEST_CASE("knn preconditions produce errors, not junk estimates") {
    RadioMap empty;
    empty.beacons.push_back(BeaconId{Technology::WiFi, 1, ""});
    EngineConfig config;
    CHECK_THROWS_AS(knn_localize(empty, query({0.5}), config), Error);

    RadioMap map = make_map(kTriangleRows, kTriangle);
    CHECK_THROWS_AS(knn_localize(map, query({0.5, 0.5}), config), Error);  // misaligned

    EngineConfig big_k;
    big_k.k = 4;
    CHECK_THROWS_AS(knn_localize(map, query({0.5, 0.5, 0.5}), big_k), Error);
}
