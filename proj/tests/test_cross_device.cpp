#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "ambientloc/cross_device.hpp"

using namespace ambientloc;

namespace {

RadioMap make_map(const std::vector<std::vector<double>>& rows,
                  const std::vector<Location>& locations) {
    RadioMap map;
    map.environment_id = "env";
    for (std::size_t i = 0; i < rows.front().size(); ++i)
        map.beacons.push_back(BeaconId{Technology::FM, static_cast<std::int64_t>(87500 + i), ""});
    map.norm.ranges[Technology::FM] = TechRange{-100.0, -20.0};
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

Fingerprint affine(const Fingerprint& f, double a, double b) {
    Fingerprint out = f;
    for (double& v : out.values)
        v = a * v + b;
    return out;
}

// Five well-spread fingerprints so rankings have room to move.
const std::vector<std::vector<double>> kRows = {
    {0.82, 0.10, 0.33, 0.51}, {0.12, 0.88, 0.45, 0.27}, {0.40, 0.41, 0.90, 0.08},
    {0.65, 0.30, 0.12, 0.76}, {0.25, 0.55, 0.60, 0.44},
};

const std::vector<Location> kLocations = {
    Location{0.0, 0.0, "env", 0}, Location{3.0, 0.0, "env", 1}, Location{6.0, 0.0, "env", 2},
    Location{0.0, 3.0, "env", 3}, Location{3.0, 3.0, "env", 4},
};

}  // namespace

TEST_CASE("correlation method is invariant under gain and offset") {
    RadioMap map = make_map(kRows, kLocations);
    EngineConfig config;

    for (const auto& base : kRows) {
        Fingerprint q = query(base);
        // Perturb slightly off the stored fingerprint, then distort.
        q.values[0] += 0.03;
        q.values[2] -= 0.02;
        LocalizationEstimate clean =
            cross_device_localize(map, q, FingerprintTransform::Correlation, config);
        for (auto [a, b] : {std::pair{1.1, 0.3}, std::pair{0.7, -0.2}, std::pair{2.5, 1.0}}) {
            LocalizationEstimate warped = cross_device_localize(
                map, affine(q, a, b), FingerprintTransform::Correlation, config);
            CHECK(*warped.matched_grid_index == *clean.matched_grid_index);
            CHECK(warped.x == clean.x);
            CHECK(warped.y == clean.y);
        }
    }
}

TEST_CASE("ratio method cancels a pure gain in the epsilon to zero limit") {
    RadioMap map = make_map(kRows, kLocations);
    EngineConfig config;
    config.ratio_epsilon = 1e-9;

    Fingerprint q = query({0.35, 0.42, 0.81, 0.15});
    LocalizationEstimate clean =
        cross_device_localize(map, q, FingerprintTransform::Ratio, config);

    for (double gain : {0.5, 1.3, 4.0}) {
        LocalizationEstimate scaled = cross_device_localize(
            map, affine(q, gain, 0.0), FingerprintTransform::Ratio, config);
        CHECK(*scaled.matched_grid_index == *clean.matched_grid_index);
    }
}

TEST_CASE("ratio distances themselves are stable under a pure gain") {
    // Stronger than rank stability: with b = 0 each pairwise ratio
    // (a f_i + eps)/(a f_j + eps) tends to f_i/f_j as eps goes to 0, so the
    // whole distance profile matches the unscaled one.
    RadioMap map = make_map(kRows, kLocations);
    RadioMap ratio_map = make_ratio_map(map, 1e-9);

    Fingerprint q = query({0.35, 0.42, 0.81, 0.15});
    Fingerprint rq = ratio_transform(q, 1e-9);
    Fingerprint rq_scaled = ratio_transform(affine(q, 2.0, 0.0), 1e-9);

    for (const auto& fp : ratio_map.fingerprints) {
        double d = euclidean_distance(fp, rq);
        double ds = euclidean_distance(fp, rq_scaled);
        CHECK(ds == Catch::Approx(d).margin(1e-6));
    }
}

TEST_CASE("an offset changes the basic nearest neighbor but not correlation's") {
    // Three-point map built so a +0.2 offset drags the query toward the
    // flat fingerprint under Euclidean distance while the shape still
    // matches the first one.
    RadioMap map = make_map({{0.10, 0.30, 0.20}, {0.40, 0.40, 0.40}, {0.90, 0.60, 0.75}},
                            {Location{0.0, 0.0, "env", 0}, Location{5.0, 0.0, "env", 1},
                             Location{0.0, 5.0, "env", 2}});
    EngineConfig config;

    Fingerprint q = query({0.11, 0.31, 0.21});
    Fingerprint shifted = affine(q, 1.0, 0.2);

    CHECK(*cross_device_localize(map, q, FingerprintTransform::Basic, config)
               .matched_grid_index == 0);
    CHECK(*cross_device_localize(map, shifted, FingerprintTransform::Basic, config)
               .matched_grid_index == 1);
    CHECK(*cross_device_localize(map, q, FingerprintTransform::Correlation, config)
               .matched_grid_index == 0);
    CHECK(*cross_device_localize(map, shifted, FingerprintTransform::Correlation, config)
               .matched_grid_index == 0);
}

TEST_CASE("ratio map has n(n-1)/2 synthetic slots and transformed rows") {
    RadioMap map = make_map(kRows, kLocations);
    RadioMap ratio_map = make_ratio_map(map, 1e-6);

    CHECK(ratio_map.beacons.size() == 6);  // 4 beacons -> 6 pairs
    for (std::size_t i = 0; i < ratio_map.fingerprints.size(); ++i) {
        REQUIRE(ratio_map.fingerprints[i].values.size() == 6);
        CHECK(ratio_map.fingerprints[i].location->grid_index ==
              map.fingerprints[i].location->grid_index);
    }
}

TEST_CASE("basic method is plain euclidean knn") {
    RadioMap map = make_map(kRows, kLocations);
    EngineConfig config;

    Fingerprint q = query({0.80, 0.12, 0.35, 0.50});
    LocalizationEstimate via_cross =
        cross_device_localize(map, q, FingerprintTransform::Basic, config);
    EngineConfig knn_config;
    knn_config.metric = Metric::Euclidean;
    LocalizationEstimate direct = knn_localize(map, q, knn_config);

    CHECK(*via_cross.matched_grid_index == *direct.matched_grid_index);
    CHECK(via_cross.score == direct.score);
}
