#include <algorithm>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "ambientloc/eval.hpp"

using namespace ambientloc;

namespace {

// Two tiny sessions over three line locations: one FM beacon that separates
// them plus one Wi-Fi beacon, so technology filters have something to do.
std::vector<RawScan> session(const std::vector<double>& fm_levels, const std::string& id) {
    std::vector<RawScan> scans;
    for (std::size_t i = 0; i < fm_levels.size(); ++i) {
        RawScan s;
        s.location = Location{static_cast<double>(i), 0.0, "env", static_cast<int>(i)};
        s.device_id = "dev";
        s.session_id = id;
        s.readings[BeaconId{Technology::FM, 98500, ""}] = {fm_levels[i], fm_levels[i] - 2.0};
        s.readings[BeaconId{Technology::WiFi, 1, ""}] = {-50.0 - 3.0 * i, -52.0 - 3.0 * i};
        scans.push_back(std::move(s));
    }
    return scans;
}

}  // namespace

TEST_CASE("error distance is the planar euclidean distance") {
    LocalizationEstimate est;
    est.x = 3.0;
    est.y = 0.0;
    est.environment_id = "env";
    Location truth{0.0, 4.0, "env", 0};
    CHECK(error_distance(est, truth) == 5.0);

    Location elsewhere{0.0, 4.0, "other-env", 0};
    CHECK_THROWS_AS(error_distance(est, elsewhere), Error);
}

TEST_CASE("stats on a known error list") {
    ErrorStats s = compute_stats({0.0, 0.0, 0.0, 0.0, 10.0});
    CHECK(s.n == 5);
    CHECK(s.classification_rate == 0.8);
    CHECK(s.median == 0.0);
    CHECK(s.p90 == 10.0);
    CHECK(s.p95 == 10.0);
}

TEST_CASE("nearest-rank percentiles on 1..100") {
    std::vector<double> errors;
    for (int i = 1; i <= 100; ++i)
        errors.push_back(static_cast<double>(i));
    ErrorStats s = compute_stats(errors);
    CHECK(s.median == 50.0);
    CHECK(s.p90 == 90.0);
    CHECK(s.p95 == 95.0);
    CHECK(s.classification_rate == 0.0);
}

TEST_CASE("percentile oracle: smallest index covering p of the mass") {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> dist(0.0, 30.0);
    std::vector<double> sorted;
    for (int i = 0; i < 37; ++i)
        sorted.push_back(dist(gen));
    std::sort(sorted.begin(), sorted.end());

    for (double p : {0.1, 0.5, 0.9, 0.95, 1.0}) {
        double v = percentile_nearest_rank(sorted, p);
        // Counting definition: v is the smallest list value with at least
        // ceil(p n) values at or below it.
        std::size_t need = static_cast<std::size_t>(
            std::ceil(p * static_cast<double>(sorted.size())));
        std::size_t at_or_below = 0;
        for (double e : sorted)
            if (e <= v)
                ++at_or_below;
        CHECK(at_or_below >= need);
        if (need > 0) {
            std::size_t below = 0;
            for (double e : sorted)
                if (e < v)
                    ++below;
            CHECK(below < need);
        }
    }
}

TEST_CASE("stats are invariant to the order of the error list") {
    std::vector<double> errors = {3.0, 0.0, 7.5, 1.2, 0.0, 9.9, 2.2};
    std::vector<double> shuffled = errors;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(5));

    ErrorStats a = compute_stats(errors);
    ErrorStats b = compute_stats(shuffled);
    CHECK(a.classification_rate == b.classification_rate);
    CHECK(a.median == b.median);
    CHECK(a.p90 == b.p90);
    CHECK(a.p95 == b.p95);
    CHECK(a.cdf == b.cdf);
}

TEST_CASE("the cdf steps through unique errors and ends at one") {
    ErrorStats s = compute_stats({1.0, 1.0, 2.0, 5.0});
    REQUIRE(s.cdf.size() == 3);
    CHECK(s.cdf[0] == std::pair{1.0, 0.5});
    CHECK(s.cdf[1] == std::pair{2.0, 0.75});
    CHECK(s.cdf[2] == std::pair{5.0, 1.0});
}

TEST_CASE("snap rate counts estimates within the radius") {
    ErrorStats s = compute_stats({0.0, 0.3, 0.6, 2.0}, 0.5);
    REQUIRE(s.snap_rate.has_value());
    CHECK(*s.snap_rate == 0.5);

    ErrorStats plain = compute_stats({0.0, 0.3});
    CHECK_FALSE(plain.snap_rate.has_value());
}

TEST_CASE("empty error lists are rejected") {
    CHECK_THROWS_AS(compute_stats({}), Error);
}

TEST_CASE("train equals test gives a perfect classification rate") {
    auto scans = session({-60.0, -70.0, -80.0}, "s1");
    ExperimentConfig config;
    ExperimentResult result = run_experiment(scans, scans, config);

    CHECK(result.stats.n == 3);
    CHECK(result.stats.classification_rate == 1.0);
    CHECK(result.stats.median == 0.0);
    CHECK(result.beacons.size() == 2);
    REQUIRE(result.records.size() == 3);
    for (const auto& r : result.records)
        CHECK(r.error_m == 0.0);
}

TEST_CASE("technology filter restricts the beacon set") {
    auto train = session({-60.0, -70.0, -80.0}, "s1");
    auto test = session({-61.0, -71.0, -81.0}, "s2");

    ExperimentConfig fm_only;
    fm_only.technologies = {Technology::FM};
    ExperimentResult result = run_experiment(train, test, fm_only);
    REQUIRE(result.beacons.size() == 1);
    CHECK(result.beacons[0].technology == Technology::FM);

    ExperimentConfig wifi_only;
    wifi_only.technologies = {Technology::WiFi};
    ExperimentResult wifi_result = run_experiment(train, test, wifi_only);
    REQUIRE(wifi_result.beacons.size() == 1);
    CHECK(wifi_result.beacons[0].technology == Technology::WiFi);
}

TEST_CASE("normalization fits on the training session only") {
    // The test session swings wider than the training one on purpose; its
    // values must clamp, never widen the fitted range.
    auto train = session({-60.0, -70.0, -80.0}, "s1");
    auto test = session({-40.0, -70.0, -100.0}, "s2");

    ExperimentConfig config;
    ExperimentResult result = run_experiment(train, test, config);

    const TechRange& r = result.train_map.norm.range(Technology::FM);
    CHECK(r.min_dbm == -82.0);  // train extremes, -80 level and -2 spread
    CHECK(r.max_dbm == -60.0);
    for (const auto& fp : result.test_map.fingerprints)
        for (double v : fp.values)
            CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("subset projection narrows the experiment to chosen beacons") {
    auto train = session({-60.0, -70.0, -80.0}, "s1");
    auto test = session({-62.0, -72.0, -82.0}, "s2");

    ExperimentConfig config;
    config.subset = std::vector<BeaconId>{BeaconId{Technology::FM, 98500, ""}};
    ExperimentResult result = run_experiment(train, test, config);
    REQUIRE(result.beacons.size() == 1);
    CHECK(result.beacons[0].channel == 98500);
    CHECK(result.train_map.beacons.size() == 1);
}

TEST_CASE("disjoint sessions cannot be evaluated") {
    auto train = session({-60.0, -70.0, -80.0}, "s1");
    std::vector<RawScan> test;
    for (RawScan s : session({-60.0, -70.0, -80.0}, "s2")) {
        RawScan gsm_only = s;
        gsm_only.readings.clear();
        gsm_only.readings[BeaconId{Technology::GSM, 1001, ""}] = {-80.0, -81.0};
        test.push_back(std::move(gsm_only));
    }
    ExperimentConfig config;
    CHECK_THROWS_AS(run_experiment(train, test, config), Error);
}

TEST_CASE("ratio and correlation methods are knn-only") {
    auto scans = session({-60.0, -70.0, -80.0}, "s1");
    ExperimentConfig config;
    config.engine.engine = EngineKind::SVM;
    config.engine.transform = FingerprintTransform::Ratio;
    CHECK_THROWS_AS(run_experiment(scans, scans, config), Error);
}

TEST_CASE("the svm and gp engines run the same pipeline") {
    auto train = session({-60.0, -70.0, -80.0}, "s1");
    auto test = session({-61.0, -71.0, -81.0}, "s2");

    ExperimentConfig svm_config;
    svm_config.engine.engine = EngineKind::SVM;
    ExperimentResult svm_result = run_experiment(train, test, svm_config);
    CHECK(svm_result.stats.n == 3);

    ExperimentConfig gp_config;
    gp_config.engine.engine = EngineKind::GP;
    gp_config.snap_radius = 0.5;
    ExperimentResult gp_result = run_experiment(train, test, gp_config);
    CHECK(gp_result.stats.n == 3);
    CHECK(gp_result.stats.snap_rate.has_value());
}
