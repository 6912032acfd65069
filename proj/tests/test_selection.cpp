#include <algorithm>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "ambientloc/rng.hpp"
#include "ambientloc/selection.hpp"

using namespace ambientloc;

namespace {

RadioMap make_map(const std::vector<std::vector<double>>& rows,
                  const std::vector<Location>& locations) {
    RadioMap map;
    map.environment_id = "env";
    for (std::size_t i = 0; i < rows.front().size(); ++i)
        map.beacons.push_back(BeaconId{Technology::FM, static_cast<std::int64_t>(i + 1), ""});
    map.norm.ranges[Technology::FM] = TechRange{-100.0, -20.0};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Fingerprint fp;
        fp.values = rows[i];
        fp.location = locations[i];
        map.fingerprints.push_back(fp);
    }
    return map;
}

std::vector<Location> line_locations(int count) {
    std::vector<Location> out;
    for (int i = 0; i < count; ++i)
        out.push_back(Location{static_cast<double>(i), 0.0, "env", i});
    return out;
}

// Six locations on a 1 m line. Beacon 1 identifies every location cleanly,
// beacon 2 is constant (useless), beacon 3 aliases distant locations.
RadioMap selection_train() {
    return make_map({{0.05, 0.50, 0.52},
                     {0.15, 0.50, 0.48},
                     {0.25, 0.50, 0.55},
                     {0.35, 0.50, 0.45},
                     {0.45, 0.50, 0.58},
                     {0.55, 0.50, 0.42}},
                    line_locations(6));
}

// A later session: beacon 1 wobbles a little, beacon 3 no longer agrees.
RadioMap selection_test() {
    return make_map({{0.06, 0.50, 0.44},
                     {0.14, 0.50, 0.57},
                     {0.26, 0.50, 0.41},
                     {0.34, 0.50, 0.59},
                     {0.46, 0.50, 0.47},
                     {0.54, 0.50, 0.51}},
                    line_locations(6));
}

}  // namespace

TEST_CASE("strongest and weakest rank beacons by mean normalized signal") {
    // One location with slot means 0.9, 0.5, 0.1.
    RadioMap map = make_map({{0.9, 0.5, 0.1}}, line_locations(1));

    auto top1 = select_strongest(map, 1);
    REQUIRE(top1.size() == 1);
    CHECK(top1[0].channel == 1);

    auto bottom1 = select_weakest(map, 1);
    REQUIRE(bottom1.size() == 1);
    CHECK(bottom1[0].channel == 3);

    auto top2 = select_strongest(map, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].channel == 1);
    CHECK(top2[1].channel == 2);

    auto bottom2 = select_weakest(map, 2);
    REQUIRE(bottom2.size() == 2);
    CHECK(bottom2[0].channel == 2);
    CHECK(bottom2[1].channel == 3);
}

TEST_CASE("selecting every beacon returns the whole index") {
    RadioMap map = selection_train();
    CHECK(select_strongest(map, 3) == map.beacons);
    CHECK(select_weakest(map, 3) == map.beacons);
}

TEST_CASE("equal means fall back to the lowest channel") {
    // Slots 2 and 3 both average exactly 0.5 (values chosen to be exact
    // in binary); slot 1 averages 0.25.
    RadioMap map = make_map({{0.25, 0.5, 0.75}, {0.25, 0.5, 0.25}},
                            line_locations(2));
    auto top1 = select_strongest(map, 1);
    REQUIRE(top1.size() == 1);
    CHECK(top1[0].channel == 2);
}

TEST_CASE("mean-signal selection bounds are enforced") {
    RadioMap map = selection_train();
    CHECK_THROWS_AS(select_strongest(map, 0), Error);
    CHECK_THROWS_AS(select_strongest(map, 4), Error);
}

TEST_CASE("projected median error reproduces hand-computed values") {
    RadioMap train = selection_train();
    RadioMap test = selection_test();
    EngineConfig config;

    // Beacon 1 alone: every test point sits 0.01 from its own calibration
    // value and at least 0.09 from any other, so the median error is zero.
    CHECK(detail::projected_median_error(train, test, {train.beacons[0]}, config) == 0.0);

    // Beacon 2 alone: all candidates tie, the tie-break sends everything to
    // grid 0, and the errors are 0..5 m; the nearest-rank median is 2.
    CHECK(detail::projected_median_error(train, test, {train.beacons[1]}, config) == 2.0);

    // Beacon 3 alone: aliased locations scatter the matches; median 3 m.
    CHECK(detail::projected_median_error(train, test, {train.beacons[2]}, config) == 3.0);
}

TEST_CASE("a single-trial study equals a manual projection run") {
    RadioMap train = selection_train();
    RadioMap test = selection_test();
    EngineConfig config;
    const std::uint64_t seed = 9;

    SubsetStudyResult study = random_subset_study(train, test, 2, 1, seed, config);
    REQUIRE(study.median_errors.size() == 1);

    // Redraw the same trial by hand and score it independently.
    Rng rng(derive_seed(seed, "subset-trial", 0));
    auto pick = rng.sample_without_replacement(train.beacons.size(), 2);
    std::vector<BeaconId> chosen;
    for (std::size_t idx : pick)
        chosen.push_back(train.beacons[idx]);
    std::sort(chosen.begin(), chosen.end());

    CHECK(study.median_errors[0] ==
          detail::projected_median_error(train, test, chosen, config));
    CHECK(study.mean_of_medians == study.median_errors[0]);
    CHECK(study.min_of_medians == study.median_errors[0]);
    CHECK(study.max_of_medians == study.median_errors[0]);
}

TEST_CASE("a full-width study has no randomness left") {
    RadioMap train = selection_train();
    RadioMap test = selection_test();
    EngineConfig config;

    SubsetStudyResult study = random_subset_study(train, test, 3, 20, 1, config);
    double full = detail::projected_median_error(train, test, train.beacons, config);
    for (double m : study.median_errors)
        CHECK(m == full);
    CHECK(study.min_of_medians == full);
    CHECK(study.max_of_medians == full);
}

TEST_CASE("the study is deterministic for a fixed seed") {
    RadioMap train = selection_train();
    RadioMap test = selection_test();

    SubsetStudyResult a = random_subset_study(train, test, 2, 40, 123);
    SubsetStudyResult b = random_subset_study(train, test, 2, 40, 123);
    CHECK(a.median_errors == b.median_errors);

    SubsetStudyResult c = random_subset_study(train, test, 2, 40, 124);
    CHECK(a.median_errors != c.median_errors);
}

TEST_CASE("study aggregates bound the per-trial medians") {
    RadioMap train = selection_train();
    RadioMap test = selection_test();

    SubsetStudyResult study = random_subset_study(train, test, 1, 60, 7);
    CHECK(study.min_of_medians <= study.mean_of_medians);
    CHECK(study.mean_of_medians <= study.max_of_medians);
    for (double m : study.median_errors) {
        CHECK(m >= study.min_of_medians);
        CHECK(m <= study.max_of_medians);
    }
}

TEST_CASE("greedy selection grabs the informative beacon first") {
    RadioMap train = selection_train();
    RadioMap test = selection_test();

    auto picked = greedy_select(train, test, 1);
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].channel == 1);
}

TEST_CASE("greedy ties advance the earliest candidate") {
    RadioMap train = selection_train();
    RadioMap test = selection_test();

    // After beacon 1 the median is already zero, so both remaining beacons
    // tie; the scan order keeps the lower channel.
    auto picked = greedy_select(train, test, 2);
    REQUIRE(picked.size() == 2);
    CHECK(picked[0].channel == 1);
    CHECK(picked[1].channel == 2);
}

TEST_CASE("greedy over the full width returns every common beacon") {
    RadioMap train = selection_train();
    RadioMap test = selection_test();

    auto picked = greedy_select(train, test, 3);
    CHECK(picked == train.beacons);
}

TEST_CASE("a chosen subset beats the random average") {
    RadioMap train = selection_train();
    RadioMap test = selection_test();

    SubsetStudyResult random1 = random_subset_study(train, test, 1, 60, 5);
    auto picked = greedy_select(train, test, 1);
    EngineConfig config;
    double greedy_err = detail::projected_median_error(train, test, picked, config);

    CHECK(greedy_err <= random1.mean_of_medians);
    CHECK(greedy_err == random1.min_of_medians);  // the best single beacon
}

TEST_CASE("selection preconditions") {
    RadioMap train = selection_train();
    RadioMap test = selection_test();
    CHECK_THROWS_AS(random_subset_study(train, test, 0, 10, 1), Error);
    CHECK_THROWS_AS(random_subset_study(train, test, 4, 10, 1), Error);
    CHECK_THROWS_AS(random_subset_study(train, test, 2, 0, 1), Error);
    CHECK_THROWS_AS(greedy_select(train, test, 9), Error);
}
