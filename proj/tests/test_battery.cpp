#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "ambientloc/battery.hpp"

using namespace ambientloc;

TEST_CASE("zero scan cost means the baseline life at every interval") {
    PowerModel idle;
    idle.baseline_life_h = 43.3;
    idle.scan_cost = 0.0;
    for (double t : {0.5, 1.0, 10.0, 60.0, 3600.0})
        CHECK(predict_life(idle, t) == Catch::Approx(43.3));
}

TEST_CASE("the wifi operating point predicts the published twenty-second life") {
    PowerModel wifi = wifi_power_model();
    CHECK(predict_life(wifi, 20.0) == Catch::Approx(12.6).margin(0.2));
    // The fit point itself returns exactly.
    CHECK(predict_life(wifi, 10.0) == Catch::Approx(7.4).epsilon(1e-12));
}

TEST_CASE("the fm operating point stays near the baseline at ten seconds") {
    PowerModel fm = fm_power_model();
    CHECK(predict_life(fm, 10.0) == Catch::Approx(42.0).margin(1.5));
    CHECK(predict_life(fm, 1.0) == Catch::Approx(27.9).epsilon(1e-12));
}

TEST_CASE("a single-point fit reproduces its inputs exactly") {
    for (double life : {5.0, 12.5, 30.0}) {
        PowerModel m = fit_scan_cost(43.3, 7.0, life);
        CHECK(predict_life(m, 7.0) == Catch::Approx(life).epsilon(1e-12));
    }
}

TEST_CASE("battery life grows with the scan interval toward the baseline") {
    PowerModel wifi = wifi_power_model();
    double prev = 0.0;
    for (double t = 1.0; t <= 600.0; t *= 2.0) {
        double life = predict_life(wifi, t);
        CHECK(life > prev);
        CHECK(life < wifi.baseline_life_h);
        prev = life;
    }
    // At absurdly long intervals the cost per scan vanishes.
    CHECK(predict_life(wifi, 1e9) == Catch::Approx(wifi.baseline_life_h).margin(1e-3));
}

TEST_CASE("scan cost scales linearly with the station count") {
    PowerModel three = fm_power_model(3);
    PowerModel six = fm_power_model(6);
    PowerModel one = fm_power_model(1);
    CHECK(six.scan_cost == Catch::Approx(2.0 * three.scan_cost));
    CHECK(one.scan_cost == Catch::Approx(three.scan_cost / 3.0));

    // More stations per scan always shortens the life at a fixed interval.
    CHECK(predict_life(six, 10.0) < predict_life(three, 10.0));
    CHECK(predict_life(one, 10.0) > predict_life(three, 10.0));
}

TEST_CASE("scanning only ever costs battery") {
    PowerModel wifi = wifi_power_model();
    for (double t : {1.0, 5.0, 30.0})
        CHECK(predict_life(wifi, t) < wifi.baseline_life_h);
}

TEST_CASE("fit and prediction preconditions") {
    CHECK_THROWS_AS(fit_scan_cost(0.0, 10.0, 5.0), Error);
    CHECK_THROWS_AS(fit_scan_cost(43.3, 0.0, 5.0), Error);
    CHECK_THROWS_AS(fit_scan_cost(43.3, 10.0, 0.0), Error);
    // Observed life at or above the baseline contradicts the model.
    CHECK_THROWS_AS(fit_scan_cost(43.3, 10.0, 43.3), Error);
    CHECK_THROWS_AS(fit_scan_cost(43.3, 10.0, 50.0), Error);

    PowerModel wifi = wifi_power_model();
    CHECK_THROWS_AS(predict_life(wifi, 0.0), Error);
    CHECK_THROWS_AS(with_beacon_count(wifi, 0, 3), Error);
}
