#pragma once

#include <string>

#include "ambientloc/error.hpp"

namespace ambientloc {

/// Duty-cycle battery model: constant idle power plus a fixed energy charge per
/// scan gives 1/L = 1/L0 + k/T for life L at scan interval T.
struct PowerModel {
    std::string technology;
    double baseline_life_h = 0.0;  // all radios off
    double scan_cost = 0.0;        // k, battery-fraction-hours per scan second

    void validate() const {
        require(baseline_life_h > 0.0, "power model: baseline life must be > 0");
        require(scan_cost >= 0.0, "power model: scan cost must be >= 0");
    }
};

inline double predict_life(const PowerModel& model, double scan_interval_s) {
    model.validate();
    require(scan_interval_s > 0.0, "predict_life: scan interval must be > 0");
    return 1.0 / (1.0 / model.baseline_life_h + model.scan_cost / scan_interval_s);
}

/// Exact single-point fit: k = T * (1/L - 1/L0).
inline PowerModel fit_scan_cost(double baseline_life_h, double interval_s, double life_h,
                                const std::string& technology = "") {
    require(baseline_life_h > 0.0, "fit_scan_cost: baseline life must be > 0");
    require(interval_s > 0.0, "fit_scan_cost: interval must be > 0");
    require(life_h > 0.0, "fit_scan_cost: observed life must be > 0");
    require(life_h < baseline_life_h,
            "fit_scan_cost: observed life must be below the baseline (scanning costs energy)");
    PowerModel model;
    model.technology = technology;
    model.baseline_life_h = baseline_life_h;
    model.scan_cost = interval_s * (1.0 / life_h - 1.0 / baseline_life_h);
    return model;
}

/// Scale the per-scan cost linearly with the number of beacons scanned; the FM
/// receiver tunes each monitored station in turn, so scan energy grows with
/// the station count.
inline PowerModel with_beacon_count(const PowerModel& model, int fitted_beacons,
                                    int target_beacons) {
    model.validate();
    require(fitted_beacons >= 1 && target_beacons >= 1,
            "with_beacon_count: beacon counts must be >= 1");
    PowerModel scaled = model;
    scaled.scan_cost = model.scan_cost * static_cast<double>(target_beacons) /
                       static_cast<double>(fitted_beacons);
    return scaled;
}

/// Measured operating points from the reference handset: a 1.3 h (3%) drop
/// off the baseline pins L0 at 43.3 h; Wi-Fi scanning measured 7.4 h at a
/// 10 s interval; FM scanning of 3 stations measured 27.9 h at a 1 s interval.
inline constexpr double kBaselineLifeHours = 43.3;

inline PowerModel wifi_power_model() {
    return fit_scan_cost(kBaselineLifeHours, 10.0, 7.4, "wifi");
}

inline PowerModel fm_power_model(int beacons = 3) {
    return with_beacon_count(fit_scan_cost(kBaselineLifeHours, 1.0, 27.9, "fm"), 3, beacons);
}

}
