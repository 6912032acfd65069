#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "ambientloc/rng.hpp"
#include "ambientloc/types.hpp"
#include "ambientloc/util.hpp"

namespace ambientloc {

/// A fixed transmitter in the simulated world. Position may be far outside the
/// environment bounds (FM towers sit kilometers away).
struct SimBeacon {
    BeaconId id;
    double x = 0.0;
    double y = 0.0;
    double tx_power_dbm = 0.0;  // received power at the 1 m reference distance
    double wavelength_m = 3.0;
    int multipath_components = 32;
    double rician_k = 0.0;  // linear LOS-to-scatter power ratio; 0 = Rayleigh
};

/// Linear RSSI distortion of one receiver: observed = gain * true + offset + noise.
struct DeviceProfile {
    std::string device_id = "ref";
    double gain = 1.0;
    double offset_db = 0.0;
    double noise_sigma_db = 0.0;

    void validate() const {
        require(gain > 0.0, "device profile: gain must be positive");
        require(noise_sigma_db >= 0.0, "device profile: noise sigma must be >= 0");
    }
};

struct Environment {
    std::string environment_id = "env";
    double width = 10.0;
    double height = 10.0;
    std::vector<SimBeacon> beacons;
    std::uint64_t seed = 0;  // world seed: all fields derive from it

    // Propagation knobs. Shadowing applies per beacon; the shared field models
    // the building's bulk attenuation pattern and hits only distant
    // infrastructure (FM, GSM), which all arrives through the same walls.
    double shadowing_sigma_db = 4.0;
    double shared_shadowing_sigma_db = 4.0;
    double shadowing_correlation_m = 5.0;

    // Receiver-side effects applied during dataset generation.
    double measurement_sigma_db = 1.0;
    double session_power_sigma_db = 0.5;  // per-beacon drift between sessions
    // Between-session position uncertainty when revisiting a calibration point.
    // Fading decorrelates with J0(2 pi jitter / lambda), so the same jitter
    // barely touches FM (lambda ~ 3 m) while fully re-rolling Wi-Fi (0.12 m).
    double session_jitter_m = 0.2;
    std::map<Technology, double> sensitivity_dbm;  // readings below are censored
    bool quantize_rssi = false;                    // optional 1 dB reporting grid

    void validate() const {
        require(width > 0.0 && height > 0.0, "environment: non-positive dimensions");
        require(shadowing_sigma_db >= 0.0 && shared_shadowing_sigma_db >= 0.0,
                "environment: negative shadowing sigma");
        require(shadowing_correlation_m > 0.0, "environment: correlation distance must be > 0");
        for (const SimBeacon& b : beacons) {
            require(b.wavelength_m > 0.0, "environment: beacon wavelength must be > 0");
            require(b.multipath_components >= 1,
                    "environment: beacon needs at least one multipath component");
            require(b.rician_k >= 0.0, "environment: rician k must be >= 0");
        }
    }

    double sensitivity_or(Technology tech, double fallback) const {
        auto it = sensitivity_dbm.find(tech);
        return it == sensitivity_dbm.end() ? fallback : it->second;
    }
};

/// Free-space propagation loss relative to a reference distance.
inline double path_loss_db(double distance_m, double reference_m) {
    require(distance_m > 0.0, "path_loss_db: non-positive distance");
    require(reference_m > 0.0, "path_loss_db: non-positive reference distance");
    return 20.0 * std::log10(distance_m / reference_m);
}

namespace detail {

/// A frozen sum-of-plane-waves scatter field (Clarke/Jakes construction).
/// The normalized complex sum has unit mean power and spatial autocorrelation
/// J0(2 pi d / lambda) under uniform arrival angles.
struct PlaneWaveSet {
    double wavenumber = 0.0;  // 2 pi / lambda
    std::vector<double> dir_x;
    std::vector<double> dir_y;
    std::vector<double> phase;
    double los_phase = 0.0;
};

inline PlaneWaveSet make_plane_waves(std::uint64_t seed, int components, double wavelength) {
    require(components >= 1, "fading: need at least one multipath component");
    require(wavelength > 0.0, "fading: wavelength must be positive");
    PlaneWaveSet set;
    set.wavenumber = 2.0 * std::numbers::pi / wavelength;
    set.dir_x.resize(static_cast<std::size_t>(components));
    set.dir_y.resize(static_cast<std::size_t>(components));
    set.phase.resize(static_cast<std::size_t>(components));
    Rng rng(seed);
    for (int n = 0; n < components; ++n) {
        double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        set.dir_x[static_cast<std::size_t>(n)] = std::cos(theta);
        set.dir_y[static_cast<std::size_t>(n)] = std::sin(theta);
        set.phase[static_cast<std::size_t>(n)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    set.los_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return set;
}

inline std::complex<double> scatter_sum(const PlaneWaveSet& set, double x, double y) {
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < set.dir_x.size(); ++n) {
        double arg = set.wavenumber * (set.dir_x[n] * x + set.dir_y[n] * y) + set.phase[n];
        re += std::cos(arg);
        im += std::sin(arg);
    }
    double scale = 1.0 / std::sqrt(static_cast<double>(set.dir_x.size()));
    return {re * scale, im * scale};
}

/// Spatially correlated Gaussian field via random Fourier features of the
/// squared-exponential covariance; sigma^2 * exp(-d^2 / (2 l^2)) in expectation.
struct ShadowField {
    double sigma = 0.0;
    std::vector<double> wx;
    std::vector<double> wy;
    std::vector<double> phase;

    double value(double x, double y) const {
        if (sigma == 0.0 || wx.empty())
            return 0.0;
        double acc = 0.0;
        for (std::size_t m = 0; m < wx.size(); ++m)
            acc += std::cos(wx[m] * x + wy[m] * y + phase[m]);
        return sigma * std::sqrt(2.0 / static_cast<double>(wx.size())) * acc;
    }
};

inline ShadowField make_shadow_field(std::uint64_t seed, int features, double sigma,
                                     double correlation_m) {
    ShadowField field;
    field.sigma = sigma;
    field.wx.resize(static_cast<std::size_t>(features));
    field.wy.resize(static_cast<std::size_t>(features));
    field.phase.resize(static_cast<std::size_t>(features));
    Rng rng(seed);
    for (int m = 0; m < features; ++m) {
        field.wx[static_cast<std::size_t>(m)] = rng.normal() / correlation_m;
        field.wy[static_cast<std::size_t>(m)] = rng.normal() / correlation_m;
        field.phase[static_cast<std::size_t>(m)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return field;
}

inline std::uint64_t beacon_key_a(const SimBeacon& b) {
    return static_cast<std::uint64_t>(b.id.technology);
}

inline std::uint64_t beacon_key_b(const SimBeacon& b) {
    return static_cast<std::uint64_t>(b.id.channel);
}

/// Rician mix of a line-of-sight ray (range-dependent phase) and the scatter
/// field. A non-null fresh set blends in session-specific scatter with
/// correlation rho against the persistent field.
inline std::complex<double> gain_from_sets(const PlaneWaveSet& persistent,
                                           const PlaneWaveSet* fresh, double rho,
                                           const SimBeacon& beacon, double x, double y) {
    std::complex<double> scatter = scatter_sum(persistent, x, y);
    if (fresh != nullptr && rho < 1.0)
        scatter = rho * scatter +
                  std::sqrt(std::max(0.0, 1.0 - rho * rho)) * scatter_sum(*fresh, x, y);
    double k1 = beacon.rician_k + 1.0;
    double dist = std::hypot(x - beacon.x, y - beacon.y);
    double los_arg = persistent.wavenumber * dist + persistent.los_phase;
    std::complex<double> los(std::cos(los_arg), std::sin(los_arg));
    return std::sqrt(beacon.rician_k / k1) * los + std::sqrt(1.0 / k1) * scatter;
}

inline PlaneWaveSet persistent_waves(const Environment& env, const SimBeacon& beacon) {
    return make_plane_waves(
        derive_seed(env.seed, "fading", beacon_key_a(beacon), beacon_key_b(beacon)),
        beacon.multipath_components, beacon.wavelength_m);
}

inline PlaneWaveSet session_waves(const Environment& env, const SimBeacon& beacon,
                                  std::uint64_t session_key) {
    return make_plane_waves(derive_seed(env.seed, "fading-session", beacon_key_a(beacon),
                                        beacon_key_b(beacon), session_key),
                            beacon.multipath_components, beacon.wavelength_m);
}

/// Field autocorrelation at the between-session revisit error: how much of the
/// calibration-day scatter survives into another session.
inline double session_rho(const Environment& env, const SimBeacon& beacon) {
    return std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * env.session_jitter_m /
                                      beacon.wavelength_m);
}

/// One-shot complex channel gain; session key 0 means the persistent state.
inline std::complex<double> channel_gain(const Environment& env, const SimBeacon& beacon,
                                         double x, double y, std::uint64_t session_key) {
    PlaneWaveSet persistent = persistent_waves(env, beacon);
    if (session_key == 0)
        return gain_from_sets(persistent, nullptr, 1.0, beacon, x, y);
    PlaneWaveSet fresh = session_waves(env, beacon, session_key);
    return gain_from_sets(persistent, &fresh, session_rho(env, beacon), beacon, x, y);
}

}  // namespace detail

/// Small-scale fading in dB relative to the local mean power, at the persistent
/// (calibration-day) channel state.
inline double fading_field_db(const Environment& env, const SimBeacon& beacon, double x,
                              double y) {
    require(beacon.multipath_components >= 1, "fading_field_db: need >= 1 component");
    std::complex<double> h = detail::channel_gain(env, beacon, x, y, 0);
    return 10.0 * std::log10(std::norm(h));
}

/// Precomputed per-beacon channel state for one (environment, session) pair.
/// Session key 0 means the persistent channel with no session blending.
class ChannelModel {
public:
    explicit ChannelModel(const Environment& env, std::uint64_t session_key = 0)
        : env_(&env), session_key_(session_key) {
        env.validate();
        shared_ = detail::make_shadow_field(derive_seed(env.seed, "shadowing-shared"), 96,
                                            env.shared_shadowing_sigma_db,
                                            env.shadowing_correlation_m);
        per_beacon_shadow_.reserve(env.beacons.size());
        persistent_.reserve(env.beacons.size());
        for (const SimBeacon& b : env.beacons) {
            per_beacon_shadow_.push_back(detail::make_shadow_field(
                derive_seed(env.seed, "shadowing", detail::beacon_key_a(b),
                            detail::beacon_key_b(b)),
                96, env.shadowing_sigma_db, env.shadowing_correlation_m));
            persistent_.push_back(detail::persistent_waves(env, b));
            if (session_key != 0) {
                fresh_.push_back(detail::session_waves(env, b, session_key));
                rho_.push_back(detail::session_rho(env, b));
            }
        }
    }

    /// Session-state RSSI including path loss, shadowing, and fading.
    double rssi(std::size_t beacon_index, double x, double y) const {
        const SimBeacon& b = env_->beacons[beacon_index];
        double dist = std::hypot(x - b.x, y - b.y);
        require(dist > 1e-9, "rssi: receiver coincides with the beacon");
        double shadow = per_beacon_shadow_[beacon_index].value(x, y);
        if (b.id.technology != Technology::WiFi)
            shadow += shared_.value(x, y);
        std::complex<double> h =
            session_key_ == 0
                ? detail::gain_from_sets(persistent_[beacon_index], nullptr, 1.0, b, x, y)
                : detail::gain_from_sets(persistent_[beacon_index], &fresh_[beacon_index],
                                         rho_[beacon_index], b, x, y);
        return b.tx_power_dbm - path_loss_db(dist, 1.0) - shadow + 10.0 * std::log10(std::norm(h));
    }

private:
    const Environment* env_;
    std::uint64_t session_key_;
    detail::ShadowField shared_;
    std::vector<detail::ShadowField> per_beacon_shadow_;
    std::vector<detail::PlaneWaveSet> persistent_;
    std::vector<detail::PlaneWaveSet> fresh_;
    std::vector<double> rho_;
};

/// Spec-level single-point probe at the persistent channel state.
inline double rssi_at(const Environment& env, const SimBeacon& beacon, double x, double y) {
    require(x >= 0.0 && x <= env.width && y >= 0.0 && y <= env.height,
            "rssi_at: location outside environment bounds");
    double dist = std::hypot(x - beacon.x, y - beacon.y);
    require(dist > 1e-9, "rssi_at: receiver coincides with the beacon");
    detail::ShadowField per_beacon = detail::make_shadow_field(
        derive_seed(env.seed, "shadowing", detail::beacon_key_a(beacon),
                    detail::beacon_key_b(beacon)),
        96, env.shadowing_sigma_db, env.shadowing_correlation_m);
    double shadow = per_beacon.value(x, y);
    if (beacon.id.technology != Technology::WiFi) {
        detail::ShadowField shared = detail::make_shadow_field(
            derive_seed(env.seed, "shadowing-shared"), 96, env.shared_shadowing_sigma_db,
            env.shadowing_correlation_m);
        shadow += shared.value(x, y);
    }
    std::complex<double> h = detail::channel_gain(env, beacon, x, y, 0);
    return beacon.tx_power_dbm - path_loss_db(dist, 1.0) - shadow +
           10.0 * std::log10(std::norm(h));
}

/// One simulated receiver reading: linear device response plus seeded noise.
inline double apply_device(const DeviceProfile& profile, double true_rssi_dbm,
                           std::uint64_t seed) {
    profile.validate();
    double noisy = profile.gain * true_rssi_dbm + profile.offset_db;
    if (profile.noise_sigma_db > 0.0) {
        Rng rng(seed);
        noisy += rng.normal(0.0, profile.noise_sigma_db);
    }
    return noisy;
}

/// Where to place calibration points inside an environment.
struct GridSpec {
    enum class Kind { Grid, PerimeterPath, Points };
    Kind kind = Kind::Grid;
    double spacing_m = 1.0;       // Grid: interior lattice pitch
    double path_spacing_m = 1.6;  // PerimeterPath: arc-length step
    std::vector<std::pair<double, double>> points;  // Points: explicit coordinates
};

inline std::vector<Location> grid_locations(const Environment& env, const GridSpec& spec) {
    std::vector<Location> locations;
    int index = 0;
    auto push = [&](double x, double y) {
        locations.push_back(Location{x, y, env.environment_id, index++});
    };

    if (spec.kind == GridSpec::Kind::Grid) {
        require(spec.spacing_m > 0.0, "grid_locations: spacing must be > 0");
        // Interior lattice: multiples of the spacing, walls excluded.
        for (double y = spec.spacing_m; y < env.height - 1e-9; y += spec.spacing_m)
            for (double x = spec.spacing_m; x < env.width - 1e-9; x += spec.spacing_m)
                push(x, y);
    } else if (spec.kind == GridSpec::Kind::PerimeterPath) {
        require(spec.path_spacing_m > 0.0, "grid_locations: path spacing must be > 0");
        double w = env.width, h = env.height;
        double total = 2.0 * (w + h);
        for (double s = 0.0; s < total - 1e-9; s += spec.path_spacing_m) {
            double t = s;
            if (t < w) {
                push(t, 0.0);
            } else if (t < w + h) {
                push(w, t - w);
            } else if (t < 2.0 * w + h) {
                push(w - (t - w - h), h);
            } else {
                push(0.0, h - (t - 2.0 * w - h));
            }
        }
    } else {
        for (const auto& [x, y] : spec.points) {
            require(x >= 0.0 && x <= env.width && y >= 0.0 && y <= env.height,
                    "grid_locations: explicit point outside environment");
            push(x, y);
        }
    }
    require(!locations.empty(), "grid_locations: empty grid");
    return locations;
}

/// Simulate one calibration or test session: one RawScan per grid location,
/// `samples_per_location` readings per visible beacon. The environment seed
/// fixes the world (beacon fields); this seed fixes the session (channel
/// blend, per-beacon power drift, measurement noise).
inline std::vector<RawScan> generate_dataset(const Environment& env, const GridSpec& grid,
                                             const DeviceProfile& device,
                                             int samples_per_location, std::uint64_t seed) {
    env.validate();
    device.validate();
    require(samples_per_location >= 1, "generate_dataset: need >= 1 sample per location");

    std::vector<Location> locations = grid_locations(env, grid);
    std::string session_id = "s" + std::to_string(seed);
    std::uint64_t session_key = fnv1a64(session_id);
    ChannelModel channel(env, session_key);

    std::vector<double> session_drift(env.beacons.size(), 0.0);
    if (env.session_power_sigma_db > 0.0) {
        for (std::size_t b = 0; b < env.beacons.size(); ++b) {
            Rng rng(derive_seed(seed, "session-power", b));
            session_drift[b] = rng.normal(0.0, env.session_power_sigma_db);
        }
    }

    std::vector<RawScan> scans(locations.size());
    parallel_for(locations.size(), [&](std::size_t li) {
        const Location& loc = locations[li];
        RawScan scan;
        scan.location = loc;
        scan.device_id = device.device_id;
        scan.session_id = session_id;
        scan.timestamp_s = static_cast<double>(li);
        for (std::size_t b = 0; b < env.beacons.size(); ++b) {
            const SimBeacon& beacon = env.beacons[b];
            double true_rssi = channel.rssi(b, loc.x, loc.y) + session_drift[b];
            double floor_dbm = env.sensitivity_or(beacon.id.technology, -1e9);
            std::vector<double> samples;
            samples.reserve(static_cast<std::size_t>(samples_per_location));
            Rng meas(derive_seed(seed, "measurement", li, b));
            for (int s = 0; s < samples_per_location; ++s) {
                double reading = true_rssi;
                if (env.measurement_sigma_db > 0.0)
                    reading += meas.normal(0.0, env.measurement_sigma_db);
                reading = apply_device(device, reading,
                                       derive_seed(seed, "device-noise", li, b,
                                                   static_cast<std::uint64_t>(s)));
                if (reading < floor_dbm)
                    continue;  // below receiver sensitivity: the sample is simply missing
                if (env.quantize_rssi)
                    reading = std::round(reading);
                samples.push_back(reading);
            }
            if (!samples.empty())
                scan.readings[beacon.id] = std::move(samples);
        }
        scans[li] = std::move(scan);
    });
    return scans;
}

/// A ready-to-run world: environment plus its calibration grid.
struct SimPreset {
    Environment env;
    GridSpec grid;
};

namespace detail {

constexpr double kLightSpeed = 2.99792458e8;  // m/s

inline void add_fm_beacons(Environment& env, int count, Rng& rng) {
    // Distinct frequencies on the 100 kHz raster, kept inside the band whose
    // wavelengths span 2.78 m to 3.43 m (roughly 87.5 to 107.8 MHz).
    const int raster_bins = 204;
    std::vector<std::size_t> bins =
        rng.sample_without_replacement(static_cast<std::size_t>(raster_bins),
                                       static_cast<std::size_t>(count));
    std::sort(bins.begin(), bins.end());
    double cx = env.width / 2.0, cy = env.height / 2.0;
    for (std::size_t bin : bins) {
        std::int64_t channel_khz = 87500 + 100 * static_cast<std::int64_t>(bin);
        SimBeacon b;
        b.id.technology = Technology::FM;
        b.id.channel = channel_khz;
        b.id.label = "fm-" + std::to_string(channel_khz / 1000) + "." +
                     std::to_string((channel_khz % 1000) / 100);
        double dist = rng.uniform(5000.0, 50000.0);
        double bearing = rng.uniform(0.0, 2.0 * std::numbers::pi);
        b.x = cx + dist * std::cos(bearing);
        b.y = cy + dist * std::sin(bearing);
        b.tx_power_dbm = rng.uniform(25.0, 40.0);
        b.wavelength_m = kLightSpeed / (static_cast<double>(channel_khz) * 1000.0);
        b.rician_k = 0.0;
        env.beacons.push_back(b);
    }
}

inline void add_wifi_beacons(Environment& env, int count, Rng& rng) {
    for (int i = 1; i <= count; ++i) {
        SimBeacon b;
        b.id.technology = Technology::WiFi;
        b.id.channel = i;
        b.id.label = "ap-" + std::to_string(i);
        b.x = rng.uniform(-2.0, env.width + 2.0);
        b.y = rng.uniform(-2.0, env.height + 2.0);
        b.tx_power_dbm = rng.uniform(-55.0, -30.0);
        b.wavelength_m = kLightSpeed / 2.4e9;
        b.rician_k = 3.0;  // indoor short range keeps a strong direct ray
        env.beacons.push_back(b);
    }
}

inline void add_gsm_beacons(Environment& env, int count, Rng& rng) {
    double cx = env.width / 2.0, cy = env.height / 2.0;
    for (int i = 1; i <= count; ++i) {
        SimBeacon b;
        b.id.technology = Technology::GSM;
        b.id.channel = 1000 + i;
        b.id.label = "cell-" + std::to_string(1000 + i);
        double dist = rng.uniform(300.0, 3000.0);
        double bearing = rng.uniform(0.0, 2.0 * std::numbers::pi);
        b.x = cx + dist * std::cos(bearing);
        b.y = cy + dist * std::sin(bearing);
        b.tx_power_dbm = rng.uniform(5.0, 20.0);
        b.wavelength_m = kLightSpeed / 9.0e8;
        b.rician_k = 0.0;
        env.beacons.push_back(b);
    }
}

inline void set_default_sensitivity(Environment& env) {
    env.sensitivity_dbm[Technology::FM] = -100.0;
    env.sensitivity_dbm[Technology::WiFi] = -85.0;
    env.sensitivity_dbm[Technology::GSM] = -105.0;
}

}  // namespace detail

/// Office room: 12 x 6 m, 1 m interior grid (55 points), city-scale FM plus
/// in-building Wi-Fi and nearby GSM cells.
inline SimPreset room_preset(std::uint64_t world_seed) {
    SimPreset preset;
    Environment& env = preset.env;
    env.environment_id = "room";
    env.width = 12.0;
    env.height = 6.0;
    env.seed = world_seed;
    env.session_jitter_m = 0.2;  // a measured room grid is revisited precisely
    detail::set_default_sensitivity(env);
    Rng rng(derive_seed(world_seed, "room-beacons"));
    detail::add_fm_beacons(env, 50, rng);
    detail::add_wifi_beacons(env, 15, rng);
    detail::add_gsm_beacons(env, 7, rng);
    preset.grid.kind = GridSpec::Kind::Grid;
    preset.grid.spacing_m = 1.0;
    return preset;
}

/// Building floor: 50 x 25 m, 94 points at 1.6 m spacing along the perimeter
/// collection path.
inline SimPreset floor_preset(std::uint64_t world_seed) {
    SimPreset preset;
    Environment& env = preset.env;
    env.environment_id = "floor";
    env.width = 50.0;
    env.height = 25.0;
    env.seed = world_seed;
    env.session_jitter_m = 0.5;  // a walked corridor path revisits less exactly
    // A large building shadows exterior signals much more unevenly than a
    // single room: elevator cores, stairwells, and long interior walls swing
    // the common attenuation seen by all far-away transmitters.
    env.shared_shadowing_sigma_db = 8.0;
    detail::set_default_sensitivity(env);
    Rng rng(derive_seed(world_seed, "floor-beacons"));
    detail::add_fm_beacons(env, 45, rng);
    detail::add_wifi_beacons(env, 65, rng);
    detail::add_gsm_beacons(env, 7, rng);
    preset.grid.kind = GridSpec::Kind::PerimeterPath;
    preset.grid.path_spacing_m = 1.6;
    return preset;
}

inline SimPreset make_preset(const std::string& name, std::uint64_t world_seed) {
    if (name == "room")
        return room_preset(world_seed);
    if (name == "floor")
        return floor_preset(world_seed);
    fail("unknown preset: " + name + " (expected 'room' or 'floor')");
}

}
