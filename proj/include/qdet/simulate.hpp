#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qdet/core.hpp"

namespace qdet {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Vec2 a, Vec2 b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Log-distance path loss with log-normal shadowing and a fixed
// per-device antenna offset.
struct RadioParams {
    double p0_dbm = -45.0;            // received power at 1 m
    double path_loss_exp = 2.0;       // n
    double shadowing_sigma = 4.0;     // dBm
    double antenna_offset_range = 6.0; // per-device offset in [-range, +range]
    double drop_prob = 0.1;           // per (packet, sniffer) miss probability

    void validate() const {
        if (path_loss_exp <= 0.0) throw ConfigError("path_loss_exp must be positive");
        if (shadowing_sigma < 0.0) throw ConfigError("shadowing_sigma must be >= 0");
        if (drop_prob < 0.0 || drop_prob >= 1.0) throw ConfigError("drop_prob must be in [0, 1)");
        if (antenna_offset_range < 0.0) throw ConfigError("antenna_offset_range must be >= 0");
    }
};

inline double rssi_at(double distance_m, const RadioParams& radio, double antenna_offset,
                      std::mt19937_64& rng) {
    double d = std::max(distance_m, 0.1);
    double rssi = radio.p0_dbm - 10.0 * radio.path_loss_exp * std::log10(d) + antenna_offset;
    if (radio.shadowing_sigma > 0.0) {
        std::normal_distribution<double> shadow(0.0, radio.shadowing_sigma);
        rssi += shadow(rng);
    }
    return rssi;
}

enum class BehaviorKind { InQueueSlot, RandomWalk, Static };

struct DeviceBehavior {
    DeviceId device;
    BehaviorKind kind = BehaviorKind::Static;
    int initial_slot = 0;     // InQueueSlot
    Vec2 position{};          // RandomWalk start / Static position
    double step_sigma = 0.4;  // RandomWalk, meters per emission
};

struct ScenarioSpec {
    Vec2 counter_pos{0.0, 0.0};
    Vec2 left_pos{3.0, 2.0};
    Vec2 right_pos{3.0, -2.0};
    SnifferSet sniffers{};

    double first_slot_m = 1.0;   // slot 0 distance from the counter
    double slot_spacing_m = 0.5;
    double advance_s = 120.0;    // queue steps forward every advance period
    double emission_s = 1.0;     // per-device advertising period
    double duration_s = 900.0;
    Vec2 walk_min{0.5, -4.5};    // random-walk bounds
    Vec2 walk_max{9.0, 4.5};

    RadioParams radio{};
    std::uint64_t seed = 0;
    std::vector<DeviceBehavior> devices;

    Vec2 slot_position(int slot) const {
        return {first_slot_m + slot * slot_spacing_m, 0.0};
    }

    void validate() const {
        sniffers.validate();
        radio.validate();
        if (advance_s <= 0.0) throw ConfigError("advance_s must be positive");
        if (emission_s <= 0.0) throw ConfigError("emission_s must be positive");
        if (duration_s <= 0.0) throw ConfigError("duration_s must be positive");
        if (slot_spacing_m <= 0.0) throw ConfigError("slot_spacing_m must be positive");
        if (devices.empty()) throw ConfigError("scenario has no devices");
    }

    // The controllable-experiment layout: a queue of beacons advancing
    // toward the counter plus wandering and static bystanders.
    static ScenarioSpec standard(int queue_devices, int walkers, int statics) {
        ScenarioSpec spec;
        for (int i = 0; i < queue_devices; ++i) {
            DeviceBehavior b;
            b.device = "q" + std::to_string(i);
            b.kind = BehaviorKind::InQueueSlot;
            b.initial_slot = i;
            spec.devices.push_back(b);
        }
        for (int i = 0; i < walkers; ++i) {
            DeviceBehavior b;
            b.device = "w" + std::to_string(i);
            b.kind = BehaviorKind::RandomWalk;
            b.position = {2.5 + 1.5 * i, i % 2 == 0 ? 2.5 : -2.5};
            spec.devices.push_back(b);
        }
        for (int i = 0; i < statics; ++i) {
            DeviceBehavior b;
            b.device = "s" + std::to_string(i);
            b.kind = BehaviorKind::Static;
            // near the queue line: ambiguous for the counter sniffer alone
            b.position = {3.5 + 1.0 * i, i % 2 == 0 ? 0.75 : -0.75};
            spec.devices.push_back(b);
        }
        return spec;
    }
};

// Per-device ground truth: in-queue devices are InQueue from the trace
// start until service completion, NotInQueue afterwards; walkers and
// static devices are NotInQueue throughout.
struct GroundTruth {
    struct DeviceTruth {
        bool starts_in_queue = false;
        double depart_s = std::numeric_limits<double>::infinity(); // service completion
    };
    std::map<DeviceId, DeviceTruth> devices;

    Label label_at(const DeviceId& device, double t_s) const {
        auto it = devices.find(device);
        if (it == devices.end()) throw DataError("unknown device in ground truth: " + device);
        return it->second.starts_in_queue && t_s < it->second.depart_s ? Label::InQueue
                                                                       : Label::NotInQueue;
    }
};

// Per-(device, window) labels on the trace's window grid; the label is
// the device state at the window midpoint.
inline std::map<std::pair<DeviceId, WindowIndex>, Label>
window_labels(const GroundTruth& truth, Timestamp epoch_ms, Timestamp window_ms,
              WindowIndex first, WindowIndex last) {
    std::map<std::pair<DeviceId, WindowIndex>, Label> out;
    for (const auto& [device, _] : truth.devices) {
        for (WindowIndex k = first; k <= last; ++k) {
            double mid_s = (epoch_ms + k * window_ms + window_ms / 2.0) / 1000.0;
            out[{device, k}] = truth.label_at(device, mid_s);
        }
    }
    return out;
}

struct SimulationResult {
    std::vector<AdvertisingPacket> packets;
    GroundTruth truth;
};

inline SimulationResult simulate(const ScenarioSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    struct DeviceState {
        DeviceBehavior behavior;
        Vec2 position{};
        double antenna_offset = 0.0;
        bool walking = false; // served queue devices turn into walkers
    };
    std::vector<DeviceState> states;
    SimulationResult result;

    for (const DeviceBehavior& b : spec.devices) {
        DeviceState st;
        st.behavior = b;
        st.position = b.kind == BehaviorKind::InQueueSlot ? spec.slot_position(b.initial_slot)
                                                          : b.position;
        st.walking = b.kind == BehaviorKind::RandomWalk;
        if (spec.radio.antenna_offset_range > 0.0) {
            std::uniform_real_distribution<double> offset(-spec.radio.antenna_offset_range,
                                                          spec.radio.antenna_offset_range);
            st.antenna_offset = offset(rng);
        }
        GroundTruth::DeviceTruth truth;
        if (b.kind == BehaviorKind::InQueueSlot) {
            truth.starts_in_queue = true;
            truth.depart_s = (b.initial_slot + 1) * spec.advance_s;
        }
        result.truth.devices[b.device] = truth;
        states.push_back(std::move(st));
    }

    const std::array<std::pair<SnifferId, Vec2>, 3> sniffer_layout = {{
        {spec.sniffers.counter, spec.counter_pos},
        {spec.sniffers.left, spec.left_pos},
        {spec.sniffers.right, spec.right_pos},
    }};

    auto walk_step = [&](DeviceState& st) {
        std::normal_distribution<double> step(0.0, st.behavior.step_sigma);
        st.position.x = std::clamp(st.position.x + step(rng), spec.walk_min.x, spec.walk_max.x);
        st.position.y = std::clamp(st.position.y + step(rng), spec.walk_min.y, spec.walk_max.y);
    };

    const std::int64_t emissions =
        static_cast<std::int64_t>(std::floor(spec.duration_s / spec.emission_s)) + 1;
    for (std::int64_t e = 0; e < emissions; ++e) {
        double t_s = e * spec.emission_s;
        if (t_s >= spec.duration_s && e > 0) break;
        Timestamp t_ms = static_cast<Timestamp>(t_s * 1000.0 + 0.5);

        for (DeviceState& st : states) {
            // move first, then advertise from the new position
            if (st.behavior.kind == BehaviorKind::InQueueSlot && !st.walking) {
                int advances = static_cast<int>(std::floor(t_s / spec.advance_s));
                int slot = st.behavior.initial_slot - advances;
                if (slot < 0) {
                    st.walking = true; // served; wanders off from the head of the queue
                    st.position = spec.slot_position(0);
                } else {
                    st.position = spec.slot_position(slot);
                }
            }
            if (st.walking && e > 0) walk_step(st);

            for (const auto& [sniffer, pos] : sniffer_layout) {
                double rssi = rssi_at(distance(st.position, pos), spec.radio,
                                      st.antenna_offset, rng);
                bool heard = spec.radio.drop_prob <= 0.0 || uniform(rng) >= spec.radio.drop_prob;
                if (!heard) continue;
                int quantized = std::min(0, static_cast<int>(std::lround(rssi)));
                result.packets.push_back({t_ms, sniffer, st.behavior.device, quantized});
            }
        }
    }
    return result;
}

} // namespace qdet
