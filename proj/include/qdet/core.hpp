#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdet {

// Error raised by bad configuration or bad command usage.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Error raised by malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Timestamp = std::int64_t; // milliseconds since trace epoch
using DeviceId = std::string;
using SnifferId = int;

// The three-sniffer deployment: one receiver at the queue head
// ("counter") and two flanking it along the queue axis.
struct SnifferSet {
    SnifferId counter = 1;
    SnifferId left = 2;
    SnifferId right = 3;

    void validate() const {
        if (counter == left || counter == right || left == right)
            throw ConfigError("sniffer ids must be distinct");
    }
};

// One decoded BLE advertisement as seen by one sniffer.
struct AdvertisingPacket {
    Timestamp t_ms = 0;
    SnifferId sniffer = 0;
    DeviceId device;
    int rssi_dbm = 0;

    friend bool operator==(const AdvertisingPacket&, const AdvertisingPacket&) = default;
};

// One aggregated (and possibly filtered) RSSI sample.
struct RssiSample {
    Timestamp t_ms = 0;
    double value = 0.0; // dBm, real-valued after smoothing

    friend bool operator==(const RssiSample&, const RssiSample&) = default;
};

using WindowIndex = std::int64_t;

// Per-(sniffer, device) samples partitioned into fixed windows.
// A window with no samples is absent from the map.
struct WindowedStream {
    SnifferId sniffer = 0;
    DeviceId device;
    std::map<WindowIndex, std::vector<RssiSample>> windows;

    bool empty() const { return windows.empty(); }

    const std::vector<RssiSample>* window(WindowIndex k) const {
        auto it = windows.find(k);
        return it == windows.end() ? nullptr : &it->second;
    }

    WindowIndex max_window() const {
        return windows.empty() ? -1 : windows.rbegin()->first;
    }
};

// All streams of one preprocessed trace, sharing one epoch and window grid.
struct StreamSet {
    Timestamp epoch_ms = 0;
    Timestamp window_ms = 0;
    // keyed (sniffer, device) so iteration order is deterministic
    std::map<std::pair<SnifferId, DeviceId>, WindowedStream> streams;

    const WindowedStream* find(SnifferId s, const DeviceId& d) const {
        auto it = streams.find({s, d});
        return it == streams.end() ? nullptr : &it->second;
    }

    std::vector<DeviceId> devices() const {
        std::vector<DeviceId> out;
        for (const auto& [key, _] : streams)
            if (std::find(out.begin(), out.end(), key.second) == out.end())
                out.push_back(key.second);
        std::sort(out.begin(), out.end());
        return out;
    }

    WindowIndex max_window() const {
        WindowIndex k = -1;
        for (const auto& [_, stream] : streams)
            k = std::max(k, stream.max_window());
        return k;
    }
};

// Nine feature values for one device at one window index.
// f4-f6 and f9 are missing when there is not enough history.
struct FeatureVector {
    DeviceId device;
    WindowIndex window = 0;
    double f1_slope = 0.0;             // dBm delta over the window
    bool f2_approaching = false;
    bool f3_near_counter = false;
    std::optional<double> f4_var_counter; // dBm^2
    std::optional<double> f5_var_left;
    std::optional<double> f6_var_right;
    double f7_stay_s = 0.0;            // seconds
    bool f8_mobility_similarity = false;
    std::optional<double> f9_mobility_correlation; // in [-1, 1]
};

enum class Label : int { NotInQueue = 0, InQueue = 1 };

struct LabeledExample {
    FeatureVector features;
    Label label = Label::NotInQueue;
};

// Pipeline parameters. Defaults follow the deployed system configuration.
struct PipelineConfig {
    double lambda_s = 30.0;       // aggregation period
    double alpha = 0.9;           // smoothing weight
    double window_s = 60.0;       // window duration
    int backtrack = 8;            // b, backtracked windows
    double tau_f2_dbm = 5.0;      // approaching-counter slope threshold
    double tau_f3_dbm = -55.0;    // near-counter RSSI threshold
    int peer_count = 3;           // m, peers needed for mobility similarity
    double tau_f8 = 0.3;          // correlation threshold
    int min_paired_windows = 3;   // minimum overlap for a defined correlation

    Timestamp lambda_ms() const { return static_cast<Timestamp>(lambda_s * 1000.0 + 0.5); }
    Timestamp window_ms() const { return static_cast<Timestamp>(window_s * 1000.0 + 0.5); }

    void validate() const {
        if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0, 1]");
        if (lambda_s <= 0.0) throw ConfigError("lambda_s must be positive");
        if (window_s < lambda_s) throw ConfigError("window_s must be >= lambda_s");
        if (backtrack < 1) throw ConfigError("backtrack must be >= 1");
        if (peer_count < 1) throw ConfigError("peer_count must be >= 1");
        if (tau_f8 < -1.0 || tau_f8 > 1.0) throw ConfigError("tau_f8 must be in [-1, 1]");
        if (min_paired_windows < 2) throw ConfigError("min_paired_windows must be >= 2");
    }
};

// Assign ordered samples to contiguous half-open windows
// [epoch + k*duration, epoch + (k+1)*duration).
inline WindowedStream partition_into_windows(const std::vector<RssiSample>& samples,
                                             Timestamp window_ms, Timestamp epoch_ms,
                                             SnifferId sniffer = 0, DeviceId device = {}) {
    if (window_ms <= 0) throw ConfigError("window duration must be positive");
    WindowedStream out{sniffer, std::move(device), {}};
    Timestamp prev = std::numeric_limits<Timestamp>::min();
    for (const RssiSample& s : samples) {
        if (s.t_ms < prev)
            throw DataError("samples must be sorted by timestamp");
        prev = s.t_ms;
        Timestamp rel = s.t_ms - epoch_ms;
        WindowIndex k = rel >= 0 ? rel / window_ms : -(((-rel) + window_ms - 1) / window_ms);
        out.windows[k].push_back(s);
    }
    return out;
}

} // namespace qdet
