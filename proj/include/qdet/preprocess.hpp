#pragma once

#include <algorithm>
#include <vector>

#include "qdet/core.hpp"

namespace qdet {

// Mean-aggregate one (sniffer, device) packet stream into lambda-sized
// buckets anchored at epoch_ms. Empty buckets produce no sample; a
// sample's timestamp is its bucket start.
inline std::vector<RssiSample> aggregate(const std::vector<AdvertisingPacket>& packets,
                                         Timestamp lambda_ms, Timestamp epoch_ms = 0) {
    if (lambda_ms <= 0) throw ConfigError("aggregation period must be positive");
    std::vector<RssiSample> out;
    if (packets.empty()) return out;
    const SnifferId sniffer = packets.front().sniffer;
    const DeviceId& device = packets.front().device;

    Timestamp prev = std::numeric_limits<Timestamp>::min();
    std::int64_t bucket = 0;
    double sum = 0.0;
    int count = 0;
    auto flush = [&] {
        if (count > 0)
            out.push_back({epoch_ms + bucket * lambda_ms, sum / count});
        sum = 0.0;
        count = 0;
    };
    for (const AdvertisingPacket& p : packets) {
        if (p.sniffer != sniffer || p.device != device)
            throw DataError("aggregate expects packets from a single (sniffer, device)");
        if (p.t_ms < prev)
            throw DataError("packets must be sorted by timestamp");
        prev = p.t_ms;
        std::int64_t b = (p.t_ms - epoch_ms) / lambda_ms;
        if (count > 0 && b != bucket) flush();
        bucket = b;
        sum += p.rssi_dbm;
        ++count;
    }
    flush();
    return out;
}

// Dynamic exponential smoothing filter. The blend weight depends on the
// direction of change: a falling input (I < O_prev) keeps weight alpha on
// history, a rising input puts weight alpha on the input. Seeded with the
// first input.
inline std::vector<RssiSample> desf(const std::vector<RssiSample>& samples, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0, 1]");
    std::vector<RssiSample> out;
    out.reserve(samples.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double in = samples[i].value;
        double o;
        if (i == 0)
            o = in;
        else if (in < prev)
            o = alpha * prev + (1.0 - alpha) * in;
        else
            o = (1.0 - alpha) * prev + alpha * in;
        out.push_back({samples[i].t_ms, o});
        prev = o;
    }
    return out;
}

// Full preprocessing: group packets per (sniffer, device), aggregate,
// smooth, and window, all on one shared epoch (the earliest packet
// timestamp) so window indices align across sniffers and devices.
inline StreamSet preprocess_trace(std::vector<AdvertisingPacket> packets,
                                  const PipelineConfig& config) {
    config.validate();
    StreamSet out;
    out.window_ms = config.window_ms();
    if (packets.empty()) return out;

    std::stable_sort(packets.begin(), packets.end(),
                     [](const AdvertisingPacket& a, const AdvertisingPacket& b) {
                         return a.t_ms < b.t_ms;
                     });
    out.epoch_ms = packets.front().t_ms;

    std::map<std::pair<SnifferId, DeviceId>, std::vector<AdvertisingPacket>> grouped;
    for (AdvertisingPacket& p : packets)
        grouped[{p.sniffer, p.device}].push_back(std::move(p));

    for (auto& [key, group] : grouped) {
        auto samples = desf(aggregate(group, config.lambda_ms(), out.epoch_ms), config.alpha);
        out.streams[key] = partition_into_windows(samples, out.window_ms, out.epoch_ms,
                                                  key.first, key.second);
    }
    return out;
}

} // namespace qdet
