#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "qdet/core.hpp"

namespace qdet {

// f1: accumulated RSSI slope over one window, last sample minus first.
// Windows with fewer than two samples are degenerate and give 0.
inline double f1_accumulated_slope(const std::vector<RssiSample>& window) {
    if (window.size() < 2) return 0.0;
    return window.back().value - window.front().value;
}

// f2: 1 iff the slope strictly exceeds tau_f2 (dramatic approach).
inline bool f2_approaching_counter(const std::vector<RssiSample>& window, double tau_f2) {
    if (window.size() < 2) return false;
    return f1_accumulated_slope(window) > tau_f2;
}

// f3: 1 iff every sample in the window strictly exceeds tau_f3.
inline bool f3_near_counter(const std::vector<RssiSample>& window, double tau_f3) {
    if (window.empty()) return false;
    return std::all_of(window.begin(), window.end(),
                       [&](const RssiSample& s) { return s.value > tau_f3; });
}

// All sample values of one stream pooled across windows k-b..k.
inline std::vector<double> pooled_samples(const WindowedStream* stream, WindowIndex k, int b) {
    std::vector<double> out;
    if (!stream) return out;
    for (WindowIndex w = k - b; w <= k; ++w)
        if (const auto* win = stream->window(w))
            for (const RssiSample& s : *win) out.push_back(s.value);
    return out;
}

// Population variance of the pooled samples; missing below 2 samples.
// Backs features 4, 5, and 6 (RSSI stability per sniffer).
inline std::optional<double> backtracked_variance(const WindowedStream* stream,
                                                  WindowIndex k, int b) {
    auto vals = pooled_samples(stream, k, b);
    if (vals.size() < 2) return std::nullopt;
    double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    return ss / vals.size();
}

// f7: stay duration in seconds at the counter sniffer, from the first
// sample ever heard to the latest sample no later than the end of
// window k. 0 when never heard.
inline double f7_stay_duration(const WindowedStream* counter_stream, WindowIndex k) {
    if (!counter_stream || counter_stream->empty()) return 0.0;
    Timestamp first = -1, last = -1;
    for (const auto& [w, samples] : counter_stream->windows) {
        if (w > k) break;
        if (samples.empty()) continue;
        if (first < 0) first = samples.front().t_ms;
        last = samples.back().t_ms;
    }
    if (first < 0) return 0.0;
    return static_cast<double>(last - first) / 1000.0;
}

// Per-window mean RSSI, the alignment primitive for correlation features.
inline std::optional<double> window_representative(const std::vector<RssiSample>* window) {
    if (!window || window->empty()) return std::nullopt;
    double sum = 0.0;
    for (const RssiSample& s : *window) sum += s.value;
    return sum / window->size();
}

// Length-(b+1) representative sequence over windows k-b..k; missing
// entries mark windows where the device was not heard.
inline std::vector<std::optional<double>> representative_sequence(const WindowedStream* stream,
                                                                  WindowIndex k, int b) {
    std::vector<std::optional<double>> out;
    out.reserve(b + 1);
    for (WindowIndex w = k - b; w <= k; ++w)
        out.push_back(window_representative(stream ? stream->window(w) : nullptr));
    return out;
}

// Pearson correlation over positions where both entries are present.
// Missing when fewer than min_pairs positions overlap or either side is
// constant over the overlap.
inline std::optional<double> pearson(const std::vector<std::optional<double>>& a,
                                     const std::vector<std::optional<double>>& b,
                                     int min_pairs = 2) {
    if (a.size() != b.size())
        throw DataError("pearson expects positionally aligned sequences");
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i] || !b[i]) continue;
        double x = *a[i], y = *b[i];
        sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
        ++n;
    }
    if (n < min_pairs) return std::nullopt;
    double vx = sxx - sx * sx / n;
    double vy = syy - sy * sy / n;
    if (vx <= 0.0 || vy <= 0.0) return std::nullopt;
    double r = (sxy - sx * sy / n) / std::sqrt(vx * vy);
    return std::clamp(r, -1.0, 1.0);
}

// One device's backtracked state at window k, shared by f8 and f9.
struct BacktrackContext {
    DeviceId device;
    std::optional<double> counter_variance;                 // f4 input to the f8 sort
    std::vector<std::optional<double>> counter_sequence;    // pi1 representatives
    std::vector<std::optional<double>> left_sequence;       // pi2 representatives
    std::vector<std::optional<double>> right_sequence;      // pi3 representatives
};

inline BacktrackContext make_backtrack_context(const StreamSet& streams, const SnifferSet& sniffers,
                                               const DeviceId& device, WindowIndex k, int b) {
    BacktrackContext ctx;
    ctx.device = device;
    const WindowedStream* counter = streams.find(sniffers.counter, device);
    ctx.counter_variance = backtracked_variance(counter, k, b);
    ctx.counter_sequence = representative_sequence(counter, k, b);
    ctx.left_sequence = representative_sequence(streams.find(sniffers.left, device), k, b);
    ctx.right_sequence = representative_sequence(streams.find(sniffers.right, device), k, b);
    return ctx;
}

// f8: mobility similarity. Scan the other devices in ascending order of
// counter-sniffer variance (most stable first) and stop as soon as m of
// them correlate with the target above tau_f8.
inline bool f8_mobility_similarity(const BacktrackContext& target,
                                   const std::vector<const BacktrackContext*>& peers,
                                   const PipelineConfig& config) {
    std::vector<const BacktrackContext*> sorted;
    for (const BacktrackContext* p : peers)
        if (p->device != target.device) sorted.push_back(p);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const BacktrackContext* x, const BacktrackContext* y) {
                         double vx = x->counter_variance.value_or(std::numeric_limits<double>::infinity());
                         double vy = y->counter_variance.value_or(std::numeric_limits<double>::infinity());
                         if (vx != vy) return vx < vy;
                         return x->device < y->device;
                     });
    int found = 0;
    for (const BacktrackContext* peer : sorted) {
        auto r = pearson(target.counter_sequence, peer->counter_sequence,
                         config.min_paired_windows);
        if (r && *r > config.tau_f8) {
            if (++found >= config.peer_count) return true;
        }
    }
    return false;
}

// f9: cross-sniffer mobility correlation between the two flanking
// sniffers' views of the same device.
inline std::optional<double> f9_mobility_correlation(const BacktrackContext& ctx,
                                                     int min_paired_windows) {
    return pearson(ctx.left_sequence, ctx.right_sequence, min_paired_windows);
}

// Extract the nine-feature vector for every device at every window with
// full backtracking history (k >= b). Devices unheard over the whole
// span k-b..k are skipped for that window.
inline std::vector<FeatureVector> extract_all(const StreamSet& streams,
                                              const PipelineConfig& config,
                                              const SnifferSet& sniffers = {}) {
    config.validate();
    sniffers.validate();
    std::vector<FeatureVector> out;
    const auto devices = streams.devices();
    const WindowIndex last = streams.max_window();
    const int b = config.backtrack;

    for (WindowIndex k = b; k <= last; ++k) {
        std::vector<BacktrackContext> contexts;
        contexts.reserve(devices.size());
        for (const DeviceId& d : devices)
            contexts.push_back(make_backtrack_context(streams, sniffers, d, k, b));
        std::vector<const BacktrackContext*> peers;
        peers.reserve(contexts.size());
        for (const BacktrackContext& c : contexts) peers.push_back(&c);

        for (std::size_t i = 0; i < devices.size(); ++i) {
            const DeviceId& d = devices[i];
            const BacktrackContext& ctx = contexts[i];
            const WindowedStream* counter = streams.find(sniffers.counter, d);
            const WindowedStream* left = streams.find(sniffers.left, d);
            const WindowedStream* right = streams.find(sniffers.right, d);

            bool heard = !pooled_samples(counter, k, b).empty() ||
                         !pooled_samples(left, k, b).empty() ||
                         !pooled_samples(right, k, b).empty();
            if (!heard) continue;

            static const std::vector<RssiSample> kEmpty;
            const auto* cur = counter ? counter->window(k) : nullptr;
            const auto& win = cur ? *cur : kEmpty;

            FeatureVector fv;
            fv.device = d;
            fv.window = k;
            fv.f1_slope = f1_accumulated_slope(win);
            fv.f2_approaching = f2_approaching_counter(win, config.tau_f2_dbm);
            fv.f3_near_counter = f3_near_counter(win, config.tau_f3_dbm);
            fv.f4_var_counter = ctx.counter_variance;
            fv.f5_var_left = backtracked_variance(left, k, b);
            fv.f6_var_right = backtracked_variance(right, k, b);
            fv.f7_stay_s = f7_stay_duration(counter, k);
            fv.f8_mobility_similarity = f8_mobility_similarity(ctx, peers, config);
            fv.f9_mobility_correlation = f9_mobility_correlation(ctx, config.min_paired_windows);
            out.push_back(std::move(fv));
        }
    }
    return out;
}

} // namespace qdet
