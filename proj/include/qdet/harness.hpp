#pragma once

#include <future>
#include <string>
#include <vector>

#include "qdet/classify.hpp"
#include "qdet/config.hpp"
#include "qdet/core.hpp"
#include "qdet/features.hpp"
#include "qdet/io.hpp"
#include "qdet/preprocess.hpp"
#include "qdet/simulate.hpp"

namespace qdet {

// Run the pipeline on one simulated trace and attach ground-truth labels.
// sniffer_count == 1 keeps only the counter sniffer's features.
inline Dataset build_dataset(const SimulationResult& sim, const PipelineConfig& pipeline,
                             int sniffer_count = 3) {
    if (sniffer_count != 1 && sniffer_count != 3)
        throw ConfigError("sniffer_count must be 1 or 3");
    StreamSet streams = preprocess_trace(sim.packets, pipeline);
    Dataset out;
    for (FeatureVector fv : extract_all(streams, pipeline)) {
        if (sniffer_count == 1) fv = restrict_to_counter(std::move(fv));
        double mid_s =
            (streams.epoch_ms + fv.window * streams.window_ms + streams.window_ms / 2.0) / 1000.0;
        Label label = sim.truth.label_at(fv.device, mid_s);
        out.examples.push_back({std::move(fv), label});
    }
    return out;
}

// One sweep point: a pipeline variant plus the sniffer restriction.
struct SweepPoint {
    std::string axis;
    std::string value;
    PipelineConfig pipeline;
    int sniffer_count = 3;
    std::vector<ModelKind> classifiers;
};

inline std::vector<SweepPoint> expand_sweep(const RunConfig& cfg) {
    std::vector<SweepPoint> points;
    const SweepSpec& sweep = cfg.eval.sweep;
    auto base = [&] {
        SweepPoint p;
        p.axis = sweep.axis;
        p.pipeline = cfg.pipeline;
        p.classifiers = cfg.eval.classifiers;
        return p;
    };
    if (sweep.axis.empty()) {
        SweepPoint p = base();
        p.value = "default";
        points.push_back(std::move(p));
    } else if (sweep.axis == "classifier") {
        for (const std::string& v : sweep.values) {
            SweepPoint p = base();
            p.value = v;
            p.classifiers = {model_kind_from_string(v)};
            points.push_back(std::move(p));
        }
    } else {
        for (const std::string& v : sweep.values) {
            SweepPoint p = base();
            p.value = v;
            if (sweep.axis == "b")
                p.pipeline.backtrack = std::stoi(v);
            else if (sweep.axis == "window_s")
                p.pipeline.window_s = std::stod(v);
            else if (sweep.axis == "sniffer_count")
                p.sniffer_count = std::stoi(v);
            else
                throw ConfigError("unknown sweep axis: " + sweep.axis);
            p.pipeline.validate();
            points.push_back(std::move(p));
        }
    }
    return points;
}

// Mean accuracy and in-queue precision/recall for one (point, classifier)
// pair over the configured seeds.
inline ReportRow run_point(const RunConfig& cfg, const SweepPoint& point, ModelKind kind) {
    ReportRow row;
    row.axis = point.axis.empty() ? "none" : point.axis;
    row.value = point.value;
    row.classifier = to_string(kind);
    row.seeds = cfg.eval.seeds;
    row.min_accuracy = 1.0;

    for (int s = 0; s < cfg.eval.seeds; ++s) {
        std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
        SimulationResult sim = simulate(cfg.scenario.to_scenario_spec(seed));
        Dataset dataset = build_dataset(sim, point.pipeline, point.sniffer_count);
        ModelSpec spec = cfg.model;
        spec.kind = kind;
        EvalReport report = evaluate(dataset, spec, cfg.eval.folds, seed);
        double acc = report.accuracy();
        row.mean_accuracy += acc;
        row.min_accuracy = std::min(row.min_accuracy, acc);
        row.max_accuracy = std::max(row.max_accuracy, acc);
        row.mean_precision_in += report.confusion.precision(Label::InQueue);
        row.mean_recall_in += report.confusion.recall(Label::InQueue);
    }
    row.mean_accuracy /= cfg.eval.seeds;
    row.mean_precision_in /= cfg.eval.seeds;
    row.mean_recall_in /= cfg.eval.seeds;
    return row;
}

// Full sweep. Points run in a parallel worker pool; the report is
// assembled in declaration order so output stays deterministic.
inline std::vector<ReportRow> run_sweep(const RunConfig& cfg) {
    cfg.validate();
    const auto points = expand_sweep(cfg);
    std::vector<std::future<ReportRow>> futures;
    for (const SweepPoint& point : points)
        for (ModelKind kind : point.classifiers)
            futures.push_back(std::async(std::launch::async, run_point, std::cref(cfg),
                                         std::cref(point), kind));
    std::vector<ReportRow> rows;
    rows.reserve(futures.size());
    for (auto& f : futures) rows.push_back(f.get());
    return rows;
}

} // namespace qdet
