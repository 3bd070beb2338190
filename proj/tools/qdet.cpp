// qdet: RSSI-based queue detection pipeline.
//
// Subcommands: simulate | extract | train | classify | evaluate.
// Exit codes: 0 success, 1 usage/config error, 2 data error.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdet/classify.hpp"
#include "qdet/config.hpp"
#include "qdet/core.hpp"
#include "qdet/features.hpp"
#include "qdet/harness.hpp"
#include "qdet/io.hpp"
#include "qdet/preprocess.hpp"
#include "qdet/simulate.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed_override = -1;
};

qdet::RunConfig load_config(const CommonOpts& opts) {
    qdet::RunConfig cfg =
        opts.config_path.empty() ? qdet::RunConfig{} : qdet::load_run_config(opts.config_path);
    if (opts.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed_override);
    cfg.validate();
    return cfg;
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
    return opts.out_dir + "/" + name;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "run configuration file (JSON)");
    cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", opts.seed_override, "override the config seed");
}

int cmd_simulate(const CommonOpts& opts) {
    qdet::RunConfig cfg = load_config(opts);
    qdet::ScenarioSpec scenario = cfg.scenario.to_scenario_spec(cfg.seed);
    qdet::SimulationResult sim = qdet::simulate(scenario);
    qdet::write_trace(out_path(opts, "trace.txt"), sim.packets);

    qdet::Timestamp epoch = 0, last_t = 0;
    if (!sim.packets.empty()) {
        auto [lo, hi] = std::minmax_element(
            sim.packets.begin(), sim.packets.end(),
            [](const auto& a, const auto& b) { return a.t_ms < b.t_ms; });
        epoch = lo->t_ms;
        last_t = hi->t_ms;
    }
    qdet::WindowIndex last_window = (last_t - epoch) / cfg.pipeline.window_ms();
    auto labels = qdet::window_labels(sim.truth, epoch, cfg.pipeline.window_ms(), 0, last_window);
    qdet::write_labels(out_path(opts, "labels.txt"), labels);

    std::cout << "simulated " << scenario.devices.size() << " devices over "
              << scenario.duration_s << " s: " << sim.packets.size() << " packets, windows 0-"
              << last_window << "\n";
    return 0;
}

int cmd_extract(const CommonOpts& opts, const std::string& trace_path,
                const std::string& labels_path) {
    qdet::RunConfig cfg = load_config(opts);
    auto packets = qdet::read_trace(trace_path);
    auto labels = qdet::read_labels(labels_path);

    qdet::StreamSet streams = qdet::preprocess_trace(packets, cfg.pipeline);
    auto vectors = qdet::extract_all(streams, cfg.pipeline);

    std::vector<qdet::LabeledExample> examples;
    std::vector<std::string> uncovered;
    for (qdet::FeatureVector& fv : vectors) {
        auto it = labels.find({fv.device, fv.window});
        if (it == labels.end()) {
            uncovered.push_back(fv.device + "@" + std::to_string(fv.window));
            continue;
        }
        examples.push_back({std::move(fv), it->second});
    }
    if (!uncovered.empty()) {
        std::string msg = "ground truth does not cover:";
        for (const std::string& u : uncovered) msg += " " + u;
        throw qdet::DataError(msg);
    }
    qdet::write_features(out_path(opts, "features.txt"), examples);
    std::cout << "extracted " << examples.size() << " feature vectors\n";
    return 0;
}

int cmd_train(const CommonOpts& opts, const std::vector<std::string>& feature_paths) {
    qdet::RunConfig cfg = load_config(opts);
    qdet::Dataset dataset;
    for (const std::string& path : feature_paths) {
        auto examples = qdet::read_features(path);
        dataset.examples.insert(dataset.examples.end(), examples.begin(), examples.end());
    }
    qdet::ModelSpec spec = cfg.model;
    spec.seed = cfg.seed;
    qdet::TrainedModel model = qdet::train(dataset, spec);
    qdet::write_model(out_path(opts, "model.txt"), model, qdet::config_hash(cfg.pipeline));
    std::cout << "trained " << qdet::to_string(spec.kind) << " on " << dataset.examples.size()
              << " examples\n";
    return 0;
}

int cmd_classify(const CommonOpts& opts, const std::string& features_path,
                 const std::string& model_path) {
    load_config(opts); // validates config/seed flags even though the model is self-contained
    qdet::LoadedModel loaded = qdet::read_model(model_path);
    auto examples = qdet::read_features(features_path);
    std::vector<std::pair<qdet::FeatureVector, qdet::Label>> predictions;
    predictions.reserve(examples.size());
    for (const qdet::LabeledExample& e : examples)
        predictions.emplace_back(e.features, loaded.model.predict(e.features));
    qdet::write_predictions(out_path(opts, "predictions.txt"), predictions);
    std::cout << "classified " << predictions.size() << " examples\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& opts) {
    qdet::RunConfig cfg = load_config(opts);
    auto rows = qdet::run_sweep(cfg);
    qdet::write_report(out_path(opts, "report.txt"), rows);
    for (const qdet::ReportRow& r : rows)
        std::cout << r.axis << "=" << r.value << " " << r.classifier
                  << " mean_accuracy=" << r.mean_accuracy << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RSSI-based queue detection pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string trace_path, labels_path, features_path, model_path;
    std::vector<std::string> feature_paths;

    CLI::App* sim = app.add_subcommand("simulate", "generate a labeled synthetic trace");
    add_common(sim, opts);

    CLI::App* ext = app.add_subcommand("extract", "compute feature vectors from a trace");
    add_common(ext, opts);
    ext->add_option("--trace", trace_path, "input trace file")->required();
    ext->add_option("--labels", labels_path, "ground-truth label file")->required();

    CLI::App* trn = app.add_subcommand("train", "train a classifier on feature files");
    add_common(trn, opts);
    trn->add_option("--features", feature_paths, "labeled feature file(s)")->required();

    CLI::App* cls = app.add_subcommand("classify", "predict labels with a trained model");
    add_common(cls, opts);
    cls->add_option("--features", features_path, "feature file to classify")->required();
    cls->add_option("--model", model_path, "trained model file")->required();

    CLI::App* evl = app.add_subcommand("evaluate", "run the sweep/evaluation harness");
    add_common(evl, opts);

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return cmd_simulate(opts);
        if (ext->parsed()) return cmd_extract(opts, trace_path, labels_path);
        if (trn->parsed()) return cmd_train(opts, feature_paths);
        if (cls->parsed()) return cmd_classify(opts, features_path, model_path);
        if (evl->parsed()) return cmd_evaluate(opts);
        return 1;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const qdet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const qdet::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
