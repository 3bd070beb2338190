#pragma once

#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdet/classify.hpp"
#include "qdet/core.hpp"
#include "qdet/simulate.hpp"

namespace qdet {

// Declarative scenario description as it appears in config files; turned
// into a concrete device list by to_scenario_spec().
struct ScenarioConfig {
    int queue_devices = 7;
    int walkers = 3;
    int statics = 2;
    double duration_s = 900.0;
    double advance_s = 120.0;
    double emission_s = 1.0;
    double slot_spacing_m = 0.5;
    double first_slot_m = 1.0;
    double sniffer_along_m = 3.0;   // flanking sniffers' distance along the queue axis
    double sniffer_lateral_m = 2.0; // and their lateral offset
    double walk_step_sigma = 0.4;
    RadioParams radio{};

    ScenarioSpec to_scenario_spec(std::uint64_t seed) const {
        ScenarioSpec spec = ScenarioSpec::standard(queue_devices, walkers, statics);
        spec.duration_s = duration_s;
        spec.advance_s = advance_s;
        spec.emission_s = emission_s;
        spec.slot_spacing_m = slot_spacing_m;
        spec.first_slot_m = first_slot_m;
        spec.left_pos = {sniffer_along_m, sniffer_lateral_m};
        spec.right_pos = {sniffer_along_m, -sniffer_lateral_m};
        spec.radio = radio;
        spec.seed = seed;
        for (DeviceBehavior& b : spec.devices)
            if (b.kind == BehaviorKind::RandomWalk) b.step_sigma = walk_step_sigma;
        return spec;
    }
};

struct SweepSpec {
    std::string axis;                // "", "b", "window_s", "sniffer_count", "classifier"
    std::vector<std::string> values; // textual; numeric axes parse them as numbers
};

struct EvaluateConfig {
    int folds = 5;
    int seeds = 10;
    std::vector<ModelKind> classifiers = {ModelKind::NaiveBayes, ModelKind::DecisionTree,
                                          ModelKind::RandomForest};
    SweepSpec sweep;
};

struct RunConfig {
    std::uint64_t seed = 1;
    PipelineConfig pipeline{};
    ModelSpec model{};
    ScenarioConfig scenario{};
    EvaluateConfig eval{};

    void validate() const {
        pipeline.validate();
        model.validate();
        if (eval.folds < 2) throw ConfigError("evaluate.folds must be >= 2");
        if (eval.seeds < 1) throw ConfigError("evaluate.seeds must be >= 1");
        if (!eval.sweep.axis.empty() && eval.sweep.axis != "b" && eval.sweep.axis != "window_s" &&
            eval.sweep.axis != "sniffer_count" && eval.sweep.axis != "classifier")
            throw ConfigError("unknown sweep axis: " + eval.sweep.axis);
    }
};

namespace config_detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::vector<std::string>& known,
                           const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown config key " + where + "." + key);
}

template <typename T>
void get_to(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) obj.at(key).get_to(out);
}

inline void parse_pipeline(const json& obj, PipelineConfig& p) {
    reject_unknown(obj,
                   {"lambda_s", "alpha", "window_s", "backtrack", "tau_f2", "tau_f3",
                    "peer_count", "tau_f8", "min_paired_windows"},
                   "pipeline");
    get_to(obj, "lambda_s", p.lambda_s);
    get_to(obj, "alpha", p.alpha);
    get_to(obj, "window_s", p.window_s);
    get_to(obj, "backtrack", p.backtrack);
    get_to(obj, "tau_f2", p.tau_f2_dbm);
    get_to(obj, "tau_f3", p.tau_f3_dbm);
    get_to(obj, "peer_count", p.peer_count);
    get_to(obj, "tau_f8", p.tau_f8);
    get_to(obj, "min_paired_windows", p.min_paired_windows);
}

inline void parse_model(const json& obj, ModelSpec& m) {
    reject_unknown(obj, {"kind", "max_depth", "trees", "bag_fraction", "features_per_split"},
                   "model");
    if (obj.contains("kind")) m.kind = model_kind_from_string(obj.at("kind").get<std::string>());
    get_to(obj, "max_depth", m.max_depth);
    get_to(obj, "trees", m.trees);
    get_to(obj, "bag_fraction", m.bag_fraction);
    get_to(obj, "features_per_split", m.features_per_split);
}

inline void parse_scenario(const json& obj, ScenarioConfig& s) {
    reject_unknown(obj,
                   {"queue_devices", "walkers", "statics", "duration_s", "advance_s",
                    "emission_s", "slot_spacing_m", "first_slot_m", "sniffer_along_m",
                    "sniffer_lateral_m", "walk_step_sigma", "p0_dbm", "path_loss_exp",
                    "shadowing_sigma", "antenna_offset_range", "drop_prob"},
                   "scenario");
    get_to(obj, "queue_devices", s.queue_devices);
    get_to(obj, "walkers", s.walkers);
    get_to(obj, "statics", s.statics);
    get_to(obj, "duration_s", s.duration_s);
    get_to(obj, "advance_s", s.advance_s);
    get_to(obj, "emission_s", s.emission_s);
    get_to(obj, "slot_spacing_m", s.slot_spacing_m);
    get_to(obj, "first_slot_m", s.first_slot_m);
    get_to(obj, "sniffer_along_m", s.sniffer_along_m);
    get_to(obj, "sniffer_lateral_m", s.sniffer_lateral_m);
    get_to(obj, "walk_step_sigma", s.walk_step_sigma);
    get_to(obj, "p0_dbm", s.radio.p0_dbm);
    get_to(obj, "path_loss_exp", s.radio.path_loss_exp);
    get_to(obj, "shadowing_sigma", s.radio.shadowing_sigma);
    get_to(obj, "antenna_offset_range", s.radio.antenna_offset_range);
    get_to(obj, "drop_prob", s.radio.drop_prob);
}

inline void parse_evaluate(const json& obj, EvaluateConfig& e) {
    reject_unknown(obj, {"folds", "seeds", "classifiers", "sweep"}, "evaluate");
    get_to(obj, "folds", e.folds);
    get_to(obj, "seeds", e.seeds);
    if (obj.contains("classifiers")) {
        e.classifiers.clear();
        for (const auto& name : obj.at("classifiers"))
            e.classifiers.push_back(model_kind_from_string(name.get<std::string>()));
        if (e.classifiers.empty()) throw ConfigError("evaluate.classifiers is empty");
    }
    if (obj.contains("sweep")) {
        const json& sw = obj.at("sweep");
        reject_unknown(sw, {"axis", "values"}, "evaluate.sweep");
        get_to(sw, "axis", e.sweep.axis);
        if (sw.contains("values")) {
            for (const auto& v : sw.at("values")) {
                if (v.is_string())
                    e.sweep.values.push_back(v.get<std::string>());
                else
                    e.sweep.values.push_back(v.dump());
            }
        }
        if (!e.sweep.axis.empty() && e.sweep.values.empty())
            throw ConfigError("evaluate.sweep.axis given without values");
    }
}

// Environment overrides: QDET_<SECTION>_<KEY> (QDET_SEED for the seed),
// e.g. QDET_PIPELINE_BACKTRACK=4 or QDET_MODEL_KIND=naive_bayes.
inline void apply_env_overrides(RunConfig& cfg) {
    auto env_double = [](const char* name, double& out) {
        if (const char* v = std::getenv(name)) out = std::stod(v);
    };
    auto env_int = [](const char* name, int& out) {
        if (const char* v = std::getenv(name)) out = std::stoi(v);
    };
    if (const char* v = std::getenv("QDET_SEED")) cfg.seed = std::stoull(v);
    env_double("QDET_PIPELINE_LAMBDA_S", cfg.pipeline.lambda_s);
    env_double("QDET_PIPELINE_ALPHA", cfg.pipeline.alpha);
    env_double("QDET_PIPELINE_WINDOW_S", cfg.pipeline.window_s);
    env_int("QDET_PIPELINE_BACKTRACK", cfg.pipeline.backtrack);
    env_double("QDET_PIPELINE_TAU_F2", cfg.pipeline.tau_f2_dbm);
    env_double("QDET_PIPELINE_TAU_F3", cfg.pipeline.tau_f3_dbm);
    env_int("QDET_PIPELINE_PEER_COUNT", cfg.pipeline.peer_count);
    env_double("QDET_PIPELINE_TAU_F8", cfg.pipeline.tau_f8);
    if (const char* v = std::getenv("QDET_MODEL_KIND"))
        cfg.model.kind = model_kind_from_string(v);
    env_int("QDET_MODEL_TREES", cfg.model.trees);
    env_int("QDET_MODEL_MAX_DEPTH", cfg.model.max_depth);
    env_double("QDET_SCENARIO_DURATION_S", cfg.scenario.duration_s);
    env_double("QDET_SCENARIO_SHADOWING_SIGMA", cfg.scenario.radio.shadowing_sigma);
    env_double("QDET_SCENARIO_DROP_PROB", cfg.scenario.radio.drop_prob);
    env_int("QDET_EVALUATE_FOLDS", cfg.eval.folds);
    env_int("QDET_EVALUATE_SEEDS", cfg.eval.seeds);
}

} // namespace config_detail

inline RunConfig parse_run_config(const nlohmann::json& root) {
    using namespace config_detail;
    RunConfig cfg;
    reject_unknown(root, {"seed", "pipeline", "model", "scenario", "evaluate"}, "");
    get_to(root, "seed", cfg.seed);
    if (root.contains("pipeline")) parse_pipeline(root.at("pipeline"), cfg.pipeline);
    if (root.contains("model")) parse_model(root.at("model"), cfg.model);
    if (root.contains("scenario")) parse_scenario(root.at("scenario"), cfg.scenario);
    if (root.contains("evaluate")) parse_evaluate(root.at("evaluate"), cfg.eval);
    return cfg;
}

inline RunConfig load_run_config(const std::string& path, bool env_overrides = true) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    RunConfig cfg = parse_run_config(root);
    if (env_overrides) config_detail::apply_env_overrides(cfg);
    cfg.validate();
    return cfg;
}

} // namespace qdet
