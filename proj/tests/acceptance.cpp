// Acceptance suite: end-to-end checks of the whole pipeline on the
// default synthetic scenario. Prints one pass/fail line per criterion;
// exits nonzero if any fail. Takes the CLI binary path as argv[1] for
// the determinism checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "oracle.hpp"
#include "qdet/classify.hpp"
#include "qdet/config.hpp"
#include "qdet/features.hpp"
#include "qdet/harness.hpp"
#include "qdet/io.hpp"
#include "qdet/preprocess.hpp"
#include "qdet/simulate.hpp"

namespace fs = std::filesystem;
using namespace qdet;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    if (!pass) ++g_failures;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / v.size();
}

struct SeedStats {
    std::vector<double> rf3, rf1, dt3, nb3, nb1, rf3_b2;
};

constexpr int kSeeds = 10;
constexpr std::uint64_t kBaseSeed = 1000;

SeedStats collect_seed_stats(double& crit1_seconds) {
    SeedStats stats;
    RunConfig cfg; // spec defaults: 7 queue beacons, 3 walkers, 2 statics, 900 s
    PipelineConfig p8 = cfg.pipeline;
    PipelineConfig p2 = cfg.pipeline;
    p2.backtrack = 2;

    ModelSpec rf{.kind = ModelKind::RandomForest};
    ModelSpec dt{.kind = ModelKind::DecisionTree};
    ModelSpec nb{.kind = ModelKind::NaiveBayes};

    double rf3_time = 0.0;
    for (int s = 0; s < kSeeds; ++s) {
        std::uint64_t seed = kBaseSeed + s;
        auto t0 = std::chrono::steady_clock::now();
        SimulationResult sim = simulate(cfg.scenario.to_scenario_spec(seed));
        Dataset ds3 = build_dataset(sim, p8, 3);
        stats.rf3.push_back(evaluate(ds3, rf, 5, seed).accuracy());
        auto t1 = std::chrono::steady_clock::now();
        rf3_time += std::chrono::duration<double>(t1 - t0).count();

        Dataset ds1 = build_dataset(sim, p8, 1);
        Dataset ds2 = build_dataset(sim, p2, 3);
        stats.rf1.push_back(evaluate(ds1, rf, 5, seed).accuracy());
        stats.dt3.push_back(evaluate(ds3, dt, 5, seed).accuracy());
        stats.nb3.push_back(evaluate(ds3, nb, 5, seed).accuracy());
        stats.nb1.push_back(evaluate(ds1, nb, 5, seed).accuracy());
        stats.rf3_b2.push_back(evaluate(ds2, rf, 5, seed).accuracy());
    }
    crit1_seconds = rf3_time;
    return stats;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

void criterion_1(const SeedStats& stats, double seconds) {
    double m = mean(stats.rf3);
    bool pass = m >= 0.77 && seconds < 120.0;
    report(1, "accuracy floor", pass,
           "random forest mean accuracy " + fmt(m) + " over 10 seeds (floor 0.77), " +
               fmt(seconds) + " s (< 120 s)");
}

void criterion_2(const SeedStats& stats) {
    bool nonneg = true;
    std::vector<double> gains;
    for (int s = 0; s < kSeeds; ++s) {
        double g = stats.rf3[s] - stats.rf1[s];
        gains.push_back(g);
        if (g < 0.0) nonneg = false;
    }
    double mg = mean(gains);
    bool pass = nonneg && mg > 0.0 && mg <= 0.15;
    report(2, "multi-sniffer gain", pass,
           "per-seed gains all >= 0: " + std::string(nonneg ? "yes" : "no") + ", mean gain " +
               fmt(mg) + " in (0, 0.15]");
}

void criterion_3(const SeedStats& stats) {
    double rf_gain = mean(stats.rf3) - mean(stats.rf1);
    double nb_gain = mean(stats.nb3) - mean(stats.nb1);
    bool ordering = mean(stats.rf3) >= mean(stats.dt3);
    bool nb_flat = nb_gain < rf_gain;
    report(3, "classifier ordering", ordering && nb_flat,
           "forest " + fmt(mean(stats.rf3)) + " >= tree " + fmt(mean(stats.dt3)) +
               "; naive bayes sniffer gain " + fmt(nb_gain) + " < forest gain " + fmt(rf_gain));
}

void criterion_4(const SeedStats& stats) {
    double b8 = mean(stats.rf3), b2 = mean(stats.rf3_b2);
    report(4, "backtracking trend", b8 >= b2,
           "mean accuracy b=8 " + fmt(b8) + " >= b=2 " + fmt(b2));
}

void criterion_5() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(424242);
    PipelineConfig cfg; // b=8 over traces of up to 12 windows
    SnifferSet sniffers;
    long checked = 0;
    bool pass = true;
    std::string detail;
    for (int trial = 0; trial < 100 && pass; ++trial) {
        auto packets = gen::random_trace(rng, 5, 720.0);
        StreamSet streams = preprocess_trace(packets, cfg);
        for (const FeatureVector& v : extract_all(streams, cfg)) {
            oracle::Features e = oracle::compute(streams, sniffers, v.device, v.window, cfg);
            auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
            auto opt_close = [&](const std::optional<double>& a, const std::optional<double>& b) {
                return a.has_value() == b.has_value() && (!a || close(*a, *b));
            };
            bool ok = close(v.f1_slope, e.f1) && v.f2_approaching == e.f2 &&
                      v.f3_near_counter == e.f3 && opt_close(v.f4_var_counter, e.f4) &&
                      opt_close(v.f5_var_left, e.f5) && opt_close(v.f6_var_right, e.f6) &&
                      close(v.f7_stay_s, e.f7) && v.f8_mobility_similarity == e.f8 &&
                      opt_close(v.f9_mobility_correlation, e.f9);
            ++checked;
            if (!ok) {
                pass = false;
                detail = "mismatch at device " + v.device + " window " +
                         std::to_string(v.window) + " (trial " + std::to_string(trial) + ")";
                break;
            }
        }
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (pass && seconds >= 30.0) {
        pass = false;
        detail = "too slow";
    }
    if (pass)
        detail = std::to_string(checked) + " feature vectors over 100 traces match to 1e-9, " +
                 fmt(seconds) + " s (< 30 s)";
    report(5, "feature oracle equivalence", pass, detail);
}

void criterion_6() {
    bool pass = true;
    std::string detail = "hand-derived values and boundedness on 1000 random sequences";
    auto falling = desf({{0, -60.0}, {1, -80.0}}, 0.9);
    auto rising = desf({{0, -80.0}, {1, -60.0}}, 0.9);
    if (std::abs(falling[1].value - (-62.0)) > 1e-12) pass = false;
    if (std::abs(rising[1].value - (-62.0)) > 1e-12) pass = false;
    auto constant = desf({{0, -60.0}, {1, -60.0}, {2, -60.0}}, 0.9);
    for (const auto& s : constant)
        if (s.value != -60.0) pass = false;

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> alpha_dist(0.0, 1.0);
    for (int trial = 0; trial < 1000 && pass; ++trial) {
        auto in = gen::random_samples(rng, 60);
        if (in.empty()) continue;
        auto out = desf(in, alpha_dist(rng));
        double lo = in[0].value, hi = in[0].value;
        for (std::size_t i = 0; i < in.size(); ++i) {
            lo = std::min(lo, in[i].value);
            hi = std::max(hi, in[i].value);
            if (out[i].value < lo - 1e-9 || out[i].value > hi + 1e-9) {
                pass = false;
                detail = "boundedness violated at trial " + std::to_string(trial);
                break;
            }
        }
    }
    report(6, "smoothing filter suite", pass, detail);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool run_cmd(const std::string& cmd) {
    return std::system((cmd + " > /dev/null 2>&1").c_str()) == 0;
}

void criterion_7(const std::string& cli) {
    if (cli.empty()) {
        report(7, "command determinism", false, "no CLI binary path given");
        return;
    }
    fs::path root = fs::temp_directory_path() / "qdet_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    fs::path cfg_path = root / "config.json";
    std::ofstream(cfg_path) << R"({
        "seed": 42,
        "model": {"trees": 15},
        "scenario": {"duration_s": 660},
        "evaluate": {"folds": 3, "seeds": 1, "classifiers": ["random_forest"]}
    })";

    struct Step {
        std::string name;
        std::string args; // relative to an --out dir placeholder %OUT%
        std::vector<std::string> outputs;
    };
    // later steps consume the first run's outputs so both runs see identical inputs
    fs::path a0 = root / "sim_a";
    std::vector<Step> steps = {
        {"simulate", "simulate", {"trace.txt", "labels.txt"}},
        {"extract",
         "extract --trace " + (a0 / "trace.txt").string() + " --labels " +
             (a0 / "labels.txt").string(),
         {"features.txt"}},
        {"train", "train --features " + (root / "extract_a/features.txt").string(),
         {"model.txt"}},
        {"classify",
         "classify --features " + (root / "extract_a/features.txt").string() + " --model " +
             (root / "train_a/model.txt").string(),
         {"predictions.txt"}},
        {"evaluate", "evaluate", {"report.txt"}},
    };

    bool pass = true;
    std::string detail = "all five subcommands byte-identical across repeated runs";
    for (const Step& step : steps) {
        for (const char* tag : {"a", "b"}) {
            fs::path out = root / (step.name == "simulate" ? std::string("sim_") + tag
                                                           : step.name + "_" + tag);
            fs::create_directories(out);
            std::string cmd = cli + " " + step.args + " --config " + cfg_path.string() +
                              " --out " + out.string();
            if (!run_cmd(cmd)) {
                pass = false;
                detail = step.name + " exited nonzero";
                break;
            }
        }
        if (!pass) break;
        for (const std::string& file : step.outputs) {
            fs::path pa = root / (step.name == "simulate" ? "sim_a" : step.name + "_a") / file;
            fs::path pb = root / (step.name == "simulate" ? "sim_b" : step.name + "_b") / file;
            if (slurp(pa).empty() || slurp(pa) != slurp(pb)) {
                pass = false;
                detail = step.name + ": " + file + " differs between runs";
                break;
            }
        }
        if (!pass) break;
    }
    report(7, "command determinism", pass, detail);
}

void criterion_8() {
    std::mt19937_64 rng(171717);
    PipelineConfig cfg;
    cfg.backtrack = 3;
    bool pass = true;
    bool f3_changed = false;
    std::string detail;
    for (int trial = 0; trial < 40 && pass; ++trial) {
        auto packets = gen::random_trace(rng);
        std::vector<AdvertisingPacket> base, shifted;
        for (const auto& p : packets) {
            if (p.rssi_dbm + 40 > 0) continue; // keep the +40 dBm shift exact
            base.push_back(p);
            AdvertisingPacket q = p;
            q.rssi_dbm += 40;
            shifted.push_back(q);
        }
        auto va = extract_all(preprocess_trace(base, cfg), cfg);
        auto vb = extract_all(preprocess_trace(shifted, cfg), cfg);
        if (va.size() != vb.size()) {
            pass = false;
            detail = "vector counts differ after shift";
            break;
        }
        for (std::size_t i = 0; i < va.size() && pass; ++i) {
            const FeatureVector& x = va[i];
            const FeatureVector& y = vb[i];
            if (x.f2_approaching && !(x.f1_slope > cfg.tau_f2_dbm)) {
                pass = false;
                detail = "f2 set without f1 above threshold";
            }
            if (x.f9_mobility_correlation &&
                std::abs(*x.f9_mobility_correlation) > 1.0 + 1e-9) {
                pass = false;
                detail = "|f9| above 1";
            }
            for (const auto& var : {x.f4_var_counter, x.f5_var_left, x.f6_var_right})
                if (var && *var < 0.0) {
                    pass = false;
                    detail = "negative variance";
                }
            auto close = [](double a, double b) { return std::abs(a - b) <= 1e-6; };
            bool invariant_fields =
                close(x.f1_slope, y.f1_slope) && x.f2_approaching == y.f2_approaching &&
                x.f8_mobility_similarity == y.f8_mobility_similarity &&
                x.f4_var_counter.has_value() == y.f4_var_counter.has_value() &&
                (!x.f4_var_counter || close(*x.f4_var_counter, *y.f4_var_counter)) &&
                x.f9_mobility_correlation.has_value() == y.f9_mobility_correlation.has_value() &&
                (!x.f9_mobility_correlation ||
                 close(*x.f9_mobility_correlation, *y.f9_mobility_correlation));
            if (!invariant_fields) {
                pass = false;
                detail = "a shift-invariant feature changed under +40 dBm";
            }
            if (x.f3_near_counter != y.f3_near_counter) f3_changed = true;
        }
    }
    if (pass && !f3_changed) {
        pass = false;
        detail = "f3 never changed under the shift";
    }
    if (pass)
        detail = "f2=>f1, |f9|<=1, variance>=0, and the shift-invariance split all hold";
    report(8, "feature invariant suite", pass, detail);
}

} // namespace

int main(int argc, char** argv) {
    std::string cli = argc > 1 ? argv[1] : "";
    double crit1_seconds = 0.0;
    SeedStats stats = collect_seed_stats(crit1_seconds);
    criterion_1(stats, crit1_seconds);
    criterion_2(stats);
    criterion_3(stats);
    criterion_4(stats);
    criterion_5();
    criterion_6();
    criterion_7(cli);
    criterion_8();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
