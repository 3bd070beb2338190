#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "generators.hpp"
#include "qdet/io.hpp"

using namespace qdet;

TEST_CASE("trace files round-trip arbitrary valid traces") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        auto packets = gen::random_trace(rng);
        write_trace("trace_rt.txt", packets);
        auto loaded = read_trace("trace_rt.txt");
        REQUIRE(loaded == packets);
    }
}

TEST_CASE("trace reader rejects malformed and invalid records") {
    {
        std::ofstream out("bad_trace.txt");
        out << "# qdtrace v1\n1000 1 dev0\n"; // missing rssi column
    }
    REQUIRE_THROWS_AS(read_trace("bad_trace.txt"), DataError);
    {
        std::ofstream out("bad_trace.txt");
        out << "# qdtrace v1\n1000 1 dev0 25\n"; // positive rssi
    }
    REQUIRE_THROWS_AS(read_trace("bad_trace.txt"), DataError);
    {
        std::ofstream out("bad_trace.txt");
        out << "# something else\n";
    }
    REQUIRE_THROWS_AS(read_trace("bad_trace.txt"), DataError);
    REQUIRE_THROWS_AS(read_trace("does_not_exist.txt"), DataError);
}

TEST_CASE("label files round-trip") {
    std::map<std::pair<DeviceId, WindowIndex>, Label> labels;
    labels[{"a", 0}] = Label::InQueue;
    labels[{"a", 1}] = Label::NotInQueue;
    labels[{"b", 0}] = Label::NotInQueue;
    write_labels("labels_rt.txt", labels);
    REQUIRE(read_labels("labels_rt.txt") == labels);
}

TEST_CASE("feature files preserve values and missing markers") {
    std::vector<LabeledExample> examples;
    FeatureVector v;
    v.device = "dev0";
    v.window = 9;
    v.f1_slope = -3.25;
    v.f2_approaching = false;
    v.f3_near_counter = true;
    v.f4_var_counter = 1.0 / 3.0; // needs full precision
    v.f5_var_left.reset();
    v.f6_var_right = 0.0;
    v.f7_stay_s = 481.5;
    v.f8_mobility_similarity = true;
    v.f9_mobility_correlation.reset();
    examples.push_back({v, Label::InQueue});
    write_features("features_rt.txt", examples);
    auto loaded = read_features("features_rt.txt");
    REQUIRE(loaded.size() == 1);
    const FeatureVector& w = loaded[0].features;
    REQUIRE(w.device == "dev0");
    REQUIRE(w.window == 9);
    REQUIRE(w.f1_slope == v.f1_slope); // bit-exact
    REQUIRE(w.f4_var_counter == v.f4_var_counter);
    REQUIRE_FALSE(w.f5_var_left.has_value());
    REQUIRE(w.f6_var_right == v.f6_var_right);
    REQUIRE(w.f8_mobility_similarity);
    REQUIRE_FALSE(w.f9_mobility_correlation.has_value());
    REQUIRE(loaded[0].label == Label::InQueue);
}

TEST_CASE("feature reader enforces its schema") {
    {
        std::ofstream out("bad_features.txt");
        out << "# qdfeatures v1\ndevice\twindow\tf1\n"; // header ok, row short
        out << "d\t1\t0.5\n";
    }
    REQUIRE_THROWS_AS(read_features("bad_features.txt"), DataError);
    {
        std::ofstream out("bad_features.txt");
        out << "# qdmodel v1\n"; // wrong file kind
    }
    REQUIRE_THROWS_AS(read_features("bad_features.txt"), DataError);
}

TEST_CASE("config hash is stable and sensitive") {
    PipelineConfig a, b;
    REQUIRE(config_hash(a) == config_hash(b));
    b.backtrack = 4;
    REQUIRE(config_hash(a) != config_hash(b));
}
