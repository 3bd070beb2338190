#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qdet/classify.hpp"
#include "qdet/core.hpp"
#include "qdet/simulate.hpp"

namespace qdet {

inline constexpr const char* kTraceHeader = "# qdtrace v1";
inline constexpr const char* kLabelHeader = "# qdlabels v1";
inline constexpr const char* kFeatureHeader = "# qdfeatures v1";
inline constexpr const char* kModelHeader = "# qdmodel v1";
inline constexpr const char* kPredictionHeader = "# qdpredictions v1";
inline constexpr const char* kReportHeader = "# qdreport v1";

namespace io_detail {

// shortest round-trippable decimal representation
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double parsed = 0.0;
    std::sscanf(buf, "%lf", &parsed);
    if (parsed == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[64];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            std::sscanf(shorter, "%lf", &parsed);
            if (parsed == v) return shorter;
        }
    }
    return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt_double(*v) : "NA";
}

inline std::optional<double> parse_opt(const std::string& s) {
    if (s == "NA") return std::nullopt;
    return std::stod(s);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, sep)) out.push_back(field);
    return out;
}

inline std::ifstream open_input(const std::string& path, const char* header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw DataError(path + ": expected header \"" + header + "\", got \"" + line + "\"");
    return in;
}

inline std::ofstream open_output(const std::string& path, const char* header) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << header << "\n";
    return out;
}

} // namespace io_detail

// --- trace files: one packet per line -------------------------------------

inline void write_trace(const std::string& path, const std::vector<AdvertisingPacket>& packets) {
    auto out = io_detail::open_output(path, kTraceHeader);
    for (const AdvertisingPacket& p : packets)
        out << p.t_ms << ' ' << p.sniffer << ' ' << p.device << ' ' << p.rssi_dbm << '\n';
}

inline std::vector<AdvertisingPacket> read_trace(const std::string& path) {
    auto in = io_detail::open_input(path, kTraceHeader);
    std::vector<AdvertisingPacket> out;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        AdvertisingPacket p;
        std::istringstream ss(line);
        if (!(ss >> p.t_ms >> p.sniffer >> p.device >> p.rssi_dbm))
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed packet record");
        if (p.t_ms < 0 || p.rssi_dbm > 0 || p.device.empty())
            throw DataError(path + ":" + std::to_string(lineno) + ": invalid packet values");
        out.push_back(std::move(p));
    }
    return out;
}

// --- label files: device, window, label ------------------------------------

inline const char* label_name(Label l) {
    return l == Label::InQueue ? "in_queue" : "not_in_queue";
}

inline Label label_from_string(const std::string& s) {
    if (s == "in_queue") return Label::InQueue;
    if (s == "not_in_queue") return Label::NotInQueue;
    throw DataError("unknown label: " + s);
}

inline void write_labels(const std::string& path,
                         const std::map<std::pair<DeviceId, WindowIndex>, Label>& labels) {
    auto out = io_detail::open_output(path, kLabelHeader);
    for (const auto& [key, label] : labels)
        out << key.first << ' ' << key.second << ' ' << label_name(label) << '\n';
}

inline std::map<std::pair<DeviceId, WindowIndex>, Label> read_labels(const std::string& path) {
    auto in = io_detail::open_input(path, kLabelHeader);
    std::map<std::pair<DeviceId, WindowIndex>, Label> out;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        DeviceId device;
        WindowIndex window;
        std::string label;
        if (!(ss >> device >> window >> label))
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed label record");
        out[{device, window}] = label_from_string(label);
    }
    return out;
}

// --- feature files: tab-separated, header row, NA for missing --------------

inline void write_features(const std::string& path, const std::vector<LabeledExample>& examples) {
    auto out = io_detail::open_output(path, kFeatureHeader);
    out << "device\twindow\tf1\tf2\tf3\tf4\tf5\tf6\tf7\tf8\tf9\tlabel\n";
    using io_detail::fmt_double;
    using io_detail::fmt_opt;
    for (const LabeledExample& e : examples) {
        const FeatureVector& v = e.features;
        out << v.device << '\t' << v.window << '\t' << fmt_double(v.f1_slope) << '\t'
            << (v.f2_approaching ? 1 : 0) << '\t' << (v.f3_near_counter ? 1 : 0) << '\t'
            << fmt_opt(v.f4_var_counter) << '\t' << fmt_opt(v.f5_var_left) << '\t'
            << fmt_opt(v.f6_var_right) << '\t' << fmt_double(v.f7_stay_s) << '\t'
            << (v.f8_mobility_similarity ? 1 : 0) << '\t'
            << fmt_opt(v.f9_mobility_correlation) << '\t' << label_name(e.label) << '\n';
    }
}

inline std::vector<LabeledExample> read_features(const std::string& path) {
    auto in = io_detail::open_input(path, kFeatureHeader);
    std::string line;
    if (!std::getline(in, line) || line.rfind("device\twindow", 0) != 0)
        throw DataError(path + ": missing feature column header");
    std::vector<LabeledExample> out;
    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = io_detail::split(line, '\t');
        if (fields.size() != 12)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 12 fields");
        LabeledExample e;
        FeatureVector& v = e.features;
        v.device = fields[0];
        v.window = std::stoll(fields[1]);
        v.f1_slope = std::stod(fields[2]);
        v.f2_approaching = fields[3] == "1";
        v.f3_near_counter = fields[4] == "1";
        v.f4_var_counter = io_detail::parse_opt(fields[5]);
        v.f5_var_left = io_detail::parse_opt(fields[6]);
        v.f6_var_right = io_detail::parse_opt(fields[7]);
        v.f7_stay_s = std::stod(fields[8]);
        v.f8_mobility_similarity = fields[9] == "1";
        v.f9_mobility_correlation = io_detail::parse_opt(fields[10]);
        e.label = label_from_string(fields[11]);
        out.push_back(std::move(e));
    }
    return out;
}

// --- prediction files -------------------------------------------------------

inline void write_predictions(const std::string& path,
                              const std::vector<std::pair<FeatureVector, Label>>& predictions) {
    auto out = io_detail::open_output(path, kPredictionHeader);
    out << "device\twindow\tpredicted\n";
    for (const auto& [v, label] : predictions)
        out << v.device << '\t' << v.window << '\t' << label_name(label) << '\n';
}

// --- model files ------------------------------------------------------------

// FNV-1a over the canonical pipeline-config string; embedded in model
// files so a model can be traced back to its training configuration.
inline std::uint64_t config_hash(const PipelineConfig& c) {
    using io_detail::fmt_double;
    std::string s = fmt_double(c.lambda_s) + "," + fmt_double(c.alpha) + "," +
                    fmt_double(c.window_s) + "," + std::to_string(c.backtrack) + "," +
                    fmt_double(c.tau_f2_dbm) + "," + fmt_double(c.tau_f3_dbm) + "," +
                    std::to_string(c.peer_count) + "," + fmt_double(c.tau_f8) + "," +
                    std::to_string(c.min_paired_windows);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace io_detail {

inline void write_tree(std::ostream& out, const DecisionTreeModel& tree) {
    out << "tree " << tree.nodes.size() << '\n';
    for (const TreeNode& n : tree.nodes)
        out << n.feature << ' ' << fmt_double(n.threshold) << ' ' << static_cast<int>(n.label)
            << ' ' << n.left << ' ' << n.right << '\n';
}

inline DecisionTreeModel read_tree(std::istream& in, const std::string& path) {
    std::string tag;
    std::size_t count = 0;
    if (!(in >> tag >> count) || tag != "tree")
        throw DataError(path + ": malformed tree section");
    DecisionTreeModel tree;
    tree.nodes.resize(count);
    for (TreeNode& n : tree.nodes) {
        int label = 0;
        if (!(in >> n.feature >> n.threshold >> label >> n.left >> n.right))
            throw DataError(path + ": malformed tree node");
        n.label = static_cast<Label>(label);
    }
    return tree;
}

} // namespace io_detail

inline void write_model(const std::string& path, const TrainedModel& model,
                        std::uint64_t train_config_hash) {
    using io_detail::fmt_double;
    auto out = io_detail::open_output(path, kModelHeader);
    out << "kind " << to_string(model.spec.kind) << '\n';
    out << "spec " << model.spec.max_depth << ' ' << model.spec.trees << ' '
        << fmt_double(model.spec.bag_fraction) << ' ' << model.spec.features_per_split << ' '
        << model.spec.seed << '\n';
    out << "config_hash " << train_config_hash << '\n';
    out << "imputer " << fmt_double(model.imputer.max_f4) << ' '
        << fmt_double(model.imputer.max_f5) << ' ' << fmt_double(model.imputer.max_f6) << '\n';

    if (const auto* nb = std::get_if<NaiveBayesModel>(&model.model)) {
        out << "naive_bayes\n";
        out << fmt_double(nb->log_prior[0]) << ' ' << fmt_double(nb->log_prior[1]) << '\n';
        for (int c = 0; c < 2; ++c) {
            for (int f = 0; f < kFeatureCount; ++f)
                out << fmt_double(nb->mean[c][f]) << ' ' << fmt_double(nb->var[c][f]) << ' '
                    << fmt_double(nb->bernoulli[c][f]) << '\n';
        }
    } else if (const auto* tree = std::get_if<DecisionTreeModel>(&model.model)) {
        io_detail::write_tree(out, *tree);
    } else {
        const auto& forest = std::get<RandomForestModel>(model.model);
        out << "forest " << forest.trees.size() << '\n';
        for (const auto& t : forest.trees) io_detail::write_tree(out, t);
    }
}

struct LoadedModel {
    TrainedModel model;
    std::uint64_t train_config_hash = 0;
};

inline LoadedModel read_model(const std::string& path) {
    auto in = io_detail::open_input(path, kModelHeader);
    LoadedModel out;
    std::string tag, kind;
    if (!(in >> tag >> kind) || tag != "kind") throw DataError(path + ": missing model kind");
    out.model.spec.kind = model_kind_from_string(kind);
    if (!(in >> tag >> out.model.spec.max_depth >> out.model.spec.trees >>
          out.model.spec.bag_fraction >> out.model.spec.features_per_split >>
          out.model.spec.seed) ||
        tag != "spec")
        throw DataError(path + ": malformed model spec");
    if (!(in >> tag >> out.train_config_hash) || tag != "config_hash")
        throw DataError(path + ": missing config hash");
    if (!(in >> tag >> out.model.imputer.max_f4 >> out.model.imputer.max_f5 >>
          out.model.imputer.max_f6) ||
        tag != "imputer")
        throw DataError(path + ": malformed imputer record");

    switch (out.model.spec.kind) {
        case ModelKind::NaiveBayes: {
            if (!(in >> tag) || tag != "naive_bayes")
                throw DataError(path + ": malformed naive bayes section");
            NaiveBayesModel nb;
            if (!(in >> nb.log_prior[0] >> nb.log_prior[1]))
                throw DataError(path + ": malformed priors");
            for (int c = 0; c < 2; ++c)
                for (int f = 0; f < kFeatureCount; ++f)
                    if (!(in >> nb.mean[c][f] >> nb.var[c][f] >> nb.bernoulli[c][f]))
                        throw DataError(path + ": malformed likelihood table");
            out.model.model = nb;
            break;
        }
        case ModelKind::DecisionTree:
            out.model.model = io_detail::read_tree(in, path);
            break;
        case ModelKind::RandomForest: {
            std::size_t count = 0;
            if (!(in >> tag >> count) || tag != "forest")
                throw DataError(path + ": malformed forest section");
            RandomForestModel forest;
            for (std::size_t i = 0; i < count; ++i)
                forest.trees.push_back(io_detail::read_tree(in, path));
            out.model.model = std::move(forest);
            break;
        }
    }
    return out;
}

// --- report files -----------------------------------------------------------

struct ReportRow {
    std::string axis;
    std::string value; // numeric or classifier name, kept textual for the file
    std::string classifier;
    int seeds = 0;
    double mean_accuracy = 0.0;
    double min_accuracy = 0.0;
    double max_accuracy = 0.0;
    double mean_precision_in = 0.0;
    double mean_recall_in = 0.0;
};

inline void write_report(const std::string& path, const std::vector<ReportRow>& rows) {
    using io_detail::fmt_double;
    auto out = io_detail::open_output(path, kReportHeader);
    out << "axis\tvalue\tclassifier\tseeds\tmean_accuracy\tmin_accuracy\tmax_accuracy"
           "\tmean_precision_in\tmean_recall_in\n";
    for (const ReportRow& r : rows)
        out << r.axis << '\t' << r.value << '\t' << r.classifier << '\t' << r.seeds << '\t'
            << fmt_double(r.mean_accuracy) << '\t' << fmt_double(r.min_accuracy) << '\t'
            << fmt_double(r.max_accuracy) << '\t' << fmt_double(r.mean_precision_in) << '\t'
            << fmt_double(r.mean_recall_in) << '\n';
}

} // namespace qdet
