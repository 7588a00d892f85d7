#pragma once

// File formats shared between the CLI and the evaluation harness: detection
// reports, ground-truth JSON, scene specs and the CSV outputs.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "metrics.hpp"
#include "pipeline.hpp"
#include "synth.hpp"

namespace hmerw {

using json = nlohmann::json;

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": invalid JSON (" + e.what() + ")");
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// Detection report: {image, threshold, params:{R,K,lambda}, detections:[...]}.
inline json detection_report(const std::string& image_name, const DetectionSet& dets,
                             const PipelineParams& params) {
    json out;
    out["image"] = image_name;
    out["threshold"] = dets.threshold_used;
    out["params"] = {{"R", params.radius}, {"K", params.eig_count}, {"lambda", params.lambda}};
    out["detections"] = json::array();
    for (const Detection& d : dets.detections)
        out["detections"].push_back({{"row", d.row},
                                     {"col", d.col},
                                     {"pixels", d.pixel_count},
                                     {"peak", d.peak_value}});
    return out;
}

// Ground truth: {targets:[{row, col, mask:[[r,c],...]?}]}.
inline json ground_truth_to_json(const GroundTruth& gt) {
    json out;
    out["targets"] = json::array();
    for (const TargetTruth& t : gt.targets) {
        json jt{{"row", t.row}, {"col", t.col}};
        if (!t.mask.empty()) {
            json mask = json::array();
            for (const PixelCoord& p : t.mask) mask.push_back({p.row, p.col});
            jt["mask"] = std::move(mask);
        }
        out["targets"].push_back(std::move(jt));
    }
    return out;
}

inline GroundTruth ground_truth_from_json(const json& j) {
    GroundTruth gt;
    if (!j.contains("targets") || !j["targets"].is_array())
        throw std::runtime_error("ground truth JSON: missing 'targets' array");
    for (const json& jt : j["targets"]) {
        TargetTruth t;
        t.row = jt.at("row").get<int>();
        t.col = jt.at("col").get<int>();
        if (jt.contains("mask"))
            for (const json& p : jt["mask"])
                t.mask.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
        gt.targets.push_back(std::move(t));
    }
    return gt;
}

inline GroundTruth load_ground_truth(const std::string& path) {
    return ground_truth_from_json(read_json_file(path));
}

// Scene spec JSON; unknown keys are rejected to catch typos early.
inline SceneSpec scene_spec_from_json(const json& j) {
    static const std::vector<std::string> known{
        "rows",       "cols",           "base_level",       "gradient_amplitude",
        "clutter_edges", "clutter_amplitude", "targets",     "pnhb_count",
        "pnhb_amplitude", "dead_pixel_count", "noise_sigma", "seed",
        "min_separation"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::runtime_error("scene spec: unknown key '" + key + "'");
    }
    SceneSpec s;
    s.rows = j.value("rows", s.rows);
    s.cols = j.value("cols", s.cols);
    s.base_level = j.value("base_level", s.base_level);
    s.gradient_amplitude = j.value("gradient_amplitude", s.gradient_amplitude);
    s.clutter_edges = j.value("clutter_edges", s.clutter_edges);
    s.clutter_amplitude = j.value("clutter_amplitude", s.clutter_amplitude);
    s.pnhb_count = j.value("pnhb_count", s.pnhb_count);
    s.pnhb_amplitude = j.value("pnhb_amplitude", s.pnhb_amplitude);
    s.dead_pixel_count = j.value("dead_pixel_count", s.dead_pixel_count);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.seed = j.value("seed", s.seed);
    s.min_separation = j.value("min_separation", s.min_separation);
    if (j.contains("targets"))
        for (const json& jt : j["targets"]) {
            TargetSpec t;
            t.row = jt.at("row").get<int>();
            t.col = jt.at("col").get<int>();
            t.amplitude = jt.at("amplitude").get<double>();
            t.sigma = jt.at("sigma").get<double>();
            s.targets.push_back(t);
        }
    return s;
}

inline SceneSpec load_scene_spec(const std::string& path) {
    return scene_spec_from_json(read_json_file(path));
}

inline std::string format_full(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void write_pr_curve_csv(const std::string& path, const MetricsReport& rep) {
    std::ostringstream os;
    os << "threshold,precision,recall\n";
    for (const PrPoint& p : rep.pr_points)
        os << p.threshold << "," << (std::isnan(p.precision) ? "nan" : format_full(p.precision))
           << "," << format_full(p.recall) << "\n";
    write_text_file(path, os.str());
}

inline void write_eigenvalues_csv(const std::string& path, const SpectralBasis& basis) {
    std::ostringstream os;
    os << "k,lambda\n";
    for (size_t i = 0; i < basis.eigenvalues.size(); ++i)
        os << (i + 1) << "," << format_full(basis.eigenvalues[i]) << "\n";
    write_text_file(path, os.str());
}

inline void write_point_cloud_csv(const std::string& path, const PointCloud& cloud) {
    std::ostringstream os;
    os << "x,y,z,is_anomaly\n";
    std::vector<char> is_anom(cloud.points.size(), 0);
    for (int i : cloud.anomaly_indices) is_anom[i] = 1;
    for (size_t i = 0; i < cloud.points.size(); ++i)
        os << format_full(cloud.points[i][0]) << "," << format_full(cloud.points[i][1]) << ","
           << format_full(cloud.points[i][2]) << "," << static_cast<int>(is_anom[i]) << "\n";
    write_text_file(path, os.str());
}

inline void write_stationary_csv(const std::string& path, const StationaryVector& pi,
                                 const std::vector<int>& anomaly_indices) {
    std::ostringstream os;
    os << "node,pi,is_anomaly\n";
    std::vector<char> is_anom(pi.values.size(), 0);
    for (int i : anomaly_indices) is_anom[i] = 1;
    for (size_t i = 0; i < pi.values.size(); ++i)
        os << i << "," << format_full(pi.values[i]) << "," << static_cast<int>(is_anom[i]) << "\n";
    write_text_file(path, os.str());
}

}  // namespace hmerw
