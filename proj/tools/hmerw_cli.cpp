// Command-line front end: detection, evaluation sweeps and the synthetic
// experiments, all reproducible from a single --seed.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hmerw/hmerw.hpp"

namespace fs = std::filesystem;
using hmerw::json;

namespace {

struct CommonParams {
    int radius = 5;
    int eig_count = 30;
    double lambda = 10.0;
    bool ring_excludes_center = false;
    std::string weights = "rccc";
    int jobs = 1;

    hmerw::PipelineParams pipeline() const {
        hmerw::PipelineParams p;
        p.radius = radius;
        p.eig_count = eig_count;
        p.lambda = lambda;
        p.ring_excludes_center = ring_excludes_center;
        p.weights = weights == "euclidean" ? hmerw::WeightKind::euclidean
                                           : hmerw::WeightKind::rccc;
        return p;
    }

    json to_json() const {
        return {{"R", radius},
                {"K", eig_count},
                {"lambda", lambda},
                {"ring_excludes_center", ring_excludes_center},
                {"weights", weights},
                {"jobs", jobs}};
    }
};

void add_common_flags(CLI::App* cmd, CommonParams& p) {
    cmd->add_option("-R,--radius", p.radius, "Patch radius R (>= 2)")
        ->check(CLI::Range(2, 64));
    cmd->add_option("-K,--eigenpairs", p.eig_count, "Number of retained eigenpairs K")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--lambda", p.lambda, "Threshold multiplier (sensible range [5, 20])")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--ring-excludes-center", p.ring_excludes_center,
                  "Exclude the center pixel from the r=1 reference mean");
    cmd->add_option("--weights", p.weights, "Weight matrix: rccc (default) or euclidean")
        ->check(CLI::IsMember({"rccc", "euclidean"}));
    cmd->add_option("--jobs", p.jobs, "Worker threads for corpus processing")
        ->check(CLI::PositiveNumber);
}

void write_run_config(const fs::path& out_dir, const std::string& command, json extra) {
    extra["command"] = command;
    hmerw::write_json_file((out_dir / "run.json").string(), extra);
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads; first exception wins.
template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string stem_of(const fs::path& p) { return p.stem().string(); }

int run_detect(const std::vector<std::string>& inputs, const std::string& out_dir,
               const CommonParams& common, bool emit_intermediates) {
    fs::create_directories(out_dir);
    const hmerw::PipelineParams params = common.pipeline();
    params.validate();

    std::vector<std::string> failures(inputs.size());
    parallel_for(static_cast<int>(inputs.size()), common.jobs, [&](int i) {
        const fs::path in_path(inputs[i]);
        const hmerw::GrayImage img = hmerw::load_image(in_path.string());
        const hmerw::DetectResult res = hmerw::detect(img, params);
        const std::string stem = stem_of(in_path);
        const fs::path base = fs::path(out_dir) / stem;
        hmerw::write_json_file(base.string() + ".detections.json",
                               hmerw::detection_report(in_path.filename().string(),
                                                       res.detections, params));
        hmerw::write_pgm_normalized(base.string() + ".fusion.pgm", res.fusion.values,
                                    res.fusion.rows, res.fusion.cols);
        if (emit_intermediates) {
            hmerw::write_pgm_normalized(base.string() + ".filtered.pgm", res.filtered);
            hmerw::write_pgm_normalized(base.string() + ".hmerw.pgm", res.stationary.values,
                                        img.rows, img.cols);
            hmerw::write_pgm_normalized(base.string() + ".coefficient.pgm",
                                        res.coefficient.values, img.rows, img.cols);
        }
    });

    json cfg = common.to_json();
    cfg["inputs"] = inputs;
    cfg["emit_intermediates"] = emit_intermediates;
    write_run_config(out_dir, "detect", cfg);
    return 0;
}

struct EvalOutcome {
    double mean_lcg = 0.0;
    double mean_bsf = 0.0;
    double aupr = 0.0;
};

// Shared by `eval` and `sweep`: detect over a paired corpus, write the CSV
// artifacts into out_dir and return the summary numbers.
EvalOutcome run_eval_corpus(const std::string& input_dir, const std::string& out_dir,
                            const CommonParams& common) {
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(input_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".png") images.push_back(entry.path());
    }
    std::sort(images.begin(), images.end());
    if (images.empty()) throw std::runtime_error("no images found in " + input_dir);

    std::vector<fs::path> gt_paths;
    for (const fs::path& img : images) {
        fs::path gt = img;
        gt.replace_extension();
        gt += ".gt.json";
        if (!fs::exists(gt))
            throw std::runtime_error("missing ground truth for " + img.string() +
                                     " (expected " + gt.string() + ")");
        gt_paths.push_back(gt);
    }

    fs::create_directories(out_dir);
    const hmerw::PipelineParams params = common.pipeline();
    params.validate();

    const int count = static_cast<int>(images.size());
    std::vector<hmerw::Map8> maps(count);
    std::vector<hmerw::GroundTruth> gts(count);
    std::vector<double> lcgs(count, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> bsfs(count, 0.0);

    parallel_for(count, common.jobs, [&](int i) {
        const hmerw::GrayImage img = hmerw::load_image(images[i].string());
        gts[i] = hmerw::load_ground_truth(gt_paths[i].string());
        const hmerw::DetectResult res = hmerw::detect(img, params);
        maps[i] = hmerw::normalize_to_8bit(res.fusion);
        bsfs[i] = hmerw::bsf(img, res.fusion);
        if (!gts[i].targets.empty())
            lcgs[i] = hmerw::lcg(img, res.fusion, gts[i], params.radius);
    });

    const hmerw::MetricsReport rep = hmerw::pr_sweep(maps, gts);
    hmerw::write_pr_curve_csv((fs::path(out_dir) / "pr_curve.csv").string(), rep);
    hmerw::write_text_file((fs::path(out_dir) / "aupr.txt").string(),
                           hmerw::format_full(rep.aupr) + "\n");

    std::ostringstream summary;
    summary << "image,lcg,bsf\n";
    EvalOutcome outcome;
    outcome.aupr = rep.aupr;
    int lcg_count = 0;
    for (int i = 0; i < count; ++i) {
        summary << images[i].filename().string() << ","
                << (std::isnan(lcgs[i]) ? "nan" : hmerw::format_full(lcgs[i])) << ","
                << hmerw::format_full(bsfs[i]) << "\n";
        outcome.mean_bsf += bsfs[i];
        if (!std::isnan(lcgs[i])) {
            outcome.mean_lcg += lcgs[i];
            ++lcg_count;
        }
    }
    outcome.mean_bsf /= count;
    outcome.mean_lcg = lcg_count > 0 ? outcome.mean_lcg / lcg_count
                                     : std::numeric_limits<double>::quiet_NaN();
    hmerw::write_text_file((fs::path(out_dir) / "summary.csv").string(), summary.str());
    return outcome;
}

int run_eval(const std::string& input_dir, const std::string& out_dir,
             const CommonParams& common) {
    run_eval_corpus(input_dir, out_dir, common);
    json cfg = common.to_json();
    cfg["input"] = input_dir;
    write_run_config(out_dir, "eval", cfg);
    return 0;
}

int run_sweep(const std::string& input_dir, const std::string& out_dir,
              const CommonParams& common, const std::string& param, double from, double to,
              double step) {
    if (param != "R" && param != "K" && param != "lambda")
        throw CLI::ValidationError("--param must be one of R, K, lambda");
    if (!(step > 0) || to < from)
        throw CLI::ValidationError("sweep range requires from <= to and step > 0");

    fs::create_directories(out_dir);
    std::ostringstream csv;
    csv << "param,value,mean_lcg,mean_bsf,aupr\n";
    for (double v = from; v <= to + 1e-9; v += step) {
        CommonParams local = common;
        std::string label;
        if (param == "R") {
            local.radius = static_cast<int>(std::lround(v));
            label = std::to_string(local.radius);
        } else if (param == "K") {
            local.eig_count = static_cast<int>(std::lround(v));
            label = std::to_string(local.eig_count);
        } else {
            local.lambda = v;
            label = hmerw::format_full(v);
        }
        const fs::path sub = fs::path(out_dir) / (param + "_" + label);
        const EvalOutcome out = run_eval_corpus(input_dir, sub.string(), local);
        csv << param << "," << label << ","
            << (std::isnan(out.mean_lcg) ? "nan" : hmerw::format_full(out.mean_lcg)) << ","
            << hmerw::format_full(out.mean_bsf) << "," << hmerw::format_full(out.aupr) << "\n";
    }
    hmerw::write_text_file((fs::path(out_dir) / "sweep.csv").string(), csv.str());

    json cfg = common.to_json();
    cfg["input"] = input_dir;
    cfg["param"] = param;
    cfg["from"] = from;
    cfg["to"] = to;
    cfg["step"] = step;
    write_run_config(out_dir, "sweep", cfg);
    return 0;
}

int run_swissroll(const std::string& out_dir, int nodes, int knn, const std::string& weighting,
                  double alpha, uint64_t seed, std::vector<double> gaps,
                  std::vector<int> levels) {
    if (gaps.size() != 3) throw CLI::ValidationError("--gaps needs exactly three values");
    fs::create_directories(out_dir);

    const hmerw::PointCloud cloud = hmerw::swiss_roll_relative(
        nodes, hmerw::AnomalyGaps{gaps[0], gaps[1], gaps[2]}, seed);
    hmerw::write_point_cloud_csv((fs::path(out_dir) / "cloud.csv").string(), cloud);

    const hmerw::KnnWeighting kind = weighting == "gaussian" ? hmerw::KnnWeighting::gaussian
                                                             : hmerw::KnnWeighting::euclidean;
    const hmerw::SparseWeights w = hmerw::knn_graph(cloud, knn, kind, alpha);

    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const int k_max = levels.back();
    const hmerw::SpectralBasis basis = hmerw::top_k_eigenpairs(w, k_max);
    hmerw::write_eigenvalues_csv((fs::path(out_dir) / "eigenvalues.csv").string(), basis);

    std::ostringstream report;
    report << "swiss roll separation report\n";
    report << "nodes=" << nodes << " knn=" << knn << " weighting=" << weighting
           << " seed=" << seed << "\n\n";
    for (int K : levels) {
        const hmerw::StationaryVector pi = hmerw::hmerw_stationary(basis, K);
        std::ostringstream name;
        name << "swissroll_K" << K << ".csv";
        hmerw::write_stationary_csv((fs::path(out_dir) / name.str()).string(), pi,
                                    cloud.anomaly_indices);

        // Percentile rank of each anomaly against the background distribution.
        std::vector<double> background;
        background.reserve(pi.values.size());
        std::vector<char> is_anom(pi.values.size(), 0);
        for (int idx : cloud.anomaly_indices) is_anom[idx] = 1;
        for (size_t i = 0; i < pi.values.size(); ++i)
            if (!is_anom[i]) background.push_back(pi.values[i]);
        std::sort(background.begin(), background.end());

        report << "K=" << K << "\n";
        const char* names[3] = {"A", "B", "C"};
        for (size_t a = 0; a < cloud.anomaly_indices.size(); ++a) {
            const double v = pi.values[cloud.anomaly_indices[a]];
            const size_t below =
                std::lower_bound(background.begin(), background.end(), v) - background.begin();
            const double pct = 100.0 * static_cast<double>(below) / background.size();
            report << "  anomaly " << names[a] << ": pi=" << hmerw::format_full(v)
                   << " percentile=" << pct << "\n";
        }
        report << "\n";
    }
    hmerw::write_text_file((fs::path(out_dir) / "separation_report.txt").string(), report.str());

    write_run_config(out_dir, "simulate-swissroll",
                     {{"nodes", nodes},
                      {"knn", knn},
                      {"weighting", weighting},
                      {"alpha", alpha},
                      {"seed", seed},
                      {"gaps", gaps},
                      {"levels", levels}});
    return 0;
}

int run_render(const std::string& spec_path, const std::string& out_dir, int count,
               int64_t seed_override, const std::string& prefix) {
    fs::create_directories(out_dir);
    hmerw::SceneSpec spec = hmerw::load_scene_spec(spec_path);
    if (seed_override >= 0) spec.seed = static_cast<uint64_t>(seed_override);

    for (int i = 0; i < count; ++i) {
        hmerw::SceneSpec local = spec;
        local.seed = spec.seed + static_cast<uint64_t>(i);
        const auto [img, gt] = hmerw::render_scene(local);
        std::ostringstream stem;
        stem << prefix << "_" << std::setw(3) << std::setfill('0') << i;
        const fs::path base = fs::path(out_dir) / stem.str();
        hmerw::write_pgm_normalized(base.string() + ".pgm", img);
        hmerw::write_json_file(base.string() + ".gt.json", hmerw::ground_truth_to_json(gt));
    }

    write_run_config(out_dir, "render-scene",
                     {{"spec", spec_path},
                      {"count", count},
                      {"seed", spec.seed},
                      {"prefix", prefix}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Small target detection via hierarchical maximal entropy random walks"};
    app.require_subcommand(1);

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "Detect targets in grayscale images");
    std::vector<std::string> detect_inputs;
    std::string detect_out = "out";
    bool emit_intermediates = false;
    CommonParams detect_params;
    detect_cmd->add_option("--input", detect_inputs, "Input image(s), PGM P5 or 8-bit gray PNG")
        ->required();
    detect_cmd->add_option("--out", detect_out, "Output directory");
    detect_cmd->add_flag("--emit-intermediates", emit_intermediates,
                         "Also write filtered/hmerw/coefficient maps");
    add_common_flags(detect_cmd, detect_params);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a corpus of images + ground truth");
    std::string eval_in, eval_out = "eval_out";
    CommonParams eval_params;
    eval_cmd->add_option("--input", eval_in, "Directory of images with *.gt.json files")
        ->required();
    eval_cmd->add_option("--out", eval_out, "Output directory");
    add_common_flags(eval_cmd, eval_params);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate across one parameter range");
    std::string sweep_in, sweep_out = "sweep_out", sweep_param;
    double sweep_from = 0, sweep_to = 0, sweep_step = 1;
    CommonParams sweep_params;
    sweep_cmd->add_option("--input", sweep_in, "Directory of images with *.gt.json files")
        ->required();
    sweep_cmd->add_option("--out", sweep_out, "Output directory");
    sweep_cmd->add_option("--param", sweep_param, "Swept parameter: R, K or lambda")->required();
    sweep_cmd->add_option("--from", sweep_from, "Range start")->required();
    sweep_cmd->add_option("--to", sweep_to, "Range end (inclusive)")->required();
    sweep_cmd->add_option("--step", sweep_step, "Range step");
    add_common_flags(sweep_cmd, sweep_params);

    // simulate-swissroll
    auto* roll_cmd = app.add_subcommand("simulate-swissroll",
                                        "Anomaly separation experiment on a swiss roll");
    std::string roll_out = "swissroll_out", roll_weighting = "euclidean";
    int roll_nodes = 10000, roll_knn = 10;
    double roll_alpha = -0.05;
    uint64_t roll_seed = 1;
    std::vector<double> roll_gaps{3.0, 1.5, 1.5};
    std::vector<int> roll_levels{1, 2, 3, 50};
    roll_cmd->add_option("--out", roll_out, "Output directory");
    roll_cmd->add_option("--nodes", roll_nodes, "Background node count")
        ->check(CLI::Range(100, 1000000));
    roll_cmd->add_option("--knn", roll_knn, "Neighbors per node")->check(CLI::PositiveNumber);
    roll_cmd->add_option("--weighting", roll_weighting, "euclidean or gaussian")
        ->check(CLI::IsMember({"euclidean", "gaussian"}));
    roll_cmd->add_option("--alpha", roll_alpha, "Gaussian weighting exponent");
    roll_cmd->add_option("--seed", roll_seed, "Generation seed");
    roll_cmd->add_option("--gaps", roll_gaps,
                         "Anomaly gaps A,B,C as multiples of median NN spacing")
        ->expected(3);
    roll_cmd->add_option("--levels", roll_levels, "Decomposition depths K to report");

    // render-scene
    auto* render_cmd = app.add_subcommand("render-scene",
                                          "Render synthetic scenes with ground truth");
    std::string render_spec, render_out = "scenes", render_prefix = "scene";
    int render_count = 1;
    int64_t render_seed = -1;
    render_cmd->add_option("--spec", render_spec, "Scene spec JSON")->required();
    render_cmd->add_option("--out", render_out, "Output directory");
    render_cmd->add_option("--count", render_count, "Number of scenes (seeds seed..seed+N-1)")
        ->check(CLI::PositiveNumber);
    render_cmd->add_option("--seed", render_seed, "Override the spec's base seed");
    render_cmd->add_option("--prefix", render_prefix, "Output filename prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (detect_cmd->parsed())
            return run_detect(detect_inputs, detect_out, detect_params, emit_intermediates);
        if (eval_cmd->parsed()) return run_eval(eval_in, eval_out, eval_params);
        if (sweep_cmd->parsed())
            return run_sweep(sweep_in, sweep_out, sweep_params, sweep_param, sweep_from,
                             sweep_to, sweep_step);
        if (roll_cmd->parsed())
            return run_swissroll(roll_out, roll_nodes, roll_knn, roll_weighting, roll_alpha,
                                 roll_seed, roll_gaps, roll_levels);
        if (render_cmd->parsed())
            return run_render(render_spec, render_out, render_count, render_seed, render_prefix);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
