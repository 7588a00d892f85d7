#pragma once

// End-to-end detection: filter -> weights -> spectrum -> stationary map ->
// coefficient fusion -> adaptive threshold -> connected components.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "image.hpp"
#include "rccc.hpp"
#include "sparse.hpp"
#include "spectral.hpp"

namespace hmerw {

struct FusionMap {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
};

struct Detection {
    double row = 0.0;  // value-weighted centroid
    double col = 0.0;
    int pixel_count = 0;
    double peak_value = 0.0;
};

struct DetectionSet {
    std::vector<Detection> detections;  // sorted by descending peak value
    double threshold_used = 0.0;
};

enum class WeightKind { rccc, euclidean };

struct PipelineParams {
    int radius = 5;        // patch scale R
    int eig_count = 30;    // K
    double lambda = 10.0;  // threshold multiplier, sensible range [5, 20]
    bool ring_excludes_center = false;
    WeightKind weights = WeightKind::rccc;  // euclidean = ablation path

    void validate() const {
        if (radius < 2) throw std::invalid_argument("PipelineParams: R must be >= 2");
        if (eig_count < 1) throw std::invalid_argument("PipelineParams: K must be >= 1");
        if (!(lambda > 0)) throw std::invalid_argument("PipelineParams: lambda must be > 0");
    }
};

// f_i = pi_i * c_i, reshaped row-major.
inline FusionMap fuse(const StationaryVector& pi, const CoefficientVector& c, int rows, int cols) {
    const size_t n = static_cast<size_t>(rows) * cols;
    if (pi.values.size() != n || c.values.size() != n)
        throw std::invalid_argument("fuse: vector lengths do not match image dimensions");
    FusionMap f;
    f.rows = rows;
    f.cols = cols;
    f.values.resize(n);
    for (size_t i = 0; i < n; ++i) f.values[i] = pi.values[i] * c.values[i];
    return f;
}

// T = mean(F) + lambda * population std(F).
inline double adaptive_threshold(const FusionMap& f, double lambda) {
    if (f.values.empty()) throw std::invalid_argument("adaptive_threshold: empty map");
    double mean = 0.0;
    for (double v : f.values) mean += v;
    mean /= static_cast<double>(f.values.size());
    double var = 0.0;
    for (double v : f.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(f.values.size());
    return mean + lambda * std::sqrt(var);
}

// Groups pixels with value strictly above the threshold by 8-connectivity.
// Each component becomes one detection with value-weighted centroid, pixel
// count and peak value; output is sorted by descending peak.
inline DetectionSet extract_detections(const FusionMap& f, double threshold) {
    DetectionSet out;
    out.threshold_used = threshold;
    const int rows = f.rows, cols = f.cols;
    std::vector<char> above(f.values.size());
    for (size_t i = 0; i < f.values.size(); ++i) above[i] = f.values[i] > threshold ? 1 : 0;

    std::vector<int> stack;
    for (int sr = 0; sr < rows; ++sr) {
        for (int sc = 0; sc < cols; ++sc) {
            const int start = sr * cols + sc;
            if (!above[start]) continue;
            // Flood fill one component.
            stack.assign(1, start);
            above[start] = 0;
            double wsum = 0.0, rsum = 0.0, csum = 0.0, peak = f.values[start];
            double rplain = 0.0, cplain = 0.0;
            int count = 0;
            while (!stack.empty()) {
                const int p = stack.back();
                stack.pop_back();
                const int pr = p / cols, pc = p % cols;
                const double v = f.values[p];
                wsum += v;
                rsum += v * pr;
                csum += v * pc;
                rplain += pr;
                cplain += pc;
                peak = std::max(peak, v);
                ++count;
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int nr = pr + dr, nc = pc + dc;
                        if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
                        const int q = nr * cols + nc;
                        if (above[q]) {
                            above[q] = 0;
                            stack.push_back(q);
                        }
                    }
            }
            Detection d;
            if (wsum > 0) {
                d.row = rsum / wsum;
                d.col = csum / wsum;
            } else {
                d.row = rplain / count;
                d.col = cplain / count;
            }
            d.pixel_count = count;
            d.peak_value = peak;
            out.detections.push_back(d);
        }
    }
    std::stable_sort(out.detections.begin(), out.detections.end(),
                     [](const Detection& a, const Detection& b) { return a.peak_value > b.peak_value; });
    return out;
}

// 8-neighbor lattice weights W_ij = (I_i - I_j)^2, the classical choice the
// designed matrix is ablated against. Symmetric by construction.
inline SparseWeights build_euclidean_weights(const GrayImage& img) {
    const int rows = img.rows, cols = img.cols;
    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(rows) * cols * 8);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int i = r * cols + c;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const int nr = r + dr, nc = c + dc;
                    if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
                    const double d = img.at(r, c) - img.at(nr, nc);
                    trips.push_back({i, nr * cols + nc, d * d});
                }
        }
    return SparseWeights::from_triplets(rows * cols, std::move(trips), true);
}

struct DetectResult {
    FusionMap fusion;
    DetectionSet detections;
    GrayImage filtered;
    StationaryVector stationary;   // HMERW map (all-zero when spectrally empty)
    CoefficientVector coefficient;
    bool spectrally_empty = false;
};

// Full detection chain. A spectrally empty graph (constant image) yields an
// empty detection set rather than an error.
inline DetectResult detect(const GrayImage& img, const PipelineParams& params) {
    params.validate();
    if (img.rows < 2 * params.radius + 1 || img.cols < 2 * params.radius + 1)
        throw std::invalid_argument(
            "detect: image must be at least (2R+1)x(2R+1) = " +
            std::to_string(2 * params.radius + 1) + " pixels per side");

    DetectResult res;
    res.filtered = mean_filter_2x2(img);

    const PatchConfig cfg{params.radius, params.ring_excludes_center};
    SparseWeights w_source = params.weights == WeightKind::rccc
                                 ? build_rccc_weights(res.filtered, cfg)
                                 : build_euclidean_weights(res.filtered);
    res.coefficient = coefficient_vector(w_source, cfg);
    SparseWeights w_sym = params.weights == WeightKind::rccc ? symmetrize(w_source)
                                                             : std::move(w_source);

    const int n = w_sym.n();
    const int k_eff = std::min(params.eig_count, n);
    SpectralBasis basis = top_k_eigenpairs(w_sym, k_eff);

    const bool empty_spectrum =
        std::all_of(basis.eigenvalues.begin(), basis.eigenvalues.end(),
                    [](double l) { return l <= 0.0; });
    if (empty_spectrum) {
        res.spectrally_empty = true;
        res.stationary.values.assign(n, 0.0);
        res.fusion.rows = img.rows;
        res.fusion.cols = img.cols;
        res.fusion.values.assign(n, 0.0);
        res.detections.threshold_used = 0.0;
        return res;
    }

    res.stationary = hmerw_stationary(basis, k_eff);
    if (params.weights == WeightKind::rccc) {
        res.fusion = fuse(res.stationary, res.coefficient, img.rows, img.cols);
    } else {
        // Ablation semantics: the classical weights come without the
        // ring-degree coefficient map, so the walk's stationary map is
        // thresholded directly.
        res.fusion.rows = img.rows;
        res.fusion.cols = img.cols;
        res.fusion.values = res.stationary.values;
    }
    const double threshold = adaptive_threshold(res.fusion, params.lambda);
    res.detections = extract_detections(res.fusion, threshold);
    return res;
}

}  // namespace hmerw
