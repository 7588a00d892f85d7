#pragma once

// Contrast-consistency / regional-compactness weight matrix for the random
// walk, plus the degree-based coefficient vector fused with its output map.
//
// Each pixel connects to one most-similar pixel per Chebyshev ring
// r = 2..R: the ring pixel whose intensity is closest to the mean of the
// center's 3x3 neighborhood. The edge weight combines that contrast with a
// ring-smoothness ratio, so compact omni-directional bumps score high while
// single-pixel spikes and directional edges score low.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "image.hpp"
#include "sparse.hpp"

namespace hmerw {

struct PixelCoord {
    int row = 0;
    int col = 0;
    bool operator==(const PixelCoord&) const = default;
};

struct PatchConfig {
    int radius = 5;  // patch is (2R+1) x (2R+1)
    // Strict reading of the ring definition: the r=1 reference mean excludes
    // the center pixel. Default keeps the center (3x3 region mean).
    bool ring_excludes_center = false;

    void validate() const {
        if (radius < 2)
            throw std::invalid_argument("PatchConfig: radius must be >= 2");
    }
};

// Pixels at Chebyshev distance exactly r from the center, clipped to image
// bounds, in row-major order. r = 0 returns the center alone.
inline std::vector<PixelCoord> ring_pixels(PixelCoord center, int r, int rows, int cols) {
    if (r < 0) throw std::invalid_argument("ring_pixels: ring index must be >= 0");
    if (center.row < 0 || center.row >= rows || center.col < 0 || center.col >= cols)
        throw std::invalid_argument("ring_pixels: center outside image bounds");
    std::vector<PixelCoord> out;
    if (r == 0) {
        out.push_back(center);
        return out;
    }
    const int r0 = center.row - r, r1 = center.row + r;
    const int c0 = center.col - r, c1 = center.col + r;
    for (int rr = std::max(r0, 0); rr <= std::min(r1, rows - 1); ++rr) {
        if (rr == r0 || rr == r1) {
            for (int cc = std::max(c0, 0); cc <= std::min(c1, cols - 1); ++cc)
                out.push_back({rr, cc});
        } else {
            if (c0 >= 0) out.push_back({rr, c0});
            if (c1 < cols) out.push_back({rr, c1});
        }
    }
    return out;
}

namespace detail {

// Mean intensity of the r=1 reference region around the center.
inline double reference_mean(const GrayImage& img, PixelCoord center, bool exclude_center) {
    double sum = 0.0;
    int cnt = 0;
    for (int rr = std::max(center.row - 1, 0); rr <= std::min(center.row + 1, img.rows - 1); ++rr)
        for (int cc = std::max(center.col - 1, 0); cc <= std::min(center.col + 1, img.cols - 1); ++cc) {
            if (exclude_center && rr == center.row && cc == center.col) continue;
            sum += img.at(rr, cc);
            ++cnt;
        }
    if (cnt == 0)
        throw std::runtime_error("reference ring is empty (degenerate image)");
    return sum / cnt;
}

}  // namespace detail

// Most-similar pixel of ring r: argmin over the clipped ring of
// |refmean - I(v_s)|, ties broken by row-major scan order.
inline PixelCoord simi(const GrayImage& img, PixelCoord center, int r, const PatchConfig& cfg) {
    cfg.validate();
    if (r < 2 || r > cfg.radius)
        throw std::invalid_argument("simi: ring index must satisfy 2 <= r <= R");
    const double ref = detail::reference_mean(img, center, cfg.ring_excludes_center);
    const std::vector<PixelCoord> ring = ring_pixels(center, r, img.rows, img.cols);
    if (ring.empty())
        throw std::runtime_error("simi: clipped ring is empty (image smaller than patch)");
    PixelCoord best = ring.front();
    double best_diff = std::abs(ref - img.at(best.row, best.col));
    for (size_t i = 1; i < ring.size(); ++i) {
        const double d = std::abs(ref - img.at(ring[i].row, ring[i].col));
        if (d < best_diff) {
            best_diff = d;
            best = ring[i];
        }
    }
    return best;
}

// Asymmetric weight matrix: for node i and each ring r = 2..R exactly one
// entry at j = simi(i, r) with value
//   |refmean(i) - I(j)| * mean(ring \ {j}) / mean(ring).
// A zero ring mean is treated as ratio 1 (an all-zero ring carries no
// smoothness information).
inline SparseWeights build_rccc_weights(const GrayImage& img, const PatchConfig& cfg) {
    cfg.validate();
    const int n = img.rows * img.cols;
    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(n) * (cfg.radius - 1));
    for (int pr = 0; pr < img.rows; ++pr) {
        for (int pc = 0; pc < img.cols; ++pc) {
            const PixelCoord center{pr, pc};
            const int i = pr * img.cols + pc;
            const double ref = detail::reference_mean(img, center, cfg.ring_excludes_center);
            for (int r = 2; r <= cfg.radius; ++r) {
                const std::vector<PixelCoord> ring = ring_pixels(center, r, img.rows, img.cols);
                if (ring.empty())
                    throw std::runtime_error("build_rccc_weights: empty clipped ring");
                PixelCoord best = ring.front();
                double best_diff = std::abs(ref - img.at(best.row, best.col));
                double ring_sum = 0.0;
                for (const PixelCoord& p : ring) {
                    const double v = img.at(p.row, p.col);
                    ring_sum += v;
                    const double d = std::abs(ref - v);
                    if (d < best_diff) {
                        best_diff = d;
                        best = p;
                    }
                }
                const int j = best.row * img.cols + best.col;
                const double contrast = std::abs(ref - img.at(best.row, best.col));
                double ratio = 1.0;
                if (ring_sum > 0.0 && ring.size() > 1) {
                    const double ring_mean = ring_sum / ring.size();
                    const double rest_mean =
                        (ring_sum - img.at(best.row, best.col)) / (ring.size() - 1);
                    ratio = rest_mean / ring_mean;
                }
                trips.push_back({i, j, contrast * ratio});
            }
        }
    }
    return SparseWeights::from_triplets(n, std::move(trips), false);
}

struct CoefficientVector {
    std::vector<double> values;
};

// c_i = (1/(R-1)) * sum_j W_ij: the scaled out-degree of node i in the
// asymmetric matrix.
inline CoefficientVector coefficient_vector(const SparseWeights& w, const PatchConfig& cfg) {
    cfg.validate();
    CoefficientVector c;
    c.values.resize(w.n());
    const double scale = 1.0 / (cfg.radius - 1);
    for (int i = 0; i < w.n(); ++i) c.values[i] = scale * w.row_sum(i);
    return c;
}

}  // namespace hmerw
