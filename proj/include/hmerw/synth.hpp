#pragma once

// Seeded synthetic data: a swiss-roll point cloud with controlled anomaly
// gaps for the graph experiments, and infrared-like scenes with exact
// ground truth for the detection pipeline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "image.hpp"
#include "metrics.hpp"
#include "sparse.hpp"

namespace hmerw {

using Point3 = std::array<double, 3>;

struct PointCloud {
    std::vector<Point3> points;
    std::vector<int> anomaly_indices;  // distinct, valid indices into points
};

struct AnomalyGaps {
    double a = 0.0;  // nearest-node distance of each anomaly; requires a > b == c > 0
    double b = 0.0;
    double c = 0.0;
};

namespace detail {

inline double dist3(const Point3& p, const Point3& q) {
    const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double nearest_distance(const std::vector<Point3>& pts, const Point3& q) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point3& p : pts) best = std::min(best, dist3(p, q));
    return best;
}

struct RollSample {
    std::vector<Point3> points;
    std::vector<double> t;  // roll parameter per point, for anchor/normal lookup
};

// Standard roll (t cos t, h, t sin t), t in [1.5pi, 4.5pi], h in [0, 21].
inline RollSample sample_roll(int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(1.5 * M_PI, 4.5 * M_PI);
    std::uniform_real_distribution<double> uh(0.0, 21.0);
    RollSample s;
    s.points.reserve(n);
    s.t.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double t = ut(rng);
        const double h = uh(rng);
        s.points.push_back({t * std::cos(t), h, t * std::sin(t)});
        s.t.push_back(t);
    }
    return s;
}

// Outward unit normal of the roll surface at parameter t.
inline Point3 roll_outward_normal(double t) {
    const double nx = std::sin(t) + t * std::cos(t);
    const double nz = -(std::cos(t) - t * std::sin(t));
    const double nm = std::sqrt(nx * nx + nz * nz);
    return {nx / nm, 0.0, nz / nm};
}

}  // namespace detail

// Median nearest-neighbor spacing of a cloud (exhaustive scan).
inline double median_nn_spacing(const std::vector<Point3>& pts) {
    if (pts.size() < 2) throw std::invalid_argument("median_nn_spacing: need >= 2 points");
    std::vector<double> nn(pts.size(), std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) {
            const double d = detail::dist3(pts[i], pts[j]);
            nn[i] = std::min(nn[i], d);
            nn[j] = std::min(nn[j], d);
        }
    std::nth_element(nn.begin(), nn.begin() + nn.size() / 2, nn.end());
    return nn[nn.size() / 2];
}

// Swiss roll with three off-surface anomalies whose nearest-node distances
// equal the requested gaps within 1%. Gaps are absolute cloud units.
inline PointCloud swiss_roll(int n, const AnomalyGaps& gaps, uint64_t seed) {
    if (n < 100) throw std::invalid_argument("swiss_roll: need n >= 100");
    if (!(gaps.a > gaps.b) || gaps.b != gaps.c || !(gaps.c > 0))
        throw std::invalid_argument("swiss_roll: gaps must satisfy a > b == c > 0");

    detail::RollSample s = detail::sample_roll(n, seed);

    // Anchors at fixed parameter quantiles keep the anomalies well apart.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return s.t[x] < s.t[y]; });
    const std::array<double, 3> quantiles{0.25, 0.55, 0.85};
    const std::array<double, 3> gap_of{gaps.a, gaps.b, gaps.c};

    PointCloud cloud;
    cloud.points = s.points;
    for (int a = 0; a < 3; ++a) {
        const int anchor = order[static_cast<size_t>(quantiles[a] * (n - 1))];
        const Point3 base = s.points[anchor];
        const Point3 nrm = detail::roll_outward_normal(s.t[anchor]);
        const double g = gap_of[a];

        auto offset_point = [&](double alpha) {
            return Point3{base[0] + alpha * nrm[0], base[1] + alpha * nrm[1],
                          base[2] + alpha * nrm[2]};
        };
        double lo = 0.0, hi = 3.0 * g;
        if (detail::nearest_distance(s.points, offset_point(hi)) < g)
            throw std::runtime_error("swiss_roll: infeasible gap (anomaly would collide "
                                     "with the manifold)");
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (detail::nearest_distance(s.points, offset_point(mid)) < g)
                lo = mid;
            else
                hi = mid;
        }
        const Point3 q = offset_point(hi);
        const double achieved = detail::nearest_distance(s.points, q);
        if (std::abs(achieved - g) > 0.01 * g)
            throw std::runtime_error("swiss_roll: could not realize anomaly gap within 1%");
        cloud.anomaly_indices.push_back(static_cast<int>(cloud.points.size()));
        cloud.points.push_back(q);
    }
    return cloud;
}

// Convenience: gaps expressed as multiples of the background's median
// nearest-neighbor spacing.
inline PointCloud swiss_roll_relative(int n, const AnomalyGaps& rel, uint64_t seed) {
    detail::RollSample s = detail::sample_roll(n, seed);
    const double sigma = median_nn_spacing(s.points);
    return swiss_roll(n, AnomalyGaps{rel.a * sigma, rel.b * sigma, rel.c * sigma}, seed);
}

enum class KnnWeighting { euclidean, gaussian };

// Union-symmetrized k-nearest-neighbor graph. Euclidean weighting assigns
// the squared distance, gaussian exp(alpha * d^2). Neighbor ties break by
// index, duplicates included.
inline SparseWeights knn_graph(const PointCloud& cloud, int k,
                               KnnWeighting weighting = KnnWeighting::euclidean,
                               double alpha = 0.0) {
    const int n = static_cast<int>(cloud.points.size());
    if (k < 1 || k >= n) throw std::invalid_argument("knn_graph: need 1 <= k < node count");

    std::vector<std::pair<int, int>> edges;  // canonical (min,max) pairs
    edges.reserve(static_cast<size_t>(n) * k);
    std::vector<std::pair<double, int>> cand(n - 1);  // (squared distance, index)
    for (int i = 0; i < n; ++i) {
        const Point3& pi = cloud.points[i];
        int m = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const Point3& pj = cloud.points[j];
            const double dx = pi[0] - pj[0], dy = pi[1] - pj[1], dz = pi[2] - pj[2];
            cand[m++] = {dx * dx + dy * dy + dz * dz, j};
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (int e = 0; e < k; ++e) {
            const int j = cand[e].second;
            edges.push_back({std::min(i, j), std::max(i, j)});
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<Triplet> trips;
    trips.reserve(edges.size() * 2);
    for (const auto& [i, j] : edges) {
        const double d = detail::dist3(cloud.points[i], cloud.points[j]);
        const double w = weighting == KnnWeighting::euclidean ? d * d
                                                              : std::exp(alpha * d * d);
        trips.push_back({i, j, w});
        trips.push_back({j, i, w});
    }
    return SparseWeights::from_triplets(n, std::move(trips), true);
}

struct TargetSpec {
    int row = 0;
    int col = 0;
    double amplitude = 0.0;
    double sigma = 1.0;  // spatial extent in pixels
};

struct SceneSpec {
    int rows = 96;
    int cols = 96;
    double base_level = 60.0;
    double gradient_amplitude = 0.0;   // peak-to-peak of a smooth linear ramp
    int clutter_edges = 0;             // hard-edged rectangular clutter regions
    double clutter_amplitude = 0.0;
    std::vector<TargetSpec> targets;
    int pnhb_count = 0;                // single-pixel high-brightness spikes
    double pnhb_amplitude = 0.0;
    int dead_pixel_count = 0;          // stress option: pixels forced to zero
    double noise_sigma = 0.0;
    uint64_t seed = 1;
    int min_separation = 10;           // Chebyshev floor between target centers
};

// Renders a scene and its exact ground truth. The mask of each target is
// the set of pixels where its bump exceeds 10% of the amplitude; masks must
// stay small-target sized (<= 80 pixels inside a 9x7 box).
inline std::pair<GrayImage, GroundTruth> render_scene(const SceneSpec& spec) {
    if (spec.rows < 8 || spec.cols < 8)
        throw std::invalid_argument("render_scene: scene too small");
    for (size_t a = 0; a < spec.targets.size(); ++a) {
        const TargetSpec& t = spec.targets[a];
        if (t.row < 0 || t.row >= spec.rows || t.col < 0 || t.col >= spec.cols)
            throw std::invalid_argument("render_scene: target center outside scene");
        if (!(t.sigma > 0) || !(t.amplitude > 0))
            throw std::invalid_argument("render_scene: target amplitude and sigma must be positive");
        for (size_t b = a + 1; b < spec.targets.size(); ++b) {
            const int d = std::max(std::abs(t.row - spec.targets[b].row),
                                   std::abs(t.col - spec.targets[b].col));
            if (d < spec.min_separation)
                throw std::invalid_argument("render_scene: overlapping targets (centers closer "
                                            "than the minimum separation)");
        }
    }

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    GrayImage img(spec.rows, spec.cols, spec.base_level);

    if (spec.gradient_amplitude != 0.0) {
        const double phi = unit(rng) * 2.0 * M_PI;
        const double dr = std::cos(phi), dc = std::sin(phi);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int r = 0; r < spec.rows; ++r)
            for (int c = 0; c < spec.cols; ++c) {
                const double p = dr * r + dc * c;
                lo = std::min(lo, p);
                hi = std::max(hi, p);
            }
        const double span = hi > lo ? hi - lo : 1.0;
        for (int r = 0; r < spec.rows; ++r)
            for (int c = 0; c < spec.cols; ++c)
                img.at(r, c) += spec.gradient_amplitude * ((dr * r + dc * c) - lo) / span;
    }

    for (int e = 0; e < spec.clutter_edges; ++e) {
        // Full-width band with hard step edges (sea-sky / cloud boundary style).
        const int h = 6 + static_cast<int>(unit(rng) * spec.rows * 0.25);
        const int r0 = static_cast<int>(unit(rng) * std::max(spec.rows - h, 1));
        const double amp = spec.clutter_amplitude * (0.5 + 0.5 * unit(rng));
        for (int r = r0; r < std::min(r0 + h, spec.rows); ++r)
            for (int c = 0; c < spec.cols; ++c) img.at(r, c) += amp;
    }

    GroundTruth gt;
    for (const TargetSpec& t : spec.targets) {
        const int reach = static_cast<int>(std::ceil(4.0 * t.sigma));
        TargetTruth truth;
        truth.row = t.row;
        truth.col = t.col;
        for (int r = std::max(t.row - reach, 0); r <= std::min(t.row + reach, spec.rows - 1); ++r)
            for (int c = std::max(t.col - reach, 0); c <= std::min(t.col + reach, spec.cols - 1); ++c) {
                const double d2 = static_cast<double>(r - t.row) * (r - t.row) +
                                  static_cast<double>(c - t.col) * (c - t.col);
                const double bump = t.amplitude * std::exp(-d2 / (2.0 * t.sigma * t.sigma));
                img.at(r, c) += bump;
                if (bump > 0.1 * t.amplitude) truth.mask.push_back({r, c});
            }
        if (truth.mask.empty() || truth.mask.size() > 80)
            throw std::invalid_argument("render_scene: target mask is not small-target sized");
        int rmin = spec.rows, rmax = -1, cmin = spec.cols, cmax = -1;
        for (const PixelCoord& p : truth.mask) {
            rmin = std::min(rmin, p.row);
            rmax = std::max(rmax, p.row);
            cmin = std::min(cmin, p.col);
            cmax = std::max(cmax, p.col);
        }
        if (rmax - rmin + 1 > 9 || cmax - cmin + 1 > 7)
            throw std::invalid_argument("render_scene: target footprint exceeds 9x7 pixels");
        gt.targets.push_back(std::move(truth));
    }

    // PNHB spikes keep clear of every target so the ground truth stays exact.
    auto near_target = [&](int r, int c) {
        for (const TargetSpec& t : spec.targets)
            if (std::max(std::abs(r - t.row), std::abs(c - t.col)) < spec.min_separation)
                return true;
        return false;
    };
    for (int p = 0; p < spec.pnhb_count; ++p) {
        for (int attempt = 0; attempt < 256; ++attempt) {
            const int r = static_cast<int>(unit(rng) * spec.rows);
            const int c = static_cast<int>(unit(rng) * spec.cols);
            if (r >= spec.rows || c >= spec.cols || near_target(r, c)) continue;
            img.at(r, c) += spec.pnhb_amplitude;
            break;
        }
    }

    if (spec.noise_sigma > 0.0) {
        std::normal_distribution<double> gauss(0.0, spec.noise_sigma);
        for (double& v : img.data) v += gauss(rng);
    }
    for (int p = 0; p < spec.dead_pixel_count; ++p) {
        const int r = static_cast<int>(unit(rng) * spec.rows);
        const int c = static_cast<int>(unit(rng) * spec.cols);
        if (r < spec.rows && c < spec.cols && !near_target(r, c)) img.at(r, c) = 0.0;
    }
    for (double& v : img.data) v = std::clamp(v, 0.0, 255.0);
    return {std::move(img), std::move(gt)};
}

}  // namespace hmerw
