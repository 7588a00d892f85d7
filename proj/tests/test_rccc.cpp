#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "hmerw/rccc.hpp"

using namespace hmerw;

namespace {

GrayImage random_image(int rows, int cols, uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    GrayImage img(rows, cols);
    for (double& v : img.data) v = u(rng);
    return img;
}

// Brute-force ring oracle: scan every pixel against the Chebyshev predicate.
std::vector<PixelCoord> ring_oracle(PixelCoord center, int r, int rows, int cols) {
    std::vector<PixelCoord> out;
    for (int rr = 0; rr < rows; ++rr)
        for (int cc = 0; cc < cols; ++cc)
            if (std::max(std::abs(rr - center.row), std::abs(cc - center.col)) == r)
                out.push_back({rr, cc});
    return out;
}

double ref_mean_oracle(const GrayImage& img, PixelCoord center, bool exclude_center) {
    double sum = 0.0;
    int cnt = 0;
    for (int rr = 0; rr < img.rows; ++rr)
        for (int cc = 0; cc < img.cols; ++cc) {
            const int d = std::max(std::abs(rr - center.row), std::abs(cc - center.col));
            if (d > 1) continue;
            if (exclude_center && d == 0) continue;
            sum += img.at(rr, cc);
            ++cnt;
        }
    return sum / cnt;
}

PixelCoord simi_oracle(const GrayImage& img, PixelCoord center, int r, bool exclude_center) {
    const double ref = ref_mean_oracle(img, center, exclude_center);
    const std::vector<PixelCoord> ring = ring_oracle(center, r, img.rows, img.cols);
    PixelCoord best = ring.front();
    double best_d = std::abs(ref - img.at(best.row, best.col));
    for (const PixelCoord& p : ring) {
        const double d = std::abs(ref - img.at(p.row, p.col));
        if (d < best_d) {
            best_d = d;
            best = p;
        }
    }
    return best;
}

// Dense mirror of a sparse matrix for small-image oracles.
std::vector<std::vector<double>> densify(const SparseWeights& w) {
    std::vector<std::vector<double>> d(w.n(), std::vector<double>(w.n(), 0.0));
    for (const Triplet& t : w.to_triplets()) d[t.row][t.col] = t.weight;
    return d;
}

}  // namespace

TEST_CASE("ring_pixels: interior ring r=1 is the 8-neighborhood") {
    const auto ring = ring_pixels({5, 5}, 1, 11, 11);
    REQUIRE(ring.size() == 8);
    for (const PixelCoord& p : ring)
        REQUIRE(std::max(std::abs(p.row - 5), std::abs(p.col - 5)) == 1);
}

TEST_CASE("ring_pixels: corner clipping") {
    const auto ring = ring_pixels({0, 0}, 1, 10, 10);
    REQUIRE(ring == std::vector<PixelCoord>{{0, 1}, {1, 0}, {1, 1}});
}

TEST_CASE("ring_pixels: r=0 is the center alone") {
    const auto ring = ring_pixels({3, 4}, 0, 10, 10);
    REQUIRE(ring == std::vector<PixelCoord>{{3, 4}});
}

TEST_CASE("ring_pixels: interior count is 8r and matches the scan oracle") {
    REQUIRE(ring_pixels({5, 5}, 3, 11, 11).size() == 24);
    for (int rows : {7, 11})
        for (int r = 0; r <= 4; ++r)
            for (int cr = 0; cr < rows; cr += 3)
                for (int cc = 0; cc < rows; cc += 2) {
                    const auto got = ring_pixels({cr, cc}, r, rows, rows);
                    const auto want = ring_oracle({cr, cc}, r, rows, rows);
                    REQUIRE(got == want);
                }
}

TEST_CASE("ring_pixels rejects out-of-bounds centers") {
    REQUIRE_THROWS_AS(ring_pixels({10, 3}, 1, 10, 10), std::invalid_argument);
}

TEST_CASE("simi: constant image tie-breaks to first ring pixel in row-major order") {
    const GrayImage img(9, 9, 42.0);
    const PatchConfig cfg{3, false};
    const PixelCoord got = simi(img, {4, 4}, 2, cfg);
    REQUIRE(got == PixelCoord{2, 2});
}

TEST_CASE("simi: unique nearest value wins") {
    GrayImage img(11, 11, 100.0);  // center 3x3 mean stays 100
    const PatchConfig cfg{3, false};
    // Ring r=2 around (5,5) holds {90, 99, 150}; 99 is closest to the mean.
    for (const PixelCoord& p : ring_pixels({5, 5}, 2, 11, 11)) img.at(p.row, p.col) = 90.0;
    img.at(3, 6) = 99.0;
    img.at(7, 7) = 150.0;
    REQUIRE(simi(img, {5, 5}, 2, cfg) == PixelCoord{3, 6});
}

TEST_CASE("simi matches the exhaustive oracle on random images") {
    const GrayImage img = random_image(15, 15, 1234);
    for (bool exclude : {false, true}) {
        const PatchConfig cfg{5, exclude};
        for (int r = 2; r <= 5; ++r)
            for (int cr = 0; cr < 15; ++cr)
                for (int cc = 0; cc < 15; ++cc)
                    REQUIRE(simi(img, {cr, cc}, r, cfg) == simi_oracle(img, {cr, cc}, r, exclude));
    }
}

TEST_CASE("rccc weights: constant image gives all-zero weights") {
    const GrayImage img(13, 13, 77.0);
    const SparseWeights w = build_rccc_weights(img, PatchConfig{4, false});
    for (const Triplet& t : w.to_triplets()) REQUIRE(t.weight == 0.0);
}

TEST_CASE("rccc weights: single bright pixel, hand evaluation of the center row") {
    GrayImage img(11, 11, 0.0);
    img.at(5, 5) = 90.0;
    const SparseWeights w = build_rccc_weights(img, PatchConfig{3, false});
    // Reference mean of the center's 3x3 region: 90/9 = 10. Both rings are
    // all zeros, so the tie-break picks the first ring pixel and the
    // zero-mean guard fixes the smoothness ratio at 1; weight = |10-0| = 10.
    const int center = 5 * 11 + 5;
    std::map<int, double> row;
    for (const Triplet& t : w.to_triplets())
        if (t.row == center) row[t.col] = t.weight;
    REQUIRE(row.size() == 2);
    REQUIRE(row.at(3 * 11 + 3) == Catch::Approx(10.0).margin(1e-12));  // r=2 pick
    REQUIRE(row.at(2 * 11 + 2) == Catch::Approx(10.0).margin(1e-12));  // r=3 pick
}

TEST_CASE("rccc weights: strict ring reading zeroes the bright-pixel row") {
    GrayImage img(11, 11, 0.0);
    img.at(5, 5) = 90.0;
    const SparseWeights w = build_rccc_weights(img, PatchConfig{3, true});
    const int center = 5 * 11 + 5;
    for (const Triplet& t : w.to_triplets())
        if (t.row == center) REQUIRE(t.weight == 0.0);  // ref mean excludes the spike
}

TEST_CASE("rccc weights: row nonzero count is at most R-1") {
    const GrayImage img = random_image(17, 17, 5);
    for (int R : {2, 3, 5}) {
        const SparseWeights w = build_rccc_weights(img, PatchConfig{R, false});
        REQUIRE(w.nnz() <= static_cast<size_t>(w.n()) * (R - 1));
        for (int i = 0; i < w.n(); ++i)
            REQUIRE(w.row_end(i) - w.row_begin(i) <= static_cast<size_t>(R - 1));
    }
}

TEST_CASE("rccc weights: entries match per-ring scalar evaluation on random images") {
    const GrayImage img = random_image(14, 16, 77);
    const PatchConfig cfg{4, false};
    const SparseWeights w = build_rccc_weights(img, cfg);
    for (int cr = 0; cr < img.rows; ++cr)
        for (int cc = 0; cc < img.cols; ++cc) {
            const int i = cr * img.cols + cc;
            std::map<int, double> row;
            for (size_t e = w.row_begin(i); e < w.row_end(i); ++e)
                row[w.cols()[e]] = w.weights()[e];
            std::map<int, double> want;
            const double ref = ref_mean_oracle(img, {cr, cc}, false);
            for (int r = 2; r <= cfg.radius; ++r) {
                const PixelCoord pick = simi_oracle(img, {cr, cc}, r, false);
                const auto ring = ring_oracle({cr, cc}, r, img.rows, img.cols);
                double sum = 0.0;
                for (const PixelCoord& p : ring) sum += img.at(p.row, p.col);
                const double mean = sum / ring.size();
                double ratio = 1.0;
                if (mean > 0.0 && ring.size() > 1)
                    ratio = ((sum - img.at(pick.row, pick.col)) / (ring.size() - 1)) / mean;
                want[pick.row * img.cols + pick.col] =
                    std::abs(ref - img.at(pick.row, pick.col)) * ratio;
            }
            REQUIRE(row.size() == want.size());
            for (const auto& [j, val] : want)
                REQUIRE(row.at(j) == Catch::Approx(val).margin(1e-12));
        }
}

TEST_CASE("rccc weights: positive scaling scales weights exactly") {
    const GrayImage img = random_image(15, 15, 9);
    const double alpha = 3.25;
    GrayImage scaled = img;
    for (double& v : scaled.data) v *= alpha;
    const PatchConfig cfg{5, false};
    const auto w1 = build_rccc_weights(img, cfg).to_triplets();
    const auto w2 = build_rccc_weights(scaled, cfg).to_triplets();
    REQUIRE(w1.size() == w2.size());
    for (size_t e = 0; e < w1.size(); ++e) {
        REQUIRE(w1[e].row == w2[e].row);  // Simi selections unchanged
        REQUIRE(w1[e].col == w2[e].col);
        if (w1[e].weight > 0)
            REQUIRE(w2[e].weight == Catch::Approx(alpha * w1[e].weight).epsilon(1e-10));
    }
}

TEST_CASE("rccc weights are nonnegative") {
    const GrayImage img = random_image(13, 13, 31);
    for (const Triplet& t : build_rccc_weights(img, PatchConfig{3, false}).to_triplets())
        REQUIRE(t.weight >= 0.0);
}

TEST_CASE("symmetrize: single entry splits into a mirrored pair") {
    SparseWeights w = SparseWeights::from_triplets(10, {{3, 7, 4.0}});
    const SparseWeights s = symmetrize(w);
    REQUIRE(s.symmetric());
    const auto trips = s.to_triplets();
    REQUIRE(trips.size() == 2);
    const auto dense = densify(s);
    REQUIRE(dense[3][7] == 2.0);
    REQUIRE(dense[7][3] == 2.0);
}

TEST_CASE("symmetrize: symmetric input is a fixed point") {
    SparseWeights w = SparseWeights::from_triplets(5, {{0, 1, 2.0}, {1, 0, 2.0}, {2, 4, 7.0}, {4, 2, 7.0}}, true);
    const SparseWeights s = symmetrize(w);
    const auto a = densify(w);
    const auto b = densify(s);
    REQUIRE(a == b);
}

TEST_CASE("symmetrize matches the dense (W + W^T)/2 oracle") {
    const GrayImage img = random_image(12, 12, 2024);
    const SparseWeights w = build_rccc_weights(img, PatchConfig{4, false});
    const SparseWeights s = symmetrize(w);
    const auto dw = densify(w);
    const auto ds = densify(s);
    for (int i = 0; i < w.n(); ++i)
        for (int j = 0; j < w.n(); ++j) {
            REQUIRE(ds[i][j] == (dw[i][j] + dw[j][i]) / 2.0);
            REQUIRE(ds[i][j] == ds[j][i]);  // exact symmetry
        }
}

TEST_CASE("coefficient vector: constant image gives zeros") {
    const GrayImage img(11, 11, 3.0);
    const PatchConfig cfg{3, false};
    const CoefficientVector c = coefficient_vector(build_rccc_weights(img, cfg), cfg);
    for (double v : c.values) REQUIRE(v == 0.0);
}

TEST_CASE("coefficient vector: arithmetic of the definition") {
    // Row 2 holds weights {2, 4}; with R=3 the coefficient is (2+4)/2 = 3.
    SparseWeights w = SparseWeights::from_triplets(6, {{2, 0, 2.0}, {2, 5, 4.0}});
    const CoefficientVector c = coefficient_vector(w, PatchConfig{3, false});
    REQUIRE(c.values[2] == Catch::Approx(3.0));
    REQUIRE(c.values[0] == 0.0);
}

TEST_CASE("coefficient vector matches the dense row-sum oracle") {
    const GrayImage img = random_image(13, 15, 555);
    const PatchConfig cfg{5, false};
    const SparseWeights w = build_rccc_weights(img, cfg);
    const CoefficientVector c = coefficient_vector(w, cfg);
    const auto dense = densify(w);
    for (int i = 0; i < w.n(); ++i) {
        double sum = 0.0;
        for (double v : dense[i]) sum += v;
        REQUIRE(c.values[i] == Catch::Approx(sum / (cfg.radius - 1)).margin(1e-12));
    }
}

TEST_CASE("sparse construction rejects malformed input") {
    REQUIRE_THROWS_AS(SparseWeights::from_triplets(3, {{0, 0, 1.0}}), std::invalid_argument);
    REQUIRE_THROWS_AS(SparseWeights::from_triplets(3, {{0, 1, -1.0}}), std::invalid_argument);
    REQUIRE_THROWS_AS(SparseWeights::from_triplets(3, {{0, 1, 1.0}, {0, 1, 2.0}}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(SparseWeights::from_triplets(3, {{0, 5, 1.0}}), std::invalid_argument);
}

TEST_CASE("patch config requires R >= 2") {
    const PatchConfig bad{1, false};
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}
