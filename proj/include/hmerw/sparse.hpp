#pragma once

// Sparse nonnegative edge-weight matrix in CSR form. Rows are built
// independently and consumed as matvecs, so a row-offset index is kept
// alongside the coordinate entries.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmerw {

struct Triplet {
    int row = 0;
    int col = 0;
    double weight = 0.0;
};

class SparseWeights {
  public:
    SparseWeights() = default;

    // Builds from coordinate entries. Rejects duplicates, diagonal entries,
    // negative or non-finite weights, and out-of-range indices.
    static SparseWeights from_triplets(int n, std::vector<Triplet> entries, bool symmetric = false) {
        if (n <= 0) throw std::invalid_argument("SparseWeights: node count must be positive");
        std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        SparseWeights w;
        w.n_ = n;
        w.symmetric_ = symmetric;
        w.row_offsets_.assign(static_cast<size_t>(n) + 1, 0);
        w.cols_.reserve(entries.size());
        w.weights_.reserve(entries.size());
        int prev_row = -1, prev_col = -1;
        for (const Triplet& t : entries) {
            if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
                throw std::invalid_argument("SparseWeights: index out of range");
            if (t.row == t.col)
                throw std::invalid_argument("SparseWeights: diagonal entries are not allowed");
            if (!(t.weight >= 0.0) || !std::isfinite(t.weight))
                throw std::invalid_argument("SparseWeights: weights must be finite and >= 0");
            if (t.row == prev_row && t.col == prev_col)
                throw std::invalid_argument("SparseWeights: duplicate entry");
            prev_row = t.row;
            prev_col = t.col;
            w.row_offsets_[static_cast<size_t>(t.row) + 1]++;
            w.cols_.push_back(t.col);
            w.weights_.push_back(t.weight);
        }
        for (int i = 0; i < n; ++i) w.row_offsets_[i + 1] += w.row_offsets_[i];
        return w;
    }

    int n() const { return n_; }
    size_t nnz() const { return weights_.size(); }
    bool symmetric() const { return symmetric_; }

    // Row i as [begin, end) ranges into cols()/weights().
    size_t row_begin(int i) const { return row_offsets_[i]; }
    size_t row_end(int i) const { return row_offsets_[static_cast<size_t>(i) + 1]; }
    const std::vector<int>& cols() const { return cols_; }
    const std::vector<double>& weights() const { return weights_; }

    double row_sum(int i) const {
        double s = 0.0;
        for (size_t k = row_begin(i); k < row_end(i); ++k) s += weights_[k];
        return s;
    }

    // y = W x
    void matvec(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(n_, 0.0);
        for (int i = 0; i < n_; ++i) {
            double s = 0.0;
            for (size_t k = row_offsets_[i]; k < row_offsets_[static_cast<size_t>(i) + 1]; ++k)
                s += weights_[k] * x[cols_[k]];
            y[i] = s;
        }
    }

    std::vector<double> matvec(const std::vector<double>& x) const {
        std::vector<double> y;
        matvec(x, y);
        return y;
    }

    double frobenius_norm_sq() const {
        double s = 0.0;
        for (double w : weights_) s += w * w;
        return s;
    }

    std::vector<Triplet> to_triplets() const {
        std::vector<Triplet> out;
        out.reserve(nnz());
        for (int i = 0; i < n_; ++i)
            for (size_t k = row_begin(i); k < row_end(i); ++k)
                out.push_back({i, cols_[k], weights_[k]});
        return out;
    }

    // Debug export as text triplets `i j w`, 0-based, %.12g weights.
    void export_triplets(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write file: " + path);
        char buf[64];
        for (int i = 0; i < n_; ++i)
            for (size_t k = row_begin(i); k < row_end(i); ++k) {
                std::snprintf(buf, sizeof(buf), "%d %d %.12g\n", i, cols_[k], weights_[k]);
                out << buf;
            }
    }

  private:
    int n_ = 0;
    bool symmetric_ = false;
    std::vector<size_t> row_offsets_;
    std::vector<int> cols_;
    std::vector<double> weights_;
};

// (W + W^T) / 2 over the union of stored entries; result carries the
// symmetric flag. An already-symmetric matrix is a fixed point.
inline SparseWeights symmetrize(const SparseWeights& w) {
    std::vector<Triplet> trips = w.to_triplets();
    // Fold mirrored coordinates onto a canonical (min,max) key.
    struct Key {
        int a, b;
        bool operator<(const Key& o) const { return a != o.a ? a < o.a : b < o.b; }
    };
    std::vector<std::pair<Key, double>> acc;
    acc.reserve(trips.size());
    for (const Triplet& t : trips) {
        Key k{std::min(t.row, t.col), std::max(t.row, t.col)};
        acc.push_back({k, t.weight});
    }
    std::sort(acc.begin(), acc.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<Triplet> out;
    out.reserve(acc.size() * 2);
    size_t i = 0;
    while (i < acc.size()) {
        size_t j = i;
        double sum = 0.0;
        while (j < acc.size() && !(acc[i].first < acc[j].first) && !(acc[j].first < acc[i].first)) {
            sum += acc[j].second;
            ++j;
        }
        const double half = sum / 2.0;
        out.push_back({acc[i].first.a, acc[i].first.b, half});
        out.push_back({acc[i].first.b, acc[i].first.a, half});
        i = j;
    }
    return SparseWeights::from_triplets(w.n(), std::move(out), true);
}

}  // namespace hmerw
