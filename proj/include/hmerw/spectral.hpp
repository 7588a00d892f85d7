#pragma once

// Sparse symmetric eigendecomposition (Lanczos with full reorthogonalization
// and thick restart) and the maximal-entropy random-walk stationary
// distributions built from it.
//
// The hierarchical walk projects the weight matrix onto its top-K rank-one
// sub-graphs lambda_k psi_k psi_k^T and sums the per-level stationary
// distributions lambda_k psi_k^2; the primal walk is the K=1 special case.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparse.hpp"

namespace hmerw {

struct SpectralBasis {
    int k = 0;
    std::vector<double> eigenvalues;               // sorted descending, algebraic
    std::vector<std::vector<double>> eigenvectors; // unit norm, length n each

    int n() const { return eigenvectors.empty() ? 0 : static_cast<int>(eigenvectors[0].size()); }
};

struct StationaryVector {
    std::vector<double> values;
};

struct EigOptions {
    uint64_t seed = 0x9e3779b97f4a7c15ull;  // start-vector seed; fixed for determinism
    double tol = 1e-8;                      // accept when ||W y - t y|| <= tol*max(1,|t|)
    int matvec_cap_factor = 10;             // budget = factor * n matvecs
    int full_mode_threshold = 512;          // below this, build the complete basis
};

namespace detail {

// Cyclic Jacobi eigensolver for small dense symmetric matrices (the
// projected problems of the Lanczos iteration). a is row-major m x m and is
// destroyed. Returns eigenvalues descending with matching eigenvector
// columns in v.
inline void jacobi_eigh(std::vector<double>& a, int m, std::vector<double>& evals,
                        std::vector<double>& evecs) {
    evecs.assign(static_cast<size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) evecs[static_cast<size_t>(i) * m + i] = 1.0;
    auto A = [&](int r, int c) -> double& { return a[static_cast<size_t>(r) * m + c]; };
    auto V = [&](int r, int c) -> double& { return evecs[static_cast<size_t>(r) * m + c]; };

    double norm = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) norm += A(i, j) * A(i, j);
    norm = std::sqrt(norm);
    const double stop = std::max(norm * 1e-15, 1e-300);

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) off += 2.0 * A(i, j) * A(i, j);
        if (std::sqrt(off) <= stop) break;

        for (int p = 0; p < m - 1; ++p) {
            for (int q = p + 1; q < m; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) <= stop / (static_cast<double>(m) * m)) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < m; ++i) {
                    const double aip = A(i, p), aiq = A(i, q);
                    A(i, p) = c * aip - s * aiq;
                    A(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < m; ++i) {
                    const double api = A(p, i), aqi = A(q, i);
                    A(p, i) = c * api - s * aqi;
                    A(q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < m; ++i) {
                    const double vip = V(i, p), viq = V(i, q);
                    V(i, p) = c * vip - s * viq;
                    V(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    // Sort descending by eigenvalue, permuting vector columns alongside.
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return A(x, x) > A(y, y); });
    evals.resize(m);
    std::vector<double> sorted(static_cast<size_t>(m) * m);
    for (int j = 0; j < m; ++j) {
        evals[j] = A(order[j], order[j]);
        for (int i = 0; i < m; ++i) sorted[static_cast<size_t>(i) * m + j] = V(i, order[j]);
    }
    evecs.swap(sorted);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Fix sign so the largest-magnitude entry is positive.
inline void fix_sign(std::vector<double>& v) {
    size_t arg = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (v[arg] < 0.0)
        for (double& x : v) x = -x;
}

}  // namespace detail

// Top-k algebraically largest eigenpairs of a symmetric sparse matrix.
//
// Krylov bases are kept fully reorthogonalized (two rounds of classical
// Gram-Schmidt per step) and the projected matrix V^T W V is maintained
// explicitly, so restarts with retained Ritz vectors need no special-cased
// tridiagonal bookkeeping. On small problems the basis is simply grown to
// the full dimension, which reproduces a dense decomposition.
inline SpectralBasis top_k_eigenpairs(const SparseWeights& w, int k, const EigOptions& opt = {}) {
    const int n = w.n();
    if (k < 1 || k > n)
        throw std::invalid_argument("top_k_eigenpairs: need 1 <= k <= n, got k=" +
                                    std::to_string(k) + ", n=" + std::to_string(n));
    if (!w.symmetric())
        throw std::invalid_argument("top_k_eigenpairs: weight matrix must be symmetric");

    const bool full_mode = n <= opt.full_mode_threshold || k >= n;
    const int m_max = full_mode ? n : std::min(n, std::max(2 * k + 20, 60));
    const int keep = full_mode ? 0 : std::min(k + std::max(5, k / 2), m_max - 10);
    const long budget = static_cast<long>(opt.matvec_cap_factor) * n + 64;
    long matvecs = 0;

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::vector<double>> basis;  // orthonormal columns, length n
    basis.reserve(m_max + 1);
    // Projected matrix H = V^T W V, row-major, sized for the current basis.
    std::vector<double> H(static_cast<size_t>(m_max) * m_max, 0.0);
    auto Hat = [&](int r, int c) -> double& { return H[static_cast<size_t>(r) * m_max + c]; };

    auto random_unit_orth = [&]() {
        std::vector<double> v(n);
        for (int attempt = 0; attempt < 64; ++attempt) {
            for (double& x : v) x = gauss(rng);
            for (int round = 0; round < 2; ++round)
                for (const auto& b : basis) detail::axpy(-detail::dot(b, v), b, v);
            const double nm = detail::norm2(v);
            if (nm > 1e-8 * std::sqrt(static_cast<double>(n))) {
                for (double& x : v) x /= nm;
                return v;
            }
        }
        throw std::runtime_error("top_k_eigenpairs: failed to draw an independent start vector");
    };

    basis.push_back(random_unit_orth());
    int pending = 0;  // index of the newest vector whose H column is not yet computed

    std::vector<double> t(n), restart_dir, evalsH, evecsH, Hcopy;
    double worst_residual = std::numeric_limits<double>::infinity();

    while (true) {
        // Expand the basis until m_max vectors or the matvec budget runs out.
        restart_dir.clear();
        while (static_cast<int>(basis.size()) < m_max + 1) {
            const int s = static_cast<int>(basis.size()) - 1;
            if (pending > s) break;  // all columns known; basis is full
            if (matvecs >= budget) break;
            w.matvec(basis[pending], t);
            ++matvecs;
            // Two Gram-Schmidt rounds; fold the coefficients into column `pending`.
            std::vector<double> h(pending + 1, 0.0);
            for (int round = 0; round < 2; ++round) {
                for (int i = 0; i <= pending; ++i) {
                    const double c = detail::dot(basis[i], t);
                    h[i] += c;
                    detail::axpy(-c, basis[i], t);
                }
            }
            for (int i = 0; i <= pending; ++i) {
                Hat(i, pending) = h[i];
                Hat(pending, i) = h[i];
            }
            const double beta = detail::norm2(t);
            ++pending;
            if (beta > 1e-12) {
                if (static_cast<int>(basis.size()) < m_max) {
                    std::vector<double> next(t);
                    for (double& x : next) x /= beta;
                    basis.push_back(std::move(next));
                    Hat(pending - 1, pending) = beta;
                    Hat(pending, pending - 1) = beta;
                } else {
                    // Basis full; keep the outgoing Krylov direction so the
                    // restart loses no information.
                    restart_dir = t;
                    for (double& x : restart_dir) x /= beta;
                    break;
                }
            } else if (static_cast<int>(basis.size()) < m_max) {
                // Invariant subspace hit: continue with a fresh direction.
                basis.push_back(random_unit_orth());
            }
        }

        const int m = std::min<int>(pending, static_cast<int>(basis.size()));
        if (m < 1) throw std::runtime_error("top_k_eigenpairs: empty projection");

        // Solve the projected problem.
        Hcopy.assign(static_cast<size_t>(m) * m, 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                Hcopy[static_cast<size_t>(i) * m + j] =
                    0.5 * (Hat(i, j) + Hat(j, i));
        detail::jacobi_eigh(Hcopy, m, evalsH, evecsH);

        // Assemble the top-k Ritz vectors and test true residuals.
        const int want = std::min(k, m);
        std::vector<std::vector<double>> ritz(want, std::vector<double>(n, 0.0));
        for (int j = 0; j < want; ++j) {
            for (int i = 0; i < m; ++i) {
                const double c = evecsH[static_cast<size_t>(i) * m + j];
                if (c != 0.0) detail::axpy(c, basis[i], ritz[j]);
            }
            const double nm = detail::norm2(ritz[j]);
            if (nm > 0) for (double& x : ritz[j]) x /= nm;
        }
        bool all_ok = want == k;
        worst_residual = 0.0;
        for (int j = 0; j < want; ++j) {
            w.matvec(ritz[j], t);
            ++matvecs;
            detail::axpy(-evalsH[j], ritz[j], t);
            const double res = detail::norm2(t);
            worst_residual = std::max(worst_residual, res);
            if (res > opt.tol * std::max(1.0, std::abs(evalsH[j]))) all_ok = false;
        }

        if (all_ok || (full_mode && m >= n)) {
            SpectralBasis out;
            out.k = k;
            out.eigenvalues.assign(evalsH.begin(), evalsH.begin() + want);
            out.eigenvectors.assign(ritz.begin(), ritz.end());
            for (auto& v : out.eigenvectors) detail::fix_sign(v);
            return out;
        }
        if (matvecs >= budget)
            throw std::runtime_error(
                "top_k_eigenpairs: no convergence after " + std::to_string(matvecs) +
                " matvecs (achieved residual " + std::to_string(worst_residual) + ")");

        // Thick restart: keep the leading Ritz vectors plus the outgoing
        // residual direction, and restate H on that basis (diagonal block).
        const int ell = std::min(keep, m - 1);
        std::vector<std::vector<double>> kept(ell, std::vector<double>(n, 0.0));
        for (int j = 0; j < ell; ++j) {
            if (j < want)
                kept[j] = ritz[j];
            else
                for (int i = 0; i < m; ++i) {
                    const double c = evecsH[static_cast<size_t>(i) * m + j];
                    if (c != 0.0) detail::axpy(c, basis[i], kept[j]);
                }
        }
        basis.swap(kept);
        // Re-orthonormalize to stem numerical drift across restarts.
        for (size_t j = 0; j < basis.size(); ++j) {
            for (int round = 0; round < 2; ++round)
                for (size_t i = 0; i < j; ++i)
                    detail::axpy(-detail::dot(basis[i], basis[j]), basis[i], basis[j]);
            const double nm = detail::norm2(basis[j]);
            if (nm > 1e-12) for (double& x : basis[j]) x /= nm;
        }
        std::fill(H.begin(), H.end(), 0.0);
        for (int j = 0; j < ell; ++j) Hat(j, j) = evalsH[j];
        if (!restart_dir.empty()) {
            for (int round = 0; round < 2; ++round)
                for (const auto& b : basis)
                    detail::axpy(-detail::dot(b, restart_dir), b, restart_dir);
            const double nm = detail::norm2(restart_dir);
            if (nm > 1e-8) {
                for (double& x : restart_dir) x /= nm;
                basis.push_back(restart_dir);
            } else {
                basis.push_back(random_unit_orth());
            }
        } else {
            basis.push_back(random_unit_orth());
        }
        pending = ell;
    }
}

// Row-stochastic transition matrix of the maximal entropy random walk:
// P(i,j) = W(i,j) psi1_j / (lambda1 psi1_i).
inline SparseWeights merw_transition(const SparseWeights& w, const SpectralBasis& basis) {
    if (basis.k < 1) throw std::invalid_argument("merw_transition: empty basis");
    const double lambda1 = basis.eigenvalues[0];
    const std::vector<double>& psi = basis.eigenvectors[0];
    if (!(lambda1 > 0))
        throw std::runtime_error("merw_transition: principal eigenvalue is not positive");
    for (int i = 0; i < w.n(); ++i)
        if (w.row_begin(i) == w.row_end(i))
            throw std::runtime_error("merw_transition: node " + std::to_string(i) +
                                     " is isolated (zero row)");
    double max_abs = 0.0;
    for (double x : psi) max_abs = std::max(max_abs, std::abs(x));
    for (double x : psi)
        if (!(x > 1e-12 * max_abs))
            throw std::runtime_error(
                "merw_transition: principal eigenvector has a zero or negative entry "
                "(graph is reducible)");

    std::vector<Triplet> trips;
    trips.reserve(w.nnz());
    for (int i = 0; i < w.n(); ++i)
        for (size_t e = w.row_begin(i); e < w.row_end(i); ++e) {
            const int j = w.cols()[e];
            trips.push_back({i, j, w.weights()[e] * psi[j] / (lambda1 * psi[i])});
        }
    return SparseWeights::from_triplets(w.n(), std::move(trips), false);
}

// pi_i = (psi1_i)^2; sums to 1 because psi1 is unit norm.
inline StationaryVector merw_stationary(const SpectralBasis& basis) {
    if (basis.k < 1) throw std::invalid_argument("merw_stationary: empty basis");
    StationaryVector pi;
    pi.values.reserve(basis.eigenvectors[0].size());
    for (double x : basis.eigenvectors[0]) pi.values.push_back(x * x);
    return pi;
}

// Unnormalized per-level distribution max(lambda_k, 0) * psi_k^2. Negative
// eigenvalues are clamped so every level stays a nonnegative measure.
inline StationaryVector sublevel_stationary(const SpectralBasis& basis, int level) {
    if (level < 1 || level > basis.k)
        throw std::invalid_argument("sublevel_stationary: level out of range");
    const double lam = std::max(basis.eigenvalues[level - 1], 0.0);
    StationaryVector out;
    out.values.reserve(basis.eigenvectors[level - 1].size());
    for (double x : basis.eigenvectors[level - 1]) out.values.push_back(lam * x * x);
    return out;
}

// Reconstructed stationary distribution over the top-K sub-graphs:
// pi_i = sum_k max(lambda_k,0) psi_ki^2, normalized to a probability vector.
inline StationaryVector hmerw_stationary(const SpectralBasis& basis, int K) {
    if (K < 1 || K > basis.k)
        throw std::invalid_argument("hmerw_stationary: need 1 <= K <= basis.k");
    const size_t n = basis.eigenvectors[0].size();
    StationaryVector pi;
    pi.values.assign(n, 0.0);
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        const double lam = std::max(basis.eigenvalues[k], 0.0);
        if (lam == 0.0) continue;
        const std::vector<double>& psi = basis.eigenvectors[k];
        for (size_t i = 0; i < n; ++i) {
            const double v = lam * psi[i] * psi[i];
            pi.values[i] += v;
            total += v;
        }
    }
    if (!(total > 0.0))
        throw std::runtime_error("hmerw_stationary: spectrally empty graph "
                                 "(all clamped eigenvalues are zero)");
    for (double& x : pi.values) x /= total;
    return pi;
}

// Frobenius norm of W - sum_{k<=K} lambda_k psi_k psi_k^T, evaluated from
// the stored entries and the low-rank correction without densifying W.
// Extended-precision accumulation keeps the cancellation between the three
// terms below the 1e-8 full-spectrum contract.
inline double decomposition_residual(const SparseWeights& w, const SpectralBasis& basis, int K) {
    if (K < 1 || K > basis.k)
        throw std::invalid_argument("decomposition_residual: need 1 <= K <= basis.k");
    auto dotl = [](const std::vector<double>& a, const std::vector<double>& b) {
        long double s = 0.0L;
        for (size_t i = 0; i < a.size(); ++i)
            s += static_cast<long double>(a[i]) * b[i];
        return s;
    };
    long double r2 = 0.0L;
    for (double x : w.weights()) r2 += static_cast<long double>(x) * x;
    std::vector<double> t;
    for (int k = 0; k < K; ++k) {
        w.matvec(basis.eigenvectors[k], t);
        r2 -= 2.0L * basis.eigenvalues[k] * dotl(basis.eigenvectors[k], t);
    }
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) {
            const long double g = dotl(basis.eigenvectors[a], basis.eigenvectors[b]);
            r2 += basis.eigenvalues[a] * basis.eigenvalues[b] * g * g;
        }
    return static_cast<double>(std::sqrt(std::max(r2, 0.0L)));
}

}  // namespace hmerw
