#pragma once

// Independent reference implementations used only by tests. Each one solves
// a problem the library solves, but by a different (slower, higher-precision)
// algorithm, so agreement is meaningful.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracles {

// --------------------------------------------------------------------------
// dense symmetric eigendecomposition via cyclic Jacobi rotations
// --------------------------------------------------------------------------

struct EigenResult {
    std::vector<double> values;               // [n], unordered
    std::vector<std::vector<double>> vectors; // vectors[k] pairs with values[k]
};

inline EigenResult jacobi_eigen(std::vector<std::vector<double>> a) {
    const size_t n = a.size();
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) v[i][i] = 1.0;

    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-26) break;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
    }

    EigenResult res;
    res.values.resize(n);
    res.vectors.assign(n, std::vector<double>(n));
    for (size_t k = 0; k < n; ++k) {
        res.values[k] = a[k][k];
        for (size_t i = 0; i < n; ++i) res.vectors[k][i] = v[i][k];
    }
    return res;
}

inline size_t top_eigen_index(const EigenResult& e) {
    size_t best = 0;
    for (size_t k = 1; k < e.values.size(); ++k)
        if (e.values[k] > e.values[best]) best = k;
    return best;
}

// --------------------------------------------------------------------------
// regularized logistic regression solved exactly (Newton to machine eps)
// --------------------------------------------------------------------------

// Solves A x = b in place by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
    const size_t n = a.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        if (std::fabs(a[col][col]) < 1e-300)
            throw std::runtime_error("singular system in oracle solve");
        for (size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t col = n; col-- > 0;) {
        double acc = b[col];
        for (size_t c = col + 1; c < n; ++c) acc -= a[col][c] * x[c];
        x[col] = acc / a[col][col];
    }
    return x;
}

// Minimizes sum_i log(1+exp(-y_i w·z_i)) + lambda ||w||^2 over standardized
// features z (population std, constant features pinned to scale 1) and maps
// the optimum back to raw space as w_d / sigma_d. Mirrors the objective the
// library optimizes, but solved by Newton instead of fixed-step GD.
inline std::vector<double> newton_logistic_direction(
    const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
    double lambda = 1e-3) {
    const size_t n = xs.size();
    const size_t d = xs[0].size();

    std::vector<double> mean(d, 0.0), scale(d, 0.0);
    for (const auto& x : xs)
        for (size_t j = 0; j < d; ++j) mean[j] += x[j];
    for (size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);
    for (const auto& x : xs)
        for (size_t j = 0; j < d; ++j) {
            const double c = x[j] - mean[j];
            scale[j] += c * c;
        }
    for (size_t j = 0; j < d; ++j) {
        scale[j] = std::sqrt(scale[j] / static_cast<double>(n));
        if (scale[j] < 1e-12) scale[j] = 1.0;
    }
    std::vector<std::vector<double>> z(n, std::vector<double>(d));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < d; ++j) z[i][j] = (xs[i][j] - mean[j]) / scale[j];

    std::vector<double> w(d, 0.0);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<double> grad(d);
        std::vector<std::vector<double>> hess(d, std::vector<double>(d, 0.0));
        for (size_t j = 0; j < d; ++j) {
            grad[j] = 2.0 * lambda * w[j];
            hess[j][j] = 2.0 * lambda;
        }
        for (size_t i = 0; i < n; ++i) {
            double m = 0.0;
            for (size_t j = 0; j < d; ++j) m += z[i][j] * w[j];
            m *= ys[i];
            const double sig = 1.0 / (1.0 + std::exp(m));   // sigmoid(-margin)
            const double curv = sig * (1.0 - sig);
            for (size_t j = 0; j < d; ++j) {
                grad[j] -= ys[i] * z[i][j] * sig;
                for (size_t k = 0; k < d; ++k) hess[j][k] += curv * z[i][j] * z[i][k];
            }
        }
        double gn = 0.0;
        for (double g : grad) gn += g * g;
        if (std::sqrt(gn) < 1e-13) break;
        const auto step = solve_dense(hess, grad);
        for (size_t j = 0; j < d; ++j) w[j] -= step[j];
    }

    std::vector<double> dir(d);
    for (size_t j = 0; j < d; ++j) dir[j] = w[j] / scale[j];
    return dir;
}

// --------------------------------------------------------------------------
// AUC by explicit pairwise comparison
// --------------------------------------------------------------------------

inline double pairwise_auc(const std::vector<double>& pos,
                           const std::vector<double>& neg) {
    double wins = 0.0;
    for (double p : pos)
        for (double q : neg) wins += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
    return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

// --------------------------------------------------------------------------
// optimal 2-clustering by exhaustive assignment enumeration
// --------------------------------------------------------------------------

inline double cluster_cost(const std::vector<std::vector<double>>& pts,
                           const std::vector<int>& assign, int k) {
    const size_t d = pts[0].size();
    double cost = 0.0;
    for (int c = 0; c < k; ++c) {
        std::vector<double> mean(d, 0.0);
        size_t cnt = 0;
        for (size_t i = 0; i < pts.size(); ++i)
            if (assign[i] == c) {
                ++cnt;
                for (size_t j = 0; j < d; ++j) mean[j] += pts[i][j];
            }
        if (cnt == 0) continue;
        for (double& m : mean) m /= static_cast<double>(cnt);
        for (size_t i = 0; i < pts.size(); ++i)
            if (assign[i] == c)
                for (size_t j = 0; j < d; ++j) {
                    const double diff = pts[i][j] - mean[j];
                    cost += diff * diff;
                }
    }
    return cost;
}

struct TwoPartition {
    double cost = 0.0;
    std::vector<int> assign;
};

inline TwoPartition best_two_partition(const std::vector<std::vector<double>>& pts) {
    const size_t n = pts.size();
    if (n < 2 || n > 20) throw std::runtime_error("oracle partition size out of range");
    TwoPartition best;
    best.cost = 1e300;
    // point 0 is fixed in cluster 0 to kill the label-swap symmetry
    for (uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<int> assign(n, 0);
        bool any1 = false;
        for (size_t i = 1; i < n; ++i)
            if (mask & (1u << (i - 1))) {
                assign[i] = 1;
                any1 = true;
            }
        if (!any1) continue;
        const double cost = cluster_cost(pts, assign, 2);
        if (cost < best.cost) {
            best.cost = cost;
            best.assign = assign;
        }
    }
    return best;
}

} // namespace oracles
