// kmeans.hpp
// Lloyd k-means under Euclidean or cosine distance. Cosine mode is spherical
// k-means: rows and centroids live on the unit sphere and the centroid update
// is the renormalized mean. Seeding is greedy farthest-point from a seeded
// first pick, so a fit is a deterministic function of (data, k, seed).
// Each Lloyd fixpoint is polished by single-point Hartigan moves and Lloyd is
// rerun until neither changes the partition.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "regime_taa/error.hpp"
#include "regime_taa/types.hpp"

namespace regime_taa {

enum class DistanceKind { euclidean, cosine };

inline const char* to_string(DistanceKind kind) {
    return kind == DistanceKind::euclidean ? "euclidean" : "cosine";
}

inline DistanceKind distance_kind_from_string(const std::string& s) {
    if (s == "euclidean") return DistanceKind::euclidean;
    if (s == "cosine") return DistanceKind::cosine;
    throw ConfigError("unknown distance kind '" + s + "'");
}

/// Distance used for membership probabilities: Euclidean norm, or 1 - cos.
inline double distance(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& c, DistanceKind kind) {
    if (kind == DistanceKind::euclidean) return (x - c).norm();
    const double nx = x.norm();
    const double nc = c.norm();
    if (nx == 0.0 || nc == 0.0) throw DomainError("cosine distance of a zero-norm vector");
    return std::max(0.0, 1.0 - x.dot(c) / (nx * nc));
}

struct ClusterFit {
    Matrix centroids;  // k x m; unit rows in cosine mode
    std::vector<int> assignments;
    double inertia = 0.0;  // sum of squared distances (euclidean) or of 1 - cos (cosine)
    DistanceKind distance_kind = DistanceKind::euclidean;
    std::uint64_t seed = 0;
    int iterations = 0;
    std::vector<double> inertia_history;  // after every centroid update of the winning run

    Index k() const { return centroids.rows(); }

    std::vector<Index> sizes() const {
        std::vector<Index> s(static_cast<std::size_t>(k()), 0);
        for (int a : assignments) ++s[static_cast<std::size_t>(a)];
        return s;
    }
};

struct KMeansOptions {
    int max_iter = 300;
    int n_init = 10;                     // farthest-point restarts; first picks are distinct while rows last
    std::optional<Matrix> initial;       // warm start; tried first and kept on ties
};

namespace detail {

inline Matrix normalize_rows(const Matrix& X) {
    Matrix out = X;
    for (Index i = 0; i < X.rows(); ++i) {
        const double n = X.row(i).norm();
        if (n == 0.0) throw DomainError("cosine k-means: row " + std::to_string(i) + " has zero norm");
        out.row(i) /= n;
    }
    return out;
}

// Point-to-centroid cost that k-means minimizes.
inline double point_cost(const Matrix& X, Index i, const Matrix& C, Index c, DistanceKind kind) {
    if (kind == DistanceKind::euclidean) return (X.row(i) - C.row(c)).squaredNorm();
    return std::max(0.0, 1.0 - X.row(i).dot(C.row(c)));
}

inline int nearest(const Matrix& X, Index i, const Matrix& C, DistanceKind kind, double* cost = nullptr) {
    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < C.rows(); ++c) {
        const double d = point_cost(X, i, C, c, kind);
        if (d < best_cost) {
            best_cost = d;
            best = static_cast<int>(c);
        }
    }
    if (cost) *cost = best_cost;
    return best;
}

inline Matrix farthest_point_seeds(const Matrix& X, Index k, Index first, DistanceKind kind) {
    Matrix C(k, X.cols());
    C.row(0) = X.row(first);
    Vector mind(X.rows());
    for (Index i = 0; i < X.rows(); ++i) mind(i) = point_cost(X, i, C, 0, kind);
    for (Index c = 1; c < k; ++c) {
        Index arg = 0;
        for (Index i = 1; i < X.rows(); ++i)
            if (mind(i) > mind(arg)) arg = i;
        C.row(c) = X.row(arg);
        for (Index i = 0; i < X.rows(); ++i) mind(i) = std::min(mind(i), point_cost(X, i, C, c, kind));
    }
    return C;
}

struct LloydRun {
    Matrix centroids;
    std::vector<int> assignments;
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> history;
};

inline double total_cost(const Matrix& X, const Matrix& C, const std::vector<int>& a, DistanceKind kind) {
    double s = 0.0;
    for (Index i = 0; i < X.rows(); ++i) s += point_cost(X, i, C, a[static_cast<std::size_t>(i)], kind);
    return s;
}

inline LloydRun lloyd(const Matrix& X, Matrix C, DistanceKind kind, int max_iter) {
    const Index n = X.rows();
    const Index k = C.rows();
    LloydRun run;
    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (Index i = 0; i < n; ++i) {
            int a = nearest(X, i, C, kind);
            if (a != assign[static_cast<std::size_t>(i)]) {
                assign[static_cast<std::size_t>(i)] = a;
                changed = true;
            }
        }
        run.iterations = it + 1;
        if (!changed && it > 0) break;

        Matrix sums = Matrix::Zero(k, X.cols());
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            sums.row(assign[static_cast<std::size_t>(i)]) += X.row(i);
            ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
        }
        for (Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                Vector m = sums.row(c).transpose() / static_cast<double>(counts[static_cast<std::size_t>(c)]);
                if (kind == DistanceKind::cosine) {
                    const double nm = m.norm();
                    if (nm > 0.0) C.row(c) = (m / nm).transpose();
                } else {
                    C.row(c) = m.transpose();
                }
                continue;
            }
            // Empty cluster: move it onto the worst-served point of a cluster
            // with more than one member.
            Index worst = -1;
            double worst_cost = 0.0;
            for (Index i = 0; i < n; ++i) {
                const int a = assign[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(a)] < 2) continue;
                const double d = point_cost(X, i, C, a, kind);
                if (d > worst_cost) {
                    worst_cost = d;
                    worst = i;
                }
            }
            if (worst >= 0) {
                --counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(worst)])];
                assign[static_cast<std::size_t>(worst)] = static_cast<int>(c);
                counts[static_cast<std::size_t>(c)] = 1;
                C.row(c) = X.row(worst);
                changed = true;
            }
        }
        run.history.push_back(total_cost(X, C, assign, kind));
    }
    run.centroids = std::move(C);
    run.assignments = std::move(assign);
    run.inertia = total_cost(X, run.centroids, run.assignments, kind);
    return run;
}

// Objective of one cluster from its row sum, size and summed squared norms.
inline double cluster_cost(const Vector& sum, Index count, double sq_norms, DistanceKind kind) {
    if (count == 0) return 0.0;
    if (kind == DistanceKind::cosine) return static_cast<double>(count) - sum.norm();
    return sq_norms - sum.squaredNorm() / static_cast<double>(count);
}

// Hartigan pass: move single rows to the cluster that lowers the objective
// most, until no move helps. Clusters never become empty. Returns whether any
// row moved.
inline bool hartigan_refine(const Matrix& X, std::vector<int>& assign, Index k, DistanceKind kind) {
    const auto sz = [](auto v) { return static_cast<std::size_t>(v); };
    Matrix sums = Matrix::Zero(k, X.cols());
    std::vector<Index> counts(sz(k), 0);
    std::vector<double> sq(sz(k), 0.0);
    for (Index i = 0; i < X.rows(); ++i) {
        const int a = assign[sz(i)];
        sums.row(a) += X.row(i);
        ++counts[sz(a)];
        sq[sz(a)] += X.row(i).squaredNorm();
    }
    bool any = false;
    for (int sweep = 0; sweep < 1000; ++sweep) {
        bool moved = false;
        for (Index i = 0; i < X.rows(); ++i) {
            const int from = assign[sz(i)];
            if (counts[sz(from)] < 2) continue;
            const Vector x = X.row(i).transpose();
            const double xq = x.squaredNorm();
            const Vector s_from = sums.row(from).transpose();
            const double leave = cluster_cost(s_from - x, counts[sz(from)] - 1, sq[sz(from)] - xq, kind) -
                                 cluster_cost(s_from, counts[sz(from)], sq[sz(from)], kind);
            int to = -1;
            double best = -1e-12;
            for (Index c = 0; c < k; ++c) {
                if (c == from) continue;
                const Vector s_to = sums.row(c).transpose();
                const double delta = leave + cluster_cost(s_to + x, counts[sz(c)] + 1, sq[sz(c)] + xq, kind) -
                                     cluster_cost(s_to, counts[sz(c)], sq[sz(c)], kind);
                if (delta < best) {
                    best = delta;
                    to = static_cast<int>(c);
                }
            }
            if (to < 0) continue;
            sums.row(from) -= X.row(i);
            --counts[sz(from)];
            sq[sz(from)] -= xq;
            sums.row(to) += X.row(i);
            ++counts[sz(to)];
            sq[sz(to)] += xq;
            assign[sz(i)] = to;
            moved = any = true;
        }
        if (!moved) break;
    }
    return any;
}

// Centroids of a partition with no empty cluster.
inline Matrix partition_centroids(const Matrix& X, const std::vector<int>& assign, Index k, DistanceKind kind) {
    Matrix C = Matrix::Zero(k, X.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    std::vector<Index> first(static_cast<std::size_t>(k), -1);
    for (Index i = 0; i < X.rows(); ++i) {
        const auto a = static_cast<std::size_t>(assign[static_cast<std::size_t>(i)]);
        C.row(static_cast<Index>(a)) += X.row(i);
        ++counts[a];
        if (first[a] < 0) first[a] = i;
    }
    for (Index c = 0; c < k; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        if (kind == DistanceKind::cosine) {
            const double nm = C.row(c).norm();
            if (nm > 0.0) C.row(c) /= nm;
            else C.row(c) = X.row(first[cc]);
        } else {
            C.row(c) /= static_cast<double>(counts[cc]);
        }
    }
    return C;
}

// Lloyd to a fixpoint, then alternate Hartigan moves and Lloyd until stable.
inline LloydRun local_search(const Matrix& X, Matrix C, DistanceKind kind, int max_iter) {
    const Index k = C.rows();
    LloydRun run = lloyd(X, std::move(C), kind, max_iter);
    for (int round = 0; round < 100; ++round) {
        std::vector<int> assign = run.assignments;
        if (!hartigan_refine(X, assign, k, kind)) break;
        LloydRun next = lloyd(X, partition_centroids(X, assign, k, kind), kind, max_iter);
        if (!(next.inertia < run.inertia)) break;
        next.iterations += run.iterations;
        run.history.insert(run.history.end(), next.history.begin(), next.history.end());
        next.history = std::move(run.history);
        run = std::move(next);
    }
    return run;
}

}  // namespace detail

inline ClusterFit kmeans(const Matrix& X, Index k, DistanceKind kind, std::uint64_t seed,
                         const KMeansOptions& opts = {}) {
    if (k < 1) throw ConfigError("k-means: k must be at least 1");
    if (k > X.rows())
        throw ConfigError("k-means: k = " + std::to_string(k) + " exceeds row count " + std::to_string(X.rows()));
    if (opts.max_iter < 1 || opts.n_init < 1) throw ConfigError("k-means: max_iter and n_init must be positive");

    const Matrix data = kind == DistanceKind::cosine ? detail::normalize_rows(X) : X;

    std::vector<Matrix> starts;
    if (opts.initial) {
        if (opts.initial->rows() != k || opts.initial->cols() != X.cols())
            throw ShapeError("k-means: warm-start centroids have the wrong shape");
        starts.push_back(kind == DistanceKind::cosine ? detail::normalize_rows(*opts.initial) : *opts.initial);
    }
    // First picks: a seeded shuffle of the rows, cycled if n_init exceeds them.
    std::mt19937_64 rng(seed);
    std::vector<Index> order(static_cast<std::size_t>(data.rows()));
    for (Index i = 0; i < data.rows(); ++i) order[static_cast<std::size_t>(i)] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    for (int r = 0; r < opts.n_init; ++r)
        starts.push_back(detail::farthest_point_seeds(data, k, order[static_cast<std::size_t>(r) % order.size()], kind));

    std::optional<detail::LloydRun> best;
    for (auto& start : starts) {
        auto run = detail::local_search(data, std::move(start), kind, opts.max_iter);
        if (!best || run.inertia < best->inertia) best = std::move(run);
    }

    ClusterFit fit;
    fit.centroids = std::move(best->centroids);
    fit.assignments = std::move(best->assignments);
    fit.inertia = best->inertia;
    fit.distance_kind = kind;
    fit.seed = seed;
    fit.iterations = best->iterations;
    fit.inertia_history = std::move(best->history);
    return fit;
}

/// Inertia curve for k = 1..k_max (index 0 holds k = 1).
inline std::vector<double> inertia_curve(const Matrix& X, Index k_max, std::uint64_t seed,
                                         DistanceKind kind = DistanceKind::euclidean) {
    std::vector<double> curve;
    for (Index k = 1; k <= k_max; ++k) curve.push_back(kmeans(X, k, kind, seed).inertia);
    return curve;
}

/// Elbow of the inertia curve: argmax over k in 2..k_max-1 of the second
/// difference I(k-1) - 2 I(k) + I(k+1); ties go to the smaller k.
inline Index elbow_k(const Matrix& X, Index k_max, std::uint64_t seed, DistanceKind kind = DistanceKind::euclidean) {
    if (k_max < 3) throw ConfigError("elbow: k_max must be at least 3");
    if (X.rows() <= k_max)
        throw ConfigError("elbow: need more rows (" + std::to_string(X.rows()) + ") than k_max (" +
                          std::to_string(k_max) + ")");
    const auto curve = inertia_curve(X, k_max, seed, kind);
    const double scale = std::max(curve.front(), std::numeric_limits<double>::min());
    Index best_k = 2;
    double best = -std::numeric_limits<double>::infinity();
    for (Index k = 2; k <= k_max - 1; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        const double second = curve[i - 1] - 2.0 * curve[i] + curve[i + 1];
        if (second > best + 1e-12 * scale) {
            best = second;
            best_k = k;
        }
    }
    return best_k;
}

}  // namespace regime_taa
