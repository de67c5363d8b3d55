// regime_engine.hpp
// Two-stage regime model. Stage 1 splits months into two Euclidean clusters
// and labels the smaller one Regime 0 (outlier months). Stage 2 runs
// spherical (cosine) k-means with k = r on the typical months, giving
// Regimes 1..r. Soft membership comes from relative centroid distances, and
// the stage-1 outlier probability is rescaled against the strongest stage-2
// probability before the two are merged into one distribution.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "regime_taa/csv.hpp"
#include "regime_taa/error.hpp"
#include "regime_taa/kmeans.hpp"
#include "regime_taa/macro_ingest.hpp"
#include "regime_taa/month.hpp"
#include "regime_taa/types.hpp"

namespace regime_taa {

/// Probability vector over Regimes 0..r.
struct RegimeDistribution {
    Vector probs;

    Index size() const { return probs.size(); }
    double operator[](Index i) const { return probs(i); }

    /// Most probable regime; ties resolve to the lowest index.
    Index argmax() const {
        Index best = 0;
        for (Index i = 1; i < probs.size(); ++i)
            if (probs(i) > probs(best)) best = i;
        return best;
    }

    static RegimeDistribution point_mass(Index n, Index at) {
        RegimeDistribution d{Vector::Zero(n)};
        d.probs(at) = 1.0;
        return d;
    }
};

struct RegimeLabelSeries {
    std::vector<Month> dates;
    std::vector<int> labels;  // 0..r
};

struct RegimeModel {
    ClusterFit stage1;        // k = 2, euclidean
    int outlier_cluster = 0;  // stage-1 cluster index that is Regime 0
    ClusterFit stage2;        // k = r, cosine, fitted on typical months only
    Index r = 0;
    std::uint64_t seed = 0;

    Index n_regimes() const { return r + 1; }
    Index dim() const { return stage1.centroids.cols(); }
};

// ---------------------------------------------------------------------------
// Membership and combination
// ---------------------------------------------------------------------------

/// P(C_i) = (1 - d_i/D) / sum_m (1 - d_m/D) with D = sum_j d_j, which reduces
/// to (1 - d_i/D)/(k-1). A zero distance yields the indicator of the
/// zero-distance centroid(s), split uniformly on ties.
inline Vector membership_from_distances(const Vector& d) {
    const Index k = d.size();
    if (k < 2) throw ConfigError("membership probabilities need at least 2 centroids");
    Index zeros = 0;
    for (Index i = 0; i < k; ++i) {
        if (!(d(i) >= 0.0)) throw DomainError("distances must be nonnegative");
        zeros += d(i) == 0.0 ? 1 : 0;
    }
    Vector p(k);
    if (zeros > 0) {
        for (Index i = 0; i < k; ++i) p(i) = d(i) == 0.0 ? 1.0 / static_cast<double>(zeros) : 0.0;
        return p;
    }
    const double total = d.sum();
    for (Index i = 0; i < k; ++i) p(i) = (1.0 - d(i) / total) / static_cast<double>(k - 1);
    return p;
}

inline Vector membership_probabilities(const Vector& x, const Matrix& centroids, DistanceKind kind) {
    if (centroids.rows() < 2) throw ConfigError("membership probabilities need at least 2 centroids");
    if (x.size() != centroids.cols()) throw ShapeError("vector dimension does not match centroids");
    Vector d(centroids.rows());
    for (Index i = 0; i < centroids.rows(); ++i) d(i) = distance(x, centroids.row(i).transpose(), kind);
    return membership_from_distances(d);
}

inline constexpr double kRegimeZeroClamp = 1e-9;

/// Scaled Regime 0 weight P_R0 = -P_max log2(1 - P(Regime 0)), with P(Regime 0)
/// clamped below 1, prepended to the stage-2 probabilities and renormalized.
inline RegimeDistribution combine_distributions(double p_r0, const Vector& p_stage2) {
    if (!(p_r0 >= 0.0 && p_r0 <= 1.0)) throw DomainError("P(Regime 0) must lie in [0, 1]");
    if (p_stage2.size() < 1) throw ShapeError("stage-2 distribution is empty");
    const double p_max = p_stage2.maxCoeff();
    const double clamped = std::min(p_r0, 1.0 - kRegimeZeroClamp);
    const double p_r0_scaled = p_r0 == 0.0 ? 0.0 : -p_max * std::log2(1.0 - clamped);

    RegimeDistribution out{Vector(p_stage2.size() + 1)};
    out.probs(0) = p_r0_scaled;
    out.probs.tail(p_stage2.size()) = p_stage2;
    out.probs /= out.probs.sum();
    return out;
}

// ---------------------------------------------------------------------------
// Cluster matching
// ---------------------------------------------------------------------------

namespace detail {

/// Minimum-cost perfect assignment (Hungarian method, O(n^3)). Returns
/// row_to_col[i] for a square cost matrix.
inline std::vector<int> solve_assignment(const Matrix& cost) {
    const Index n = cost.rows();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<Index> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
    for (Index i = 1; i <= n; ++i) {
        p[0] = i;
        Index j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
        std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const Index i0 = p[static_cast<std::size_t>(j0)];
            double delta = inf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                if (used[uj]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[uj];
                if (cur < minv[uj]) {
                    minv[uj] = cur;
                    way[uj] = j0;
                }
                if (minv[uj] < delta) {
                    delta = minv[uj];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                if (used[uj]) {
                    u[static_cast<std::size_t>(p[uj])] += delta;
                    v[uj] -= delta;
                } else {
                    minv[uj] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const Index j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (Index j = 1; j <= n; ++j) row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = static_cast<int>(j - 1);
    return row_to_col;
}

}  // namespace detail

/// Relabeling of next's stage-2 clusters onto prev's labels that minimizes the
/// total cosine distance between matched centroids. Entry j is the 1-based
/// label that next's cluster j+1 should carry. Regime 0 is never permuted.
inline std::vector<int> match_clusters(const RegimeModel& prev, const RegimeModel& next) {
    if (prev.r != next.r) throw ConfigError("match_clusters: regime counts differ");
    if (prev.dim() != next.dim()) throw ShapeError("match_clusters: centroid dimensions differ");
    const Index r = next.r;
    Matrix cost(r, r);
    for (Index j = 0; j < r; ++j)
        for (Index i = 0; i < r; ++i)
            cost(j, i) = distance(next.stage2.centroids.row(j).transpose(), prev.stage2.centroids.row(i).transpose(),
                                  DistanceKind::cosine);
    auto assignment = detail::solve_assignment(cost);
    for (int& a : assignment) a += 1;
    return assignment;
}

/// Applies a relabeling from match_clusters: cluster j becomes label perm[j].
inline RegimeModel relabel(const RegimeModel& model, const std::vector<int>& perm) {
    if (static_cast<Index>(perm.size()) != model.r) throw ShapeError("relabel: permutation has the wrong length");
    std::vector<bool> seen(perm.size(), false);
    for (int p : perm) {
        if (p < 1 || p > static_cast<int>(perm.size()) || seen[static_cast<std::size_t>(p - 1)])
            throw ConfigError("relabel: not a permutation of 1..r");
        seen[static_cast<std::size_t>(p - 1)] = true;
    }
    RegimeModel out = model;
    for (Index j = 0; j < model.r; ++j)
        out.stage2.centroids.row(perm[static_cast<std::size_t>(j)] - 1) = model.stage2.centroids.row(j);
    for (int& a : out.stage2.assignments) a = perm[static_cast<std::size_t>(a)] - 1;
    return out;
}

inline std::vector<int> relabel_labels(const std::vector<int>& labels, const std::vector<int>& perm) {
    std::vector<int> out = labels;
    for (int& l : out)
        if (l > 0) l = perm[static_cast<std::size_t>(l - 1)];
    return out;
}

// ---------------------------------------------------------------------------
// Fitting and classification
// ---------------------------------------------------------------------------

struct FitRegimesOptions {
    Index k_max = 10;                         // elbow search bound when r is automatic
    int n_init = 10;
    const RegimeModel* warm_start = nullptr;  // previous window's model
};

struct RegimeFit {
    RegimeModel model;
    std::vector<int> labels;  // per input row, 0..r
};

/// Hard assignment: Regime 0 if nearer the outlier centroid, otherwise
/// 1 + nearest cosine centroid.
inline int hard_label(const RegimeModel& model, const Vector& x) {
    if (x.size() != model.dim()) throw ShapeError("classify: vector dimension does not match the model");
    const double d_out = (x - model.stage1.centroids.row(model.outlier_cluster).transpose()).squaredNorm();
    const double d_typ = (x - model.stage1.centroids.row(1 - model.outlier_cluster).transpose()).squaredNorm();
    if (d_out < d_typ) return 0;
    if (model.r == 1) return 1;
    const double nx = x.norm();
    if (nx == 0.0) return 1;
    int best = 0;
    double best_dot = -std::numeric_limits<double>::infinity();
    for (Index c = 0; c < model.r; ++c) {
        const double dot = model.stage2.centroids.row(c).dot(x) / nx;
        if (dot > best_dot) {
            best_dot = dot;
            best = static_cast<int>(c);
        }
    }
    return best + 1;
}

/// Soft regime distribution for one state vector.
inline RegimeDistribution classify(const RegimeModel& model, const Vector& x) {
    if (x.size() != model.dim()) throw ShapeError("classify: vector dimension does not match the model");
    const Vector p1 = membership_probabilities(x, model.stage1.centroids, DistanceKind::euclidean);
    const double p_r0 = p1(model.outlier_cluster);
    Vector p2;
    if (model.r == 1) {
        p2 = Vector::Ones(1);
    } else if (x.norm() == 0.0) {
        p2 = Vector::Constant(model.r, 1.0 / static_cast<double>(model.r));
    } else {
        p2 = membership_probabilities(x, model.stage2.centroids, DistanceKind::cosine);
    }
    return combine_distributions(p_r0, p2);
}

/// Fits the two-stage model. r = nullopt selects r with the elbow heuristic
/// on the typical months under cosine distance.
inline RegimeFit fit_regimes(const Matrix& X, std::optional<Index> r, std::uint64_t seed,
                             const FitRegimesOptions& opts = {}) {
    if (r && *r < 1) throw ConfigError("fit_regimes: r must be at least 1");
    if (r && X.rows() < *r + 2) throw ConfigError("fit_regimes: need at least r + 2 rows");
    if (X.rows() < 3) throw ConfigError("fit_regimes: need at least 3 rows");

    const RegimeModel* prev = opts.warm_start;
    KMeansOptions k1;
    k1.n_init = opts.n_init;
    if (prev && prev->dim() == X.cols()) k1.initial = prev->stage1.centroids;

    RegimeModel model;
    model.seed = seed;
    model.stage1 = kmeans(X, 2, DistanceKind::euclidean, seed, k1);
    const auto sizes = model.stage1.sizes();
    if (model.stage1.inertia == 0.0 &&
        (model.stage1.centroids.row(0) - model.stage1.centroids.row(1)).squaredNorm() == 0.0)
        throw DegenerateError("degenerate panel: all rows coincide");

    if (sizes[0] != sizes[1]) {
        model.outlier_cluster = sizes[0] < sizes[1] ? 0 : 1;
    } else {
        model.outlier_cluster = model.stage1.centroids.row(0).norm() >= model.stage1.centroids.row(1).norm() ? 0 : 1;
    }

    std::vector<Index> typical;
    for (Index i = 0; i < X.rows(); ++i)
        if (model.stage1.assignments[static_cast<std::size_t>(i)] != model.outlier_cluster) typical.push_back(i);
    Matrix B(static_cast<Index>(typical.size()), X.cols());
    for (std::size_t t = 0; t < typical.size(); ++t) B.row(static_cast<Index>(t)) = X.row(typical[t]);

    if (r) {
        model.r = *r;
    } else {
        const Index k_max = std::min(opts.k_max, B.rows() - 1);
        model.r = elbow_k(B, k_max, seed, DistanceKind::cosine);
    }
    if (B.rows() < model.r)
        throw ConfigError("fit_regimes: typical cluster has " + std::to_string(B.rows()) + " rows, fewer than r = " +
                          std::to_string(model.r));

    KMeansOptions k2;
    k2.n_init = opts.n_init;
    const bool warm2 = prev && prev->r == model.r && prev->dim() == X.cols();
    if (warm2) k2.initial = prev->stage2.centroids;
    model.stage2 = kmeans(B, model.r, DistanceKind::cosine, seed, k2);

    if (warm2) model = relabel(model, match_clusters(*prev, model));

    RegimeFit fit;
    fit.labels.assign(static_cast<std::size_t>(X.rows()), 0);
    for (std::size_t t = 0; t < typical.size(); ++t)
        fit.labels[static_cast<std::size_t>(typical[t])] = model.stage2.assignments[t] + 1;
    fit.model = std::move(model);
    return fit;
}

inline std::pair<RegimeModel, RegimeLabelSeries> fit_regimes(const FactorPanel& panel, std::optional<Index> r,
                                                             std::uint64_t seed, const FitRegimesOptions& opts = {}) {
    auto fit = fit_regimes(panel.factors, r, seed, opts);
    return {std::move(fit.model), RegimeLabelSeries{panel.dates, std::move(fit.labels)}};
}

inline std::vector<RegimeDistribution> classify_rows(const RegimeModel& model, const Matrix& X) {
    std::vector<RegimeDistribution> out;
    out.reserve(static_cast<std::size_t>(X.rows()));
    for (Index i = 0; i < X.rows(); ++i) out.push_back(classify(model, X.row(i).transpose()));
    return out;
}

/// P(Regime 0) per month.
inline std::vector<double> crisis_probability(const std::vector<RegimeDistribution>& distributions) {
    std::vector<double> out;
    out.reserve(distributions.size());
    for (const auto& d : distributions) out.push_back(d.size() ? d[0] : 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Profiling
// ---------------------------------------------------------------------------

struct RegimeProfile {
    std::vector<std::string> series_ids;
    Matrix means;       // regimes x series; NaN row for regimes with no months
    Matrix normalized;  // min-max across regimes within each series; constant series -> 0
    std::vector<std::string> warnings;
};

/// Per-regime mean of each requested series over the months carrying that
/// label, min-max normalized across regimes.
inline RegimeProfile regime_profile(const MacroPanel& panel, const RegimeLabelSeries& labels,
                                    const std::vector<std::string>& series_ids, Index n_regimes) {
    RegimeProfile prof;
    prof.series_ids = series_ids;
    std::vector<Index> cols;
    for (const auto& id : series_ids) {
        const Index c = panel.column_index(id);
        if (c < 0) throw ValidationError("regime profile: series '" + id + "' not in panel");
        cols.push_back(c);
    }
    const auto S = static_cast<Index>(cols.size());
    Matrix sums = Matrix::Zero(n_regimes, S);
    Matrix counts = Matrix::Zero(n_regimes, S);
    std::size_t li = 0;
    for (Index i = 0; i < panel.rows() && li < labels.dates.size(); ++i) {
        while (li < labels.dates.size() && labels.dates[li] < panel.dates[static_cast<std::size_t>(i)]) ++li;
        if (li >= labels.dates.size() || labels.dates[li] != panel.dates[static_cast<std::size_t>(i)]) continue;
        const int g = labels.labels[li];
        if (g < 0 || g >= n_regimes) throw ConfigError("regime profile: label outside 0..r");
        for (Index s = 0; s < S; ++s) {
            const double v = panel.values(i, cols[static_cast<std::size_t>(s)]);
            if (is_missing(v)) continue;
            sums(g, s) += v;
            counts(g, s) += 1.0;
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    prof.means = Matrix::Constant(n_regimes, S, nan);
    for (Index g = 0; g < n_regimes; ++g)
        for (Index s = 0; s < S; ++s)
            if (counts(g, s) > 0) prof.means(g, s) = sums(g, s) / counts(g, s);
    for (Index g = 0; g < n_regimes; ++g)
        if (counts.row(g).sum() == 0)
            prof.warnings.push_back("regime " + std::to_string(g) + " has no months; excluded from normalization");

    prof.normalized = Matrix::Constant(n_regimes, S, nan);
    for (Index s = 0; s < S; ++s) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (Index g = 0; g < n_regimes; ++g) {
            const double v = prof.means(g, s);
            if (std::isnan(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        for (Index g = 0; g < n_regimes; ++g) {
            const double v = prof.means(g, s);
            if (std::isnan(v)) continue;
            prof.normalized(g, s) = hi > lo ? (v - lo) / (hi - lo) : 0.0;
        }
    }
    return prof;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline constexpr int kRegimeModelFormatVersion = 1;

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    auto rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("expected a nonempty matrix");
    Matrix m(static_cast<Index>(j.size()), static_cast<Index>(j[0].size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].size() != j[0].size()) throw ParseError("ragged matrix");
        for (std::size_t k = 0; k < j[i].size(); ++k) m(static_cast<Index>(i), static_cast<Index>(k)) = j[i][k].get<double>();
    }
    return m;
}

inline nlohmann::json cluster_to_json(const ClusterFit& c) {
    return {{"distance", to_string(c.distance_kind)},
            {"k", c.k()},
            {"seed", c.seed},
            {"inertia", c.inertia},
            {"centroids", matrix_to_json(c.centroids)}};
}

inline ClusterFit cluster_from_json(const nlohmann::json& j) {
    ClusterFit c;
    c.distance_kind = distance_kind_from_string(j.at("distance").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.inertia = j.at("inertia").get<double>();
    c.centroids = matrix_from_json(j.at("centroids"));
    return c;
}

}  // namespace detail

inline nlohmann::json regime_model_to_json(const RegimeModel& m) {
    return {{"format", "regime-model"},
            {"version", kRegimeModelFormatVersion},
            {"r", m.r},
            {"seed", m.seed},
            {"outlier_cluster", m.outlier_cluster},
            {"stage1", detail::cluster_to_json(m.stage1)},
            {"stage2", detail::cluster_to_json(m.stage2)}};
}

inline RegimeModel regime_model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "regime-model") throw ParseError("not a regime-model document");
        const int version = j.at("version").get<int>();
        if (version != kRegimeModelFormatVersion)
            throw ParseError("unsupported regime-model version " + std::to_string(version));
        RegimeModel m;
        m.r = j.at("r").get<Index>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.outlier_cluster = j.at("outlier_cluster").get<int>();
        m.stage1 = detail::cluster_from_json(j.at("stage1"));
        m.stage2 = detail::cluster_from_json(j.at("stage2"));
        if (m.stage1.k() != 2 || m.stage2.k() != m.r || m.stage1.centroids.cols() != m.stage2.centroids.cols() ||
            (m.outlier_cluster != 0 && m.outlier_cluster != 1))
            throw ParseError("inconsistent regime-model document");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("regime-model document: ") + e.what());
    }
}

/// date,label,p0..pr
inline std::string regimes_to_csv(const RegimeLabelSeries& labels, const std::vector<RegimeDistribution>& dists) {
    if (labels.labels.size() != dists.size()) throw ShapeError("labels and distributions differ in length");
    std::string out = "date,label";
    const Index n = dists.empty() ? 0 : dists.front().size();
    for (Index i = 0; i < n; ++i) out += ",p" + std::to_string(i);
    out += '\n';
    for (std::size_t t = 0; t < dists.size(); ++t) {
        out += labels.dates[t].iso() + "," + std::to_string(labels.labels[t]);
        for (Index i = 0; i < n; ++i) out += "," + csv::format(dists[t][i]);
        out += '\n';
    }
    return out;
}

}  // namespace regime_taa
