// gmm.hpp
// Diagonal-covariance Gaussian mixture fitted by EM. Used only as a
// comparator for the k-means regime probabilities.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "regime_taa/error.hpp"
#include "regime_taa/kmeans.hpp"
#include "regime_taa/types.hpp"

namespace regime_taa {

struct GmmOptions {
    double rel_tol = 1e-6;
    int max_iter = 500;
    double min_variance = 1e-12;
};

struct GmmFit {
    Matrix means;             // k x m
    Matrix variances;         // k x m
    Vector weights;           // k
    Matrix responsibilities;  // n x k, rows on the simplex
    std::vector<double> log_likelihood;
    int iterations = 0;
    bool converged = false;
    std::uint64_t seed = 0;  // seed of the successful attempt
};

namespace detail {

struct GmmCollapse {};

inline double estep(const Matrix& X, const GmmFit& g, Matrix& resp) {
    const Index n = X.rows(), k = g.means.rows(), m = X.cols();
    const double log2pi = std::log(2.0 * std::numbers::pi);
    resp.resize(n, k);
    double ll = 0.0;
    Vector lp(k);
    for (Index i = 0; i < n; ++i) {
        for (Index c = 0; c < k; ++c) {
            double s = std::log(g.weights(c));
            for (Index d = 0; d < m; ++d) {
                const double v = g.variances(c, d);
                const double z = X(i, d) - g.means(c, d);
                s -= 0.5 * (log2pi + std::log(v) + z * z / v);
            }
            lp(c) = s;
        }
        const double mx = lp.maxCoeff();
        const double lse = mx + std::log((lp.array() - mx).exp().sum());
        resp.row(i) = (lp.array() - lse).exp().transpose();
        ll += lse;
    }
    return ll;
}

inline GmmFit run_em(const Matrix& X, Index k, std::uint64_t seed, const GmmOptions& opt) {
    const Index n = X.rows(), m = X.cols();
    const auto init = kmeans(X, k, DistanceKind::euclidean, seed);

    GmmFit g;
    g.seed = seed;
    g.means = init.centroids;
    g.variances = Matrix::Zero(k, m);
    g.weights = Vector::Zero(k);
    const Vector global_mean = X.colwise().mean().transpose();
    const Vector global_var = ((X.rowwise() - global_mean.transpose()).array().square().colwise().sum() /
                               static_cast<double>(n)).transpose();
    for (Index i = 0; i < n; ++i) {
        const int c = init.assignments[static_cast<std::size_t>(i)];
        g.weights(c) += 1.0;
        g.variances.row(c) += (X.row(i) - g.means.row(c)).array().square().matrix();
    }
    for (Index c = 0; c < k; ++c) {
        g.variances.row(c) /= g.weights(c);
        for (Index d = 0; d < m; ++d)
            if (g.variances(c, d) < opt.min_variance) g.variances(c, d) = global_var(d);
    }
    g.weights /= static_cast<double>(n);
    if ((g.variances.array() < opt.min_variance).any()) throw GmmCollapse{};

    Matrix resp;
    for (int it = 0; it < opt.max_iter; ++it) {
        const double ll = estep(X, g, resp);
        g.log_likelihood.push_back(ll);
        g.iterations = it + 1;
        if (it > 0) {
            const double prev = g.log_likelihood[g.log_likelihood.size() - 2];
            if (std::abs(ll - prev) <= opt.rel_tol * std::abs(prev)) {
                g.converged = true;
                break;
            }
        }
        const Vector nk = resp.colwise().sum().transpose();
        for (Index c = 0; c < k; ++c) {
            if (!(nk(c) > 0.0)) throw GmmCollapse{};
            g.weights(c) = nk(c) / static_cast<double>(n);
            g.means.row(c) = (resp.col(c).transpose() * X) / nk(c);
            Vector var = Vector::Zero(m);
            for (Index i = 0; i < n; ++i) var += resp(i, c) * (X.row(i) - g.means.row(c)).array().square().matrix().transpose();
            var /= nk(c);
            if ((var.array() < opt.min_variance).any()) throw GmmCollapse{};
            g.variances.row(c) = var.transpose();
        }
    }
    g.responsibilities = std::move(resp);
    return g;
}

}  // namespace detail

/// EM for a diagonal Gaussian mixture initialized from k-means with the same
/// seed. A collapsed component triggers one retry with seed + 1.
inline GmmFit fit_gmm(const Matrix& X, Index k, std::uint64_t seed, const GmmOptions& opt = {}) {
    if (k < 1) throw ConfigError("GMM: k must be at least 1");
    if (X.rows() < k) throw ConfigError("GMM: fewer rows than components");
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            return detail::run_em(X, k, seed + static_cast<std::uint64_t>(attempt), opt);
        } catch (const detail::GmmCollapse&) {
        }
    }
    throw DegenerateError("GMM: component variance collapsed below " + std::to_string(opt.min_variance));
}

}  // namespace regime_taa
