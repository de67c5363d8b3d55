// forecast.hpp
// Regime-conditioned next-month forecasts: conditional Sharpe (naive),
// conditional means used as Black-Litterman views, and per-regime ridge
// regressions blended by the propagated regime distribution.

#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regime_taa/error.hpp"
#include "regime_taa/macro_ingest.hpp"
#include "regime_taa/month.hpp"
#include "regime_taa/regime_engine.hpp"
#include "regime_taa/types.hpp"

namespace regime_taa {

struct AssetPanel {
    std::vector<Month> dates;
    std::vector<std::string> tickers;
    Matrix returns;  // dates x assets, simple monthly returns in decimal

    Index rows() const { return returns.rows(); }
    Index n_assets() const { return returns.cols(); }
};

inline AssetPanel parse_asset_panel(std::string_view csv_text) {
    auto m = parse_dated_matrix(csv_text, "asset panel", false);
    if ((m.values.array() <= -1.0).any()) throw ValidationError("asset panel: returns must exceed -1");
    return AssetPanel{std::move(m.dates), std::move(m.names), std::move(m.values)};
}

struct ConditionalMoments {
    double mean = 0.0;
    double std = 0.0;     // sample standard deviation
    double sharpe = 0.0;  // mean / std, 0 when std is 0
    Index n_obs = 0;      // months carrying the requested label
    bool fallback = false;  // true when unconditional moments were used
};

namespace detail {

inline void sample_moments(std::span<const double> v, double& mean, double& sd) {
    const auto n = static_cast<double>(v.size());
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

}  // namespace detail

/// Sample mean and standard deviation of returns over months labeled `regime`.
/// Falls back to the whole window when fewer than min_obs months qualify or
/// the conditional standard deviation is zero.
inline ConditionalMoments conditional_moments(std::span<const double> returns, std::span<const int> labels, int regime,
                                              Index n_regimes, Index min_obs) {
    if (returns.size() != labels.size()) throw ShapeError("conditional_moments: returns and labels differ in length");
    if (regime < 0 || regime >= n_regimes)
        throw ConfigError("conditional_moments: regime " + std::to_string(regime) + " out of range");
    if (returns.empty()) throw LengthError("conditional_moments: empty window");

    std::vector<double> subset;
    for (std::size_t t = 0; t < returns.size(); ++t)
        if (labels[t] == regime) subset.push_back(returns[t]);

    ConditionalMoments m;
    m.n_obs = static_cast<Index>(subset.size());
    if (m.n_obs >= std::max<Index>(min_obs, 1)) detail::sample_moments(subset, m.mean, m.std);
    if (m.n_obs < std::max<Index>(min_obs, 1) || !(m.std > 0.0)) {
        m.fallback = true;
        detail::sample_moments(returns, m.mean, m.std);
    }
    m.sharpe = m.std > 0.0 ? m.mean / m.std : 0.0;
    return m;
}

struct ForecastVector {
    Vector values;
    std::vector<bool> fallback;  // per asset
};

namespace detail {

inline std::vector<ConditionalMoments> moments_for(const Matrix& returns, const std::vector<int>& labels, int regime,
                                                   Index n_regimes, Index min_obs) {
    if (returns.rows() != static_cast<Index>(labels.size())) throw ShapeError("returns and labels differ in length");
    std::vector<ConditionalMoments> out;
    std::vector<double> col(static_cast<std::size_t>(returns.rows()));
    for (Index j = 0; j < returns.cols(); ++j) {
        for (Index t = 0; t < returns.rows(); ++t) col[static_cast<std::size_t>(t)] = returns(t, j);
        out.push_back(conditional_moments(col, labels, regime, n_regimes, min_obs));
    }
    return out;
}

}  // namespace detail

/// Conditional Sharpe ratio of each asset under the most likely next regime.
inline ForecastVector naive_forecast(const Matrix& returns, const std::vector<int>& labels,
                                     const RegimeDistribution& p_next, Index min_obs = 3) {
    const auto regime = static_cast<int>(p_next.argmax());
    const auto m = detail::moments_for(returns, labels, regime, p_next.size(), min_obs);
    ForecastVector f{Vector(returns.cols()), {}};
    for (std::size_t j = 0; j < m.size(); ++j) {
        f.values(static_cast<Index>(j)) = m[j].sharpe;
        f.fallback.push_back(m[j].fallback);
    }
    return f;
}

/// Black-Litterman views: conditional mean return of each asset under the
/// most likely next regime.
inline ForecastVector bl_views(const Matrix& returns, const std::vector<int>& labels, const RegimeDistribution& p_next,
                               Index min_obs = 3) {
    const auto regime = static_cast<int>(p_next.argmax());
    const auto m = detail::moments_for(returns, labels, regime, p_next.size(), min_obs);
    ForecastVector f{Vector(returns.cols()), {}};
    for (std::size_t j = 0; j < m.size(); ++j) {
        f.values(static_cast<Index>(j)) = m[j].mean;
        f.fallback.push_back(m[j].fallback);
    }
    return f;
}

// ---------------------------------------------------------------------------
// Ridge
// ---------------------------------------------------------------------------

/// beta = (X^T X + lambda I)^{-1} X^T Y for every column of Y.
inline Matrix ridge_fit(const Matrix& X, const Matrix& Y, double lambda) {
    if (X.rows() < 1) throw LengthError("ridge: need at least one row");
    if (X.rows() != Y.rows()) throw ShapeError("ridge: X and y differ in row count");
    if (!(lambda >= 0.0)) throw ConfigError("ridge: lambda must be nonnegative");
    Matrix A = X.transpose() * X;
    A.diagonal().array() += lambda;
    Eigen::LDLT<Matrix> ldlt(A);
    const double d_max = A.size() ? ldlt.vectorD().cwiseAbs().maxCoeff() : 0.0;
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(d_max > 0.0) ||
        ldlt.vectorD().minCoeff() <= 1e-13 * d_max || ldlt.rcond() < 1e-13)
        throw LinAlgError("ridge: normal equations are singular (use lambda > 0)");
    return ldlt.solve(X.transpose() * Y);
}

inline Vector ridge_fit(const Matrix& X, const Vector& y, double lambda) {
    return ridge_fit(X, Matrix(y), lambda).col(0);
}

struct RidgeModel {
    int regime = -1;  // -1 for the pooled model
    Matrix beta;      // factors x assets
    Vector intercept; // per asset; zero unless fitted with an intercept
    double lambda = 1.0;
    Index n_obs = 0;
    bool fallback = false;  // forecasts use the pooled model instead

    Vector predict(const Vector& x) const { return beta.transpose() * x + intercept; }
};

struct RidgeOptions {
    double lambda = 1.0;
    Index min_obs = 3;
    bool fit_intercept = false;
    bool include_regime_zero = true;  // false sums only Regimes 1..r when blending
};

struct RidgeSet {
    std::vector<RidgeModel> per_regime;  // index = regime
    RidgeModel pooled;
};

namespace detail {

inline RidgeModel fit_one(const Matrix& X, const Matrix& Y, int regime, const RidgeOptions& opt) {
    RidgeModel m;
    m.regime = regime;
    m.lambda = opt.lambda;
    m.n_obs = X.rows();
    if (opt.fit_intercept) {
        const Vector xm = X.colwise().mean().transpose();
        const Vector ym = Y.colwise().mean().transpose();
        const Matrix Xc = X.rowwise() - xm.transpose();
        const Matrix Yc = Y.rowwise() - ym.transpose();
        m.beta = ridge_fit(Xc, Yc, opt.lambda);
        m.intercept = ym - m.beta.transpose() * xm;
    } else {
        m.beta = ridge_fit(X, Y, opt.lambda);
        m.intercept = Vector::Zero(Y.cols());
    }
    return m;
}

}  // namespace detail

/// Fits one ridge model per regime on pairs (x_s, r_{s+1}) for months s in
/// the window labeled with that regime, plus a pooled model on all pairs.
/// Regimes with fewer than min_obs pairs are marked fallback.
inline RidgeSet fit_ridge_models(const Matrix& factors, const Matrix& returns, const std::vector<int>& labels,
                                 Index n_regimes, const RidgeOptions& opt = {}) {
    const Index W = factors.rows();
    if (returns.rows() != W || static_cast<Index>(labels.size()) != W)
        throw ShapeError("ridge: factors, returns and labels must share the window length");
    if (W < 2) throw LengthError("ridge: window needs at least two months");

    RidgeSet set;
    set.pooled = detail::fit_one(factors.topRows(W - 1), returns.bottomRows(W - 1), -1, opt);
    for (Index g = 0; g < n_regimes; ++g) {
        std::vector<Index> rows;
        for (Index s = 0; s + 1 < W; ++s)
            if (labels[static_cast<std::size_t>(s)] == g) rows.push_back(s);
        const auto n = static_cast<Index>(rows.size());
        if (n < std::max<Index>(opt.min_obs, 1)) {
            RidgeModel m = set.pooled;
            m.regime = static_cast<int>(g);
            m.n_obs = n;
            m.fallback = true;
            set.per_regime.push_back(std::move(m));
            continue;
        }
        Matrix X(n, factors.cols()), Y(n, returns.cols());
        for (Index k = 0; k < n; ++k) {
            X.row(k) = factors.row(rows[static_cast<std::size_t>(k)]);
            Y.row(k) = returns.row(rows[static_cast<std::size_t>(k)] + 1);
        }
        set.per_regime.push_back(detail::fit_one(X, Y, static_cast<int>(g), opt));
    }
    return set;
}

/// Probability-weighted blend of per-regime predictions at x_t.
inline ForecastVector ridge_forecast(const RidgeSet& set, const Vector& x_t, const RegimeDistribution& p_next,
                                     bool include_regime_zero = true) {
    if (static_cast<Index>(set.per_regime.size()) != p_next.size())
        throw ShapeError("ridge_forecast: one model per regime required");
    const Index d = set.pooled.beta.cols();
    if (x_t.size() != set.pooled.beta.rows()) throw ShapeError("ridge_forecast: factor dimension mismatch");
    ForecastVector f{Vector::Zero(d), std::vector<bool>(static_cast<std::size_t>(d), false)};
    for (Index g = include_regime_zero ? 0 : 1; g < p_next.size(); ++g) {
        const auto& m = set.per_regime[static_cast<std::size_t>(g)];
        f.values += p_next[g] * m.predict(x_t);
        if (m.fallback && p_next[g] > 0.0)
            for (auto&& fb : f.fallback) fb = true;
    }
    return f;
}

}  // namespace regime_taa
