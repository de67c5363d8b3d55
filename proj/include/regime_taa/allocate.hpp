// allocate.hpp
// Position sizing from forecast vectors, the Black-Litterman posterior mean
// and the mean-variance (tangency direction) baseline.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "regime_taa/error.hpp"
#include "regime_taa/regime_engine.hpp"
#include "regime_taa/types.hpp"

namespace regime_taa {

enum class Scheme { lns, los, lo, mx };

inline const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::lns: return "lns";
        case Scheme::los: return "los";
        case Scheme::lo: return "lo";
        case Scheme::mx: return "mx";
    }
    return "?";
}

inline Scheme scheme_from_string(const std::string& s) {
    if (s == "lns") return Scheme::lns;
    if (s == "los") return Scheme::los;
    if (s == "lo") return Scheme::lo;
    if (s == "mx") return Scheme::mx;
    throw ConfigError("unknown sizing scheme '" + s + "'");
}

/// Portfolio weights. Gross exposure sum |w| is 1 whenever a position is
/// taken; otherwise all zero and `flat` is set.
struct WeightVector {
    Vector w;
    bool flat = false;

    Index size() const { return w.size(); }
    double gross() const { return w.cwiseAbs().sum(); }
    Index support() const { return (w.array() != 0.0).count(); }

    static WeightVector zeros(Index n) { return WeightVector{Vector::Zero(n), true}; }
};

namespace detail {

// Indices ordered by key descending; equal keys keep asset order.
inline std::vector<Index> order_desc(const Vector& key) {
    std::vector<Index> idx(static_cast<std::size_t>(key.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return key(a) > key(b); });
    return idx;
}

inline WeightVector normalize_selection(const Vector& y, const std::vector<Index>& chosen) {
    double s = 0.0;
    for (Index j : chosen) s += std::abs(y(j));
    if (chosen.empty() || !(s > 0.0)) return WeightVector::zeros(y.size());
    WeightVector out{Vector::Zero(y.size()), false};
    for (Index j : chosen) out.w(j) = y(j) / s;
    return out;
}

inline void check_l(Index l) {
    if (l < 1) throw ConfigError("sizing: l must be at least 1");
}

// Up to l highest strictly positive forecasts.
inline std::vector<Index> top_positive(const Vector& y, Index l) {
    std::vector<Index> out;
    for (Index j : order_desc(y)) {
        if (static_cast<Index>(out.size()) == l || !(y(j) > 0.0)) break;
        out.push_back(j);
    }
    return out;
}

// Up to l lowest strictly negative forecasts.
inline std::vector<Index> bottom_negative(const Vector& y, Index l) {
    std::vector<Index> out;
    for (Index j : order_desc(-y)) {
        if (static_cast<Index>(out.size()) == l || !(y(j) < 0.0)) break;
        out.push_back(j);
    }
    return out;
}

}  // namespace detail

/// Long and short: the l highest positive and l lowest negative forecasts,
/// each scaled by the summed magnitude of the selection.
inline WeightVector size_lns(const Vector& y, Index l) {
    detail::check_l(l);
    auto chosen = detail::top_positive(y, l);
    auto low = detail::bottom_negative(y, l);
    chosen.insert(chosen.end(), low.begin(), low.end());
    return detail::normalize_selection(y, chosen);
}

/// Long or short: the l forecasts of largest magnitude.
inline WeightVector size_los(const Vector& y, Index l) {
    detail::check_l(l);
    std::vector<Index> chosen;
    for (Index j : detail::order_desc(y.cwiseAbs())) {
        if (static_cast<Index>(chosen.size()) == l || y(j) == 0.0) break;
        chosen.push_back(j);
    }
    return detail::normalize_selection(y, chosen);
}

/// Long only: the l highest strictly positive forecasts; cash otherwise.
inline WeightVector size_lo(const Vector& y, Index l) {
    detail::check_l(l);
    return detail::normalize_selection(y, detail::top_positive(y, l));
}

/// Mixed: long-or-short when Regime 0 is the most likely next regime,
/// long-only otherwise.
inline WeightVector size_mx(const Vector& y, Index l, const RegimeDistribution& p_next) {
    return p_next.argmax() == 0 ? size_los(y, l) : size_lo(y, l);
}

inline WeightVector size_positions(Scheme scheme, const Vector& y, Index l, const RegimeDistribution& p_next) {
    switch (scheme) {
        case Scheme::lns: return size_lns(y, l);
        case Scheme::los: return size_los(y, l);
        case Scheme::lo: return size_lo(y, l);
        case Scheme::mx: return size_mx(y, l, p_next);
    }
    throw ConfigError("unknown sizing scheme");
}

/// Gross-exposure normalization of an arbitrary score vector.
inline WeightVector normalize_gross(const Vector& v) {
    const double g = v.cwiseAbs().sum();
    if (!(g > 0.0) || !std::isfinite(g)) return WeightVector::zeros(v.size());
    return WeightVector{v / g, false};
}

// ---------------------------------------------------------------------------
// Covariance-based estimators
// ---------------------------------------------------------------------------

inline Vector sample_mean(const Matrix& returns) { return returns.colwise().mean().transpose(); }

/// Sample covariance with the n - 1 denominator.
inline Matrix sample_covariance(const Matrix& returns) {
    if (returns.rows() < 2) throw LengthError("covariance needs at least two observations");
    const Matrix c = returns.rowwise() - returns.colwise().mean();
    return (c.transpose() * c) / static_cast<double>(returns.rows() - 1);
}

namespace detail {

/// Cholesky of sigma; on failure the diagonal is loaded once with
/// 1e-8 * trace / d before giving up.
inline Matrix regularized_covariance(const Matrix& sigma, std::vector<std::string>* warnings) {
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0) throw ShapeError("covariance must be square and nonempty");
    if (!sigma.isApprox(sigma.transpose(), 1e-10)) throw DomainError("covariance is not symmetric");
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() == Eigen::Success) return sigma;
    Matrix reg = sigma;
    const double bump = 1e-8 * sigma.trace() / static_cast<double>(sigma.rows());
    reg.diagonal().array() += bump;
    Eigen::LLT<Matrix> llt2(reg);
    if (!(bump > 0.0) || llt2.info() != Eigen::Success)
        throw LinAlgError("covariance is not positive definite even after diagonal loading");
    if (warnings) warnings->push_back("covariance regularized by diagonal loading");
    return reg;
}

}  // namespace detail

struct BlConfig {
    double tau = 0.05;
    Matrix pick;        // views x assets; empty means identity
    Vector omega_diag;  // view variances; empty means diag(tau P Sigma P^T)
};

/// Posterior mean [(tau S)^-1 + P^T O^-1 P]^-1 [(tau S)^-1 mu + P^T O^-1 q],
/// evaluated in the equivalent form mu + tau S P^T (P tau S P^T + O)^-1 (q - P mu)
/// with a single symmetric solve.
inline Vector bl_posterior(const Vector& mu, const Matrix& sigma, const Vector& q, const BlConfig& cfg,
                           std::vector<std::string>* warnings = nullptr) {
    const Index d = mu.size();
    if (sigma.rows() != d) throw ShapeError("bl_posterior: covariance does not match the mean vector");
    if (!(cfg.tau > 0.0)) throw ConfigError("bl_posterior: tau must be positive");
    const Matrix P = cfg.pick.size() ? cfg.pick : Matrix(Matrix::Identity(d, d));
    if (P.cols() != d || P.rows() != q.size()) throw ShapeError("bl_posterior: pick matrix does not match views");

    const Matrix S = detail::regularized_covariance(sigma, warnings);
    const Matrix tauS = cfg.tau * S;
    const Matrix tauSPt = tauS * P.transpose();
    Matrix M = P * tauSPt;
    Vector omega = cfg.omega_diag;
    if (omega.size() == 0) omega = M.diagonal();
    if (omega.size() != P.rows()) throw ShapeError("bl_posterior: omega does not match views");
    if (!(omega.array() > 0.0).all()) throw DomainError("bl_posterior: omega must be positive definite");
    M.diagonal() += omega;

    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) throw LinAlgError("bl_posterior: view system is not positive definite");
    return mu + tauSPt * llt.solve(q - P * mu);
}

/// Tangency direction Sigma^-1 mu.
inline Vector mvo_scores(const Vector& mu, const Matrix& sigma, std::vector<std::string>* warnings = nullptr) {
    if (sigma.rows() != mu.size()) throw ShapeError("mvo_scores: covariance does not match the mean vector");
    const Matrix S = detail::regularized_covariance(sigma, warnings);
    Eigen::LLT<Matrix> llt(S);
    return llt.solve(mu);
}

}  // namespace regime_taa
