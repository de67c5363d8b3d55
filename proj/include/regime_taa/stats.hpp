// stats.hpp
// Performance metrics, volatility scaling, random-regime controls and the
// paired significance tests used to compare treatment and control runs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "regime_taa/error.hpp"
#include "regime_taa/regime_engine.hpp"

namespace regime_taa {

inline constexpr double kMonthsPerYear = 12.0;

struct Metrics {
    double sharpe = 0.0;
    double sortino = 0.0;  // +inf when no month is negative
    double avg_dd = 0.0;   // percent
    double max_dd = 0.0;   // percent, <= 0
    double pct_positive = 0.0;
    bool degenerate = false;  // zero-volatility series; ratios reported as 0
};

namespace detail {

inline double mean_of(std::span<const double> r) {
    return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

inline double sample_std(std::span<const double> r) {
    const double m = mean_of(r);
    double ss = 0.0;
    for (double x : r) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(r.size() - 1));
}

}  // namespace detail

/// Monthly drawdown series of the compounded wealth curve, in percent. The
/// starting wealth of 1 counts as the first peak.
inline std::vector<double> drawdown_series(std::span<const double> returns) {
    std::vector<double> dd;
    dd.reserve(returns.size());
    double wealth = 1.0, peak = 1.0;
    for (double r : returns) {
        wealth *= 1.0 + r;
        peak = std::max(peak, wealth);
        dd.push_back(100.0 * (wealth / peak - 1.0));
    }
    return dd;
}

/// Annualized Sharpe and Sortino (risk-free rate 0, sqrt(12) scaling),
/// drawdowns in percent and the fraction of positive months.
inline Metrics metrics(std::span<const double> returns) {
    if (returns.size() < 2) throw LengthError("metrics need at least two observations");
    Metrics m;
    const double mean = detail::mean_of(returns);
    const double sd = detail::sample_std(returns);
    if (!(sd > 0.0)) throw DegenerateError("metrics: zero standard deviation, Sharpe undefined");
    m.sharpe = mean / sd * std::sqrt(kMonthsPerYear);

    double down = 0.0;
    bool any_negative = false;
    for (double r : returns) {
        if (r < 0.0) {
            down += r * r;
            any_negative = true;
        }
    }
    const double downside = std::sqrt(down / static_cast<double>(returns.size()));
    m.sortino = any_negative ? mean / downside * std::sqrt(kMonthsPerYear) : std::numeric_limits<double>::infinity();

    const auto dd = drawdown_series(returns);
    m.avg_dd = detail::mean_of(dd);
    m.max_dd = *std::min_element(dd.begin(), dd.end());
    m.pct_positive = static_cast<double>(std::count_if(returns.begin(), returns.end(), [](double r) { return r > 0.0; })) /
                     static_cast<double>(returns.size());
    return m;
}

/// metrics() for reporting: a zero-volatility series yields ratios of 0 and
/// the degenerate flag instead of an error.
inline Metrics metrics_or_degenerate(std::span<const double> returns) {
    try {
        return metrics(returns);
    } catch (const DegenerateError&) {
        Metrics m;
        m.degenerate = true;
        const auto dd = drawdown_series(returns);
        m.avg_dd = detail::mean_of(dd);
        m.max_dd = *std::min_element(dd.begin(), dd.end());
        m.pct_positive =
            static_cast<double>(std::count_if(returns.begin(), returns.end(), [](double r) { return r > 0.0; })) /
            static_cast<double>(returns.size());
        return m;
    }
}

/// Ex-post scaling of the whole series to the target annualized volatility.
inline std::vector<double> vol_scale(std::span<const double> returns, double target_annual) {
    if (returns.size() < 12) throw LengthError("vol_scale needs at least 12 observations");
    if (!(target_annual > 0.0)) throw ConfigError("vol_scale: target must be positive");
    const double sd = detail::sample_std(returns);
    if (!(sd > 0.0)) throw DegenerateError("vol_scale: zero standard deviation");
    const double k = target_annual / (sd * std::sqrt(kMonthsPerYear));
    std::vector<double> out(returns.begin(), returns.end());
    for (double& r : out) r *= k;
    return out;
}

inline double annualized_vol(std::span<const double> returns) {
    return detail::sample_std(returns) * std::sqrt(kMonthsPerYear);
}

// ---------------------------------------------------------------------------
// Random-regime controls
// ---------------------------------------------------------------------------

enum class ControlMode { permute, iid };

inline const char* to_string(ControlMode m) { return m == ControlMode::permute ? "permute" : "iid"; }

inline ControlMode control_mode_from_string(const std::string& s) {
    if (s == "permute") return ControlMode::permute;
    if (s == "iid") return ControlMode::iid;
    throw ConfigError("unknown control mode '" + s + "'");
}

/// SplitMix64 step, used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Fisher-Yates shuffle driven by mt19937_64 (portable, unlike std::shuffle
/// with a standard distribution).
inline std::vector<int> permute_labels(std::vector<int> labels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = labels.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(labels[i - 1], labels[j]);
    }
    return labels;
}

inline std::vector<int> iid_labels(std::size_t n, int n_regimes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> out(n);
    for (auto& l : out) l = static_cast<int>(rng() % static_cast<std::uint64_t>(n_regimes));
    return out;
}

/// Uniformly random permutation of the label sequence: marginal frequencies
/// are preserved and temporal structure is destroyed.
inline RegimeLabelSeries random_regime_control(const RegimeLabelSeries& labels, std::uint64_t seed) {
    return RegimeLabelSeries{labels.dates, permute_labels(labels.labels, seed)};
}

// ---------------------------------------------------------------------------
// Significance tests
// ---------------------------------------------------------------------------

struct TTestResult {
    double t = 0.0;
    double p = 0.5;
    int dof = 0;
    bool degenerate = false;
};

/// Upper tail P(T > t) for Student's t with dof degrees of freedom.
inline double student_t_upper_tail(double t, double dof) {
    boost::math::students_t_distribution<double> dist(dof);
    return boost::math::cdf(boost::math::complement(dist, t));
}

/// One-sided paired t-test of H0: mean(control) >= mean(treatment), with
/// d = treatment - control and p = P(T_{n-1} > t).
inline TTestResult paired_t_test(std::span<const double> control, std::span<const double> treatment) {
    if (control.size() != treatment.size()) throw ShapeError("paired t-test: samples differ in length");
    if (control.size() < 2) throw LengthError("paired t-test needs at least two pairs");
    std::vector<double> d(control.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = treatment[i] - control[i];
    TTestResult res;
    res.dof = static_cast<int>(d.size()) - 1;
    const double mean = detail::mean_of(d);
    const double sd = detail::sample_std(d);
    if (!(sd > 0.0)) {
        res.degenerate = true;
        res.t = 0.0;
        res.p = 0.5;
        return res;
    }
    res.t = mean / (sd / std::sqrt(static_cast<double>(d.size())));
    res.p = student_t_upper_tail(res.t, res.dof);
    return res;
}

struct NemenyiResult {
    double control_rank = 1.5;
    double treatment_rank = 1.5;
    double statistic = 0.0;  // |rank difference| / sqrt(k (k + 1) / (6 N))
    double p = 1.0;
    std::size_t blocks = 0;
};

/// Two-method Friedman/Nemenyi comparison across blocks. Within each block
/// the higher value gets rank 2 and ties share 1.5. For k = 2 the
/// studentized-range critical distribution (infinite dof) divided by sqrt(2)
/// is the standard half-normal, so p = 2 (1 - Phi(statistic)).
inline NemenyiResult nemenyi_test(std::span<const double> control, std::span<const double> treatment) {
    if (control.size() != treatment.size()) throw ShapeError("Nemenyi: samples differ in length");
    if (control.empty()) throw LengthError("Nemenyi: no blocks");
    NemenyiResult res;
    res.blocks = control.size();
    double rc = 0.0, rt = 0.0;
    for (std::size_t i = 0; i < control.size(); ++i) {
        if (treatment[i] > control[i]) {
            rc += 1.0;
            rt += 2.0;
        } else if (treatment[i] < control[i]) {
            rc += 2.0;
            rt += 1.0;
        } else {
            rc += 1.5;
            rt += 1.5;
        }
    }
    const auto n = static_cast<double>(control.size());
    res.control_rank = rc / n;
    res.treatment_rank = rt / n;
    constexpr double k = 2.0;
    res.statistic = std::abs(res.treatment_rank - res.control_rank) / std::sqrt(k * (k + 1.0) / (6.0 * n));
    boost::math::normal_distribution<double> z;
    res.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(z, res.statistic)));
    return res;
}

}  // namespace regime_taa
