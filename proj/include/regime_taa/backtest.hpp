// backtest.hpp
// Fixed-window walk-forward experiment: monthly regime refits, transition
// estimates, forecasts, position sizing and realized next-month returns,
// plus the random-regime control runs and their statistical comparison.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regime_taa/allocate.hpp"
#include "regime_taa/error.hpp"
#include "regime_taa/forecast.hpp"
#include "regime_taa/macro_ingest.hpp"
#include "regime_taa/regime_engine.hpp"
#include "regime_taa/stats.hpp"
#include "regime_taa/transition.hpp"

namespace regime_taa {

enum class Model { naive, ridge, bl, mvo };

inline const char* to_string(Model m) {
    switch (m) {
        case Model::naive: return "naive";
        case Model::ridge: return "ridge";
        case Model::bl: return "bl";
        case Model::mvo: return "mvo";
    }
    return "?";
}

inline Model model_from_string(const std::string& s) {
    if (s == "naive") return Model::naive;
    if (s == "ridge") return Model::ridge;
    if (s == "bl") return Model::bl;
    if (s == "mvo") return Model::mvo;
    throw ConfigError("unknown forecast model '" + s + "'");
}

struct BacktestConfig {
    Index window_months = 48;
    std::vector<Index> l_values{2, 3, 4};
    std::vector<Scheme> schemes{Scheme::lns, Scheme::los, Scheme::lo, Scheme::mx};
    std::vector<Model> models{Model::naive, Model::ridge, Model::bl, Model::mvo};
    double vol_target_annual = 0.10;
    std::uint64_t seed = 0;
    double smoothing_alpha = 0.0;

    std::optional<Index> r = 5;  // nullopt selects r by the elbow rule every month
    Index k_max = 10;
    int n_init = 10;

    Index min_obs = 3;  // conditional moments and per-regime ridge
    double ridge_lambda = 1.0;
    bool ridge_intercept = false;
    bool ridge_include_regime_zero = true;
    double bl_tau = 0.05;
    bool bl_raw_weights = false;  // adds a bl_raw strategy: posterior mean scaled to unit gross exposure

    std::string benchmark_ticker = "SPY";
    Index n_controls = 20;
    ControlMode control_mode = ControlMode::permute;

    void validate() const {
        if (window_months < 12) throw ConfigError("window_months must be at least 12");
        if (!(vol_target_annual > 0.0)) throw ConfigError("vol_target_annual must be positive");
        if (smoothing_alpha < 0.0) throw ConfigError("smoothing_alpha must be nonnegative");
        if (l_values.empty() || schemes.empty() || models.empty())
            throw ConfigError("l_values, schemes and models must be nonempty");
        for (Index l : l_values)
            if (l < 1) throw ConfigError("l values must be at least 1");
        if (r && *r < 1) throw ConfigError("r must be at least 1");
        if (n_controls < 0) throw ConfigError("n_controls must be nonnegative");
        if (!(bl_tau > 0.0)) throw ConfigError("bl_tau must be positive");
        if (!(ridge_lambda >= 0.0)) throw ConfigError("ridge_lambda must be nonnegative");
    }
};

/// Factor and asset panels restricted to their common months.
struct AlignedData {
    std::vector<Month> dates;
    std::vector<std::string> tickers;
    Matrix factors;
    Matrix returns;

    Index rows() const { return factors.rows(); }
};

inline AlignedData align(const FactorPanel& macro, const AssetPanel& assets) {
    if (macro.dates.empty() || assets.dates.empty()) throw ConfigError("insufficient history: empty panel");
    const Month start = std::max(macro.dates.front(), assets.dates.front());
    const Month end = std::min(macro.dates.back(), assets.dates.back());
    AlignedData a;
    a.tickers = assets.tickers;
    if (end < start) return a;
    const Index f0 = start.ordinal() - macro.dates.front().ordinal();
    const Index a0 = start.ordinal() - assets.dates.front().ordinal();
    const Index n = end.ordinal() - start.ordinal() + 1;
    a.factors = macro.factors.middleRows(f0, n);
    a.returns = assets.returns.middleRows(a0, n);
    for (Index i = 0; i < n; ++i) a.dates.push_back(Month::from_ordinal(start.ordinal() + i));
    return a;
}

struct StrategyResult {
    std::string name;  // e.g. ridge_lo_3, spy, ew
    bool benchmark = false;
    Model model = Model::naive;
    Scheme scheme = Scheme::lns;
    Index l = 0;
    std::vector<double> monthly_returns;
    std::vector<Vector> weights;  // decision-month weights
    Metrics metrics;
};

inline std::string strategy_name(Model m, Scheme s, Index l) {
    return std::string(to_string(m)) + "_" + to_string(s) + "_" + std::to_string(l);
}

/// Per decision month bookkeeping. Rows refer to the aligned panel.
struct MonthRecord {
    Month decision;
    Month realized;
    Index first_row = 0;
    Index last_row = 0;
    std::uint64_t slice_hash = 0;  // training slice and x_t
    std::uint64_t state_hash = 0;  // fitted quantities and all weights
    bool regime_ok = true;
    Index n_regimes = 0;
    RegimeDistribution p_t;
    RegimeDistribution p_next;
    std::map<Model, Vector> forecasts;  // score vector before sizing
};

struct BacktestResult {
    std::vector<Month> dates;  // realization months
    std::vector<std::string> tickers;
    std::vector<StrategyResult> strategies;
    std::vector<MonthRecord> months;
    std::vector<std::string> warnings;

    const StrategyResult& strategy(const std::string& name) const {
        for (const auto& s : strategies)
            if (s.name == name) return s;
        throw ConfigError("no strategy named '" + name + "'");
    }
};

namespace detail {

class Fnv1a {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= b[i];
            h_ *= 0x100000001B3ULL;
        }
    }
    template <class T>
    void value(const T& v) {
        bytes(&v, sizeof v);
    }
    void matrix(const Matrix& m) {
        value(m.rows());
        value(m.cols());
        for (Index j = 0; j < m.cols(); ++j)
            for (Index i = 0; i < m.rows(); ++i) value(m(i, j));
    }
    void vector(const Vector& v) {
        value(v.size());
        for (Index i = 0; i < v.size(); ++i) value(v(i));
    }
    std::uint64_t digest() const { return h_; }

private:
    std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

/// Regime fit for one decision month.
struct RegimeState {
    bool ok = false;
    std::string error;
    RegimeModel model;
    std::vector<int> labels;  // window labels, 0..r
    RegimeDistribution p_t;
};

inline std::vector<RegimeState> regime_path(const AlignedData& data, const BacktestConfig& cfg,
                                            std::vector<std::string>& warnings) {
    const Index W = cfg.window_months, N = data.rows();
    std::vector<RegimeState> path;
    path.reserve(static_cast<std::size_t>(N - W));  // prev points into path
    const RegimeModel* prev = nullptr;
    for (Index t = W - 1; t + 1 < N; ++t) {
        RegimeState st;
        try {
            FitRegimesOptions opts;
            opts.k_max = cfg.k_max;
            opts.n_init = cfg.n_init;
            opts.warm_start = prev;
            const Matrix window = data.factors.middleRows(t - W + 1, W);
            auto fit = fit_regimes(window, cfg.r, cfg.seed, opts);
            st.p_t = classify(fit.model, data.factors.row(t).transpose());
            st.model = std::move(fit.model);
            st.labels = std::move(fit.labels);
            st.ok = true;
        } catch (const Error& e) {
            st.error = e.what();
            warnings.push_back("month " + data.dates[static_cast<std::size_t>(t)].iso() +
                               ": regime fit failed, all strategies flat: " + e.what());
        }
        path.push_back(std::move(st));
        if (path.back().ok) prev = &path.back().model;
    }
    return path;
}

/// Maps window labels to the labels a run conditions on; t is the decision row.
using LabelTransform = std::function<std::vector<int>(const std::vector<int>&, Index t, Index n_regimes)>;

inline std::vector<int> identity_labels(const std::vector<int>& labels, Index, Index) { return labels; }

inline Vector model_scores(Model model, const AlignedData& data, Index t, const BacktestConfig& cfg,
                           const std::vector<int>& labels, const RegimeDistribution& p_next,
                           std::vector<std::string>& notes) {
    const Index W = cfg.window_months;
    const Matrix Wr = data.returns.middleRows(t - W + 1, W);
    switch (model) {
        case Model::naive: return naive_forecast(Wr, labels, p_next, cfg.min_obs).values;
        case Model::ridge: {
            RidgeOptions ro;
            ro.lambda = cfg.ridge_lambda;
            ro.min_obs = cfg.min_obs;
            ro.fit_intercept = cfg.ridge_intercept;
            ro.include_regime_zero = cfg.ridge_include_regime_zero;
            const Matrix Wf = data.factors.middleRows(t - W + 1, W);
            const auto set = fit_ridge_models(Wf, Wr, labels, p_next.size(), ro);
            return ridge_forecast(set, data.factors.row(t).transpose(), p_next, cfg.ridge_include_regime_zero).values;
        }
        case Model::bl: {
            const Vector q = bl_views(Wr, labels, p_next, cfg.min_obs).values;
            BlConfig bc;
            bc.tau = cfg.bl_tau;
            return bl_posterior(sample_mean(Wr), sample_covariance(Wr), q, bc, &notes);
        }
        case Model::mvo: return mvo_scores(sample_mean(Wr), sample_covariance(Wr), &notes);
    }
    throw ConfigError("unknown forecast model");
}

inline Index benchmark_column(const AlignedData& data, const BacktestConfig& cfg, std::vector<std::string>& warnings) {
    for (std::size_t j = 0; j < data.tickers.size(); ++j)
        if (data.tickers[j] == cfg.benchmark_ticker) return static_cast<Index>(j);
    warnings.push_back("benchmark ticker " + cfg.benchmark_ticker + " not in asset panel; spy uses " +
                       data.tickers.front());
    return 0;
}

inline BacktestResult evaluate(const AlignedData& data, const BacktestConfig& cfg, const std::vector<RegimeState>& path,
                               const LabelTransform& transform, std::vector<std::string> warnings) {
    const Index W = cfg.window_months, N = data.rows(), d = data.returns.cols();
    BacktestResult res;
    res.tickers = data.tickers;

    for (Model m : cfg.models)
        for (Scheme s : cfg.schemes)
            for (Index l : cfg.l_values) {
                StrategyResult sr;
                sr.name = strategy_name(m, s, l);
                sr.model = m;
                sr.scheme = s;
                sr.l = l;
                res.strategies.push_back(std::move(sr));
            }
    const bool raw_leg = cfg.bl_raw_weights && std::find(cfg.models.begin(), cfg.models.end(), Model::bl) != cfg.models.end();
    if (raw_leg) {
        StrategyResult sr;
        sr.name = "bl_raw";
        sr.model = Model::bl;
        res.strategies.push_back(std::move(sr));
    }
    const std::size_t n_legs = res.strategies.size();
    const Index spy_col = benchmark_column(data, cfg, warnings);
    for (const char* b : {"spy", "ew"}) {
        StrategyResult sr;
        sr.name = b;
        sr.benchmark = true;
        res.strategies.push_back(std::move(sr));
    }

    for (Index t = W - 1; t + 1 < N; ++t) {
        const auto& st = path[static_cast<std::size_t>(t - (W - 1))];
        const Vector r_next = data.returns.row(t + 1).transpose();
        MonthRecord rec;
        rec.decision = data.dates[static_cast<std::size_t>(t)];
        rec.realized = data.dates[static_cast<std::size_t>(t + 1)];
        rec.first_row = t - W + 1;
        rec.last_row = t;
        rec.regime_ok = st.ok;

        Fnv1a slice;
        slice.value(rec.first_row);
        slice.value(rec.last_row);
        slice.matrix(data.factors.middleRows(t - W + 1, W));
        slice.matrix(data.returns.middleRows(t - W + 1, W));
        rec.slice_hash = slice.digest();

        Fnv1a state;
        std::map<Model, Vector> scores;
        if (st.ok) {
            const Index n_reg = st.model.n_regimes();
            rec.n_regimes = n_reg;
            rec.p_t = st.p_t;
            const auto labels = transform(st.labels, t, n_reg);
            try {
                const auto E = estimate_transition(labels, n_reg, cfg.smoothing_alpha);
                rec.p_next = propagate(st.p_t, E);
                state.matrix(st.model.stage1.centroids);
                state.matrix(st.model.stage2.centroids);
                state.matrix(E.matrix);
                state.vector(rec.p_next.probs);
            } catch (const Error& e) {
                rec.regime_ok = false;
                warnings.push_back("month " + rec.decision.iso() + ": transition step failed, all strategies flat: " +
                                   e.what());
            }
            if (rec.regime_ok) {
                for (Model m : cfg.models) {
                    std::vector<std::string> notes;
                    try {
                        scores[m] = model_scores(m, data, t, cfg, labels, rec.p_next, notes);
                        if (!scores[m].allFinite()) throw DomainError("non-finite forecast");
                    } catch (const Error& e) {
                        scores.erase(m);
                        warnings.push_back("month " + rec.decision.iso() + ": " + to_string(m) +
                                           " failed, positions flat: " + e.what());
                    }
                    for (const auto& n : notes) warnings.push_back("month " + rec.decision.iso() + ": " + to_string(m) + ": " + n);
                }
            }
        }
        rec.forecasts = scores;

        for (std::size_t k = 0; k < n_legs; ++k) {
            auto& sr = res.strategies[k];
            WeightVector w = WeightVector::zeros(d);
            const auto it = scores.find(sr.model);
            if (it != scores.end())
                w = sr.l == 0 ? normalize_gross(it->second) : size_positions(sr.scheme, it->second, sr.l, rec.p_next);
            state.vector(w.w);
            sr.monthly_returns.push_back(w.w.dot(r_next));
            sr.weights.push_back(std::move(w.w));
        }
        auto& spy = res.strategies[n_legs];
        Vector ws = Vector::Zero(d);
        ws(spy_col) = 1.0;
        spy.monthly_returns.push_back(r_next(spy_col));
        spy.weights.push_back(ws);
        auto& ew = res.strategies[n_legs + 1];
        ew.monthly_returns.push_back(r_next.mean());
        ew.weights.push_back(Vector::Constant(d, 1.0 / static_cast<double>(d)));

        rec.state_hash = state.digest();
        res.dates.push_back(rec.realized);
        res.months.push_back(std::move(rec));
    }

    for (auto& sr : res.strategies) {
        if (sr.monthly_returns.size() >= 2 && std::all_of(sr.monthly_returns.begin(), sr.monthly_returns.end(),
                                                          [](double x) { return std::isfinite(x); }))
            sr.metrics = metrics_or_degenerate(sr.monthly_returns);
        else
            sr.metrics.degenerate = true;
    }
    res.warnings = std::move(warnings);
    return res;
}

inline void check_history(const AlignedData& data, const BacktestConfig& cfg) {
    if (data.rows() < cfg.window_months + 1)
        throw ConfigError("insufficient history: " + std::to_string(data.rows()) + " aligned months, need at least " +
                          std::to_string(cfg.window_months + 1));
    if (data.returns.cols() < 1) throw ConfigError("asset panel has no columns");
}

}  // namespace detail

/// Walk-forward run on already aligned data with the actual regime labels.
inline BacktestResult walk_forward(const AlignedData& data, const BacktestConfig& cfg) {
    cfg.validate();
    detail::check_history(data, cfg);
    std::vector<std::string> warnings;
    const auto path = detail::regime_path(data, cfg, warnings);
    return detail::evaluate(data, cfg, path, detail::identity_labels, std::move(warnings));
}

inline BacktestResult walk_forward(const FactorPanel& macro, const AssetPanel& assets, const BacktestConfig& cfg) {
    return walk_forward(align(macro, assets), cfg);
}

// ---------------------------------------------------------------------------
// Controls and comparison
// ---------------------------------------------------------------------------

/// Label transform of control run `index`. Each decision month draws its own
/// sub-seed so the control does not depend on how many months precede it.
inline detail::LabelTransform control_transform(std::uint64_t seed, Index index, ControlMode mode) {
    const std::uint64_t run_seed = mix_seed(seed, static_cast<std::uint64_t>(index));
    return [run_seed, mode](const std::vector<int>& labels, Index t, Index n_regimes) {
        const std::uint64_t s = mix_seed(run_seed, static_cast<std::uint64_t>(t));
        return mode == ControlMode::permute ? permute_labels(labels, s)
                                            : iid_labels(labels.size(), static_cast<int>(n_regimes), s);
    };
}

struct MetricComparison {
    std::string metric;
    std::vector<std::string> blocks;
    std::vector<double> control;
    std::vector<double> treatment;
    TTestResult t_test;
    NemenyiResult nemenyi;
};

struct ModelComparison {
    std::string name;  // naive, ridge, bl (random vs actual regimes) or bl_vs_mvo
    std::string control_label;
    std::string treatment_label;
    std::vector<MetricComparison> metrics;
};

struct ComparisonReport {
    Index n_controls = 0;
    ControlMode mode = ControlMode::permute;
    std::uint64_t seed = 0;
    std::vector<ModelComparison> comparisons;
};

inline const std::vector<std::string>& comparison_metrics() {
    static const std::vector<std::string> names{"Sharpe", "Sortino", "MaxDD", "% Positive Ret."};
    return names;
}

inline double metric_value(const Metrics& m, const std::string& name) {
    if (name == "Sharpe") return m.sharpe;
    if (name == "Sortino") return m.sortino;
    if (name == "MaxDD") return m.max_dd;
    if (name == "% Positive Ret.") return m.pct_positive;
    if (name == "AvgDD") return m.avg_dd;
    throw ConfigError("unknown metric '" + name + "'");
}

struct Experiment {
    BacktestResult treatment;
    std::vector<BacktestResult> controls;
    ComparisonReport report;
};

namespace detail {

inline MetricComparison compare_metric(const std::string& metric, const std::vector<std::string>& blocks,
                                       const std::vector<double>& control, const std::vector<double>& treatment) {
    MetricComparison mc;
    mc.metric = metric;
    mc.blocks = blocks;
    mc.control = control;
    mc.treatment = treatment;
    if (blocks.size() >= 2) mc.t_test = paired_t_test(control, treatment);
    if (!blocks.empty()) mc.nemenyi = nemenyi_test(control, treatment);
    return mc;
}

}  // namespace detail

/// Treatment vs random-regime controls for each regime-dependent model, with
/// the control value of a block being the mean over control seeds; plus the
/// Black-Litterman vs mean-variance comparison on the treatment run.
inline ComparisonReport compare(const BacktestResult& treatment, const std::vector<BacktestResult>& controls,
                                const BacktestConfig& cfg) {
    ComparisonReport rep;
    rep.n_controls = static_cast<Index>(controls.size());
    rep.mode = cfg.control_mode;
    rep.seed = cfg.seed;
    auto has = [&](Model m) { return std::find(cfg.models.begin(), cfg.models.end(), m) != cfg.models.end(); };

    if (!controls.empty()) {
        for (Model m : {Model::naive, Model::ridge, Model::bl}) {
            if (!has(m)) continue;
            ModelComparison mc;
            mc.name = to_string(m);
            mc.control_label = "random regimes";
            mc.treatment_label = "actual regimes";
            for (const auto& metric : comparison_metrics()) {
                std::vector<std::string> blocks;
                std::vector<double> ctl, trt;
                for (Scheme s : cfg.schemes)
                    for (Index l : cfg.l_values) {
                        const auto name = strategy_name(m, s, l);
                        blocks.push_back(name);
                        trt.push_back(metric_value(treatment.strategy(name).metrics, metric));
                        double acc = 0.0;
                        for (const auto& c : controls) acc += metric_value(c.strategy(name).metrics, metric);
                        ctl.push_back(acc / static_cast<double>(controls.size()));
                    }
                mc.metrics.push_back(detail::compare_metric(metric, blocks, ctl, trt));
            }
            rep.comparisons.push_back(std::move(mc));
        }
    }
    if (has(Model::bl) && has(Model::mvo)) {
        ModelComparison mc;
        mc.name = "bl_vs_mvo";
        mc.control_label = "mvo";
        mc.treatment_label = "bl";
        for (const auto& metric : comparison_metrics()) {
            std::vector<std::string> blocks;
            std::vector<double> ctl, trt;
            for (Scheme s : cfg.schemes)
                for (Index l : cfg.l_values) {
                    blocks.push_back(std::string(to_string(s)) + "_" + std::to_string(l));
                    ctl.push_back(metric_value(treatment.strategy(strategy_name(Model::mvo, s, l)).metrics, metric));
                    trt.push_back(metric_value(treatment.strategy(strategy_name(Model::bl, s, l)).metrics, metric));
                }
            mc.metrics.push_back(detail::compare_metric(metric, blocks, ctl, trt));
        }
        rep.comparisons.push_back(std::move(mc));
    }
    return rep;
}

/// Treatment run plus cfg.n_controls control runs sharing one regime path;
/// runs differ only in the label series the forecasts condition on.
inline Experiment run_experiment(const AlignedData& data, const BacktestConfig& cfg) {
    cfg.validate();
    detail::check_history(data, cfg);
    std::vector<std::string> warnings;
    const auto path = detail::regime_path(data, cfg, warnings);
    Experiment ex;
    ex.treatment = detail::evaluate(data, cfg, path, detail::identity_labels, warnings);
    for (Index i = 0; i < cfg.n_controls; ++i)
        ex.controls.push_back(detail::evaluate(data, cfg, path, control_transform(cfg.seed, i, cfg.control_mode), {}));
    ex.report = compare(ex.treatment, ex.controls, cfg);
    return ex;
}

/// Same as run_experiment but with an explicit label transform for every
/// control run; used to check that an identity control reproduces treatment.
inline BacktestResult run_with_labels(const AlignedData& data, const BacktestConfig& cfg,
                                      const detail::LabelTransform& transform) {
    cfg.validate();
    detail::check_history(data, cfg);
    std::vector<std::string> warnings;
    const auto path = detail::regime_path(data, cfg, warnings);
    return detail::evaluate(data, cfg, path, transform, std::move(warnings));
}

// ---------------------------------------------------------------------------
// No-lookahead audit
// ---------------------------------------------------------------------------

struct AuditEntry {
    Month decision;
    Index first_row = 0;
    Index last_row = 0;
    std::uint64_t slice_hash = 0;
    std::uint64_t slice_hash_truncated = 0;
    std::uint64_t state_hash = 0;
    std::uint64_t state_hash_truncated = 0;
    bool weights_identical = false;
    bool ok = false;
};

struct AuditReport {
    std::vector<AuditEntry> entries;
    Index failures = 0;
    bool passed() const { return failures == 0 && !entries.empty(); }
};

/// For every decision month t the walk-forward is re-run on the panel cut
/// after month t + 1, with month t + 1 overwritten by NaN. Month t's training
/// slice hash, fitted-state hash and weights must match the full run bit for
/// bit, and the slice must end at row t.
inline AuditReport audit_no_lookahead(const AlignedData& data, const BacktestConfig& cfg) {
    const auto full = walk_forward(data, cfg);
    AuditReport rep;
    const Index W = cfg.window_months;
    for (std::size_t k = 0; k < full.months.size(); ++k) {
        const Index t = W - 1 + static_cast<Index>(k);
        AlignedData cut;
        cut.tickers = data.tickers;
        cut.dates.assign(data.dates.begin(), data.dates.begin() + (t + 2));
        cut.factors = data.factors.topRows(t + 2);
        cut.returns = data.returns.topRows(t + 2);
        cut.factors.row(t + 1).setConstant(std::numeric_limits<double>::quiet_NaN());
        cut.returns.row(t + 1).setConstant(std::numeric_limits<double>::quiet_NaN());
        const auto part = walk_forward(cut, cfg);

        const auto& a = full.months[k];
        const auto& b = part.months.back();
        AuditEntry e;
        e.decision = a.decision;
        e.first_row = a.first_row;
        e.last_row = a.last_row;
        e.slice_hash = a.slice_hash;
        e.slice_hash_truncated = b.slice_hash;
        e.state_hash = a.state_hash;
        e.state_hash_truncated = b.state_hash;
        e.weights_identical = true;
        for (std::size_t s = 0; s < full.strategies.size(); ++s) {
            if (full.strategies[s].benchmark) continue;
            const Vector& wa = full.strategies[s].weights[k];
            const Vector& wb = part.strategies[s].weights.back();
            if (wa.size() != wb.size() || std::memcmp(wa.data(), wb.data(), sizeof(double) * wa.size()) != 0)
                e.weights_identical = false;
        }
        e.ok = e.weights_identical && e.slice_hash == e.slice_hash_truncated && e.state_hash == e.state_hash_truncated &&
               e.last_row == t && b.decision == a.decision;
        if (!e.ok) ++rep.failures;
        rep.entries.push_back(e);
    }
    return rep;
}

}  // namespace regime_taa
