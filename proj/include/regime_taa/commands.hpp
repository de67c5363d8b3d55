// commands.hpp
// Subcommand implementations behind the regime-taa executable. Each command
// reads its inputs from RunConfig paths and writes deterministic files into
// the output directory; only run_manifest.json carries a timestamp.

#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "regime_taa/backtest.hpp"
#include "regime_taa/csv.hpp"
#include "regime_taa/gmm.hpp"
#include "regime_taa/macro_ingest.hpp"
#include "regime_taa/regime_engine.hpp"
#include "regime_taa/svg.hpp"
#include "regime_taa/transition.hpp"

namespace regime_taa {

inline constexpr const char* kVersion = "1.0.0";

struct RunConfig {
    // inputs and outputs
    std::string macro_path;    // FRED-MD style CSV
    std::string groups_path;   // series,group
    std::string factors_path;  // precomputed factor panel; overrides macro ingestion when set
    std::string assets_path;   // monthly asset returns
    std::string out_dir = "out";
    std::string run_dir;       // backtest output read by the report command; defaults to out_dir

    IngestConfig ingest;

    // regimes
    std::optional<Index> r = 5;  // nullopt means elbow selection
    Index k_max = 10;
    int n_init = 10;
    std::uint64_t seed = 0;
    double smoothing_alpha = 0.0;
    bool gmm = false;

    BacktestConfig backtest;
    bool svg = false;
    bool audit = false;
};

/// Files written by a command, relative to the output directory.
using Manifest = std::vector<std::string>;

namespace detail {

inline std::filesystem::path ensure_out_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec || !std::filesystem::is_directory(p)) throw IoError("cannot create output directory: " + dir);
    return p;
}

inline void require_path(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError(what + " path is not set");
}

inline void emit(const std::filesystem::path& dir, const std::string& name, const std::string& content,
                 Manifest& manifest) {
    csv::write_file(dir / name, content);
    manifest.push_back(name);
}

inline void write_run_manifest(const std::filesystem::path& dir, const std::string& command, const RunConfig& cfg,
                               const Manifest& files) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    nlohmann::json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["timestamp"] = stamp;
    j["seed"] = cfg.seed;
    j["files"] = files;
    csv::write_file(dir / "run_manifest.json", j.dump(2) + "\n");
}

/// Factor panel from a precomputed file or by ingesting the macro CSV.
struct FactorSource {
    FactorPanel factors;
    std::optional<IngestResult> ingest;
};

inline FactorSource load_factors(const RunConfig& cfg) {
    FactorSource src;
    if (!cfg.factors_path.empty()) {
        src.factors = parse_factor_panel(csv::read_file(cfg.factors_path));
        return src;
    }
    require_path(cfg.macro_path, "macro CSV");
    require_path(cfg.groups_path, "group map");
    auto raw = parse_fred_md(csv::read_file(cfg.macro_path));
    const auto groups = parse_group_map(csv::read_file(cfg.groups_path));
    raw = attach_groups(std::move(raw), groups);
    src.ingest = prepare_factors(raw, cfg.ingest);
    src.factors = src.ingest->factors;
    return src;
}

inline void log_warnings(std::ostream& log, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) log << "warning: " << w << '\n';
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

inline Manifest cmd_ingest(const RunConfig& cfg, std::ostream& log) {
    detail::require_path(cfg.macro_path, "macro CSV");
    detail::require_path(cfg.groups_path, "group map");
    auto raw = parse_fred_md(csv::read_file(cfg.macro_path));
    const auto groups = parse_group_map(csv::read_file(cfg.groups_path));
    raw = attach_groups(std::move(raw), groups);
    const auto res = prepare_factors(raw, cfg.ingest);

    const auto dir = detail::ensure_out_dir(cfg.out_dir);
    Manifest files;
    detail::emit(dir, "factors.csv", factor_panel_to_csv(res.factors), files);

    std::string curve = "component,eigenvalue,explained,cumulative\n";
    double cum = 0.0;
    for (Index k = 0; k < res.pca.eigenvalues.size(); ++k) {
        cum += res.pca.explained_variance_ratio(k);
        curve += std::to_string(k + 1) + "," + csv::format(res.pca.eigenvalues(k)) + "," +
                 csv::format(res.pca.explained_variance_ratio(k)) + "," + csv::format(cum) + "\n";
    }
    detail::emit(dir, "pca_variance.csv", curve, files);

    nlohmann::json rep;
    rep["variance_threshold"] = cfg.ingest.variance_threshold;
    rep["n_kept"] = res.pca.n_kept;
    rep["cumulative_at_n_kept"] = res.pca.explained_variance_ratio.head(res.pca.n_kept).sum();
    rep["series_in_file"] = res.series_in_file;
    rep["series_after_exclusion"] = res.series_after_exclusion;
    rep["series_used"] = res.series_used;
    rep["dropped_sparse"] = res.dropped_sparse;
    rep["excluded_groups"] = cfg.ingest.excluded_groups;
    rep["months"] = res.factors.dates.size();
    rep["first_month"] = res.factors.dates.front().iso();
    rep["last_month"] = res.factors.dates.back().iso();
    detail::emit(dir, "pca_report.json", rep.dump(2) + "\n", files);

    log << "ingest: " << res.series_used << " series, " << res.factors.dates.size() << " months, n_kept = "
        << res.pca.n_kept << " at threshold " << cfg.ingest.variance_threshold << '\n';
    detail::write_run_manifest(dir, "ingest", cfg, files);
    return files;
}

// ---------------------------------------------------------------------------
// regimes
// ---------------------------------------------------------------------------

namespace detail {

inline std::string profile_csv(const RegimeProfile& prof) {
    std::string out = "kind,series";
    for (Index g = 0; g < prof.means.rows(); ++g) out += ",R" + std::to_string(g);
    out += '\n';
    for (const char* kind : {"mean", "normalized"}) {
        const Matrix& m = std::string(kind) == "mean" ? prof.means : prof.normalized;
        for (std::size_t s = 0; s < prof.series_ids.size(); ++s) {
            out += std::string(kind) + "," + csv::join({prof.series_ids[s]});
            for (Index g = 0; g < m.rows(); ++g) out += "," + csv::format(m(g, static_cast<Index>(s)));
            out += '\n';
        }
    }
    return out;
}

/// GMM component playing the role of Regime 0: the one carrying the most
/// responsibility over months the k-means model puts in Regime 0, or the
/// lightest component when no month is in Regime 0.
inline Index gmm_crisis_component(const GmmFit& g, const std::vector<int>& labels) {
    Vector mass = Vector::Zero(g.weights.size());
    bool any = false;
    for (std::size_t t = 0; t < labels.size(); ++t)
        if (labels[t] == 0) {
            mass += g.responsibilities.row(static_cast<Index>(t)).transpose();
            any = true;
        }
    Index best = 0;
    if (any)
        mass.maxCoeff(&best);
    else
        g.weights.minCoeff(&best);
    return best;
}

}  // namespace detail

inline Manifest cmd_regimes(const RunConfig& cfg, std::ostream& log) {
    const auto src = detail::load_factors(cfg);
    const auto& fp = src.factors;

    FitRegimesOptions opts;
    opts.k_max = cfg.k_max;
    opts.n_init = cfg.n_init;
    auto [model, labels] = fit_regimes(fp, cfg.r, cfg.seed, opts);
    const auto dists = classify_rows(model, fp.factors);
    const Index n_reg = model.n_regimes();
    const auto E = estimate_transition(labels.labels, n_reg, cfg.smoothing_alpha);
    const auto C = conditional_transition(E);

    MacroPanel prof_panel;
    if (src.ingest) {
        prof_panel = src.ingest->transformed;
    } else {
        prof_panel.dates = fp.dates;
        prof_panel.values = fp.factors;
        for (Index k = 0; k < fp.factors.cols(); ++k) prof_panel.columns.push_back({"F" + std::to_string(k + 1), 0, 1});
    }
    std::vector<std::string> ids;
    for (const auto& c : prof_panel.columns) ids.push_back(c.id);
    const auto prof = regime_profile(prof_panel, labels, ids, n_reg);

    const auto dir = detail::ensure_out_dir(cfg.out_dir);
    Manifest files;
    detail::emit(dir, "regimes.csv", regimes_to_csv(labels, dists), files);
    detail::emit(dir, "regime_model.json", regime_model_to_json(model).dump(2) + "\n", files);
    const std::vector<std::pair<std::string, Matrix>> mats{{"raw", E.matrix}, {"conditional", C.matrix}};
    detail::emit(dir, "transition.csv", transition_matrices_to_csv(mats), files);
    detail::emit(dir, "transition_long.csv", transition_long_csv(mats), files);
    detail::emit(dir, "regimes.dot", export_graph(C, default_regime_names(n_reg)), files);
    detail::emit(dir, "regime_profile.csv", detail::profile_csv(prof), files);

    if (cfg.gmm) {
        const auto g = fit_gmm(fp.factors, n_reg, cfg.seed);
        const Index crisis = detail::gmm_crisis_component(g, labels.labels);
        std::string out = "date,kmeans_label,kmeans_crisis_prob,gmm_component,gmm_crisis_prob\n";
        for (std::size_t t = 0; t < fp.dates.size(); ++t) {
            Index comp = 0;
            g.responsibilities.row(static_cast<Index>(t)).maxCoeff(&comp);
            out += fp.dates[t].iso() + "," + std::to_string(labels.labels[t]) + "," + csv::format(dists[t][0]) + "," +
                   std::to_string(comp) + "," + csv::format(g.responsibilities(static_cast<Index>(t), crisis)) + "\n";
        }
        detail::emit(dir, "gmm_comparison.csv", out, files);
        log << "gmm: " << g.iterations << " EM iterations, crisis component " << crisis << '\n';
    }

    std::vector<Index> counts(static_cast<std::size_t>(n_reg), 0);
    for (int l : labels.labels) ++counts[static_cast<std::size_t>(l)];
    log << "regimes: r = " << model.r << ", months per regime:";
    for (Index c : counts) log << ' ' << c;
    log << '\n';
    detail::log_warnings(log, E.warnings);
    detail::log_warnings(log, C.warnings);
    detail::log_warnings(log, prof.warnings);
    detail::write_run_manifest(dir, "regimes", cfg, files);
    return files;
}

// ---------------------------------------------------------------------------
// backtest
// ---------------------------------------------------------------------------

namespace detail {

inline std::string metrics_header() { return "Model,Sharpe,Sortino,MaxDD,% Positive Ret.,AvgDD\n"; }

inline std::string metrics_row(const std::string& name, const Metrics& m) {
    return csv::join({name}) + "," + csv::format(m.sharpe) + "," + csv::format(m.sortino) + "," +
           csv::format(m.max_dd) + "," + csv::format(m.pct_positive) + "," + csv::format(m.avg_dd) + "\n";
}

inline std::string returns_csv(const BacktestResult& res) {
    std::string out = "date";
    for (const auto& s : res.strategies) out += "," + s.name;
    out += '\n';
    for (std::size_t t = 0; t < res.dates.size(); ++t) {
        out += res.dates[t].iso();
        for (const auto& s : res.strategies) out += "," + csv::format(s.monthly_returns[t]);
        out += '\n';
    }
    return out;
}

inline std::vector<SvgSeries> cumulative_log_returns(const BacktestResult& res, double target,
                                                     std::vector<std::string>& warnings) {
    std::vector<SvgSeries> out;
    for (const auto& s : res.strategies) {
        std::vector<double> scaled;
        try {
            scaled = vol_scale(s.monthly_returns, target);
        } catch (const Error& e) {
            warnings.push_back(s.name + ": cumulative series left unscaled: " + e.what());
            scaled = s.monthly_returns;
        }
        SvgSeries ser{s.name, {}};
        double acc = 0.0;
        for (double r : scaled) {
            acc += std::log1p(r);
            ser.values.push_back(acc);
        }
        out.push_back(std::move(ser));
    }
    return out;
}

inline nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
}

inline nlohmann::json comparison_json(const ComparisonReport& rep) {
    nlohmann::json j;
    j["n_controls"] = rep.n_controls;
    j["control_mode"] = to_string(rep.mode);
    j["seed"] = rep.seed;
    j["t_test"] = "one-sided paired, H0: control mean >= treatment mean";
    auto arr = nlohmann::json::array();
    for (const auto& mc : rep.comparisons) {
        nlohmann::json c;
        c["name"] = mc.name;
        c["control"] = mc.control_label;
        c["treatment"] = mc.treatment_label;
        auto ms = nlohmann::json::array();
        for (const auto& m : mc.metrics) {
            nlohmann::json x;
            x["metric"] = m.metric;
            x["blocks"] = m.blocks;
            auto cv = nlohmann::json::array(), tv = nlohmann::json::array();
            for (double v : m.control) cv.push_back(number(v));
            for (double v : m.treatment) tv.push_back(number(v));
            x["control_values"] = cv;
            x["treatment_values"] = tv;
            x["t_test"] = {{"t", number(m.t_test.t)}, {"p", number(m.t_test.p)}, {"dof", m.t_test.dof},
                           {"degenerate", m.t_test.degenerate}};
            x["nemenyi"] = {{"control_rank", m.nemenyi.control_rank},
                            {"treatment_rank", m.nemenyi.treatment_rank},
                            {"statistic", m.nemenyi.statistic},
                            {"p", m.nemenyi.p},
                            {"blocks", m.nemenyi.blocks}};
            ms.push_back(std::move(x));
        }
        c["metrics"] = std::move(ms);
        arr.push_back(std::move(c));
    }
    j["comparisons"] = std::move(arr);
    return j;
}

}  // namespace detail

inline Manifest cmd_backtest(const RunConfig& cfg, std::ostream& log) {
    BacktestConfig bc = cfg.backtest;
    bc.seed = cfg.seed;
    bc.r = cfg.r;
    bc.k_max = cfg.k_max;
    bc.n_init = cfg.n_init;
    bc.smoothing_alpha = cfg.smoothing_alpha;
    bc.validate();

    const auto src = detail::load_factors(cfg);
    detail::require_path(cfg.assets_path, "asset returns");
    const auto assets = parse_asset_panel(csv::read_file(cfg.assets_path));
    const auto data = align(src.factors, assets);
    const auto ex = run_experiment(data, bc);
    const auto& res = ex.treatment;

    const auto dir = detail::ensure_out_dir(cfg.out_dir);
    Manifest files;

    std::string metrics = detail::metrics_header();
    for (const auto& s : res.strategies) metrics += detail::metrics_row(s.name, s.metrics);
    detail::emit(dir, "metrics.csv", metrics, files);
    detail::emit(dir, "returns.csv", detail::returns_csv(res), files);

    std::vector<std::string> warnings = res.warnings;
    const auto cum = detail::cumulative_log_returns(res, bc.vol_target_annual, warnings);
    std::string cum_csv = "date";
    for (const auto& s : cum) cum_csv += "," + s.name;
    cum_csv += '\n';
    for (std::size_t t = 0; t < res.dates.size(); ++t) {
        cum_csv += res.dates[t].iso();
        for (const auto& s : cum) cum_csv += "," + csv::format(s.values[t]);
        cum_csv += '\n';
    }
    detail::emit(dir, "cumulative_log_returns.csv", cum_csv, files);

    std::string weights = "date,strategy,ticker,weight\n";
    for (std::size_t t = 0; t < res.months.size(); ++t)
        for (const auto& s : res.strategies)
            for (Index j = 0; j < s.weights[t].size(); ++j)
                weights += res.months[t].decision.iso() + "," + s.name + "," +
                           csv::join({res.tickers[static_cast<std::size_t>(j)]}) + "," + csv::format(s.weights[t](j)) +
                           "\n";
    detail::emit(dir, "weights.csv", weights, files);

    std::string fc = "date,ticker,model,value\n";
    for (const auto& m : res.months)
        for (const auto& [model, v] : m.forecasts)
            for (Index j = 0; j < v.size(); ++j)
                fc += m.decision.iso() + "," + csv::join({res.tickers[static_cast<std::size_t>(j)]}) + "," +
                      to_string(model) + "," + csv::format(v(j)) + "\n";
    detail::emit(dir, "forecasts.csv", fc, files);

    std::string regimes = "date,n_regimes";
    for (Index g = 0; g <= (bc.r ? *bc.r : bc.k_max); ++g) regimes += ",p_next" + std::to_string(g);
    regimes += "\n";
    for (const auto& m : res.months) {
        regimes += m.decision.iso() + "," + std::to_string(m.n_regimes);
        for (Index g = 0; g <= (bc.r ? *bc.r : bc.k_max); ++g)
            regimes += "," + (g < m.p_next.size() ? csv::format(m.p_next[g]) : std::string());
        regimes += "\n";
    }
    detail::emit(dir, "regime_path.csv", regimes, files);

    std::string ctl = "control," + detail::metrics_header();
    for (std::size_t i = 0; i < ex.controls.size(); ++i)
        for (const auto& s : ex.controls[i].strategies)
            if (!s.benchmark) ctl += std::to_string(i) + "," + detail::metrics_row(s.name, s.metrics);
    detail::emit(dir, "control_metrics.csv", ctl, files);
    detail::emit(dir, "comparison.json", detail::comparison_json(ex.report).dump(2) + "\n", files);

    if (cfg.svg) {
        std::vector<std::string> labels;
        for (const auto& d : res.dates) labels.push_back(d.iso().substr(0, 7));
        detail::emit(dir, "cumulative.svg",
                     svg_line_chart("Cumulative log returns, volatility scaled", labels, cum), files);
    }
    if (cfg.audit) {
        const auto audit = audit_no_lookahead(data, bc);
        std::string a = "decision,first_row,last_row,slice_hash,slice_hash_truncated,state_hash,state_hash_truncated,"
                        "weights_identical,ok\n";
        for (const auto& e : audit.entries) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s,%lld,%lld,%016llx,%016llx,%016llx,%016llx,%d,%d\n", e.decision.iso().c_str(),
                          static_cast<long long>(e.first_row), static_cast<long long>(e.last_row),
                          static_cast<unsigned long long>(e.slice_hash),
                          static_cast<unsigned long long>(e.slice_hash_truncated),
                          static_cast<unsigned long long>(e.state_hash),
                          static_cast<unsigned long long>(e.state_hash_truncated), e.weights_identical ? 1 : 0,
                          e.ok ? 1 : 0);
            a += buf;
        }
        detail::emit(dir, "audit.csv", a, files);
        log << "audit: " << audit.entries.size() << " months checked, " << audit.failures << " failures\n";
        if (!audit.passed()) {
            detail::write_run_manifest(dir, "backtest", cfg, files);
            throw ValidationError("no-lookahead audit failed for " + std::to_string(audit.failures) + " months");
        }
    }

    std::string wtxt;
    for (const auto& w : warnings) wtxt += w + "\n";
    detail::emit(dir, "warnings.txt", wtxt, files);

    log << "backtest: " << res.dates.size() << " out-of-sample months, " << res.strategies.size() << " strategies, "
        << ex.controls.size() << " control runs, " << warnings.size() << " warnings\n";
    detail::write_run_manifest(dir, "backtest", cfg, files);
    return files;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct MetricsRow {
    std::string name;
    Metrics metrics;
};

inline std::vector<MetricsRow> parse_metrics_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw ParseError("metrics table is empty");
    std::vector<MetricsRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& c = rows[i].cells;
        if (c.size() < 6) throw ParseError("metrics table: too few cells at line " + std::to_string(rows[i].line));
        auto num = [&](std::size_t k) {
            const auto v = csv::parse_double(c[k]);
            if (!v) throw ParseError("metrics table: bad number at line " + std::to_string(rows[i].line));
            return *v;
        };
        MetricsRow r;
        r.name = c[0];
        r.metrics.sharpe = num(1);
        r.metrics.sortino = num(2);
        r.metrics.max_dd = num(3);
        r.metrics.pct_positive = num(4);
        r.metrics.avg_dd = num(5);
        out.push_back(std::move(r));
    }
    return out;
}

struct DominanceCheck {
    std::string family;
    Index comparisons = 0;  // l values where both lo and lns exist
    Index lo_wins = 0;      // lo Sharpe above lns Sharpe
    bool dominates() const { return comparisons > 0 && lo_wins == comparisons; }
};

/// Per model family: does the long-only variant beat long-and-short in
/// Sharpe ratio for every l?
inline std::vector<DominanceCheck> long_only_dominance(const std::vector<MetricsRow>& rows) {
    std::map<std::string, double> sharpe;
    for (const auto& r : rows) sharpe[r.name] = r.metrics.sharpe;
    std::vector<DominanceCheck> out;
    for (const char* fam : {"naive", "ridge", "bl", "mvo"}) {
        DominanceCheck d;
        d.family = fam;
        for (Index l = 1; l <= 16; ++l) {
            const auto lo = sharpe.find(std::string(fam) + "_lo_" + std::to_string(l));
            const auto lns = sharpe.find(std::string(fam) + "_lns_" + std::to_string(l));
            if (lo == sharpe.end() || lns == sharpe.end()) continue;
            ++d.comparisons;
            if (lo->second > lns->second) ++d.lo_wins;
        }
        if (d.comparisons > 0) out.push_back(d);
    }
    return out;
}

inline std::string render_report(const std::vector<MetricsRow>& rows, const nlohmann::json* comparison) {
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.insert(0, w - s.size(), ' ');
        return s;
    };
    auto line = [&](const std::string& name, const Metrics& m) {
        std::string n = name;
        n.resize(std::max<std::size_t>(n.size(), 14), ' ');
        return n + pad(csv::format_fixed(m.sharpe, 3), 9) + pad(csv::format_fixed(m.sortino, 3), 9) +
               pad(csv::format_fixed(m.max_dd, 3), 10) + pad(csv::format_fixed(100.0 * m.pct_positive, 3), 16) + "\n";
    };
    const std::string header = "Model         " + pad("Sharpe", 9) + pad("Sortino", 9) + pad("MaxDD", 10) +
                               pad("% Positive Ret.", 16) + "\n";
    std::string out;
    std::vector<MetricsRow> bench;
    for (const auto& r : rows)
        if (r.name == "spy" || r.name == "ew") bench.push_back(r);
    for (const char* fam : {"naive", "ridge", "bl", "mvo"}) {
        std::string body;
        for (const auto& r : rows)
            if (r.name.rfind(std::string(fam) + "_", 0) == 0) body += line(r.name, r.metrics);
        if (body.empty()) continue;
        out += "== " + std::string(fam) + " ==\n" + header + body;
        for (const auto& b : bench) out += line(b.name, b.metrics);
        out += "\n";
    }

    out += "== long-only vs long-and-short (Sharpe) ==\n";
    for (const auto& d : long_only_dominance(rows))
        out += d.family + ": lo beats lns for " + std::to_string(d.lo_wins) + " of " + std::to_string(d.comparisons) +
               " l values; " + (d.dominates() ? "dominates" : "does not dominate") + "\n";

    if (comparison && comparison->contains("comparisons")) {
        out += "\n== random vs actual regimes ==\n";
        for (const auto& c : (*comparison)["comparisons"]) {
            out += c["name"].get<std::string>() + " (" + c["control"].get<std::string>() + " vs " +
                   c["treatment"].get<std::string>() + ")\n";
            for (const auto& m : c["metrics"]) {
                const auto& t = m["t_test"];
                const auto& nm = m["nemenyi"];
                const std::string tp = t["p"].is_number() ? csv::format_fixed(t["p"].get<double>(), 3) : "nan";
                out += "  " + m["metric"].get<std::string>() + ": t-test p " + tp + ", ranks " +
                       csv::format_fixed(nm["control_rank"].get<double>(), 3) + " / " +
                       csv::format_fixed(nm["treatment_rank"].get<double>(), 3) + ", Nemenyi p " +
                       csv::format_fixed(nm["p"].get<double>(), 3) + "\n";
            }
        }
    }
    return out;
}

inline Manifest cmd_report(const RunConfig& cfg, std::ostream& log) {
    const std::filesystem::path run(cfg.run_dir.empty() ? cfg.out_dir : cfg.run_dir);
    const auto rows = parse_metrics_csv(csv::read_file(run / "metrics.csv"));
    std::optional<nlohmann::json> comparison;
    if (std::filesystem::exists(run / "comparison.json")) {
        try {
            comparison = nlohmann::json::parse(csv::read_file(run / "comparison.json"));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("comparison.json: " + std::string(e.what()));
        }
    }
    const auto text = render_report(rows, comparison ? &*comparison : nullptr);

    const auto dir = detail::ensure_out_dir(cfg.out_dir);
    Manifest files;
    detail::emit(dir, "report.txt", text, files);
    std::string dom = "family,comparisons,lo_wins,dominates\n";
    for (const auto& d : long_only_dominance(rows))
        dom += d.family + "," + std::to_string(d.comparisons) + "," + std::to_string(d.lo_wins) + "," +
               (d.dominates() ? "1" : "0") + "\n";
    detail::emit(dir, "dominance.csv", dom, files);
    log << text;
    return files;
}

}  // namespace regime_taa
