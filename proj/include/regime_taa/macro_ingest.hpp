// macro_ingest.hpp
// FRED-MD panel ingestion: parsing, stationarity transforms (t-codes),
// standardization and PCA reduction to monthly state vectors.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "regime_taa/csv.hpp"
#include "regime_taa/error.hpp"
#include "regime_taa/month.hpp"
#include "regime_taa/types.hpp"

namespace regime_taa {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

struct SeriesInfo {
    std::string id;
    int group = 0;  // 0 until a group map is attached, then 1..7
    int tcode = 1;  // 1..7
};

/// Dated matrix of raw (or transformed) macro series; NaN marks a missing cell.
struct MacroPanel {
    std::vector<Month> dates;
    std::vector<SeriesInfo> columns;
    Matrix values;  // dates x series

    Index rows() const { return values.rows(); }
    Index cols() const { return values.cols(); }

    /// Position of a series id, or -1.
    Index column_index(const std::string& id) const {
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (columns[j].id == id) return static_cast<Index>(j);
        return -1;
    }

    MacroPanel select_columns(const std::vector<Index>& keep) const {
        MacroPanel out;
        out.dates = dates;
        out.values.resize(rows(), static_cast<Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            out.columns.push_back(columns[static_cast<std::size_t>(keep[k])]);
            out.values.col(static_cast<Index>(k)) = values.col(keep[k]);
        }
        return out;
    }

    MacroPanel drop_leading_rows(Index n) const {
        MacroPanel out;
        n = std::min(n, rows());
        out.dates.assign(dates.begin() + n, dates.end());
        out.columns = columns;
        out.values = values.bottomRows(rows() - n);
        return out;
    }
};

struct PcaModel {
    Vector mean;                     // per-column means of the PCA input
    Vector scale;                    // per-column standard deviations from standardization (1 if unknown)
    Matrix components;               // rows are orthonormal loading vectors, by decreasing eigenvalue
    Vector eigenvalues;              // population covariance eigenvalues, nonincreasing
    Vector explained_variance_ratio; // nonincreasing, sums to 1
    Index n_kept = 0;

    Vector cumulative_ratio() const {
        Vector cum(explained_variance_ratio.size());
        double s = 0.0;
        for (Index i = 0; i < cum.size(); ++i) cum(i) = (s += explained_variance_ratio(i));
        return cum;
    }

    /// Projects rows of (already standardized) data onto the first n components.
    Matrix project(const Matrix& data, Index n) const {
        return (data.rowwise() - mean.transpose()) * components.topRows(n).transpose();
    }

    /// Inverse of project: scores back to the centered data space.
    Matrix back_project(const Matrix& scores) const {
        return scores * components.topRows(scores.cols());
    }
};

struct FactorPanel {
    std::vector<Month> dates;
    Matrix factors;  // dates x n_kept; no missing entries
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parses a FRED-MD style CSV: header row, a transform-code row whose first
/// cell is a marker such as "Transform:", then one row per month (m/d/yyyy).
inline MacroPanel parse_fred_md(std::string_view csv_text) {
    auto rows = csv::parse(csv_text);
    if (rows.size() < 2) throw ParseError("FRED-MD file needs a header row and a transform-code row");

    const auto& header = rows[0].cells;
    if (header.size() < 2) throw ParseError("FRED-MD header needs a date column and at least one series");
    const std::size_t n_series = header.size() - 1;

    const auto& tcode_row = rows[1];
    if (tcode_row.cells.size() < header.size())
        throw ParseError("transform-code row (line " + std::to_string(tcode_row.line) + ") is shorter than the header");

    MacroPanel panel;
    panel.columns.resize(n_series);
    for (std::size_t j = 0; j < n_series; ++j) {
        auto& col = panel.columns[j];
        col.id = header[j + 1];
        auto code = csv::parse_double(tcode_row.cells[j + 1]);
        if (!code || *code != std::floor(*code) || *code < 1 || *code > 7)
            throw ValidationError("column '" + col.id + "': transform code '" + tcode_row.cells[j + 1] +
                                  "' is outside 1..7");
        col.tcode = static_cast<int>(*code);
    }

    const std::size_t n_rows = rows.size() - 2;
    panel.values.resize(static_cast<Index>(n_rows), static_cast<Index>(n_series));
    panel.dates.reserve(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        const auto& row = rows[i + 2];
        auto month = parse_month(row.cells[0]);
        if (!month)
            throw ParseError("malformed date '" + row.cells[0] + "' at line " + std::to_string(row.line));
        if (!panel.dates.empty() && month->ordinal() != panel.dates.back().ordinal() + 1)
            throw ParseError("dates must be consecutive months; line " + std::to_string(row.line) + " has " +
                             month->iso() + " after " + panel.dates.back().iso());
        panel.dates.push_back(*month);
        for (std::size_t j = 0; j < n_series; ++j) {
            double v = kMissing;
            if (j + 1 < row.cells.size() && !row.cells[j + 1].empty()) {
                auto parsed = csv::parse_double(row.cells[j + 1]);
                if (!parsed)
                    throw ParseError("non-numeric value '" + row.cells[j + 1] + "' at line " +
                                     std::to_string(row.line) + ", column '" + panel.columns[j].id + "'");
                v = *parsed;
            }
            panel.values(static_cast<Index>(i), static_cast<Index>(j)) = v;
        }
    }
    return panel;
}

/// Sidecar map series_id,group_id. A header row is allowed.
inline std::map<std::string, int> parse_group_map(std::string_view csv_text) {
    std::map<std::string, int> groups;
    for (const auto& row : csv::parse(csv_text)) {
        if (row.cells.size() < 2) throw ParseError("group map line " + std::to_string(row.line) + " needs two cells");
        auto g = csv::parse_double(row.cells[1]);
        if (!g) {
            if (groups.empty()) continue;  // header
            throw ParseError("group map line " + std::to_string(row.line) + ": bad group id '" + row.cells[1] + "'");
        }
        if (*g != std::floor(*g) || *g < 1 || *g > 7)
            throw ValidationError("series '" + row.cells[0] + "': group id outside 1..7");
        groups[row.cells[0]] = static_cast<int>(*g);
    }
    return groups;
}

/// Binds group ids to columns. Every column must appear in the map.
inline MacroPanel attach_groups(MacroPanel panel, const std::map<std::string, int>& groups) {
    std::string missing;
    for (auto& col : panel.columns) {
        auto it = groups.find(col.id);
        if (it == groups.end()) {
            missing += (missing.empty() ? "" : ", ") + col.id;
            continue;
        }
        col.group = it->second;
    }
    if (!missing.empty()) throw ValidationError("series missing from group map: " + missing);
    return panel;
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

inline std::size_t tcode_min_length(int tcode) {
    switch (tcode) {
        case 1:
        case 4: return 1;
        case 2:
        case 5: return 2;
        default: return 3;
    }
}

/// Applies a FRED-MD transform code. Output is aligned with the input; lags
/// consumed by differencing leave leading missing values.
///   1: x   2: dx   3: d2x   4: ln x   5: d ln x   6: d2 ln x   7: d(x_t/x_{t-1} - 1)
inline std::vector<double> apply_tcode(std::span<const double> x, int tcode) {
    if (tcode < 1 || tcode > 7) throw ConfigError("transform code " + std::to_string(tcode) + " outside 1..7");
    const std::size_t n = x.size();
    if (n < tcode_min_length(tcode))
        throw LengthError("series of length " + std::to_string(n) + " too short for transform code " +
                          std::to_string(tcode));

    std::vector<double> level(x.begin(), x.end());
    if (tcode >= 4 && tcode <= 6) {
        for (double& v : level) {
            if (is_missing(v)) continue;
            if (v <= 0.0) throw DomainError("log transform of nonpositive value " + csv::format(v));
            v = std::log(v);
        }
    }

    std::vector<double> out(n, kMissing);
    switch (tcode) {
        case 1:
        case 4: out = level; break;
        case 2:
        case 5:
            for (std::size_t t = 1; t < n; ++t) out[t] = level[t] - level[t - 1];
            break;
        case 3:
        case 6:
            for (std::size_t t = 2; t < n; ++t) out[t] = level[t] - 2.0 * level[t - 1] + level[t - 2];
            break;
        case 7: {
            std::vector<double> growth(n, kMissing);
            for (std::size_t t = 1; t < n; ++t) {
                if (level[t - 1] == 0.0) throw DomainError("growth rate undefined after a zero value");
                growth[t] = level[t] / level[t - 1] - 1.0;
            }
            for (std::size_t t = 2; t < n; ++t) out[t] = growth[t] - growth[t - 1];
            break;
        }
    }
    for (double& v : out)
        if (std::isinf(v)) v = kMissing;
    return out;
}

inline MacroPanel transform_panel(const MacroPanel& panel) {
    MacroPanel out = panel;
    std::vector<double> col(static_cast<std::size_t>(panel.rows()));
    for (Index j = 0; j < panel.cols(); ++j) {
        for (Index i = 0; i < panel.rows(); ++i) col[static_cast<std::size_t>(i)] = panel.values(i, j);
        std::vector<double> t;
        try {
            t = apply_tcode(col, panel.columns[static_cast<std::size_t>(j)].tcode);
        } catch (const Error& e) {
            throw DomainError("series '" + panel.columns[static_cast<std::size_t>(j)].id + "': " + e.what());
        }
        for (Index i = 0; i < panel.rows(); ++i) out.values(i, j) = t[static_cast<std::size_t>(i)];
    }
    return out;
}

/// Removes every column belonging to the group; absent groups are a no-op.
inline MacroPanel exclude_group(const MacroPanel& panel, int group_id) {
    if (group_id < 1 || group_id > 7) throw ConfigError("group id " + std::to_string(group_id) + " outside 1..7");
    std::vector<Index> keep;
    for (std::size_t j = 0; j < panel.columns.size(); ++j)
        if (panel.columns[j].group != group_id) keep.push_back(static_cast<Index>(j));
    return panel.select_columns(keep);
}

/// Drops columns whose missing fraction exceeds max_missing_frac. Dropped ids
/// are appended to `dropped` when provided.
inline MacroPanel drop_sparse_columns(const MacroPanel& panel, double max_missing_frac,
                                      std::vector<std::string>* dropped = nullptr) {
    std::vector<Index> keep;
    for (Index j = 0; j < panel.cols(); ++j) {
        Index miss = 0;
        for (Index i = 0; i < panel.rows(); ++i) miss += is_missing(panel.values(i, j)) ? 1 : 0;
        double frac = panel.rows() ? static_cast<double>(miss) / static_cast<double>(panel.rows()) : 1.0;
        if (frac > max_missing_frac) {
            if (dropped) dropped->push_back(panel.columns[static_cast<std::size_t>(j)].id);
        } else {
            keep.push_back(j);
        }
    }
    return panel.select_columns(keep);
}

struct ColumnScaling {
    Vector mean;
    Vector scale;
};

/// z-scores each column over its non-missing entries with the population
/// standard deviation, then imputes missing cells to 0 (the column mean).
inline MacroPanel standardize(const MacroPanel& panel, ColumnScaling* scaling = nullptr) {
    MacroPanel out = panel;
    ColumnScaling s{Vector::Zero(panel.cols()), Vector::Ones(panel.cols())};
    for (Index j = 0; j < panel.cols(); ++j) {
        const auto& id = panel.columns[static_cast<std::size_t>(j)].id;
        double sum = 0.0;
        Index n = 0;
        for (Index i = 0; i < panel.rows(); ++i) {
            double v = panel.values(i, j);
            if (!is_missing(v)) {
                sum += v;
                ++n;
            }
        }
        if (n < 2) throw LengthError("series '" + id + "' has fewer than 2 observations");
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (Index i = 0; i < panel.rows(); ++i) {
            double v = panel.values(i, j);
            if (!is_missing(v)) ss += (v - mean) * (v - mean);
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        if (!(sd > 1e-14 * std::max(1.0, std::abs(mean))))
            throw DegenerateError("series '" + id + "' is constant (zero variance)");
        for (Index i = 0; i < panel.rows(); ++i) {
            double v = panel.values(i, j);
            out.values(i, j) = is_missing(v) ? 0.0 : (v - mean) / sd;
        }
        s.mean(j) = mean;
        s.scale(j) = sd;
    }
    if (scaling) *scaling = std::move(s);
    return out;
}

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

/// Eigendecomposition of the population covariance; keeps the smallest number
/// of components whose cumulative explained variance reaches the threshold.
/// Each component's largest-magnitude loading is made positive.
inline std::pair<PcaModel, FactorPanel> fit_pca(const MacroPanel& panel, double variance_threshold) {
    if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
        throw ConfigError("variance threshold must lie in (0, 1]");
    if (panel.rows() < 1 || panel.cols() < 1) throw LengthError("PCA needs a nonempty panel");
    if (panel.values.hasNaN()) throw ValidationError("PCA input contains missing values");

    const Matrix& X = panel.values;
    const Index n = X.rows();
    const Index p = X.cols();

    PcaModel model;
    model.mean = X.colwise().mean().transpose();
    model.scale = Vector::Ones(p);
    const Matrix centered = X.rowwise() - model.mean.transpose();
    const Matrix cov = (centered.transpose() * centered) / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success) throw LinAlgError("covariance eigendecomposition failed");

    model.components.resize(p, p);
    model.eigenvalues.resize(p);
    for (Index k = 0; k < p; ++k) {
        const Index src = p - 1 - k;  // Eigen sorts ascending
        Vector v = eig.eigenvectors().col(src);
        Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        model.components.row(k) = v.transpose();
        model.eigenvalues(k) = std::max(eig.eigenvalues()(src), 0.0);
    }
    const double total = model.eigenvalues.sum();
    if (!(total > 0.0)) throw DegenerateError("PCA input has zero total variance");
    model.explained_variance_ratio = model.eigenvalues / total;

    double cum = 0.0;
    model.n_kept = p;
    for (Index k = 0; k < p; ++k) {
        cum += model.explained_variance_ratio(k);
        if (cum >= variance_threshold - 1e-12) {
            model.n_kept = k + 1;
            break;
        }
    }

    FactorPanel factors;
    factors.dates = panel.dates;
    factors.factors = centered * model.components.topRows(model.n_kept).transpose();
    return {std::move(model), std::move(factors)};
}

// ---------------------------------------------------------------------------
// End-to-end preparation
// ---------------------------------------------------------------------------

struct IngestConfig {
    std::vector<int> excluded_groups{6};
    double variance_threshold = 0.95;
    double max_missing_frac = 0.20;
    Index leading_rows_to_drop = 2;  // lags consumed by the second-difference transforms
};

struct IngestResult {
    PcaModel pca;
    FactorPanel factors;
    Index series_in_file = 0;
    Index series_after_exclusion = 0;
    Index series_used = 0;
    std::vector<std::string> dropped_sparse;
    MacroPanel transformed;  // post-transform, pre-standardization, rows aligned with factors
};

inline IngestResult prepare_factors(const MacroPanel& raw, const IngestConfig& cfg) {
    IngestResult res;
    res.series_in_file = raw.cols();
    MacroPanel panel = raw;
    for (int g : cfg.excluded_groups) panel = exclude_group(panel, g);
    res.series_after_exclusion = panel.cols();

    panel = transform_panel(panel).drop_leading_rows(cfg.leading_rows_to_drop);
    panel = drop_sparse_columns(panel, cfg.max_missing_frac, &res.dropped_sparse);
    if (panel.cols() == 0) throw ValidationError("no series left after exclusion and missing-data filtering");
    res.series_used = panel.cols();
    res.transformed = panel;

    ColumnScaling scaling;
    MacroPanel z = standardize(panel, &scaling);
    auto [pca, factors] = fit_pca(z, cfg.variance_threshold);
    pca.scale = scaling.scale;
    res.pca = std::move(pca);
    res.factors = std::move(factors);
    return res;
}

// ---------------------------------------------------------------------------
// Factor panel CSV
// ---------------------------------------------------------------------------

inline std::string factor_panel_to_csv(const FactorPanel& fp) {
    std::string out = "date";
    for (Index k = 0; k < fp.factors.cols(); ++k) out += ",F" + std::to_string(k + 1);
    out += '\n';
    for (std::size_t i = 0; i < fp.dates.size(); ++i) {
        out += fp.dates[i].iso();
        for (Index k = 0; k < fp.factors.cols(); ++k) {
            out += ',';
            out += csv::format(fp.factors(static_cast<Index>(i), k));
        }
        out += '\n';
    }
    return out;
}

/// Reads a dated numeric matrix (date column + numeric columns). Used for
/// factor panels and asset return panels alike.
struct DatedMatrix {
    std::vector<Month> dates;
    std::vector<std::string> names;
    Matrix values;
};

inline DatedMatrix parse_dated_matrix(std::string_view csv_text, const std::string& what, bool allow_missing) {
    auto rows = csv::parse(csv_text);
    if (rows.size() < 2) throw ParseError(what + ": needs a header and at least one data row");
    DatedMatrix m;
    m.names.assign(rows[0].cells.begin() + 1, rows[0].cells.end());
    if (m.names.empty()) throw ParseError(what + ": no value columns");
    const auto ncol = static_cast<Index>(m.names.size());
    m.values.resize(static_cast<Index>(rows.size() - 1), ncol);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        auto month = parse_month(row.cells[0]);
        if (!month) throw ParseError(what + ": malformed date '" + row.cells[0] + "' at line " + std::to_string(row.line));
        if (!m.dates.empty() && month->ordinal() != m.dates.back().ordinal() + 1)
            throw ParseError(what + ": dates must be consecutive months (line " + std::to_string(row.line) + ")");
        m.dates.push_back(*month);
        for (Index j = 0; j < ncol; ++j) {
            const auto idx = static_cast<std::size_t>(j + 1);
            std::optional<double> v;
            if (idx < row.cells.size()) v = csv::parse_double(row.cells[idx]);
            if (!v || (!allow_missing && std::isnan(*v)))
                throw ParseError(what + ": missing or non-numeric value at line " + std::to_string(row.line) +
                                 ", column '" + m.names[static_cast<std::size_t>(j)] + "'");
            m.values(static_cast<Index>(i - 1), j) = *v;
        }
    }
    return m;
}

inline FactorPanel parse_factor_panel(std::string_view csv_text) {
    auto m = parse_dated_matrix(csv_text, "factor panel", false);
    return FactorPanel{std::move(m.dates), std::move(m.values)};
}

}  // namespace regime_taa
