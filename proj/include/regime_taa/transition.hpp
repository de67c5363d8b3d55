// transition.hpp
// Regime transition matrices estimated from a hard label sequence, the
// conditional (off-diagonal) form, one-step propagation of a regime
// distribution and DOT export of the regime graph.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "regime_taa/csv.hpp"
#include "regime_taa/error.hpp"
#include "regime_taa/regime_engine.hpp"
#include "regime_taa/types.hpp"

namespace regime_taa {

struct TransitionMatrix {
    Matrix matrix;                 // row-stochastic, (r+1) x (r+1)
    Eigen::MatrixXi counts;        // observed i -> j transitions
    std::vector<std::string> warnings;

    Index size() const { return matrix.rows(); }
};

struct ConditionalTransitionMatrix {
    Matrix matrix;  // zero diagonal
    std::vector<std::string> warnings;
};

/// e_ij = count(i -> j) / out_count(i), where out_count(i) counts months in
/// regime i that have a successor. Rows for regimes never left (absent from the
/// window, or only at its last month) are uniform. With smoothing_alpha > 0,
/// add-alpha smoothing is applied to every row.
inline TransitionMatrix estimate_transition(const std::vector<int>& labels, Index n_regimes,
                                            double smoothing_alpha = 0.0) {
    if (labels.size() < 2) throw LengthError("transition estimate needs at least 2 labels");
    if (n_regimes < 1) throw ConfigError("transition estimate needs at least one regime");
    if (smoothing_alpha < 0.0) throw ConfigError("smoothing alpha must be nonnegative");
    for (int l : labels) {
        if (l < 0) throw ConfigError("negative regime label");
        if (l >= n_regimes)
            throw ConfigError("label " + std::to_string(l) + " exceeds regime count " + std::to_string(n_regimes));
    }

    TransitionMatrix tm;
    tm.counts = Eigen::MatrixXi::Zero(n_regimes, n_regimes);
    for (std::size_t t = 0; t + 1 < labels.size(); ++t) ++tm.counts(labels[t], labels[t + 1]);

    tm.matrix.resize(n_regimes, n_regimes);
    for (Index i = 0; i < n_regimes; ++i) {
        const double out = tm.counts.row(i).sum();
        if (out == 0 && smoothing_alpha == 0.0) {
            tm.matrix.row(i).setConstant(1.0 / static_cast<double>(n_regimes));
            tm.warnings.push_back("regime " + std::to_string(i) +
                                  " has no observed outgoing transition; row set to uniform");
            continue;
        }
        const double denom = out + smoothing_alpha * static_cast<double>(n_regimes);
        for (Index j = 0; j < n_regimes; ++j) tm.matrix(i, j) = (tm.counts(i, j) + smoothing_alpha) / denom;
    }
    return tm;
}

/// Transition probabilities given that the regime changes: off-diagonal
/// entries divided by 1 - e_ii, diagonal zeroed. Absorbing rows become zero.
inline ConditionalTransitionMatrix conditional_transition(const TransitionMatrix& E) {
    ConditionalTransitionMatrix c;
    const Index n = E.size();
    c.matrix = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        const double stay = E.matrix(i, i);
        const double leave = 1.0 - stay;
        if (!(leave > 0.0)) {
            c.warnings.push_back("regime " + std::to_string(i) + " is absorbing; conditional row left at zero");
            continue;
        }
        for (Index j = 0; j < n; ++j)
            if (j != i) c.matrix(i, j) = E.matrix(i, j) / leave;
    }
    return c;
}

/// One Markov step: p is rescaled to unit mass, multiplied as p^T E and
/// renormalized.
inline RegimeDistribution propagate(const RegimeDistribution& p, const TransitionMatrix& E) {
    if (p.size() != E.size()) throw ShapeError("propagate: distribution and transition matrix sizes differ");
    const double mass = p.probs.sum();
    if (!(mass > 0.0)) throw DomainError("propagate: distribution has no mass");
    const Vector q = p.probs / mass;
    Vector next = E.matrix.transpose() * q;
    for (Index i = 0; i < next.size(); ++i) next(i) = std::max(next(i), 0.0);
    return RegimeDistribution{next / next.sum()};
}

inline std::vector<std::string> default_regime_names(Index n) {
    std::vector<std::string> names;
    for (Index i = 0; i < n; ++i) names.push_back("Regime " + std::to_string(i));
    return names;
}

/// Weighted directed graph in DOT. Only nonzero off-diagonal entries become
/// edges; every regime is declared as a node.
inline std::string export_graph(const ConditionalTransitionMatrix& C, const std::vector<std::string>& names) {
    const Index n = C.matrix.rows();
    if (static_cast<Index>(names.size()) != n) throw ShapeError("export_graph: one name per regime required");
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"' || ch == '\\') q.push_back('\\');
            q.push_back(ch);
        }
        return q + "\"";
    };
    std::string out = "digraph regimes {\n";
    for (const auto& name : names) out += "  " + quote(name) + ";\n";
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            const double w = C.matrix(i, j);
            if (i == j || w == 0.0) continue;
            out += "  " + quote(names[static_cast<std::size_t>(i)]) + " -> " + quote(names[static_cast<std::size_t>(j)]) +
                   " [label=\"" + csv::format_fixed(w, 3) + "\", weight=" + csv::format(w) + "];\n";
        }
    out += "}\n";
    return out;
}

/// kind,from,R0..Rn rows for each supplied matrix.
inline std::string transition_matrices_to_csv(const std::vector<std::pair<std::string, Matrix>>& mats) {
    std::string out;
    if (mats.empty()) return out;
    const Index n = mats.front().second.rows();
    out = "kind,from";
    for (Index j = 0; j < n; ++j) out += ",R" + std::to_string(j);
    out += '\n';
    for (const auto& [kind, m] : mats)
        for (Index i = 0; i < m.rows(); ++i) {
            out += kind + ",R" + std::to_string(i);
            for (Index j = 0; j < m.cols(); ++j) out += "," + csv::format(m(i, j));
            out += '\n';
        }
    return out;
}

/// Heatmap-ready long format: kind,from,to,prob.
inline std::string transition_long_csv(const std::vector<std::pair<std::string, Matrix>>& mats) {
    std::string out = "kind,from,to,prob\n";
    for (const auto& [kind, m] : mats)
        for (Index i = 0; i < m.rows(); ++i)
            for (Index j = 0; j < m.cols(); ++j)
                out += kind + "," + std::to_string(i) + "," + std::to_string(j) + "," + csv::format(m(i, j)) + "\n";
    return out;
}

}  // namespace regime_taa
