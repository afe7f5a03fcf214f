#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "lro/grid.hpp"
#include "lro/idr.hpp"
#include "lro/lrfit.hpp"
#include "lro/order.hpp"
#include "lro/sim.hpp"

namespace lro {

struct CsvError : std::runtime_error {
    std::size_t line;
    CsvError(std::size_t line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

namespace detail {

/// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline bool parse_double(const std::string& s, double& out) {
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

/// Two-column numeric CSV with an optional header row.
inline std::vector<std::pair<double, double>> read_two_column_csv(std::istream& in) {
    std::vector<std::pair<double, double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        std::string trimmed = line;
        while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' '))
            trimmed.pop_back();
        if (trimmed.empty()) continue;
        const auto fields = split_csv_line(trimmed);
        if (fields.size() != 2) throw CsvError(lineno, "expected two columns");
        double a, b;
        const bool ok = parse_double(fields[0], a) && parse_double(fields[1], b);
        if (!ok) {
            if (first) {  // header row
                first = false;
                continue;
            }
            throw CsvError(lineno, "could not parse '" + trimmed + "'");
        }
        first = false;
        rows.emplace_back(a, b);
    }
    return rows;
}

}  // namespace detail

/// Observation CSV: columns x,y; optional header; one observation per row.
inline ObservationSet read_observations_csv(std::istream& in) {
    ObservationSet obs;
    obs.pairs = detail::read_two_column_csv(in);
    if (obs.pairs.empty()) throw CsvError(0, "no observations");
    return obs;
}

/// Single-distribution CSV: columns value,prob.  Probabilities are
/// normalized, so unnormalized weights are accepted.
inline DiscreteDist read_distribution_csv(std::istream& in) {
    auto rows = detail::read_two_column_csv(in);
    if (rows.empty()) throw CsvError(0, "no atoms");
    std::sort(rows.begin(), rows.end());
    std::vector<double> support, probs;
    double total = 0.0;
    for (const auto& [v, p] : rows) {
        if (p < 0.0) throw CsvError(0, "negative probability");
        if (!support.empty() && support.back() == v) {
            probs.back() += p;
        } else {
            support.push_back(v);
            probs.push_back(p);
        }
        total += p;
    }
    if (!(total > 0.0)) throw CsvError(0, "zero total mass");
    for (double& p : probs) p /= total;
    return DiscreteDist(std::move(support), std::move(probs));
}

/// Self-describing fitted-family document.  Kind `lr` carries the sparse
/// joint weights, conditional rows and optimization diagnostics; kind
/// `st` (and `emp`) carries conditional CDF rows only.
struct FamilyDocument {
    std::string kind;  // "lr", "st" or "emp"
    std::int64_t n = 0;
    std::vector<double> xs, ys;
    std::vector<double> rows;  // row-major l x m; masses for lr, CDF values otherwise
    std::vector<std::tuple<std::size_t, std::size_t, double>> h_cells;  // lr only
    std::vector<double> objective_trace;                                // lr only
    double final_delta = 0.0;
    std::size_t iterations = 0;
    bool converged = true;

    ConditionalFamily family() const {
        ConditionalFamily fam;
        fam.xs = xs;
        const std::size_t m = ys.size();
        for (std::size_t j = 0; j < xs.size(); ++j) {
            std::vector<double> cum(m);
            double run = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                if (kind == "lr") {
                    run += rows[j * m + k];
                    cum[k] = run;
                } else {
                    cum[k] = rows[j * m + k];
                }
            }
            cum.back() = 1.0;
            fam.dists.emplace_back(ys, std::move(cum));
        }
        return fam;
    }
};

inline constexpr const char* kDocumentMagic = "lro-document";
inline constexpr int kDocumentVersion = 1;

inline void write_fit_document(std::ostream& out, const AggregatedGrid& grid,
                               const IndexSetP& p, const FitReport& rep) {
    using detail::format_double;
    out << kDocumentMagic << ' ' << kDocumentVersion << '\n';
    out << "kind lr\n";
    out << "n " << grid.n << '\n';
    out << "l " << grid.rows() << '\n';
    out << "m " << grid.cols() << '\n';
    out << "xs";
    for (double x : grid.xs) out << ' ' << format_double(x);
    out << "\nys";
    for (double y : grid.ys) out << ' ' << format_double(y);
    out << "\nh-cells " << p.count << '\n';
    for (std::size_t j = 0; j < p.l; ++j)
        for (std::size_t k = p.m_lo[j]; k <= p.m_hi[j]; ++k)
            out << "h " << j << ' ' << k << ' ' << format_double(rep.h[j * p.m + k]) << '\n';
    for (std::size_t j = 0; j < p.l; ++j) {
        out << "q-row " << j;
        for (std::size_t k = 0; k < p.m; ++k) out << ' ' << format_double(rep.q[j * p.m + k]);
        out << '\n';
    }
    out << "objective-trace";
    for (double v : rep.objective_trace) out << ' ' << format_double(v);
    out << '\n';
    out << "final-delta " << format_double(rep.final_delta) << '\n';
    out << "iterations " << rep.iterations << '\n';
    out << "converged " << (rep.converged ? 1 : 0) << '\n';
    out << "end\n";
}

inline void write_family_document(std::ostream& out, const CdfFamily& fam,
                                  std::int64_t n, const std::string& kind) {
    using detail::format_double;
    out << kDocumentMagic << ' ' << kDocumentVersion << '\n';
    out << "kind " << kind << '\n';
    out << "n " << n << '\n';
    out << "l " << fam.rows() << '\n';
    out << "m " << fam.cols() << '\n';
    out << "xs";
    for (double x : fam.xs) out << ' ' << format_double(x);
    out << "\nys";
    for (double y : fam.ys) out << ' ' << format_double(y);
    out << '\n';
    for (std::size_t j = 0; j < fam.rows(); ++j) {
        out << "cdf-row " << j;
        for (std::size_t k = 0; k < fam.cols(); ++k) out << ' ' << format_double(fam.at(j, k));
        out << '\n';
    }
    out << "end\n";
}

inline FamilyDocument read_family_document(std::istream& in) {
    FamilyDocument doc;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty document");
    {
        std::istringstream head(line);
        std::string magic;
        int version = 0;
        head >> magic >> version;
        if (magic != kDocumentMagic) throw std::runtime_error("not a family document");
        if (version != kDocumentVersion)
            throw std::runtime_error("unsupported document version");
    }
    std::size_t l = 0, m = 0;
    bool saw_end = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "kind") {
            ss >> doc.kind;
        } else if (key == "n") {
            ss >> doc.n;
        } else if (key == "l") {
            ss >> l;
        } else if (key == "m") {
            ss >> m;
        } else if (key == "xs") {
            double v;
            while (ss >> v) doc.xs.push_back(v);
        } else if (key == "ys") {
            double v;
            while (ss >> v) doc.ys.push_back(v);
        } else if (key == "h-cells") {
            // count line; the triples follow
        } else if (key == "h") {
            std::size_t j, k;
            double v;
            ss >> j >> k >> v;
            doc.h_cells.emplace_back(j, k, v);
        } else if (key == "q-row" || key == "cdf-row") {
            std::size_t j;
            ss >> j;
            if (doc.rows.size() != j * m) throw std::runtime_error("rows out of order");
            double v;
            std::size_t cnt = 0;
            while (ss >> v) {
                doc.rows.push_back(v);
                ++cnt;
            }
            if (cnt != m) throw std::runtime_error("bad row length");
        } else if (key == "objective-trace") {
            double v;
            while (ss >> v) doc.objective_trace.push_back(v);
        } else if (key == "final-delta") {
            ss >> doc.final_delta;
        } else if (key == "iterations") {
            ss >> doc.iterations;
        } else if (key == "converged") {
            int c = 0;
            ss >> c;
            doc.converged = c != 0;
        } else if (key == "end") {
            saw_end = true;
            break;
        } else {
            throw std::runtime_error("unknown document key '" + key + "'");
        }
    }
    if (!saw_end) throw std::runtime_error("truncated document");
    if (doc.xs.size() != l || doc.ys.size() != m || doc.rows.size() != l * m)
        throw std::runtime_error("inconsistent document dimensions");
    return doc;
}

/// Monte-Carlo score table as CSV, one row per covariate.
inline void write_score_table(std::ostream& out, const ScoreTable& tab) {
    using detail::format_double;
    out << "x,score_lr,score_st,score_emp,rel_change_pct,rel_change_q25_pct,"
           "rel_change_q75_pct\n";
    for (std::size_t i = 0; i < tab.xs.size(); ++i)
        out << format_double(tab.xs[i]) << ',' << format_double(tab.score_lr[i]) << ','
            << format_double(tab.score_st[i]) << ',' << format_double(tab.score_emp[i]) << ','
            << format_double(tab.rel_mean[i]) << ',' << format_double(tab.rel_q25[i]) << ','
            << format_double(tab.rel_q75[i]) << '\n';
}

}  // namespace lro
