#pragma once

// CSV emission and self-contained SVG plots. Every plot is rendered from the
// CSV text alone.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qst/experiments.hpp"

namespace qst::io {

inline std::string fmt_num(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// -- CSV --------------------------------------------------------------------

inline std::string curves_csv(const NoisyProtocolResult& r) {
    std::string out = "n_bases,estimator,mean_infidelity,stderr\n";
    for (const auto& p : r.curve) {
        out += std::to_string(p.n_bases) + "," + to_string(p.estimator) + "," + fmt_num(p.mean_infidelity) + "," +
               fmt_num(p.stderr_infidelity) + "\n";
    }
    return out;
}

inline std::string sweep_csv(const std::vector<SweepResult>& results) {
    std::string out = "dim,rank,basis_type,n_bases,n_states,n_failures,max_error,onset\n";
    for (const auto& r : results) {
        for (const auto& c : r.cells) {
            const std::string onset = c.onset ? std::to_string(*c.onset) : "";
            for (std::size_t i = 0; i < c.failures_per_basis_count.size(); ++i) {
                out += std::to_string(c.dim) + "," + std::to_string(c.rank) + "," + to_string(c.basis_type) + "," +
                       std::to_string(i + 1) + "," + std::to_string(r.config.states_per_cell) + "," +
                       std::to_string(c.failures_per_basis_count[i]) + "," +
                       fmt_num(c.max_error_per_basis_count[i]) + "," + onset + "\n";
            }
        }
    }
    return out;
}

inline std::string robustness_csv(const RobustnessScan& s) {
    std::string out = "epsilon,mean_error,max_error,within_bound\n";
    for (const auto& p : s.points) {
        out += fmt_num(p.epsilon) + "," + fmt_num(p.mean_error) + "," + fmt_num(p.max_error) + "," +
               (p.within_bound ? "1" : "0") + "\n";
    }
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw Error(ErrorKind::InvalidArgument, "csv: missing column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

inline CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto cells = split_csv_line(line);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            cells.resize(t.header.size());
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

// -- SVG --------------------------------------------------------------------

namespace detail {

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    return colors[i % 6];
}

inline std::string svg_header(int w, int h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
           std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
           "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

struct Axes {
    double x0 = 70, y0 = 30, w = 520, h = 330;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1; // y and (optionally) x in log10 units
    bool log_x = false;

    double px(double x) const {
        const double v = log_x ? std::log10(x) : x;
        return x0 + (v - xmin) / (xmax - xmin) * w;
    }
    double py(double y) const { return y0 + h - (std::log10(y) - ymin) / (ymax - ymin) * h; }
};

inline std::string axes_frame(const Axes& a, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<double>& xticks) {
    std::string s;
    s += "<rect x=\"" + fmt_num(a.x0, "%.1f") + "\" y=\"" + fmt_num(a.y0, "%.1f") + "\" width=\"" +
         fmt_num(a.w, "%.1f") + "\" height=\"" + fmt_num(a.h, "%.1f") + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int e = static_cast<int>(std::ceil(a.ymin)); e <= static_cast<int>(std::floor(a.ymax)); ++e) {
        const double y = a.py(std::pow(10.0, e));
        s += "<line x1=\"" + fmt_num(a.x0, "%.1f") + "\" x2=\"" + fmt_num(a.x0 + a.w, "%.1f") + "\" y1=\"" +
             fmt_num(y, "%.1f") + "\" y2=\"" + fmt_num(y, "%.1f") + "\" stroke=\"#dddddd\"/>\n";
        s += "<text x=\"" + fmt_num(a.x0 - 6, "%.1f") + "\" y=\"" + fmt_num(y + 4, "%.1f") +
             "\" text-anchor=\"end\">1e" + std::to_string(e) + "</text>\n";
    }
    for (double x : xticks) {
        const double px = a.px(x);
        s += "<text x=\"" + fmt_num(px, "%.1f") + "\" y=\"" + fmt_num(a.y0 + a.h + 16, "%.1f") +
             "\" text-anchor=\"middle\">" + (a.log_x ? fmt_num(x, "%.0e") : fmt_num(x, "%g")) + "</text>\n";
    }
    s += "<text x=\"" + fmt_num(a.x0 + a.w / 2, "%.1f") + "\" y=\"" + fmt_num(a.y0 + a.h + 36, "%.1f") +
         "\" text-anchor=\"middle\">" + xlabel + "</text>\n";
    s += "<text x=\"16\" y=\"" + fmt_num(a.y0 + a.h / 2, "%.1f") + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fmt_num(a.y0 + a.h / 2, "%.1f") + ")\">" + ylabel + "</text>\n";
    return s;
}

inline std::string polyline(const std::vector<std::pair<double, double>>& pts, const char* color) {
    std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts) {
        s += fmt_num(x, "%.2f") + "," + fmt_num(y, "%.2f") + " ";
    }
    s += "\"/>\n";
    for (const auto& [x, y] : pts) {
        s += "<circle cx=\"" + fmt_num(x, "%.2f") + "\" cy=\"" + fmt_num(y, "%.2f") + "\" r=\"3\" fill=\"" + color +
             "\"/>\n";
    }
    return s;
}

inline std::pair<double, double> log_range(const std::vector<double>& ys) {
    double lo = 1e300;
    double hi = -1e300;
    for (double y : ys) {
        if (y > 0.0) {
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    }
    if (lo > hi) {
        return {-1.0, 0.0};
    }
    double a = std::floor(std::log10(lo));
    double b = std::ceil(std::log10(hi));
    if (b <= a) {
        b = a + 1.0;
    }
    return {a, b};
}

} // namespace detail

/// Mean infidelity vs number of bases, one line per estimator, log-scale y.
inline std::string render_curves_svg(const std::string& csv_text) {
    const CsvTable t = parse_csv(csv_text);
    const std::size_t ck = t.column("n_bases");
    const std::size_t ce = t.column("estimator");
    const std::size_t cm = t.column("mean_infidelity");
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    std::vector<double> ys;
    double kmin = 1e300;
    double kmax = -1e300;
    for (const auto& row : t.rows) {
        const double k = std::stod(row[ck]);
        const double m = std::stod(row[cm]);
        if (!series.count(row[ce])) {
            order.push_back(row[ce]);
        }
        series[row[ce]].push_back({k, m});
        ys.push_back(m);
        kmin = std::min(kmin, k);
        kmax = std::max(kmax, k);
    }
    detail::Axes a;
    std::tie(a.ymin, a.ymax) = detail::log_range(ys);
    a.xmin = kmin;
    a.xmax = kmax > kmin ? kmax : kmin + 1.0;
    std::vector<double> xt;
    for (double k = kmin; k <= kmax; k += 1.0) {
        xt.push_back(k);
    }
    std::string s = detail::svg_header(640, 420);
    s += detail::axes_frame(a, "number of measured bases", "mean infidelity", xt);
    for (std::size_t i = 0; i < order.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& [k, m] : series[order[i]]) {
            if (m > 0.0) {
                pts.push_back({a.px(k), a.py(m)});
            }
        }
        s += detail::polyline(pts, detail::palette(i));
        const double ly = a.y0 + 16.0 + 16.0 * static_cast<double>(i);
        s += "<text x=\"" + fmt_num(a.x0 + a.w - 10, "%.1f") + "\" y=\"" + fmt_num(ly, "%.1f") +
             "\" text-anchor=\"end\" fill=\"" + detail::palette(i) + "\">" + order[i] + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

/// Onset table: one row per rank, one column per (basis type, dimension).
inline std::string render_sweep_svg(const std::string& csv_text) {
    const CsvTable t = parse_csv(csv_text);
    const std::size_t cd = t.column("dim");
    const std::size_t cr = t.column("rank");
    const std::size_t cb = t.column("basis_type");
    const std::size_t co = t.column("onset");
    const std::size_t ck = t.column("n_bases");
    std::vector<std::pair<std::string, int>> columns;
    std::set<int> ranks;
    std::map<std::pair<std::pair<std::string, int>, int>, std::string> cell;
    std::map<std::pair<std::pair<std::string, int>, int>, int> max_k;
    for (const auto& row : t.rows) {
        const std::pair<std::string, int> col{row[cb], std::stoi(row[cd])};
        if (std::find(columns.begin(), columns.end(), col) == columns.end()) {
            columns.push_back(col);
        }
        const int r = std::stoi(row[cr]);
        ranks.insert(r);
        cell[{col, r}] = row[co];
        max_k[{col, r}] = std::max(max_k[{col, r}], std::stoi(row[ck]));
    }
    const int cw = 80;
    const int rh = 28;
    const int w = 90 + cw * static_cast<int>(columns.size()) + 20;
    const int h = 70 + rh * static_cast<int>(ranks.size()) + 20;
    std::string s = detail::svg_header(w, h);
    s += "<text x=\"10\" y=\"20\" font-weight=\"bold\">minimal number of bases reconstructing every state</text>\n";
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const int x = 90 + cw * static_cast<int>(c) + cw / 2;
        s += "<text x=\"" + std::to_string(x) + "\" y=\"44\" text-anchor=\"middle\">" + columns[c].first + "</text>\n";
        s += "<text x=\"" + std::to_string(x) + "\" y=\"60\" text-anchor=\"middle\">d=" +
             std::to_string(columns[c].second) + "</text>\n";
    }
    int ri = 0;
    for (int r : ranks) {
        const int y = 70 + rh * ri + 18;
        s += "<text x=\"10\" y=\"" + std::to_string(y) + "\">rank " + std::to_string(r) + "</text>\n";
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const int x = 90 + cw * static_cast<int>(c) + cw / 2;
            const auto key = std::make_pair(columns[c], r);
            std::string text = "";
            if (cell.count(key)) {
                text = cell[key].empty() ? "&gt;" + std::to_string(max_k[key]) : cell[key];
            }
            s += "<text x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" text-anchor=\"middle\">" + text +
                 "</text>\n";
        }
        s += "<line x1=\"10\" x2=\"" + std::to_string(w - 10) + "\" y1=\"" + std::to_string(70 + rh * ri) + "\" y2=\"" +
             std::to_string(70 + rh * ri) + "\" stroke=\"#cccccc\"/>\n";
        ++ri;
    }
    s += "</svg>\n";
    return s;
}

/// Mean reconstruction error vs injected noise norm, log-log, with the
/// fitted 2 C eps envelope.
inline std::string render_robustness_svg(const std::string& csv_text) {
    const CsvTable t = parse_csv(csv_text);
    const std::size_t ce = t.column("epsilon");
    const std::size_t cm = t.column("mean_error");
    std::vector<std::pair<double, double>> pts;
    std::vector<double> ys;
    double log_ratio = 0.0;
    for (const auto& row : t.rows) {
        const double e = std::stod(row[ce]);
        const double m = std::stod(row[cm]);
        if (e > 0.0 && m > 0.0) {
            pts.push_back({e, m});
            ys.push_back(m);
            log_ratio += std::log(m / e);
        }
    }
    std::string s = detail::svg_header(640, 420);
    if (pts.empty()) {
        return s + "</svg>\n";
    }
    const double c_hat = std::exp(log_ratio / static_cast<double>(pts.size()));
    for (const auto& [e, m] : pts) {
        ys.push_back(2.0 * c_hat * e);
    }
    detail::Axes a;
    a.log_x = true;
    std::tie(a.ymin, a.ymax) = detail::log_range(ys);
    std::vector<double> xs;
    for (const auto& p : pts) {
        xs.push_back(p.first);
    }
    std::tie(a.xmin, a.xmax) = detail::log_range(xs);
    std::vector<double> xt;
    for (int e = static_cast<int>(a.xmin); e <= static_cast<int>(a.xmax); ++e) {
        xt.push_back(std::pow(10.0, e));
    }
    s += detail::axes_frame(a, "injected noise norm", "mean ||X - rho0||_F", xt);
    std::vector<std::pair<double, double>> data;
    std::vector<std::pair<double, double>> bound;
    for (const auto& [e, m] : pts) {
        data.push_back({a.px(e), a.py(m)});
        bound.push_back({a.px(e), a.py(2.0 * c_hat * e)});
    }
    s += detail::polyline(bound, "#aaaaaa");
    s += detail::polyline(data, detail::palette(0));
    s += "<text x=\"" + fmt_num(a.x0 + 10, "%.1f") + "\" y=\"" + fmt_num(a.y0 + 16, "%.1f") +
         "\">C_hat = " + fmt_num(c_hat, "%.4g") + "; grey: 2 C_hat eps</text>\n";
    s += "</svg>\n";
    return s;
}

} // namespace qst::io
