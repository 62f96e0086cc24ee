#include "mixedrank/cd_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mixedrank/numfmt.hpp"

namespace mixedrank {

namespace {

constexpr double kWidth = 640.0;
constexpr double kMargin = 70.0;
constexpr double kBracketY = 26.0;
constexpr double kAxisY = 66.0;
constexpr double kLabelTop = 90.0;
constexpr double kLabelStep = 16.0;
constexpr double kCliqueGap = 10.0;

std::string num(double v) { return fixed_repr(v, 2); }

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// Bron-Kerbosch with pivoting over an adjacency matrix.
void bron_kerbosch(const std::vector<std::vector<bool>>& adj, std::vector<std::size_t>& r,
                   std::vector<std::size_t> p, std::vector<std::size_t> x,
                   std::vector<std::vector<std::size_t>>& out) {
    if (p.empty() && x.empty()) {
        if (r.size() >= 2) {
            auto c = r;
            std::sort(c.begin(), c.end());
            out.push_back(std::move(c));
        }
        return;
    }
    std::size_t pivot = p.empty() ? x.front() : p.front();
    std::size_t best = 0;
    for (const auto* set : {&p, &x}) {
        for (std::size_t u : *set) {
            std::size_t deg = 0;
            for (std::size_t v : p) deg += adj[u][v];
            if (deg > best) best = deg, pivot = u;
        }
    }
    const auto candidates = p;
    for (std::size_t v : candidates) {
        if (adj[pivot][v]) continue;
        std::vector<std::size_t> np, nx;
        for (std::size_t w : p)
            if (adj[v][w]) np.push_back(w);
        for (std::size_t w : x)
            if (adj[v][w]) nx.push_back(w);
        r.push_back(v);
        bron_kerbosch(adj, r, np, nx, out);
        r.pop_back();
        p.erase(std::find(p.begin(), p.end(), v));
        x.push_back(v);
    }
}

}  // namespace

double CdDiagramSpec::x_of(double value) const {
    return kMargin + (value - axis_min) / (axis_max - axis_min) * (width - 2.0 * kMargin);
}

CdDiagramSpec cd_diagram_spec(const PairwiseComparisons& cmp) {
    const std::size_t k = cmp.levels.size();
    if (k < 2) throw InferenceError("a CD diagram needs at least two levels");
    if (cmp.means.size() != k) throw InferenceError("comparison means do not match its levels");

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cmp.means[a] < cmp.means[b]; });
    std::vector<std::size_t> rank_of(k);
    for (std::size_t i = 0; i < k; ++i) rank_of[order[i]] = i;

    CdDiagramSpec spec;
    spec.axis_label = cmp.method == "nemenyi" ? "average rank" : "estimated marginal mean";
    for (std::size_t i : order) {
        spec.levels.push_back(cmp.levels[i]);
        spec.means.push_back(cmp.means[i]);
    }
    spec.cd_min = spec.cd_max = cmp.pairs.empty() ? 0.0 : cmp.pairs.front().critical_difference;
    std::vector<std::vector<bool>> adj(k, std::vector<bool>(k, false));
    for (const auto& p : cmp.pairs) {
        spec.cd_min = std::min(spec.cd_min, p.critical_difference);
        spec.cd_max = std::max(spec.cd_max, p.critical_difference);
        if (!p.significant) adj[rank_of[p.i]][rank_of[p.j]] = adj[rank_of[p.j]][rank_of[p.i]] = true;
    }

    const double lo = spec.means.front();
    const double hi = spec.means.back();
    double span = hi - lo;
    if (!(span > 0.0)) span = std::max({spec.cd_max, 0.1 * std::abs(lo), 1.0});
    spec.axis_min = lo - 0.05 * span;
    spec.axis_max = std::max(hi + 0.05 * span, spec.axis_min + 1.05 * spec.cd_max);
    spec.width = kWidth;
    for (double m : spec.means) spec.positions.push_back(spec.x_of(m));

    std::vector<std::size_t> r, all(k);
    std::iota(all.begin(), all.end(), 0);
    bron_kerbosch(adj, r, all, {}, spec.cliques);
    std::sort(spec.cliques.begin(), spec.cliques.end());

    const double labels_end = kLabelTop + kLabelStep * static_cast<double>(k - 1);
    spec.height = labels_end + kCliqueGap * static_cast<double>(spec.cliques.size() + 1) + 20.0;
    return spec;
}

std::string render_svg(const CdDiagramSpec& spec) {
    std::ostringstream o;
    const std::size_t k = spec.levels.size();
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(spec.width)
      << "\" height=\"" << num(spec.height) << "\" viewBox=\"0 0 " << num(spec.width) << ' ' << num(spec.height)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << num(spec.width) << "\" height=\"" << num(spec.height)
      << "\" fill=\"white\"/>\n";

    // Critical-difference range bracket, anchored at the left end of the axis.
    const double b0 = spec.x_of(spec.axis_min);
    const double bmin = spec.x_of(spec.axis_min + spec.cd_min);
    const double bmax = spec.x_of(spec.axis_min + spec.cd_max);
    o << "<g id=\"cd-range\" stroke=\"black\" stroke-width=\"1.5\" fill=\"none\">\n";
    o << "<line x1=\"" << num(b0) << "\" y1=\"" << num(kBracketY) << "\" x2=\"" << num(bmin) << "\" y2=\""
      << num(kBracketY) << "\"/>\n";
    if (bmax > bmin) {
        o << "<line x1=\"" << num(bmin) << "\" y1=\"" << num(kBracketY) << "\" x2=\"" << num(bmax) << "\" y2=\""
          << num(kBracketY) << "\" stroke-dasharray=\"4 2\"/>\n";
    }
    for (double x : {b0, bmin, bmax}) {
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(kBracketY - 5.0) << "\" x2=\"" << num(x) << "\" y2=\""
          << num(kBracketY + 5.0) << "\"/>\n";
        if (bmax == bmin && x == bmin) break;
    }
    o << "</g>\n";
    std::string cd_text = spec.cd_min == spec.cd_max ? "CD " + fixed_repr(spec.cd_min, 3)
                                                     : "CD " + fixed_repr(spec.cd_min, 3) + " to " +
                                                           fixed_repr(spec.cd_max, 3);
    o << "<text x=\"" << num(b0) << "\" y=\"" << num(kBracketY - 9.0) << "\">" << cd_text << "</text>\n";

    // Axis with five ticks.
    const double ax0 = spec.x_of(spec.axis_min);
    const double ax1 = spec.x_of(spec.axis_max);
    o << "<g id=\"axis\" stroke=\"black\" stroke-width=\"1\">\n";
    o << "<line x1=\"" << num(ax0) << "\" y1=\"" << num(kAxisY) << "\" x2=\"" << num(ax1) << "\" y2=\""
      << num(kAxisY) << "\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double x = ax0 + (ax1 - ax0) * t / 4.0;
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(kAxisY - 4.0) << "\" x2=\"" << num(x) << "\" y2=\""
          << num(kAxisY) << "\"/>\n";
    }
    o << "</g>\n";
    o << "<g id=\"axis-labels\" font-size=\"10\" text-anchor=\"middle\">\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = spec.axis_min + (spec.axis_max - spec.axis_min) * t / 4.0;
        o << "<text x=\"" << num(ax0 + (ax1 - ax0) * t / 4.0) << "\" y=\"" << num(kAxisY - 7.0) << "\">"
          << fixed_repr(v, 3) << "</text>\n";
    }
    o << "<text x=\"" << num(0.5 * (ax0 + ax1)) << "\" y=\"" << num(kAxisY + 14.0) << "\">"
      << escape(spec.axis_label) << "</text>\n";
    o << "</g>\n";

    // Level markers with leader lines to their labels.
    o << "<g id=\"levels\">\n";
    for (std::size_t i = 0; i < k; ++i) {
        const double x = spec.positions[i];
        const double y = kLabelTop + kLabelStep * static_cast<double>(i);
        const bool right = x > 0.5 * spec.width;
        o << "<circle cx=\"" << num(x) << "\" cy=\"" << num(kAxisY) << "\" r=\"3\" fill=\"black\"/>\n";
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(kAxisY) << "\" x2=\"" << num(x) << "\" y2=\"" << num(y)
          << "\" stroke=\"black\" stroke-width=\"0.75\"/>\n";
        o << "<text x=\"" << num(right ? x - 5.0 : x + 5.0) << "\" y=\"" << num(y + 4.0) << "\" text-anchor=\""
          << (right ? "end" : "start") << "\">" << escape(spec.levels[i]) << " (" << fixed_repr(spec.means[i], 3)
          << ")</text>\n";
    }
    o << "</g>\n";

    const double bars_top = kLabelTop + kLabelStep * static_cast<double>(k - 1) + kCliqueGap;
    o << "<g id=\"cliques\" stroke=\"black\" stroke-width=\"4\" stroke-linecap=\"round\">\n";
    for (std::size_t c = 0; c < spec.cliques.size(); ++c) {
        const auto& members = spec.cliques[c];
        const double y = bars_top + kCliqueGap * static_cast<double>(c);
        o << "<line x1=\"" << num(spec.positions[members.front()] - 4.0) << "\" y1=\"" << num(y) << "\" x2=\""
          << num(spec.positions[members.back()] + 4.0) << "\" y2=\"" << num(y) << "\"/>\n";
    }
    o << "</g>\n";
    o << "</svg>\n";
    return o.str();
}

std::string render_cd_diagram(const PairwiseComparisons& cmp, const EmmTable& emm) {
    if (emm.rows.size() != cmp.levels.size()) throw InferenceError("EMM table and comparisons disagree on levels");
    PairwiseComparisons c = cmp;
    for (std::size_t i = 0; i < emm.rows.size(); ++i) {
        if (emm.rows[i].level != cmp.levels[i]) throw InferenceError("EMM table and comparisons disagree on levels");
        c.means[i] = emm.rows[i].mean;
    }
    return render_svg(cd_diagram_spec(c));
}

std::string render_cd_diagram(const PairwiseComparisons& cmp) { return render_svg(cd_diagram_spec(cmp)); }

}  // namespace mixedrank
