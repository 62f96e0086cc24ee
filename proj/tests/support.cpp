#include "support.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <set>

namespace support {

namespace {

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':'; }
bool name_char(char c) {
    return name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
}

struct XmlParser {
    const std::string& s;
    std::size_t i = 0;
    XmlCheck out;

    bool fail(const std::string& msg) {
        out.ok = false;
        out.error = msg + " at byte " + std::to_string(i);
        return false;
    }
    void skip_ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool name(std::string& n) {
        if (i >= s.size() || !name_start(s[i])) return fail("expected a name");
        const std::size_t b = i;
        while (i < s.size() && name_char(s[i])) ++i;
        n = s.substr(b, i - b);
        return true;
    }
    bool entity() {
        const auto end = s.find(';', i);
        if (end == std::string::npos) return fail("unterminated entity");
        const std::string e = s.substr(i + 1, end - i - 1);
        static const std::set<std::string> known{"amp", "lt", "gt", "quot", "apos"};
        bool numeric = e.size() > 1 && e[0] == '#' &&
                       std::all_of(e.begin() + 1, e.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
        if (!known.count(e) && !numeric) return fail("unknown entity '" + e + "'");
        i = end + 1;
        return true;
    }
    bool attributes(std::map<std::string, std::string>& attrs) {
        for (;;) {
            skip_ws();
            if (i >= s.size()) return fail("unterminated tag");
            if (s[i] == '>' || s[i] == '/' || s[i] == '?') return true;
            std::string n;
            if (!name(n)) return false;
            skip_ws();
            if (i >= s.size() || s[i] != '=') return fail("expected '=' after attribute");
            ++i;
            skip_ws();
            if (i >= s.size() || (s[i] != '"' && s[i] != '\'')) return fail("attribute value must be quoted");
            const char q = s[i++];
            const std::size_t b = i;
            while (i < s.size() && s[i] != q) {
                if (s[i] == '<') return fail("'<' inside an attribute value");
                if (s[i] == '&') {
                    if (!entity()) return false;
                    continue;
                }
                ++i;
            }
            if (i >= s.size()) return fail("unterminated attribute value");
            if (attrs.count(n)) return fail("duplicate attribute '" + n + "'");
            attrs[n] = s.substr(b, i - b);
            ++i;
        }
    }
    bool element(bool is_root) {
        ++i;  // '<'
        std::string n;
        if (!name(n)) return false;
        std::map<std::string, std::string> attrs;
        if (!attributes(attrs)) return false;
        ++out.element_counts[n];
        if (is_root) {
            out.root = n;
            out.root_attributes = attrs;
        }
        if (s[i] == '/') {
            if (i + 1 >= s.size() || s[i + 1] != '>') return fail("expected '/>'");
            i += 2;
            return true;
        }
        if (s[i] != '>') return fail("expected '>'");
        ++i;
        for (;;) {
            if (i >= s.size()) return fail("element <" + n + "> is not closed");
            if (s[i] == '&') {
                if (!entity()) return false;
            } else if (s[i] == '<') {
                if (s.compare(i, 2, "</") == 0) {
                    i += 2;
                    std::string close;
                    if (!name(close)) return false;
                    skip_ws();
                    if (i >= s.size() || s[i] != '>') return fail("expected '>' in closing tag");
                    ++i;
                    if (close != n) return fail("closing </" + close + "> does not match <" + n + ">");
                    return true;
                }
                if (!element(false)) return false;
            } else {
                ++i;
            }
        }
    }
    XmlCheck run() {
        skip_ws();
        if (s.compare(i, 5, "<?xml") == 0) {
            const auto end = s.find("?>", i);
            if (end == std::string::npos) {
                fail("unterminated XML declaration");
                return out;
            }
            i = end + 2;
        }
        skip_ws();
        if (i >= s.size() || s[i] != '<') {
            fail("missing root element");
            return out;
        }
        if (!element(true)) return out;
        skip_ws();
        if (i != s.size()) {
            fail("content after the root element");
            return out;
        }
        out.ok = true;
        return out;
    }
};

const char* kNames[] = {"algorithm", "benchmark", "seed", "budget", "prior", "x", "y_2", "z.k", "m1", "grp", "task_id"};

}  // namespace

XmlCheck check_xml(const std::string& document) { return XmlParser{document}.run(); }

bool svg_structurally_valid(const std::string& document, std::string* why) {
    auto set = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    const XmlCheck c = check_xml(document);
    if (!c.ok) return set(c.error);
    if (c.root != "svg") return set("root element is <" + c.root + ">");
    const auto& a = c.root_attributes;
    if (!a.count("viewBox")) return set("viewBox missing");
    if (!a.count("version") || a.at("version") != "1.1") return set("version is not 1.1");
    if (!a.count("xmlns") || a.at("xmlns") != "http://www.w3.org/2000/svg") return set("SVG namespace missing");
    return true;
}

std::string random_formula(std::mt19937_64& rng) {
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    auto sp = [&] { return std::string(pick(3), ' '); };
    const std::size_t n_names = std::size(kNames);

    std::vector<std::string> parts;
    const std::size_t intercept = pick(3);  // 0: implicit, 1: "1", 2: "0"
    if (intercept == 1) parts.emplace_back("1");
    if (intercept == 2) parts.emplace_back("0");

    std::set<std::set<std::string>> fixed_seen;
    const std::size_t n_fixed = pick(4);
    for (std::size_t t = 0; t < n_fixed; ++t) {
        const std::size_t width = 1 + pick(3);
        std::vector<std::string> vars;
        while (vars.size() < width) {
            std::string v = kNames[pick(n_names)];
            if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
        }
        const std::set<std::string> key(vars.begin(), vars.end());
        if (!fixed_seen.insert(key).second) continue;
        std::string term;
        for (std::size_t i = 0; i < vars.size(); ++i) term += (i ? sp() + ":" + sp() : "") + vars[i];
        parts.push_back(term);
    }

    std::set<std::string> random_seen;
    const std::size_t n_random = pick(3);
    for (std::size_t t = 0; t < n_random; ++t) {
        const std::string group = kNames[pick(n_names)];
        std::vector<std::string> inner;
        const std::size_t n_inner = pick(3);
        while (inner.size() < n_inner) {
            std::string v = kNames[pick(n_names)];
            if (v != group && std::find(inner.begin(), inner.end(), v) == inner.end()) inner.push_back(v);
        }
        bool with_intercept = inner.empty() || pick(2) == 0;
        const bool diagonal = pick(2) == 0;
        std::string text;
        if (inner.size() == 1 && with_intercept && pick(2) == 0) {
            text = inner.front();  // bare identifier: intercept implied
        } else {
            text = with_intercept ? "1" : "0";
            for (const auto& v : inner) text += sp() + "+" + sp() + v;
        }
        std::string key = (with_intercept ? "1" : "0") + std::string(diagonal ? "||" : "|") + group;
        for (const auto& v : inner) key += "," + v;
        if (!random_seen.insert(key).second) continue;
        parts.push_back("(" + sp() + text + sp() + (diagonal ? "||" : "|") + sp() + group + sp() + ")");
    }
    if (parts.empty()) parts.emplace_back("1");
    std::string f = "loss" + sp() + "~" + sp();
    for (std::size_t i = 0; i < parts.size(); ++i) f += (i ? sp() + "+" + sp() : "") + parts[i];
    return f;
}

OlsOracle ols_normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    OlsOracle o;
    const Eigen::MatrixXd xtx = X.transpose() * X;
    o.beta = xtx.ldlt().solve(X.transpose() * y);
    o.sse = (y - X * o.beta).squaredNorm();
    const double n = static_cast<double>(y.size());
    o.sigma2_ml = o.sse / n;
    o.loglik = -0.5 * n * (1.0 + std::log(2.0 * std::numbers::pi * o.sigma2_ml));
    return o;
}

mixedrank::Dataset one_way_data(std::size_t g, std::size_t m, double sigma_between, double sigma_within,
                                std::uint64_t seed, double mean) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> loss;
    std::vector<std::string> group;
    for (std::size_t j = 0; j < g; ++j) {
        const double b = sigma_between * z(rng);
        for (std::size_t r = 0; r < m; ++r) {
            loss.push_back(mean + b + sigma_within * z(rng));
            group.push_back("g" + std::to_string(j));
        }
    }
    mixedrank::Dataset d;
    d.add_column(mixedrank::Column::numeric("loss", loss));
    d.add_column(mixedrank::Column::categorical("group", group));
    return d;
}

namespace {

struct OneWaySums {
    double n = 0, g = 0, m = 0, ssw = 0, ssb = 0;
};

OneWaySums sums(const mixedrank::Dataset& data) {
    const auto y = data.column("loss").values();
    const auto codes = data.column("group").codes();
    const std::size_t g = data.column("group").levels().size();
    std::vector<double> total(g, 0.0);
    std::vector<double> count(g, 0.0);
    for (std::size_t r = 0; r < y.size(); ++r) {
        total[codes[r]] += y[r];
        count[codes[r]] += 1.0;
    }
    OneWaySums s;
    s.n = static_cast<double>(y.size());
    s.g = static_cast<double>(g);
    s.m = s.n / s.g;
    double grand = 0.0;
    for (double t : total) grand += t;
    grand /= s.n;
    for (std::size_t r = 0; r < y.size(); ++r) {
        const double d = y[r] - total[codes[r]] / count[codes[r]];
        s.ssw += d * d;
    }
    for (std::size_t j = 0; j < g; ++j) {
        const double d = total[j] / count[j] - grand;
        s.ssb += count[j] * d * d;
    }
    return s;
}

}  // namespace

double one_way_deviance(const mixedrank::Dataset& data, double theta) {
    const OneWaySums s = sums(data);
    const double lambda = 1.0 + s.m * theta * theta;
    const double r2 = s.ssw + s.ssb / lambda;
    return s.g * std::log(lambda) + s.n * (1.0 + std::log(2.0 * std::numbers::pi * r2 / s.n));
}

OneWayOracle one_way_grid_oracle(const mixedrank::Dataset& data, double theta_max) {
    const int steps = 20000;
    double best_t = 0.0;
    double best_d = one_way_deviance(data, 0.0);
    for (int i = 1; i <= steps; ++i) {
        const double t = theta_max * i / steps;
        const double d = one_way_deviance(data, t);
        if (d < best_d) best_d = d, best_t = t;
    }
    double a = std::max(0.0, best_t - theta_max / steps);
    double b = std::min(theta_max, best_t + theta_max / steps);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    while (b - a > 1e-10) {
        const double c = b - phi * (b - a);
        const double d = a + phi * (b - a);
        if (one_way_deviance(data, c) <= one_way_deviance(data, d)) b = d; else a = c;
    }
    OneWayOracle o;
    o.theta = 0.5 * (a + b);
    if (one_way_deviance(data, 0.0) <= one_way_deviance(data, o.theta)) o.theta = 0.0;
    o.deviance = one_way_deviance(data, o.theta);
    const OneWaySums s = sums(data);
    o.sigma2 = (s.ssw + s.ssb / (1.0 + s.m * o.theta * o.theta)) / s.n;
    o.sigma2_between = o.sigma2 * o.theta * o.theta;
    return o;
}

OneWayOracle one_way_anova_ml(const mixedrank::Dataset& data) {
    const OneWaySums s = sums(data);
    OneWayOracle o;
    o.sigma2 = s.ssw / (s.n - s.g);
    o.sigma2_between = std::max(0.0, (s.ssb / s.g - o.sigma2) / s.m);
    if (o.sigma2_between == 0.0) o.sigma2 = (s.ssw + s.ssb) / s.n;
    o.theta = std::sqrt(o.sigma2_between / o.sigma2);
    o.deviance = one_way_deviance(data, o.theta);
    return o;
}

std::vector<double> mc_studentized_range_cdf(int k, double df, const std::vector<double>& qs, std::size_t samples,
                                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    const bool infinite = !std::isfinite(df);
    std::gamma_distribution<double> chi2(infinite ? 1.0 : df / 2.0, 2.0);
    std::vector<std::size_t> below(qs.size(), 0);
    for (std::size_t n = 0; n < samples; ++n) {
        double lo = z(rng);
        double hi = lo;
        for (int j = 1; j < k; ++j) {
            const double v = z(rng);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double scale = infinite ? 1.0 : std::sqrt(chi2(rng) / df);
        const double r = (hi - lo) / scale;
        for (std::size_t i = 0; i < qs.size(); ++i) below[i] += r <= qs[i];
    }
    std::vector<double> out;
    for (auto b : below) out.push_back(static_cast<double>(b) / static_cast<double>(samples));
    return out;
}

}  // namespace support
