#include "mixedrank/report.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "mixedrank/formula.hpp"
#include "mixedrank/numfmt.hpp"

namespace mixedrank {

namespace {

using Json = nlohmann::ordered_json;

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string p_text(double p, bool underflow) { return underflow ? "<1e-15" : shortest_repr(p); }

Json to_json(const GlrtResult& g) {
    Json j;
    j["simple_formula"] = g.simple_formula;
    j["complex_formula"] = g.complex_formula;
    j["loglik_simple"] = number(g.loglik_simple);
    j["loglik_complex"] = number(g.loglik_complex);
    j["statistic"] = number(g.statistic);
    j["df"] = g.df;
    j["p_value"] = number(g.p_value);
    j["underflow"] = g.p_underflow;
    j["alpha"] = g.alpha;
    j["preferred"] = g.preferred == Preferred::complex ? "complex" : "simple";
    j["boundary_warning"] = g.boundary_warning;
    return j;
}

Json to_json(const PairwiseComparisons& c) {
    Json j;
    j["method"] = c.method;
    j["k"] = c.k;
    j["df"] = number(c.df);
    j["alpha"] = c.alpha;
    j["levels"] = c.levels;
    Json means = Json::array();
    for (double m : c.means) means.push_back(number(m));
    j["means"] = means;
    Json pairs = Json::array();
    for (const auto& p : c.pairs) {
        Json q;
        q["a"] = c.levels[p.i];
        q["b"] = c.levels[p.j];
        q["difference"] = number(p.difference);
        q["se"] = number(p.se);
        q["q"] = number(p.q);
        q["q_critical"] = number(p.q_critical);
        q["critical_difference"] = number(p.critical_difference);
        q["p_value"] = number(p.p_value);
        q["underflow"] = p.p_underflow;
        q["significant"] = p.significant;
        pairs.push_back(q);
    }
    j["pairs"] = pairs;
    return j;
}

Json to_json(const CdDiagramSpec& s) {
    Json j;
    j["levels"] = s.levels;
    Json means = Json::array();
    for (double m : s.means) means.push_back(number(m));
    j["means"] = means;
    j["axis"] = {number(s.axis_min), number(s.axis_max)};
    j["cd_min"] = number(s.cd_min);
    j["cd_max"] = number(s.cd_max);
    Json cliques = Json::array();
    for (const auto& c : s.cliques) {
        Json names = Json::array();
        for (std::size_t i : c) names.push_back(s.levels[i]);
        cliques.push_back(names);
    }
    j["cliques"] = cliques;
    return j;
}

Json to_json(const RandomTermVariance& r) {
    Json j;
    j["term"] = r.term;
    j["group"] = r.group;
    Json rows = Json::array();
    const auto v = r.variances();
    for (std::size_t i = 0; i < r.inner_labels.size(); ++i) {
        Json e;
        e["inner"] = r.inner_labels[i];
        e["variance"] = number(v[i]);
        rows.push_back(e);
    }
    j["variances"] = rows;
    Json cov = Json::array();
    for (Eigen::Index a = 0; a < r.covariance.rows(); ++a) {
        Json row = Json::array();
        for (Eigen::Index b = 0; b < r.covariance.cols(); ++b) row.push_back(number(r.covariance(a, b)));
        cov.push_back(row);
    }
    j["covariance"] = cov;
    return j;
}

Json to_json(const FitSummary& f) {
    Json j;
    j["formula"] = f.formula;
    j["method"] = to_string(f.method);
    j["loglik"] = number(f.loglik);
    j["n_params"] = f.n_params;
    j["n_obs"] = f.n_obs;
    j["sigma2"] = number(f.sigma2);
    j["converged"] = f.converged;
    j["singular"] = f.singular;
    Json fixed = Json::array();
    for (std::size_t i = 0; i < f.beta.size(); ++i) {
        Json e;
        e["label"] = f.beta_labels[i];
        e["estimate"] = number(f.beta[i]);
        fixed.push_back(e);
    }
    j["fixed_effects"] = fixed;
    Json random = Json::array();
    for (const auto& r : f.ranef_variances) random.push_back(to_json(r));
    j["random_effects"] = random;
    j["warnings"] = f.warnings;
    return j;
}

Json to_json(const EmmTable& e) {
    Json j;
    j["focus"] = e.focus;
    j["grid_size"] = e.grid_size;
    Json rows = Json::array();
    for (const auto& r : e.rows) {
        Json row;
        row["level"] = r.level;
        row["mean"] = number(r.mean);
        row["se"] = number(r.se);
        row["df"] = number(r.df);
        row["n_obs"] = r.n_obs;
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
}

Json to_json(const FriedmanResult& f) {
    Json j;
    j["statistic"] = number(f.statistic);
    j["df"] = f.df;
    j["p_value"] = number(f.p_value);
    j["underflow"] = f.p_underflow;
    j["n_blocks"] = f.n_blocks;
    j["critical_difference"] = number(f.critical_difference);
    j["comparisons"] = to_json(f.comparisons);
    j["cd_diagram"] = to_json(cd_diagram_spec(f.comparisons));
    return j;
}

Json to_json(const CheckEntry& e) {
    Json j;
    j["name"] = e.name;
    j["models"] = e.models;
    j["glrt"] = e.glrt ? to_json(*e.glrt) : Json(nullptr);
    j["comparisons"] = e.comparisons ? to_json(*e.comparisons) : Json(nullptr);
    j["verdict"] = e.verdict;
    j["implicated"] = e.implicated;
    Json details = Json::array();
    for (const auto& [name, value] : e.details) {
        Json d;
        d["name"] = name;
        d["value"] = number(value);
        details.push_back(d);
    }
    j["details"] = details;
    j["skipped"] = e.skipped;
    return j;
}

void write_pairs(std::ostream& o, const PairwiseComparisons& c) {
    for (const auto& p : c.pairs) {
        o << "  " << c.levels[p.i] << " vs " << c.levels[p.j] << ": diff " << fixed_repr(p.difference, 4)
          << ", q " << fixed_repr(p.q, 3) << ", q* " << fixed_repr(p.q_critical, 3) << ", CD "
          << fixed_repr(p.critical_difference, 4) << ", p " << p_text(p.p_value, p.p_underflow) << ", "
          << (p.significant ? "significant" : "not significant") << "\n";
    }
}

}  // namespace

std::string glrt_text(const GlrtResult& g) {
    std::ostringstream o;
    o << "Simple model (" << fixed_repr(g.loglik_simple, 2) << ") "
      << (g.preferred == Preferred::complex ? "<<" : ">>") << " Complex model (" << fixed_repr(g.loglik_complex, 2)
      << ")\n";
    o << "Chi-Square: " << shortest_repr(g.statistic) << ", P-Value: " << p_text(g.p_value, g.p_underflow) << "\n";
    return o.str();
}

std::string emit_report(const ComparisonReport& r, ReportFormat format) {
    const CdDiagramSpec cd = cd_diagram_spec(r.tukey);
    if (format == ReportFormat::json) {
        Json j;
        j["version"] = kReportVersion;
        j["kind"] = "comparison";
        j["fit"] = to_json(r.fit);
        j["upgrade"] = r.upgrade ? to_json(*r.upgrade) : Json(nullptr);
        j["emm"] = to_json(r.emm);
        j["pairwise"] = to_json(r.tukey);
        j["cd_diagram"] = to_json(cd);
        j["friedman"] = r.friedman ? to_json(*r.friedman) : Json(nullptr);
        j["notes"] = r.notes;
        return dump(j);
    }
    std::ostringstream o;
    o << "Model: " << r.fit.formula << " (" << to_string(r.fit.method) << ", loglik "
      << fixed_repr(r.fit.loglik, 2) << ", k " << r.fit.n_params << ", n " << r.fit.n_obs << ")\n";
    if (r.upgrade) o << glrt_text(*r.upgrade);
    o << "Estimated marginal means (" << r.emm.focus << "):\n";
    for (const auto& row : r.emm.rows) {
        o << "  " << row.level << ": mean " << fixed_repr(row.mean, 4) << ", SE " << fixed_repr(row.se, 4)
          << ", n " << row.n_obs << "\n";
    }
    o << "Tukey HSD (alpha " << shortest_repr(r.tukey.alpha) << ", k " << r.tukey.k << ", df "
      << shortest_repr(r.tukey.df) << "):\n";
    write_pairs(o, r.tukey);
    o << "Critical difference range: " << fixed_repr(cd.cd_min, 4) << " to " << fixed_repr(cd.cd_max, 4) << "\n";
    if (r.friedman) {
        const auto& f = *r.friedman;
        o << "Friedman baseline: statistic " << fixed_repr(f.statistic, 3) << ", df " << f.df << ", p "
          << p_text(f.p_value, f.p_underflow) << ", blocks " << f.n_blocks << ", CD "
          << fixed_repr(f.critical_difference, 4) << "\n";
        o << "Average ranks:";
        for (std::size_t i = 0; i < f.comparisons.levels.size(); ++i)
            o << " " << f.comparisons.levels[i] << "=" << fixed_repr(f.comparisons.means[i], 3);
        o << "\n";
        write_pairs(o, f.comparisons);
    }
    for (const auto& n : r.notes) o << "Note: " << n << "\n";
    return o.str();
}

std::string emit_report(const RecipeVerdict& v, ReportFormat format) {
    if (format == ReportFormat::json) {
        Json j;
        j["version"] = kReportVersion;
        j["kind"] = "recipe";
        j["recipe"] = v.recipe;
        Json entries = Json::array();
        for (const auto& e : v.entries) entries.push_back(to_json(e));
        j["entries"] = entries;
        j["implicated"] = v.implicated;
        j["notes"] = v.notes;
        return dump(j);
    }
    std::ostringstream o;
    o << "Recipe: " << v.recipe << "\n";
    for (const auto& e : v.entries) {
        o << "[" << e.name << "]\n";
        if (e.glrt) {
            std::istringstream lines(glrt_text(*e.glrt));
            for (std::string line; std::getline(lines, line);) o << "  " << line << "\n";
        } else if (!e.models.empty()) {
            for (const auto& m : e.models) o << "  Model: " << m << "\n";
        }
        if (e.comparisons) write_pairs(o, *e.comparisons);
        for (const auto& [name, value] : e.details) o << "  " << name << ": " << shortest_repr(value) << "\n";
        o << "  " << e.verdict << "\n";
    }
    o << "Implicated: [";
    for (std::size_t i = 0; i < v.implicated.size(); ++i) o << (i ? ", '" : "'") << v.implicated[i] << "'";
    o << "]\n";
    for (const auto& n : v.notes) o << "Note: " << n << "\n";
    return o.str();
}

std::string emit_report(const FittedLmm& fit, ReportFormat format) {
    if (format == ReportFormat::json) {
        Json j;
        j["version"] = kReportVersion;
        j["kind"] = "fit";
        j["fit"] = to_json(summarize(fit));
        j["deviance"] = number(fit.deviance);
        Json theta = Json::array();
        for (double t : fit.theta) theta.push_back(number(t));
        j["theta"] = theta;
        Json vcov = Json::array();
        for (Eigen::Index a = 0; a < fit.vcov_beta.rows(); ++a) {
            Json row = Json::array();
            for (Eigen::Index b = 0; b < fit.vcov_beta.cols(); ++b) row.push_back(number(fit.vcov_beta(a, b)));
            vcov.push_back(row);
        }
        j["vcov_beta"] = vcov;
        Json blups = Json::array();
        for (Eigen::Index i = 0; i < fit.blups.size(); ++i) blups.push_back(number(fit.blups(i)));
        j["blups"] = blups;
        j["evaluations"] = fit.evaluations;
        return dump(j);
    }
    std::ostringstream o;
    o << "Model: " << format_formula(fit.formula) << " (" << to_string(fit.method) << ")\n";
    o << "loglik " << shortest_repr(fit.loglik) << ", deviance " << shortest_repr(fit.deviance) << ", k "
      << fit.n_params << ", n " << fit.n_obs << ", sigma2 " << shortest_repr(fit.sigma2) << "\n";
    o << "Fixed effects:\n";
    for (std::size_t i = 0; i < fit.n_fixed(); ++i) {
        o << "  " << fit.beta_labels[i] << ": " << shortest_repr(fit.beta(static_cast<Eigen::Index>(i))) << " (SE "
          << fixed_repr(std::sqrt(fit.vcov_beta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))), 6)
          << ")\n";
    }
    for (const auto& r : fit.ranef_variances) {
        o << "Random effect " << r.term << ":\n";
        const auto v = r.variances();
        for (std::size_t i = 0; i < v.size(); ++i)
            o << "  " << r.inner_labels[i] << ": variance " << shortest_repr(v[i]) << "\n";
    }
    o << "converged " << (fit.converged ? "yes" : "no") << ", singular " << (fit.singular ? "yes" : "no")
      << ", evaluations " << fit.evaluations << "\n";
    for (const auto& w : fit.warnings) o << "Warning: " << w << "\n";
    return o.str();
}

std::string reemit_json(const std::string& json_text) { return dump(Json::parse(json_text)); }

}  // namespace mixedrank
