#include <doctest.h>

#include <nlohmann/json.hpp>

#include "mixedrank/report.hpp"
#include "mixedrank/synth.hpp"
#include "support.hpp"

using namespace mixedrank;

namespace {

PairwiseComparisons hand_comparisons(const std::vector<double>& means, const std::vector<bool>& significant,
                                     const std::vector<double>& cd) {
    PairwiseComparisons c;
    c.means = means;
    c.k = static_cast<int>(means.size());
    c.method = "tukey";
    for (std::size_t i = 0; i < means.size(); ++i) c.levels.push_back("A-" + std::to_string(i));
    std::size_t n = 0;
    for (std::size_t i = 0; i < means.size(); ++i) {
        for (std::size_t j = i + 1; j < means.size(); ++j, ++n) {
            PairComparison p;
            p.i = i;
            p.j = j;
            p.difference = means[i] - means[j];
            p.critical_difference = cd[n];
            p.significant = significant[n];
            p.p_value = significant[n] ? 0.01 : 0.5;
            c.pairs.push_back(p);
        }
    }
    return c;
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

std::string group(const std::string& svg, const std::string& id) {
    const auto start = svg.find("<g id=\"" + id + "\"");
    REQUIRE(start != std::string::npos);
    return svg.substr(start, svg.find("</g>", start) - start);
}

}  // namespace

TEST_CASE("one non-significant pair gives one bar") {
    // Pairs in order (0,1), (0,2), (1,2).
    const auto c = hand_comparisons({1.8, 2.0, 2.5}, {false, true, true}, {0.3, 0.4, 0.5});
    const auto spec = cd_diagram_spec(c);
    REQUIRE(spec.cliques.size() == 1);
    CHECK(spec.cliques[0] == std::vector<std::size_t>{0, 1});
    CHECK(spec.cd_min == 0.3);
    CHECK(spec.cd_max == 0.5);
    const std::string svg = render_svg(spec);
    CHECK(count(group(svg, "cliques"), "<line") == 1);
    CHECK(svg.find("CD 0.300 to 0.500") != std::string::npos);
    std::string why;
    CHECK_MESSAGE(support::svg_structurally_valid(svg, &why), why);
}

TEST_CASE("all pairs significant: no bars but the bracket stays") {
    const auto c = hand_comparisons({1.0, 2.0, 3.0}, {true, true, true}, {0.2, 0.2, 0.2});
    const auto spec = cd_diagram_spec(c);
    CHECK(spec.cliques.empty());
    const std::string svg = render_svg(spec);
    CHECK(count(group(svg, "cliques"), "<line") == 0);
    CHECK(count(group(svg, "cd-range"), "<line") >= 1);
    CHECK(spec.cd_min == spec.cd_max);
    CHECK(svg.find("CD 0.200<") != std::string::npos);
}

TEST_CASE("overlapping non-significant groups give maximal cliques") {
    // 0~1, 1~2, 2~3 non-significant; 0-2, 0-3, 1-3 significant.
    const auto c = hand_comparisons({1.0, 1.2, 1.4, 1.6}, {false, true, true, false, true, false},
                                    {0.3, 0.3, 0.3, 0.3, 0.3, 0.3});
    const auto spec = cd_diagram_spec(c);
    CHECK(spec.cliques == std::vector<std::vector<std::size_t>>{{0, 1}, {1, 2}, {2, 3}});
    const auto none = hand_comparisons({1.0, 1.1, 1.2}, {false, false, false}, {1, 1, 1});
    CHECK(cd_diagram_spec(none).cliques == std::vector<std::vector<std::size_t>>{{0, 1, 2}});
}

TEST_CASE("diagram geometry") {
    const auto c = hand_comparisons({2.5, 1.0, 1.7}, {true, true, false}, {0.5, 0.5, 0.5});
    const auto spec = cd_diagram_spec(c);
    CHECK(spec.levels == std::vector<std::string>{"A-1", "A-2", "A-0"});
    CHECK(std::is_sorted(spec.positions.begin(), spec.positions.end()));
    CHECK(spec.axis_min <= 1.0);
    CHECK(spec.axis_max >= 2.5);
    CHECK(spec.x_of(spec.axis_min) < spec.x_of(spec.axis_max));
    CHECK_THROWS_AS(cd_diagram_spec(hand_comparisons({1.0}, {}, {})), InferenceError);
}

TEST_CASE("reports from real analyses") {
    const Dataset d = gen_budget_dataset(default_config(Scenario::budget_simple, 2));
    auto r = autorank_replacement(d);
    r.friedman = friedman_baseline(d);
    const std::string svg = render_cd_diagram(r.tukey, r.emm);
    std::string why;
    CHECK_MESSAGE(support::svg_structurally_valid(svg, &why), why);
    CHECK(support::svg_structurally_valid(render_cd_diagram(r.friedman->comparisons)));
    CHECK(render_cd_diagram(r.tukey, r.emm) == svg);

    const std::string json = emit_report(r, ReportFormat::json);
    CHECK(json == emit_report(r, ReportFormat::json));
    CHECK(reemit_json(json) == json);
    const auto j = nlohmann::json::parse(json);
    CHECK(j["version"] == "v1");
    CHECK(j["kind"] == "comparison");
    CHECK(j["pairwise"]["pairs"].size() == 3);
    CHECK(j["emm"]["rows"].size() == 3);
    CHECK(j["friedman"]["n_blocks"] == 5);

    const std::string text = emit_report(r, ReportFormat::text);
    CHECK(text.find("A-0") != std::string::npos);
    CHECK(text == emit_report(r, ReportFormat::text));

    const auto v = check_budget_effect(d);
    const std::string vj = emit_report(v, ReportFormat::json);
    CHECK(reemit_json(vj) == vj);
    CHECK(nlohmann::json::parse(vj)["entries"].size() == 4);
    CHECK(emit_report(v, ReportFormat::text).find("budget structure") != std::string::npos);
}

TEST_CASE("GLRT text and underflow") {
    GlrtResult g;
    g.loglik_simple = -708.25;
    g.loglik_complex = -582.03;
    g.statistic = 252.44;
    g.df = 3;
    g.p_value = 0.0;
    g.p_underflow = true;
    g.preferred = Preferred::complex;
    const std::string t = glrt_text(g);
    CHECK(t.find("Simple model (-708.25) << Complex model (-582.03)\n") == 0);
    CHECK(t.find("Chi-Square: 252.44, P-Value: <1e-15\n") != std::string::npos);
    g.preferred = Preferred::simple;
    CHECK(glrt_text(g).find(">>") != std::string::npos);

    const auto v = check_seed_dependency(gen_seed_dependent(default_config(Scenario::seed_dependent, 1)));
    const auto j = nlohmann::json::parse(emit_report(v, ReportFormat::json));
    const auto& e = j["entries"][0]["glrt"];
    CHECK(e["p_value"] == 0.0);
    CHECK(e["underflow"] == true);
    CHECK(emit_report(v, ReportFormat::text).find("<1e-15") != std::string::npos);
}

TEST_CASE("fit report") {
    const Dataset d = gen_benchmark_dataset(default_config(Scenario::benchmark_varying, 1));
    const auto f = fit_lmm(build_design(parse_formula("loss ~ algorithm + (1|benchmark)"), d));
    const auto j = nlohmann::json::parse(emit_report(f, ReportFormat::json));
    CHECK(j["kind"] == "fit");
    CHECK(j["fit"]["n_obs"] == 450);
    CHECK(emit_report(f, ReportFormat::text).find("(Intercept)") != std::string::npos);
}

TEST_CASE("non-finite numbers become null") {
    GlrtResult g;
    g.loglik_simple = std::numeric_limits<double>::quiet_NaN();
    g.loglik_complex = std::numeric_limits<double>::quiet_NaN();
    CheckEntry e;
    e.name = "x";
    e.glrt = g;
    RecipeVerdict v;
    v.recipe = "r";
    v.entries.push_back(e);
    const auto j = nlohmann::json::parse(emit_report(v, ReportFormat::json));
    CHECK(j["entries"][0]["glrt"]["loglik_simple"].is_null());
}
