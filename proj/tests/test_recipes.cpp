#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mixedrank/recipes.hpp"
#include "mixedrank/synth.hpp"

using namespace mixedrank;

namespace {

Dataset replace_column(const Dataset& d, const Column& replacement) {
    Dataset out;
    for (const auto& c : d.columns()) out.add_column(c.name() == replacement.name() ? replacement : c);
    return out;
}

const CheckEntry& entry(const RecipeVerdict& v, const std::string& name) {
    for (const auto& e : v.entries)
        if (e.name == name) return e;
    FAIL("no entry " << name);
    throw std::logic_error("unreachable");
}

double detail(const CheckEntry& e, const std::string& key) {
    for (const auto& [k, v] : e.details)
        if (k == key) return v;
    FAIL("no detail " << key);
    return 0.0;
}

}  // namespace

TEST_CASE("seed check implicates A-1") {
    const Dataset d = gen_seed_dependent(default_config(Scenario::seed_dependent, 7));
    const auto v = check_seed_dependency(d);
    REQUIRE(v.entries.size() == 1);
    const auto& e = v.entries[0];
    REQUIRE(e.glrt);
    CHECK(e.glrt->preferred == Preferred::complex);
    CHECK(e.glrt->df == 3);
    CHECK(e.implicated == std::vector<std::string>{"A-1"});
    CHECK(v.implicated == std::vector<std::string>{"A-1"});
    CHECK(detail(e, "variance[A-1]") > 10.0 * detail(e, "median variance"));
    CHECK(e.verdict.find("Seed is a significant effect") == 0);
    CHECK(e.verdict.find("['A-1']") != std::string::npos);
    CHECK(v.notes.empty());
}

TEST_CASE("seed check on the null scenario") {
    int preferred_simple = 0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const auto v = check_seed_dependency(gen_seed_dependent(default_config(Scenario::seed_null, s)));
        preferred_simple += v.entries[0].glrt->preferred == Preferred::simple;
        CHECK(v.implicated.empty());
    }
    CHECK(preferred_simple >= 4);
}

TEST_CASE("seed check preconditions") {
    GeneratorConfig cfg = default_config(Scenario::seed_null, 1);
    cfg.n_seeds = 1;
    CHECK_THROWS_AS(check_seed_dependency(gen_seed_dependent(cfg)), RecipeError);
    CHECK_THROWS_AS(check_seed_dependency(gen_benchmark_dataset(default_config(Scenario::benchmark_varying, 1))
                                              .subset(std::vector<std::size_t>{0, 1, 2})),
                    RecipeError);
    cfg = default_config(Scenario::seed_dependent, 1);
    cfg.n_replicates = 1;
    CHECK_FALSE(check_seed_dependency(gen_seed_dependent(cfg)).notes.empty());
}

TEST_CASE("benchmark relevance") {
    const Dataset d = gen_benchmark_dataset(default_config(Scenario::benchmark_varying, 7));
    const auto v = check_benchmark_relevance(d);
    REQUIRE(v.entries.size() == 4);
    CHECK(entry(v, "benchmark B-0").glrt->preferred == Preferred::simple);
    CHECK(entry(v, "benchmark B-0").verdict.find("uninformative") == 0);
    CHECK(entry(v, "benchmark B-2").glrt->preferred == Preferred::complex);
    CHECK(v.implicated == std::vector<std::string>{"B-0"});
    const auto& rank = entry(v, "benchmark ranking");
    REQUIRE(rank.details.size() == 3);
    CHECK(rank.details[0].first == "variance[B-2]");
    CHECK(rank.details[0].second >= rank.details[1].second);
    CHECK(rank.details[1].second >= rank.details[2].second);
}

TEST_CASE("constant benchmark is uninformative with a zero statistic") {
    Dataset d;
    d.add_column(Column::numeric("loss", {1, 1, 1, 1, 1, 2, 1, 3, 2}));
    d.add_column(Column::categorical("algorithm", {"A", "B", "C", "A", "B", "C", "A", "B", "C"}));
    d.add_column(Column::categorical("benchmark", {"x", "x", "x", "y", "y", "y", "y", "y", "y"}));
    RecipeOptions o;
    o.threads = 1;
    const auto v = check_benchmark_relevance(d, o);
    const auto& e = entry(v, "benchmark x");
    CHECK(e.glrt->statistic == 0.0);
    CHECK(e.glrt->p_value == 1.0);
    CHECK(e.verdict.find("uninformative") == 0);
}

TEST_CASE("budget effect scenarios") {
    const auto simple = check_budget_effect(gen_budget_dataset(default_config(Scenario::budget_simple, 7)));
    CHECK(entry(simple, "budget structure").verdict == "simple budget effect preferred");
    CHECK(entry(simple, "simple vs budget").glrt->preferred == Preferred::complex);
    CHECK(entry(simple, "budget vs interaction").glrt->preferred == Preferred::simple);

    const auto null = check_budget_effect(gen_budget_dataset(default_config(Scenario::budget_null, 7)));
    CHECK(entry(null, "budget structure").verdict == "no budget effect: simple model preferred");

    const auto cross = check_budget_effect(gen_budget_dataset(default_config(Scenario::budget_crossover, 7)));
    CHECK(entry(cross, "budget structure").verdict == "interaction effect preferred");
    CHECK(entry(cross, "budget vs interaction").glrt->preferred == Preferred::complex);
    CHECK(entry(cross, "budget structure").models.size() == 3);
}

TEST_CASE("planted anomaly is the only flagged benchmark") {
    const Dataset d = gen_planted_anomaly(default_config(Scenario::planted_anomaly, 7));
    const auto v = cluster_benchmarks(d, "prior", {"A-0", "A-1"});
    CHECK(v.entries.size() == 10);
    CHECK(v.implicated == std::vector<std::string>{"B-5"});
    const auto swapped = cluster_benchmarks(d, "prior", {"A-1", "A-0"});
    REQUIRE(swapped.entries.size() == v.entries.size());
    for (std::size_t i = 0; i < v.entries.size(); ++i) {
        CHECK(swapped.entries[i].glrt->statistic == doctest::Approx(v.entries[i].glrt->statistic).epsilon(1e-6));
        CHECK(swapped.entries[i].implicated == v.entries[i].implicated);
    }
    CHECK_THROWS_AS(cluster_benchmarks(d, "prior", {"A-0", "A-9"}), RecipeError);
    CHECK_THROWS(cluster_benchmarks(d, "nope", {"A-0", "A-1"}));
}

TEST_CASE("cluster skips benchmarks with a single metafeature level") {
    const Dataset full = gen_planted_anomaly(default_config(Scenario::planted_anomaly, 2));
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < full.n_rows(); ++r)
        if (!(full.column("benchmark").cell(r) == "B-3" && full.column("prior").cell(r) == "bad")) rows.push_back(r);
    const auto v = cluster_benchmarks(full.subset(rows), "prior", {"A-0", "A-1"});
    CHECK(entry(v, "benchmark B-3").skipped);
    CHECK_FALSE(v.notes.empty());
}

TEST_CASE("anytime with a single budget equals the default comparison") {
    const Dataset d = gen_budget_dataset(default_config(Scenario::budget_simple, 3));
    const auto a = anytime_analysis(d, {4.0, 4.0});
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < d.n_rows(); ++r)
        if (d.column("budget").values()[r] == 4.0) rows.push_back(r);
    const auto b = autorank_replacement(d.subset(rows), std::string("loss ~ algorithm + (1|benchmark)"));
    CHECK(a.fit.formula == b.fit.formula);
    REQUIRE(a.emm.rows.size() == b.emm.rows.size());
    for (std::size_t i = 0; i < a.emm.rows.size(); ++i)
        CHECK(std::abs(a.emm.rows[i].mean - b.emm.rows[i].mean) < 1e-6);
    CHECK_THROWS_AS(anytime_analysis(d, {20.0, 30.0}), RecipeError);

    const auto w = anytime_analysis(d, {1.0, 5.0});
    CHECK(w.fit.formula == "loss ~ algorithm + (1|budget) + (1|benchmark)");
    CHECK(w.fit.n_obs == 3 * 5 * 10 * 5);
}

TEST_CASE("default comparison") {
    const Dataset d = gen_budget_dataset(default_config(Scenario::budget_simple, 4));
    const auto r = autorank_replacement(d);
    REQUIRE(r.upgrade);
    CHECK(r.upgrade->preferred == Preferred::complex);
    CHECK(r.fit.formula == "loss ~ algorithm + (1|benchmark)");
    CHECK(r.emm.rows.size() == 3);
    CHECK(r.tukey.pairs.size() == 3);
    CHECK(r.emm.rows[0].mean < r.emm.rows[2].mean);

    const Dataset s = gen_seed_dependent(default_config(Scenario::seed_null, 4));
    const auto plain = autorank_replacement(s);
    CHECK_FALSE(plain.upgrade);
    CHECK(plain.fit.formula == "loss ~ algorithm");

    const auto f = friedman_baseline(d);
    CHECK(f.n_blocks == 5);
    CHECK(friedman_baseline(s).n_blocks == 50);
}

TEST_CASE("identical losses give p = 1") {
    GeneratorConfig cfg = default_config(Scenario::seed_null, 1);
    const Dataset base = gen_seed_dependent(cfg);
    std::vector<double> loss(base.n_rows());
    for (std::size_t r = 0; r < loss.size(); ++r) loss[r] = std::sin(static_cast<double>(r / 3 % 50));
    const auto r = autorank_replacement(replace_column(base, Column::numeric("loss", loss)));
    for (const auto& p : r.tukey.pairs) CHECK(p.p_value == doctest::Approx(1.0));
}

TEST_CASE("determinism, thread invariance and seed relabelling") {
    const Dataset d = gen_planted_anomaly(default_config(Scenario::planted_anomaly, 11));
    RecipeOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const auto a = cluster_benchmarks(d, "prior", {"A-0", "A-1"}, one);
    const auto b = cluster_benchmarks(d, "prior", {"A-0", "A-1"}, four);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].name == b.entries[i].name);
        CHECK(a.entries[i].verdict == b.entries[i].verdict);
        CHECK(a.entries[i].glrt->statistic == b.entries[i].glrt->statistic);
    }

    const Dataset s = gen_seed_dependent(default_config(Scenario::seed_dependent, 5));
    std::vector<std::string> relabelled;
    for (std::size_t r = 0; r < s.n_rows(); ++r) relabelled.push_back("s" + std::to_string(97 - std::stoi(s.column("seed").cell(r))));
    const auto x = check_seed_dependency(s);
    const auto y = check_seed_dependency(replace_column(s, Column::categorical("seed", relabelled)));
    CHECK(y.entries[0].glrt->statistic == doctest::Approx(x.entries[0].glrt->statistic).epsilon(1e-6));
    CHECK(y.implicated == x.implicated);
}

TEST_CASE("sanity workflow") {
    const auto v = sanity_workflow(gen_seed_dependent(default_config(Scenario::seed_dependent, 7)));
    CHECK(v.implicated == std::vector<std::string>{"A-1"});
    CHECK(entry(v, "benchmark").skipped);
    CHECK(entry(v, "budget").skipped);
    const auto b = sanity_workflow(gen_budget_dataset(default_config(Scenario::budget_simple, 7)));
    CHECK(entry(b, "budget: budget structure").verdict == "simple budget effect preferred");
}

TEST_CASE("thread resolution") {
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) >= 1);
}
