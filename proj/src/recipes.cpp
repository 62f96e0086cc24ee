#include "mixedrank/recipes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <thread>

#include "mixedrank/design.hpp"
#include "mixedrank/formula.hpp"
#include "mixedrank/numfmt.hpp"

namespace mixedrank {

namespace {

struct Fitted {
    DesignMatrices dm;
    FittedLmm fit;
};

Fitted fit_formula(const std::string& formula, const Dataset& data, const RecipeOptions& options) {
    Fitted f;
    f.dm = build_design(parse_formula(formula), data);
    f.fit = fit_lmm(f.dm, FitMethod::ml, options.fit);
    return f;
}

std::string p_text(double p, bool underflow) { return underflow ? "<1e-15" : shortest_repr(p); }

std::string evidence(const GlrtResult& g) {
    return "Chi-Square " + fixed_repr(g.statistic, 3) + ", df " + std::to_string(g.df) + ", p " +
           p_text(g.p_value, g.p_underflow);
}

std::string quoted_list(const std::vector<std::string>& items) {
    std::string s = "[";
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", '" : "'") + items[i] + "'";
    return s + "]";
}

bool preferred_complex(const GlrtResult& g) { return g.preferred == Preferred::complex; }

std::size_t level_count(const Dataset& data, const std::string& name) {
    return data.column(name).as_categorical().levels().size();
}

void require_column(const Dataset& data, const std::string& name) {
    if (!data.has(name)) throw RecipeError("the data has no '" + name + "' column");
}

void require_algorithms(const Dataset& data) {
    require_column(data, "loss");
    require_column(data, "algorithm");
    if (level_count(data, "algorithm") < 2) throw RecipeError("at least 2 algorithms are required");
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool constant(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

/// Run `task(i)` for i in [0, n) on up to `threads` workers; results keep index order.
template <typename T>
std::vector<T> parallel_map(std::size_t n, std::size_t threads, const std::function<T(std::size_t)>& task) {
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min(threads, n);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

CheckEntry glrt_entry(std::string name, const Fitted& simple, const Fitted& complex, double alpha) {
    CheckEntry e;
    e.name = std::move(name);
    e.glrt = glrt(simple.fit, complex.fit, alpha);
    e.models = {e.glrt->simple_formula, e.glrt->complex_formula};
    return e;
}

void collect_implicated(RecipeVerdict& v) {
    for (const auto& e : v.entries)
        for (const auto& i : e.implicated)
            if (std::find(v.implicated.begin(), v.implicated.end(), i) == v.implicated.end())
                v.implicated.push_back(i);
}

PairwiseComparisons tukey_with_fallback(const EmmTable& emm, double alpha, std::vector<std::string>& notes) {
    TukeyOptions t;
    t.alpha = alpha;
    if (static_cast<double>(emm.min_level_count()) - static_cast<double>(emm.rows.size()) <= 0.0) {
        t.df_rule = TukeyDfRule::residual;
        notes.push_back("too few observations per level for df = N_a - k; using residual df");
    }
    return tukey_hsd(emm, t);
}

}  // namespace

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MIXEDRANK_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

FitSummary summarize(const FittedLmm& fit) {
    FitSummary s;
    s.formula = format_formula(fit.formula);
    s.method = fit.method;
    s.loglik = fit.loglik;
    s.n_params = fit.n_params;
    s.n_obs = fit.n_obs;
    s.sigma2 = fit.sigma2;
    s.converged = fit.converged;
    s.singular = fit.singular;
    s.beta_labels = fit.beta_labels;
    s.beta.assign(fit.beta.data(), fit.beta.data() + fit.beta.size());
    s.ranef_variances = fit.ranef_variances;
    s.warnings = fit.warnings;
    return s;
}

ComparisonReport autorank_replacement(const Dataset& data, const std::optional<std::string>& formula,
                                      const RecipeOptions& options) {
    require_algorithms(data);
    ComparisonReport report;
    Fitted chosen;
    if (formula) {
        chosen = fit_formula(*formula, data, options);
    } else {
        chosen = fit_formula("loss ~ algorithm", data, options);
        if (data.has("benchmark") && level_count(data, "benchmark") >= 2) {
            Fitted upgraded = fit_formula("loss ~ algorithm + (1|benchmark)", data, options);
            report.upgrade = glrt(chosen.fit, upgraded.fit, options.alpha);
            if (preferred_complex(*report.upgrade)) {
                chosen = std::move(upgraded);
                report.notes.push_back("(1|benchmark) added: " + evidence(*report.upgrade));
            } else {
                report.notes.push_back("(1|benchmark) not added: " + evidence(*report.upgrade));
            }
        }
    }
    report.fit = summarize(chosen.fit);
    report.emm = estimated_marginal_means(chosen.fit, chosen.dm, "algorithm");
    report.tukey = tukey_with_fallback(report.emm, options.alpha, report.notes);
    std::string means = "EMM means:";
    for (const auto& r : report.emm.rows) means += " " + r.level + "=" + fixed_repr(r.mean, 4);
    report.notes.push_back(means);
    return report;
}

FriedmanResult friedman_baseline(const Dataset& data, double alpha) {
    require_algorithms(data);
    if (data.has("benchmark") && level_count(data, "benchmark") >= 2)
        return friedman_nemenyi(data, "algorithm", "benchmark", alpha);
    if (data.has("seed")) return friedman_nemenyi(data, "algorithm", "seed", alpha);
    throw RecipeError("the Friedman baseline needs a benchmark or seed column to block on");
}

RecipeVerdict check_seed_dependency(const Dataset& data, const RecipeOptions& options) {
    require_algorithms(data);
    require_column(data, "seed");
    if (level_count(data, "seed") < 2) throw RecipeError("the seed check needs at least 2 seed levels");

    RecipeVerdict v;
    v.recipe = "seed_dependency";
    const Fitted simple = fit_formula("loss ~ algorithm", data, options);
    const Fitted complex = fit_formula("loss ~ algorithm + (0 + algorithm||seed)", data, options);
    CheckEntry e = glrt_entry("seed", simple, complex, options.alpha);

    const auto& ranef = complex.fit.ranef_variances.front();
    const std::vector<double> var = ranef.variances();
    const std::string prefix = "algorithm[";
    std::vector<std::string> names;
    for (const auto& label : ranef.inner_labels) {
        std::string name = label;
        if (name.rfind(prefix, 0) == 0) name = name.substr(prefix.size(), name.size() - prefix.size() - 1);
        names.push_back(name);
        e.details.emplace_back("variance[" + name + "]", var[names.size() - 1]);
    }
    const double med = median(var);
    e.details.emplace_back("median variance", med);
    e.details.emplace_back("implication ratio", options.seed_variance_ratio);

    if (preferred_complex(*e.glrt)) {
        // Components at the singular boundary never count as large.
        const double floor = 1e-12 * complex.fit.sigma2;
        for (std::size_t i = 0; i < var.size(); ++i)
            if (var[i] > options.seed_variance_ratio * med && var[i] > floor) e.implicated.push_back(names[i]);
        e.verdict = "Seed is a significant effect (" + evidence(*e.glrt) +
                    "), likely influenced algorithms: " + quoted_list(e.implicated);
    } else {
        e.verdict = "Seed is not a significant effect (" + evidence(*e.glrt) + ")";
    }

    const Column seed = data.column("seed").as_categorical();
    const auto& alg = data.column("algorithm").codes();
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> cells;
    for (std::size_t r = 0; r < data.n_rows(); ++r) ++cells[{alg[r], seed.codes()[r]}];
    if (std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.second == 1; })) {
        v.notes.push_back("one observation per (algorithm, seed) cell: per-seed variances cannot be "
                          "separated from the residual variance");
    }
    v.entries.push_back(std::move(e));
    collect_implicated(v);
    return v;
}

RecipeVerdict check_benchmark_relevance(const Dataset& data, const RecipeOptions& options) {
    require_algorithms(data);
    require_column(data, "benchmark");
    RecipeVerdict v;
    v.recipe = "benchmark_relevance";
    const auto levels = data.column("benchmark").as_categorical().levels();
    std::vector<Dataset> slices;
    for (const auto& b : levels) {
        slices.push_back(data.filter_levels("benchmark", {b}));
        if (level_count(slices.back(), "algorithm") < 2)
            throw RecipeError("benchmark '" + b + "' has a single algorithm observed");
    }

    std::function<CheckEntry(std::size_t)> task = [&](std::size_t i) {
        const Dataset& slice = slices[i];
        const std::string name = "benchmark " + levels[i];
        if (constant(slice.column("loss").values())) {
            CheckEntry e;
            e.name = name;
            GlrtResult g;
            g.simple_formula = "loss ~ 1";
            g.complex_formula = "loss ~ algorithm";
            g.loglik_simple = g.loglik_complex = std::numeric_limits<double>::quiet_NaN();
            g.df = static_cast<int>(level_count(slice, "algorithm")) - 1;
            g.alpha = options.alpha;
            e.models = {g.simple_formula, g.complex_formula};
            e.glrt = g;
            e.verdict = "uninformative: constant loss (" + evidence(g) + ")";
            e.implicated.push_back(levels[i]);
            return e;
        }
        CheckEntry e = glrt_entry(name, fit_formula("loss ~ 1", slice, options),
                                  fit_formula("loss ~ algorithm", slice, options), options.alpha);
        if (preferred_complex(*e.glrt)) {
            e.verdict = "informative (" + evidence(*e.glrt) + ")";
        } else {
            e.verdict = "uninformative (" + evidence(*e.glrt) + ")";
            e.implicated.push_back(levels[i]);
        }
        return e;
    };
    v.entries = parallel_map(slices.size(), resolve_threads(options.threads), task);

    CheckEntry rank;
    rank.name = "benchmark ranking";
    if (levels.size() < 2) {
        rank.skipped = true;
        rank.verdict = "ranking needs at least 2 benchmarks";
    } else {
        const std::string formula = "loss ~ benchmark + (0 + benchmark||algorithm)";
        const Fitted f = fit_formula(formula, data, options);
        rank.models = {format_formula(f.fit.formula)};
        const auto var = f.fit.ranef_variances.front().variances();
        std::vector<std::size_t> order(levels.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return var[a] > var[b]; });
        rank.verdict = "relevance ranking (largest algorithm variance first):";
        for (std::size_t i : order) {
            rank.details.emplace_back("variance[" + levels[i] + "]", var[i]);
            rank.verdict += " " + levels[i];
        }
    }
    v.entries.push_back(std::move(rank));
    collect_implicated(v);
    return v;
}

RecipeVerdict check_budget_effect(const Dataset& data, const RecipeOptions& options) {
    require_algorithms(data);
    require_column(data, "budget");
    const Column& budget = data.column("budget");
    if (!budget.is_numeric()) throw RecipeError("the budget column must be numeric");
    if (constant(budget.values())) throw RecipeError("the budget column is constant");

    RecipeVerdict v;
    v.recipe = "budget_effect";
    std::string random;
    if (data.has("benchmark") && level_count(data, "benchmark") >= 2) {
        random = " + (1|benchmark)";
    } else {
        v.notes.push_back("fewer than 2 benchmarks: (1|benchmark) omitted");
    }
    const Fitted simple = fit_formula("loss ~ algorithm" + random, data, options);
    const Fitted with_budget = fit_formula("loss ~ algorithm + budget" + random, data, options);
    const Fitted interaction = fit_formula("loss ~ algorithm + algorithm:budget" + random, data, options);

    CheckEntry sb = glrt_entry("simple vs budget", simple, with_budget, options.alpha);
    CheckEntry si = glrt_entry("simple vs interaction", simple, interaction, options.alpha);
    CheckEntry bi = glrt_entry("budget vs interaction", with_budget, interaction, options.alpha);
    const bool budget_sig = preferred_complex(*sb.glrt);
    const bool inter_sig = preferred_complex(*si.glrt);
    sb.verdict = std::string(budget_sig ? "budget effect significant" : "budget effect not significant") +
                 " (" + evidence(*sb.glrt) + ")";
    si.verdict = std::string(inter_sig ? "interaction effect significant" : "interaction effect not significant") +
                 " (" + evidence(*si.glrt) + ")";
    bi.verdict = std::string(preferred_complex(*bi.glrt) ? "interaction improves on the budget effect"
                                                         : "interaction does not improve on the budget effect") +
                 " (" + evidence(*bi.glrt) + ")";

    CheckEntry winner;
    winner.name = "budget structure";
    winner.models = {sb.glrt->simple_formula, sb.glrt->complex_formula, si.glrt->complex_formula};
    // Ties go to the model with fewer parameters.
    if (inter_sig && (!budget_sig || preferred_complex(*bi.glrt))) {
        winner.verdict = "interaction effect preferred";
        winner.implicated.push_back("algorithm:budget");
    } else if (budget_sig) {
        winner.verdict = "simple budget effect preferred";
        winner.implicated.push_back("budget");
    } else {
        winner.verdict = "no budget effect: simple model preferred";
    }
    v.entries = {std::move(sb), std::move(si), std::move(bi), std::move(winner)};
    collect_implicated(v);
    return v;
}

RecipeVerdict cluster_benchmarks(const Dataset& data, const std::string& metafeature,
                                 const std::pair<std::string, std::string>& algo_pair,
                                 const RecipeOptions& options) {
    require_column(data, "loss");
    require_column(data, "algorithm");
    require_column(data, "benchmark");
    require_column(data, metafeature);
    if (metafeature == "algorithm" || metafeature == "benchmark" || metafeature == "loss")
        throw RecipeError("metafeature must be a separate column");
    if (algo_pair.first == algo_pair.second) throw RecipeError("the algorithm pair must name two algorithms");
    const auto& algs = data.column("algorithm").levels();
    for (const auto& a : {algo_pair.first, algo_pair.second})
        if (std::find(algs.begin(), algs.end(), a) == algs.end())
            throw RecipeError("algorithm '" + a + "' is not in the data");

    const Dataset pair = data.filter_levels("algorithm", {algo_pair.first, algo_pair.second});
    const auto levels = pair.column("benchmark").levels();
    RecipeVerdict v;
    v.recipe = "cluster_benchmarks";

    std::function<CheckEntry(std::size_t)> task = [&](std::size_t i) {
        const Dataset slice = pair.filter_levels("benchmark", {levels[i]});
        CheckEntry e;
        e.name = "benchmark " + levels[i];
        const Column m = slice.column(metafeature).as_categorical();
        if (m.levels().size() < 2) {
            e.skipped = true;
            e.verdict = "skipped: '" + metafeature + "' has fewer than 2 levels on this benchmark";
            return e;
        }
        const auto& a = slice.column("algorithm").codes();
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> cells;
        for (std::size_t r = 0; r < slice.n_rows(); ++r) ++cells[{a[r], m.codes()[r]}];
        if (slice.column("algorithm").levels().size() < 2 || cells.size() < 2 * m.levels().size()) {
            e.skipped = true;
            e.verdict = "skipped: both algorithms are not observed at every '" + metafeature + "' level";
            return e;
        }
        std::string random;
        if (slice.has("seed") && level_count(slice, "seed") >= 2) random = " + (1|seed)";
        const std::string base = "loss ~ algorithm + " + metafeature;
        e = glrt_entry(e.name, fit_formula(base + random, slice, options),
                       fit_formula(base + " + algorithm:" + metafeature + random, slice, options), options.alpha);
        if (preferred_complex(*e.glrt)) {
            e.verdict = "differentiating (" + evidence(*e.glrt) + ")";
        } else {
            e.verdict = "anomalous: no algorithm:" + metafeature + " interaction (" + evidence(*e.glrt) + ")";
            e.implicated.push_back(levels[i]);
        }
        return e;
    };
    v.entries = parallel_map(levels.size(), resolve_threads(options.threads), task);
    for (const auto& e : v.entries)
        if (e.skipped) v.notes.push_back(e.name + " " + e.verdict);
    collect_implicated(v);
    return v;
}

ComparisonReport anytime_analysis(const Dataset& data, std::pair<double, double> budget_window,
                                  const RecipeOptions& options) {
    require_algorithms(data);
    require_column(data, "budget");
    const Column& budget = data.column("budget");
    if (!budget.is_numeric()) throw RecipeError("the budget column must be numeric");
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
        const double b = budget.values()[r];
        if (b >= budget_window.first && b <= budget_window.second) rows.push_back(r);
    }
    if (rows.empty()) {
        throw RecipeError("empty budget window [" + shortest_repr(budget_window.first) + ", " +
                          shortest_repr(budget_window.second) + "]");
    }
    const Dataset window = data.subset(rows);
    if (level_count(window, "algorithm") < 2) throw RecipeError("at least 2 algorithms are required in the window");

    std::string formula = "loss ~ algorithm";
    std::vector<std::string> notes;
    if (level_count(window, "budget") >= 2) {
        formula += " + (1|budget)";
    } else {
        notes.push_back("single budget level in the window: (1|budget) omitted");
    }
    if (window.has("benchmark") && level_count(window, "benchmark") >= 2) {
        formula += " + (1|benchmark)";
    } else {
        notes.push_back("fewer than 2 benchmarks in the window: (1|benchmark) omitted");
    }
    ComparisonReport report = autorank_replacement(window, formula, options);
    report.notes.insert(report.notes.begin(), notes.begin(), notes.end());
    report.notes.insert(report.notes.begin(), "budget window [" + shortest_repr(budget_window.first) + ", " +
                                                  shortest_repr(budget_window.second) + "], " +
                                                  std::to_string(rows.size()) + " rows");
    return report;
}

RecipeVerdict sanity_workflow(const Dataset& data, const RecipeOptions& options) {
    RecipeVerdict v;
    v.recipe = "sanity";
    struct Step {
        const char* name;
        const char* column;
        RecipeVerdict (*run)(const Dataset&, const RecipeOptions&);
    };
    const Step steps[] = {{"seed", "seed", check_seed_dependency},
                          {"benchmark", "benchmark", check_benchmark_relevance},
                          {"budget", "budget", check_budget_effect}};
    for (const auto& step : steps) {
        CheckEntry skip;
        skip.name = step.name;
        skip.skipped = true;
        if (!data.has(step.column)) {
            skip.verdict = std::string("skipped: no '") + step.column + "' column";
            v.entries.push_back(std::move(skip));
            continue;
        }
        try {
            RecipeVerdict sub = step.run(data, options);
            for (auto& e : sub.entries) {
                if (e.name != step.name) e.name = std::string(step.name) + ": " + e.name;
                v.entries.push_back(std::move(e));
            }
            for (auto& n : sub.notes) v.notes.push_back(std::string(step.name) + ": " + n);
        } catch (const std::exception& ex) {
            skip.verdict = std::string("skipped: ") + ex.what();
            v.entries.push_back(std::move(skip));
        }
    }
    collect_implicated(v);
    return v;
}

}  // namespace mixedrank
