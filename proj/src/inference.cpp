#include "mixedrank/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mixedrank/distributions.hpp"

namespace mixedrank {

namespace {

bool random_term_covered(const RandomTerm& s, const RandomTerm& c) {
    if (s.group != c.group) return false;
    if (s.inner_intercept && !c.inner_intercept) return false;
    for (const auto& v : s.inner_variables) {
        if (std::find(c.inner_variables.begin(), c.inner_variables.end(), v) ==
            c.inner_variables.end())
            return false;
    }
    const std::size_t s_width = s.inner_variables.size() + (s.inner_intercept ? 1 : 0);
    return s.covariance == c.covariance || c.covariance == CovarianceStructure::unstructured ||
           s_width == 1;
}

bool same_fixed_structure(const FormulaAst& a, const FormulaAst& b) {
    if (a.has_intercept != b.has_intercept || a.fixed_terms.size() != b.fixed_terms.size()) return false;
    return std::all_of(a.fixed_terms.begin(), a.fixed_terms.end(), [&](const FixedTerm& t) {
        return std::any_of(b.fixed_terms.begin(), b.fixed_terms.end(),
                           [&](const FixedTerm& u) { return t.same_term(u); });
    });
}

/// p-value with the reporting floor applied.
std::pair<double, bool> floored(double p) {
    p = std::clamp(p, 0.0, 1.0);
    if (p < kPValueFloor) return {0.0, true};
    return {p, false};
}

}  // namespace

double likelihood_ratio_statistic(const FittedLmm& a, const FittedLmm& b) {
    return 2.0 * (b.loglik - a.loglik);
}

bool is_nested(const FormulaAst& simple, const FormulaAst& complex) {
    if (simple.response != complex.response) return false;
    if (simple.has_intercept && !complex.has_intercept) return false;
    for (const auto& t : simple.fixed_terms) {
        const bool covered = std::any_of(complex.fixed_terms.begin(), complex.fixed_terms.end(),
                                         [&](const FixedTerm& c) { return t.contained_in(c); });
        if (!covered) return false;
    }
    for (const auto& r : simple.random_terms) {
        const bool covered =
            std::any_of(complex.random_terms.begin(), complex.random_terms.end(),
                        [&](const RandomTerm& c) { return random_term_covered(r, c); });
        if (!covered) return false;
    }
    return true;
}

GlrtResult glrt(const FittedLmm& simple, const FittedLmm& complex, double alpha) {
    if (simple.n_obs != complex.n_obs || simple.response_checksum != complex.response_checksum) {
        throw InferenceError("GLRT needs both models fitted on the same response data");
    }
    if (simple.method != complex.method) {
        throw InferenceError("GLRT cannot compare an ML fit with a REML fit");
    }
    if (simple.method == FitMethod::reml && !same_fixed_structure(simple.formula, complex.formula)) {
        throw InferenceError("REML fits with differing fixed effects are not comparable; refit with ML");
    }
    if (!is_nested(simple.formula, complex.formula)) {
        throw InferenceError("models are not nested: '" + format_formula(simple.formula) +
                             "' is not contained in '" + format_formula(complex.formula) + "'");
    }
    if (complex.n_params <= simple.n_params) {
        throw InferenceError("the complex model must have more parameters than the simple one");
    }
    GlrtResult r;
    r.simple_formula = format_formula(simple.formula);
    r.complex_formula = format_formula(complex.formula);
    r.loglik_simple = simple.loglik;
    r.loglik_complex = complex.loglik;
    r.statistic = likelihood_ratio_statistic(simple, complex);
    r.df = static_cast<int>(complex.n_params - simple.n_params);
    r.alpha = alpha;
    std::tie(r.p_value, r.p_underflow) = floored(chi_square_sf(std::max(r.statistic, 0.0), r.df));
    r.preferred = (r.p_value < alpha && complex.loglik > simple.loglik) ? Preferred::complex
                                                                         : Preferred::simple;
    r.boundary_warning = complex.theta.size() > simple.theta.size() && complex.singular;
    return r;
}

std::size_t EmmTable::min_level_count() const {
    std::size_t m = rows.empty() ? 0 : rows.front().n_obs;
    for (const auto& r : rows) m = std::min(m, r.n_obs);
    return m;
}

EmmTable estimated_marginal_means(const FittedLmm& model, const DesignMatrices& dm,
                                  const std::string& focus, const EmmOptions& options) {
    const FixedEncoder& enc = dm.encoder;
    std::size_t focus_index = 0;
    try {
        focus_index = enc.variable_index(focus);
    } catch (const DesignError&) {
        throw InferenceError("focus '" + focus + "' is not a fixed effect of the model");
    }
    const auto& fv = enc.variables[focus_index];
    if (fv.numeric) throw InferenceError("focus '" + focus + "' must be categorical");
    if (static_cast<std::size_t>(model.beta.size()) != enc.n_columns) {
        throw InferenceError("model and design matrices disagree on the fixed-effect columns");
    }

    std::vector<std::size_t> radix;
    std::vector<std::size_t> cat_vars;
    std::size_t grid = 1;
    for (std::size_t v = 0; v < enc.variables.size(); ++v) {
        if (enc.variables[v].numeric) continue;
        cat_vars.push_back(v);
        radix.push_back(enc.variables[v].levels.size());
        grid *= enc.variables[v].levels.size();
        if (grid > options.grid_cap) {
            throw InferenceError("EMM grid exceeds the cap of " + std::to_string(options.grid_cap) +
                                 " cells");
        }
    }

    const std::size_t n_levels = fv.levels.size();
    const auto p = static_cast<Eigen::Index>(enc.n_columns);
    std::vector<Eigen::RowVectorXd> sums(n_levels, Eigen::RowVectorXd::Zero(p));
    std::vector<std::size_t> counts(n_levels, 0);
    std::vector<double> values(enc.variables.size(), 0.0);
    for (std::size_t v = 0; v < enc.variables.size(); ++v)
        if (enc.variables[v].numeric) values[v] = enc.variables[v].mean;
    std::vector<std::size_t> digits(cat_vars.size(), 0);
    Eigen::RowVectorXd row(p);
    for (std::size_t cell = 0; cell < grid; ++cell) {
        for (std::size_t d = 0; d < cat_vars.size(); ++d) values[cat_vars[d]] = static_cast<double>(digits[d]);
        enc.encode(values, row);
        const auto level = static_cast<std::size_t>(values[focus_index]);
        sums[level] += row;
        ++counts[level];
        for (std::size_t d = 0; d < digits.size(); ++d) {
            if (++digits[d] < radix[d]) break;
            digits[d] = 0;
        }
    }

    EmmTable table;
    table.focus = focus;
    table.grid_size = grid;
    table.residual_df = model.residual_df();
    table.vcov = model.vcov_beta;
    std::size_t min_count = *std::min_element(fv.level_counts.begin(), fv.level_counts.end());
    const double per_level_df = static_cast<double>(min_count) - static_cast<double>(n_levels);
    for (std::size_t l = 0; l < n_levels; ++l) {
        Eigen::RowVectorXd c = sums[l] / static_cast<double>(counts[l]);
        EmmRow r;
        r.level = fv.levels[l];
        r.mean = c.dot(model.beta);
        r.se = std::sqrt(std::max(0.0, (c * model.vcov_beta * c.transpose())(0, 0)));
        r.df = per_level_df;
        r.n_obs = fv.level_counts[l];
        table.rows.push_back(r);
        table.contrasts.push_back(std::move(c));
    }
    return table;
}

const PairComparison& PairwiseComparisons::pair(std::size_t a, std::size_t b) const {
    for (const auto& p : pairs)
        if ((p.i == a && p.j == b) || (p.i == b && p.j == a)) return p;
    throw InferenceError("no comparison for the requested pair");
}

PairwiseComparisons tukey_hsd(const EmmTable& emm, const TukeyOptions& options) {
    const std::size_t k = emm.rows.size();
    if (k < 2) throw InferenceError("Tukey HSD needs at least two levels");
    double df = 0.0;
    if (options.df_rule == TukeyDfRule::per_level) {
        df = static_cast<double>(emm.min_level_count()) - static_cast<double>(k);
        if (df <= 0.0) {
            throw InferenceError("per-level Tukey df = N_a - k is " + std::to_string(df) +
                                 "; too few observations per level, use the residual-df rule");
        }
    } else {
        df = emm.residual_df;
        if (df <= 0.0) throw InferenceError("residual df must be positive for Tukey HSD");
    }
    df = std::max(df, 1.0);

    PairwiseComparisons out;
    out.k = static_cast<int>(k);
    out.df = df;
    out.alpha = options.alpha;
    out.method = "tukey";
    for (const auto& r : emm.rows) {
        out.levels.push_back(r.level);
        out.means.push_back(r.mean);
    }
    const double q_crit = studentized_range_quantile(1.0 - options.alpha, static_cast<int>(k), df);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            PairComparison pc;
            pc.i = i;
            pc.j = j;
            pc.difference = emm.rows[i].mean - emm.rows[j].mean;
            // Common standard error of the pair on the studentized-range scale: the
            // contrast SE over sqrt(2), which is the pooled SE for uncorrelated means.
            if (emm.vcov.size() > 0 && emm.contrasts.size() == k) {
                const Eigen::RowVectorXd c = emm.contrasts[i] - emm.contrasts[j];
                pc.se = std::sqrt(std::max(0.0, 0.5 * (c * emm.vcov * c.transpose())(0, 0)));
            } else {
                pc.se = std::sqrt(0.5 * (emm.rows[i].se * emm.rows[i].se + emm.rows[j].se * emm.rows[j].se));
            }
            if (!(pc.se > 0.0)) throw InferenceError("EMM standard errors must be positive");
            pc.q = std::abs(pc.difference) / pc.se;
            pc.q_critical = q_crit;
            pc.critical_difference = q_crit * pc.se;
            const double cdf = studentized_range_cdf(pc.q, static_cast<int>(k), df);
            std::tie(pc.p_value, pc.p_underflow) = floored(1.0 - cdf);
            pc.significant = pc.p_value < options.alpha;
            out.pairs.push_back(pc);
        }
    }
    return out;
}

FriedmanResult friedman_nemenyi(const Dataset& data, const std::string& algorithm,
                                const std::string& block, double alpha) {
    const Column alg = data.column(algorithm).as_categorical();
    const Column blk = data.column(block).as_categorical();
    const auto loss = data.column("loss").values();
    const std::size_t k = alg.levels().size();
    const std::size_t nb = blk.levels().size();
    if (k < 2) throw InferenceError("Friedman test needs at least two algorithms");

    std::vector<double> sum(k * nb, 0.0);
    std::vector<std::size_t> count(k * nb, 0);
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
        const std::size_t cell = blk.codes()[r] * k + alg.codes()[r];
        sum[cell] += loss[r];
        ++count[cell];
    }
    for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t a = 0; a < k; ++a) {
            if (count[b * k + a] == 0) {
                throw InferenceError("incomplete block design: algorithm '" + alg.levels()[a] +
                                     "' missing in block '" + blk.levels()[b] + "'");
            }
        }
    }

    std::vector<double> rank_sum(k, 0.0);
    std::vector<std::size_t> order(k);
    for (std::size_t b = 0; b < nb; ++b) {
        std::vector<double> means(k);
        for (std::size_t a = 0; a < k; ++a) means[a] = sum[b * k + a] / static_cast<double>(count[b * k + a]);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return means[x] < means[y]; });
        for (std::size_t s = 0; s < k;) {
            std::size_t e = s;
            while (e + 1 < k && means[order[e + 1]] == means[order[s]]) ++e;
            const double avg = 0.5 * static_cast<double>(s + e) + 1.0;
            for (std::size_t t = s; t <= e; ++t) rank_sum[order[t]] += avg;
            s = e + 1;
        }
    }

    FriedmanResult res;
    res.n_blocks = nb;
    const auto kd = static_cast<double>(k);
    const auto nd = static_cast<double>(nb);
    std::vector<double> avg_rank(k);
    double sq = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        avg_rank[a] = rank_sum[a] / nd;
        sq += avg_rank[a] * avg_rank[a];
    }
    res.statistic = std::max(0.0, 12.0 * nd / (kd * (kd + 1.0)) * (sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0));
    res.df = static_cast<int>(k) - 1;
    std::tie(res.p_value, res.p_underflow) = floored(chi_square_sf(res.statistic, res.df));

    auto& cmp = res.comparisons;
    cmp.levels = alg.levels();
    cmp.means = avg_rank;
    cmp.k = static_cast<int>(k);
    cmp.df = kInfiniteDf;
    cmp.alpha = alpha;
    cmp.method = "nemenyi";
    const double se = std::sqrt(kd * (kd + 1.0) / (12.0 * nd));
    const double q_crit = studentized_range_quantile(1.0 - alpha, static_cast<int>(k), kInfiniteDf);
    res.critical_difference = q_crit * se;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            PairComparison pc;
            pc.i = i;
            pc.j = j;
            pc.difference = avg_rank[i] - avg_rank[j];
            pc.se = se;
            pc.q = std::abs(pc.difference) / se;
            pc.q_critical = q_crit;
            pc.critical_difference = res.critical_difference;
            std::tie(pc.p_value, pc.p_underflow) =
                floored(1.0 - studentized_range_cdf(pc.q, static_cast<int>(k), kInfiniteDf));
            pc.significant = std::abs(pc.difference) > res.critical_difference;
            cmp.pairs.push_back(pc);
        }
    }
    return res;
}

}  // namespace mixedrank
