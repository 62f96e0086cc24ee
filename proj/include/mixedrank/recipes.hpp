#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixedrank/dataset.hpp"
#include "mixedrank/inference.hpp"
#include "mixedrank/lmm.hpp"

namespace mixedrank {

class RecipeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RecipeOptions {
    double alpha = 0.05;
    /// Seed check: implicate algorithms whose variance exceeds this multiple of the median.
    double seed_variance_ratio = 10.0;
    /// Worker threads for independent per-benchmark fits; 0 reads MIXEDRANK_THREADS
    /// and falls back to the hardware concurrency.
    std::size_t threads = 0;
    FitOptions fit;
};

/// One check inside a recipe.
struct CheckEntry {
    std::string name;
    std::vector<std::string> models;
    std::optional<GlrtResult> glrt;
    std::optional<PairwiseComparisons> comparisons;
    std::string verdict;
    std::vector<std::string> implicated;
    /// Named numeric evidence beyond the GLRT (variances, ranking scores).
    std::vector<std::pair<std::string, double>> details;
    /// True when the check could not run; `verdict` then holds the reason.
    bool skipped = false;
};

struct RecipeVerdict {
    std::string recipe;
    std::vector<CheckEntry> entries;
    /// Union of the implicated levels of all entries, in entry order.
    std::vector<std::string> implicated;
    std::vector<std::string> notes;
};

/// Summary of the model behind a comparison.
struct FitSummary {
    std::string formula;
    FitMethod method = FitMethod::ml;
    double loglik = 0.0;
    std::size_t n_params = 0;
    std::size_t n_obs = 0;
    double sigma2 = 0.0;
    bool converged = true;
    bool singular = false;
    std::vector<std::string> beta_labels;
    std::vector<double> beta;
    std::vector<RandomTermVariance> ranef_variances;
    std::vector<std::string> warnings;
};

FitSummary summarize(const FittedLmm& fit);

struct ComparisonReport {
    FitSummary fit;
    EmmTable emm;
    PairwiseComparisons tukey;
    /// GLRT that decided whether "(1|benchmark)" was added to the default formula.
    std::optional<GlrtResult> upgrade;
    std::optional<FriedmanResult> friedman;
    std::vector<std::string> notes;
};

/// Fit `formula` (by default "loss ~ algorithm", upgraded to include
/// "(1|benchmark)" when a benchmark column is present and a GLRT prefers it),
/// then compute EMMs and Tukey HSD over algorithms.
ComparisonReport autorank_replacement(const Dataset& data, const std::optional<std::string>& formula = {},
                                      const RecipeOptions& options = {});

/// Friedman-Nemenyi on the same data, blocking on benchmark when present and seed otherwise.
FriedmanResult friedman_baseline(const Dataset& data, double alpha = 0.05);

RecipeVerdict check_seed_dependency(const Dataset& data, const RecipeOptions& options = {});
RecipeVerdict check_benchmark_relevance(const Dataset& data, const RecipeOptions& options = {});
RecipeVerdict check_budget_effect(const Dataset& data, const RecipeOptions& options = {});

/// Per benchmark, test whether the two algorithms' gap depends on `metafeature`.
/// Benchmarks without the interaction are reported as anomalous.
RecipeVerdict cluster_benchmarks(const Dataset& data, const std::string& metafeature,
                                 const std::pair<std::string, std::string>& algo_pair,
                                 const RecipeOptions& options = {});

/// Single comparison over all rows with lo <= budget <= hi.
ComparisonReport anytime_analysis(const Dataset& data, std::pair<double, double> budget_window,
                                  const RecipeOptions& options = {});

/// Seed, benchmark and budget checks in that order. Checks whose column is
/// absent or whose preconditions fail are reported as skipped entries.
RecipeVerdict sanity_workflow(const Dataset& data, const RecipeOptions& options = {});

/// Thread count used for independent fits.
std::size_t resolve_threads(std::size_t requested);

}  // namespace mixedrank
