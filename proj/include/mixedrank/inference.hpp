#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixedrank/dataset.hpp"
#include "mixedrank/design.hpp"
#include "mixedrank/lmm.hpp"

namespace mixedrank {

class InferenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// p-values below this are reported as 0 with an underflow flag.
inline constexpr double kPValueFloor = 1e-15;

enum class Preferred { simple, complex };

struct GlrtResult {
    std::string simple_formula;
    std::string complex_formula;
    double loglik_simple = 0.0;
    double loglik_complex = 0.0;
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    bool p_underflow = false;
    double alpha = 0.05;
    Preferred preferred = Preferred::simple;
    bool boundary_warning = false;
};

/// 2 * (loglik_b - loglik_a) with no nesting checks.
double likelihood_ratio_statistic(const FittedLmm& a, const FittedLmm& b);

/// True when every fixed term of `simple` is a term of `complex` or is
/// marginal to one, every random term of `simple` is covered by a random term
/// of `complex` on the same grouping factor, and the responses match.
bool is_nested(const FormulaAst& simple, const FormulaAst& complex);

GlrtResult glrt(const FittedLmm& simple, const FittedLmm& complex, double alpha = 0.05);

enum class TukeyDfRule { per_level, residual };

struct EmmRow {
    std::string level;
    double mean = 0.0;
    double se = 0.0;
    double df = 0.0;
    std::size_t n_obs = 0;
};

struct EmmTable {
    std::string focus;
    std::vector<EmmRow> rows;
    std::size_t grid_size = 0;
    double residual_df = 0.0;
    /// Averaged design row per focus level (same order as `rows`).
    std::vector<Eigen::RowVectorXd> contrasts;
    /// Fixed-effect covariance the means were computed with; empty for hand-built tables.
    Eigen::MatrixXd vcov;

    std::size_t min_level_count() const;
};

struct EmmOptions {
    std::size_t grid_cap = 1000000;
};

EmmTable estimated_marginal_means(const FittedLmm& model, const DesignMatrices& dm,
                                  const std::string& focus, const EmmOptions& options = {});

struct PairComparison {
    std::size_t i = 0;
    std::size_t j = 0;
    double difference = 0.0;  // mean_i - mean_j
    double se = 0.0;
    double q = 0.0;
    double q_critical = 0.0;
    double critical_difference = 0.0;
    double p_value = 1.0;
    bool p_underflow = false;
    bool significant = false;
};

struct PairwiseComparisons {
    std::vector<std::string> levels;
    std::vector<double> means;
    std::vector<PairComparison> pairs;
    int k = 0;
    double df = 0.0;
    double alpha = 0.05;
    std::string method;

    const PairComparison& pair(std::size_t a, std::size_t b) const;
    double p_value(std::size_t a, std::size_t b) const { return pair(a, b).p_value; }
    bool significant(std::size_t a, std::size_t b) const { return pair(a, b).significant; }
};

struct TukeyOptions {
    double alpha = 0.05;
    TukeyDfRule df_rule = TukeyDfRule::per_level;
};

PairwiseComparisons tukey_hsd(const EmmTable& emm, const TukeyOptions& options = {});

struct FriedmanResult {
    PairwiseComparisons comparisons;  // means hold average ranks
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    bool p_underflow = false;
    std::size_t n_blocks = 0;
    double critical_difference = 0.0;
};

/// Friedman omnibus test with Nemenyi post-hoc comparisons. Lower loss ranks
/// first; duplicate (block, algorithm) cells are averaged.
FriedmanResult friedman_nemenyi(const Dataset& data, const std::string& algorithm,
                                const std::string& block, double alpha = 0.05);

}  // namespace mixedrank
