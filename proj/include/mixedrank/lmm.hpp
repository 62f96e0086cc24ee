#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixedrank/design.hpp"

namespace mixedrank {

enum class FitMethod { ml, reml };

std::string to_string(FitMethod m);

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FitOptions {
    std::size_t max_evals = 10000;
    double tol = 1e-8;
};

/// Estimated covariance of one random term, sigma^2 * T T' for its relative
/// Cholesky factor T.
struct RandomTermVariance {
    std::string term;
    std::string group;
    std::vector<std::string> inner_labels;
    Eigen::MatrixXd covariance;

    /// Diagonal entries, one variance per inner column.
    std::vector<double> variances() const;
};

struct FittedLmm {
    FormulaAst formula;
    FitMethod method = FitMethod::ml;
    std::vector<std::string> beta_labels;
    Eigen::VectorXd beta;
    /// Concatenated lower-triangular Cholesky parameters, column-major per term
    /// (diagonal terms store only the diagonal).
    std::vector<double> theta;
    double sigma2 = 0.0;
    double loglik = 0.0;
    double deviance = 0.0;
    std::size_t n_params = 0;
    std::size_t n_obs = 0;
    std::uint64_t response_checksum = 0;
    Eigen::MatrixXd vcov_beta;
    std::vector<RandomTermVariance> ranef_variances;
    Eigen::VectorXd blups;
    bool converged = true;
    bool singular = false;
    std::size_t evaluations = 0;
    std::vector<std::string> warnings;

    std::size_t n_fixed() const noexcept { return static_cast<std::size_t>(beta.size()); }
    /// Residual degrees of freedom n - p.
    double residual_df() const noexcept {
        return static_cast<double>(n_obs) - static_cast<double>(beta.size());
    }
};

/// Lower bounds for theta: 0 on diagonal entries, -infinity elsewhere.
std::vector<double> theta_lower_bounds(const DesignMatrices& dm);
/// Unit diagonal, zero off-diagonal.
std::vector<double> theta_start(const DesignMatrices& dm);

/// Profiled deviance at `theta`. Throws FitError when the value is not finite.
double profiled_deviance(const std::vector<double>& theta, const DesignMatrices& dm,
                         FitMethod method = FitMethod::ml);

/// Maximum (or restricted maximum) likelihood fit. Models without random
/// terms return the exact least-squares solution.
FittedLmm fit_lmm(const DesignMatrices& dm, FitMethod method = FitMethod::ml,
                  const FitOptions& options = {});

}  // namespace mixedrank
