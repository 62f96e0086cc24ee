#pragma once

// Independent oracles and helpers shared by the unit and acceptance tests.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixedrank/dataset.hpp"

namespace support {

/// Minimal well-formedness check for the XML subset the renderer emits.
struct XmlCheck {
    bool ok = false;
    std::string error;
    std::string root;
    std::map<std::string, std::string> root_attributes;
    std::map<std::string, std::size_t> element_counts;
};
XmlCheck check_xml(const std::string& document);

/// Root is <svg> with version 1.1, the SVG namespace and a viewBox.
bool svg_structurally_valid(const std::string& document, std::string* why = nullptr);

/// A random formula accepted by the grammar, with random spacing.
std::string random_formula(std::mt19937_64& rng);

/// Least squares through the normal equations.
struct OlsOracle {
    Eigen::VectorXd beta;
    double sse = 0.0;
    double sigma2_ml = 0.0;
    double loglik = 0.0;
};
OlsOracle ols_normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Balanced one-way data with columns "loss" and "group" (g groups of m rows).
mixedrank::Dataset one_way_data(std::size_t g, std::size_t m, double sigma_between, double sigma_within,
                                std::uint64_t seed, double mean = 10.0);

/// ML deviance of "loss ~ 1 + (1|group)" on balanced data at relative scale theta,
/// from the eigen-decomposition of the compound-symmetric covariance.
double one_way_deviance(const mixedrank::Dataset& data, double theta);

struct OneWayOracle {
    double theta = 0.0;
    double deviance = 0.0;
    double sigma2 = 0.0;
    double sigma2_between = 0.0;
};
/// Grid search over theta in [0, theta_max], refined by golden section to 1e-9.
OneWayOracle one_way_grid_oracle(const mixedrank::Dataset& data, double theta_max = 20.0);

/// Closed-form balanced-ANOVA ML estimates: within = SSW / (n - g),
/// between = (SSB / g - within) / m, truncated at 0.
OneWayOracle one_way_anova_ml(const mixedrank::Dataset& data);

/// Monte-Carlo CDF of the studentized range at each q.
std::vector<double> mc_studentized_range_cdf(int k, double df, const std::vector<double>& qs, std::size_t samples,
                                             std::uint64_t seed);

}  // namespace support
