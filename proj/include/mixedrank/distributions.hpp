#pragma once

#include <limits>
#include <stdexcept>

namespace mixedrank {

inline constexpr double kInfiniteDf = std::numeric_limits<double>::infinity();

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Standard normal CDF.
double normal_cdf(double x);

/// Upper tail P(X > x) of a chi-square variable with `df` degrees of freedom.
double chi_square_sf(double x, double df);

/// P(Q <= q) for the studentized range of `k` standard normals scaled by an
/// independent chi_df / sqrt(df) variable; `df` may be kInfiniteDf.
double studentized_range_cdf(double q, int k, double df);

/// Smallest q with studentized_range_cdf(q, k, df) >= p, by bisection to 1e-8.
double studentized_range_quantile(double p, int k, double df);

}  // namespace mixedrank
