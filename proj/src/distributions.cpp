#include "mixedrank/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

namespace mixedrank {

namespace {

constexpr int kNodes = 16;

struct GaussLegendre {
    std::array<double, kNodes> x{};
    std::array<double, kNodes> w{};

    GaussLegendre() {
        // Newton iteration on P_n from the Chebyshev initial guesses.
        for (int i = 0; i < kNodes; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (kNodes + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 1; j <= kNodes; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
                }
                dp = kNodes * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            x[static_cast<std::size_t>(i)] = z;
            w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

const GaussLegendre& gauss_legendre() {
    static const GaussLegendre rule;
    return rule;
}

/// Composite Gauss-Legendre over [a, b] split into `panels` equal pieces.
template <typename F>
double integrate(F&& f, double a, double b, int panels) {
    const auto& gl = gauss_legendre();
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        double s = 0.0;
        for (int i = 0; i < kNodes; ++i) {
            s += gl.w[static_cast<std::size_t>(i)] * f(mid + 0.5 * h * gl.x[static_cast<std::size_t>(i)]);
        }
        total += 0.5 * h * s;
    }
    return total;
}

constexpr double kZLimit = 8.5;
constexpr int kInnerPanels = 16;
constexpr int kOuterPanels = 48;

/// Precomputed inner-integral nodes: z, phi(z) * weight, Phi(z).
struct InnerGrid {
    std::array<double, kInnerPanels * kNodes> z{};
    std::array<double, kInnerPanels * kNodes> weighted_pdf{};
    std::array<double, kInnerPanels * kNodes> cdf{};

    InnerGrid() {
        const auto& gl = gauss_legendre();
        const double h = 2.0 * kZLimit / kInnerPanels;
        std::size_t idx = 0;
        for (int p = 0; p < kInnerPanels; ++p) {
            const double mid = -kZLimit + (p + 0.5) * h;
            for (int i = 0; i < kNodes; ++i, ++idx) {
                const double zz = mid + 0.5 * h * gl.x[static_cast<std::size_t>(i)];
                z[idx] = zz;
                weighted_pdf[idx] = 0.5 * h * gl.w[static_cast<std::size_t>(i)] *
                                    std::exp(-0.5 * zz * zz) / std::sqrt(2.0 * std::numbers::pi);
                cdf[idx] = normal_cdf(zz);
            }
        }
    }
};

const InnerGrid& inner_grid() {
    static const InnerGrid grid;
    return grid;
}

/// P(range of k standard normals <= w).
double range_cdf(double w, int k) {
    if (w <= 0.0) return 0.0;
    if (w > 60.0) return 1.0;
    const auto& g = inner_grid();
    double total = 0.0;
    for (std::size_t i = 0; i < g.z.size(); ++i) {
        const double mass = g.cdf[i] - normal_cdf(g.z[i] - w);
        if (mass <= 0.0) continue;
        total += g.weighted_pdf[i] * std::pow(mass, k - 1);
    }
    return std::min(1.0, k * total);
}

void check_range_args(int k, double df) {
    if (k < 2) throw DomainError("studentized range needs k >= 2, got " + std::to_string(k));
    if (!(df >= 1.0)) throw DomainError("studentized range needs df >= 1");
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double chi_square_sf(double x, double df) {
    if (!(df >= 1.0) || std::isnan(x) || x < 0.0) {
        throw DomainError("chi_square_sf needs x >= 0 and df >= 1");
    }
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double studentized_range_cdf(double q, int k, double df) {
    check_range_args(k, df);
    if (std::isnan(q) || q < 0.0) throw DomainError("studentized range needs q >= 0");
    if (q == 0.0) return 0.0;
    if (std::isinf(df)) return range_cdf(q, k);

    // Scale s = chi_df / sqrt(df); integrate over its central 1 - 2e-15 mass.
    const double a = 0.5 * df;
    const double x_lo = boost::math::gamma_p_inv(a, 1e-15);
    const double x_hi = boost::math::gamma_q_inv(a, 1e-15);
    const double s_lo = std::sqrt(2.0 * x_lo / df);
    const double s_hi = std::sqrt(2.0 * x_hi / df);
    const double log_norm = std::log(2.0) + a * std::log(a) - std::lgamma(a);
    auto integrand = [&](double s) {
        if (s <= 0.0) return 0.0;
        const double log_density = log_norm + (df - 1.0) * std::log(s) - a * s * s;
        return std::exp(log_density) * range_cdf(q * s, k);
    };
    const double p = integrate(integrand, s_lo, s_hi, kOuterPanels);
    return std::clamp(p, 0.0, 1.0);
}

double studentized_range_quantile(double p, int k, double df) {
    check_range_args(k, df);
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("studentized range quantile needs 0 <= p < 1");
    if (p == 0.0) return 0.0;
    double lo = 0.0;
    double hi = 8.0;
    while (studentized_range_cdf(hi, k, df) < p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw DomainError("studentized range quantile did not bracket p");
    }
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        if (studentized_range_cdf(mid, k, df) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace mixedrank
