#include "mixedrank/lmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mixedrank/optimizer.hpp"

namespace mixedrank {

std::string to_string(FitMethod m) { return m == FitMethod::ml ? "ML" : "REML"; }

std::vector<double> RandomTermVariance::variances() const {
    std::vector<double> v;
    for (Eigen::Index i = 0; i < covariance.rows(); ++i) v.push_back(covariance(i, i));
    return v;
}

std::vector<double> theta_lower_bounds(const DesignMatrices& dm) {
    std::vector<double> lower;
    for (const auto& b : dm.random_blocks) {
        const std::size_t t = b.inner_size();
        if (b.covariance == CovarianceStructure::diagonal) {
            lower.insert(lower.end(), t, 0.0);
            continue;
        }
        for (std::size_t c = 0; c < t; ++c)
            for (std::size_t r = c; r < t; ++r)
                lower.push_back(r == c ? 0.0 : -std::numeric_limits<double>::infinity());
    }
    return lower;
}

std::vector<double> theta_start(const DesignMatrices& dm) {
    std::vector<double> start;
    for (const auto& b : dm.random_blocks) {
        const std::size_t t = b.inner_size();
        if (b.covariance == CovarianceStructure::diagonal) {
            start.insert(start.end(), t, 1.0);
            continue;
        }
        for (std::size_t c = 0; c < t; ++c)
            for (std::size_t r = c; r < t; ++r) start.push_back(r == c ? 1.0 : 0.0);
    }
    return start;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSingularTheta = 1e-6;

/// Relative Cholesky factors, one per random block.
std::vector<Eigen::MatrixXd> cholesky_factors(const std::vector<double>& theta,
                                              const DesignMatrices& dm) {
    if (theta.size() != dm.n_theta()) {
        throw FitError("theta has " + std::to_string(theta.size()) + " entries, model needs " +
                       std::to_string(dm.n_theta()));
    }
    std::vector<Eigen::MatrixXd> out;
    std::size_t k = 0;
    for (const auto& b : dm.random_blocks) {
        const auto t = static_cast<Eigen::Index>(b.inner_size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(t, t);
        if (b.covariance == CovarianceStructure::diagonal) {
            for (Eigen::Index i = 0; i < t; ++i) T(i, i) = theta[k++];
        } else {
            for (Eigen::Index c = 0; c < t; ++c)
                for (Eigen::Index r = c; r < t; ++r) T(r, c) = theta[k++];
        }
        for (Eigen::Index i = 0; i < t; ++i) {
            if (T(i, i) < 0.0) throw FitError("theta diagonal entries must be non-negative");
        }
        out.push_back(std::move(T));
    }
    return out;
}

struct Evaluation {
    double deviance = 0.0;
    double r2 = 0.0;
    Eigen::VectorXd beta;
    Eigen::VectorXd u;
    Eigen::VectorXd b;
    Eigen::MatrixXd schur;  // X'V^{-1}X up to sigma^2
};

/// Cross-products formed once per fit; each theta evaluation works on q- and
/// p-sized blocks only.
class ProfiledSystem {
public:
    explicit ProfiledSystem(const DesignMatrices& dm) : dm_(dm) {
        ZtZ_ = dm.Z.transpose() * dm.Z;
        ZtX_ = dm.Z.transpose() * dm.X;
        Zty_ = dm.Z.transpose() * dm.y;
        XtX_ = dm.X.transpose() * dm.X;
        Xty_ = dm.X.transpose() * dm.y;
    }

    Evaluation evaluate(const std::vector<double>& theta, FitMethod method) const {
        const auto factors = cholesky_factors(theta, dm_);
        const Eigen::Index q = dm_.Z.cols();
        const auto n = static_cast<double>(dm_.n_obs());
        const auto p = static_cast<double>(dm_.n_fixed());

        // A = L' Z'Z L + I, with L block-diagonal.
        Eigen::MatrixXd M = ZtZ_;
        right_apply(M, factors);
        left_apply_transpose(M, factors);
        M.diagonal().array() += 1.0;
        Eigen::MatrixXd LZX = ZtX_;
        left_apply_transpose(LZX, factors);
        Eigen::VectorXd LZy = Zty_;
        left_apply_transpose(LZy, factors);

        Evaluation ev;
        double logdet_re = 0.0;
        Eigen::MatrixXd RZX;
        Eigen::VectorXd cu;
        Eigen::LLT<Eigen::MatrixXd> llt;
        if (q > 0) {
            llt.compute(M);
            if (llt.info() != Eigen::Success) return failed();
            const auto& L = llt.matrixL();
            RZX = L.solve(LZX);
            cu = L.solve(LZy);
            logdet_re = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        } else {
            RZX = Eigen::MatrixXd::Zero(0, dm_.X.cols());
            cu = Eigen::VectorXd::Zero(0);
        }

        ev.schur = XtX_ - RZX.transpose() * RZX;
        Eigen::LLT<Eigen::MatrixXd> lx(ev.schur);
        if (lx.info() != Eigen::Success) return failed();
        ev.beta = lx.solve(Xty_ - RZX.transpose() * cu);
        if (q > 0) {
            ev.u = llt.matrixU().solve(cu - RZX * ev.beta);
        } else {
            ev.u = Eigen::VectorXd::Zero(0);
        }
        ev.b = ev.u;
        left_apply(ev.b, factors);

        Eigen::VectorXd resid = dm_.y - dm_.X * ev.beta;
        if (q > 0) resid -= dm_.Z * ev.b;
        ev.r2 = resid.squaredNorm() + ev.u.squaredNorm();

        if (method == FitMethod::ml) {
            ev.deviance = logdet_re + n * (1.0 + std::log(kTwoPi * ev.r2 / n));
        } else {
            const double logdet_x = 2.0 * lx.matrixLLT().diagonal().array().log().sum();
            const double dof = n - p;
            ev.deviance = logdet_re + logdet_x + dof * (1.0 + std::log(kTwoPi * ev.r2 / dof));
        }
        return ev;
    }

private:
    static Evaluation failed() {
        Evaluation ev;
        ev.deviance = std::numeric_limits<double>::quiet_NaN();
        return ev;
    }

    template <typename F>
    void for_each_group(const std::vector<Eigen::MatrixXd>& factors, F&& fn) const {
        for (std::size_t k = 0; k < dm_.random_blocks.size(); ++k) {
            const auto& blk = dm_.random_blocks[k];
            const auto t = static_cast<Eigen::Index>(blk.inner_size());
            for (std::size_t j = 0; j < blk.n_groups(); ++j) {
                fn(static_cast<Eigen::Index>(blk.first_column) + static_cast<Eigen::Index>(j) * t, t,
                   factors[k]);
            }
        }
    }

    // M <- M * Lambda
    void right_apply(Eigen::MatrixXd& M, const std::vector<Eigen::MatrixXd>& factors) const {
        for_each_group(factors, [&](Eigen::Index c, Eigen::Index t, const Eigen::MatrixXd& T) {
            M.middleCols(c, t) = (M.middleCols(c, t) * T).eval();
        });
    }
    // M <- Lambda' * M
    template <typename Mat>
    void left_apply_transpose(Mat& M, const std::vector<Eigen::MatrixXd>& factors) const {
        for_each_group(factors, [&](Eigen::Index c, Eigen::Index t, const Eigen::MatrixXd& T) {
            M.middleRows(c, t) = (T.transpose() * M.middleRows(c, t)).eval();
        });
    }
    // v <- Lambda * v
    void left_apply(Eigen::VectorXd& v, const std::vector<Eigen::MatrixXd>& factors) const {
        for_each_group(factors, [&](Eigen::Index c, Eigen::Index t, const Eigen::MatrixXd& T) {
            v.segment(c, t) = (T * v.segment(c, t)).eval();
        });
    }

    const DesignMatrices& dm_;
    Eigen::MatrixXd ZtZ_, ZtX_, XtX_;
    Eigen::VectorXd Zty_, Xty_;
};

void check_dimensions(const DesignMatrices& dm, FitMethod method) {
    const std::size_t n = dm.n_obs();
    const std::size_t p = dm.n_fixed();
    if (n <= p) {
        throw FitError("need more observations than fixed-effect columns (n = " + std::to_string(n) +
                       ", p = " + std::to_string(p) + ")");
    }
    (void)method;
}

FittedLmm fit_ols(const DesignMatrices& dm, FitMethod method) {
    const auto n = static_cast<double>(dm.n_obs());
    const auto p = static_cast<double>(dm.n_fixed());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.X);
    FittedLmm fit;
    fit.beta = qr.solve(dm.y);
    const double sse = (dm.y - dm.X * fit.beta).squaredNorm();
    if (!(sse > 0.0)) throw FitError("zero residual variance: the model reproduces the response exactly");
    const Eigen::MatrixXd xtx = dm.X.transpose() * dm.X;
    Eigen::LLT<Eigen::MatrixXd> llt(xtx);
    if (method == FitMethod::ml) {
        fit.deviance = n * (1.0 + std::log(kTwoPi * sse / n));
        fit.sigma2 = sse / n;
    } else {
        const double logdet_x = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        fit.deviance = logdet_x + (n - p) * (1.0 + std::log(kTwoPi * sse / (n - p)));
        fit.sigma2 = sse / (n - p);
    }
    fit.vcov_beta = fit.sigma2 * llt.solve(Eigen::MatrixXd::Identity(xtx.rows(), xtx.cols()));
    fit.blups = Eigen::VectorXd::Zero(0);
    return fit;
}

}  // namespace

double profiled_deviance(const std::vector<double>& theta, const DesignMatrices& dm,
                         FitMethod method) {
    check_dimensions(dm, method);
    ProfiledSystem sys(dm);
    const double d = sys.evaluate(theta, method).deviance;
    if (!std::isfinite(d)) {
        throw FitError("profiled deviance is not finite at the given theta (rank or scale problem)");
    }
    return d;
}

FittedLmm fit_lmm(const DesignMatrices& dm, FitMethod method, const FitOptions& options) {
    check_dimensions(dm, method);
    FittedLmm fit;
    if (dm.random_blocks.empty()) {
        fit = fit_ols(dm, method);
    } else {
        ProfiledSystem sys(dm);
        const auto start = theta_start(dm);
        {
            const auto probe = sys.evaluate(start, method);
            if (std::isfinite(probe.r2) && !(probe.r2 > 0.0)) {
                throw FitError("zero residual variance: the model reproduces the response exactly");
            }
        }
        NelderMeadOptions nm;
        nm.max_evals = options.max_evals;
        nm.ftol = options.tol;
        const auto lower = theta_lower_bounds(dm);
        const std::vector<double> upper(lower.size(), std::numeric_limits<double>::infinity());
        const auto opt = minimize_nelder_mead(
            [&](const std::vector<double>& th) { return sys.evaluate(th, method).deviance; }, start,
            lower, upper, nm);
        const auto ev = sys.evaluate(opt.x, method);
        if (!std::isfinite(ev.deviance)) {
            throw FitError("profiled deviance is not finite at the optimum (rank or scale problem)");
        }
        const auto n = static_cast<double>(dm.n_obs());
        const auto p = static_cast<double>(dm.n_fixed());
        fit.theta = opt.x;
        fit.beta = ev.beta;
        fit.deviance = ev.deviance;
        fit.sigma2 = method == FitMethod::ml ? ev.r2 / n : ev.r2 / (n - p);
        Eigen::LLT<Eigen::MatrixXd> lx(ev.schur);
        fit.vcov_beta =
            fit.sigma2 * lx.solve(Eigen::MatrixXd::Identity(ev.schur.rows(), ev.schur.cols()));
        fit.blups = ev.b;
        fit.evaluations = opt.evals;
        fit.converged = opt.converged;
        if (!opt.converged) {
            fit.warnings.push_back("optimizer stopped after " + std::to_string(opt.evals) +
                                   " evaluations without meeting the tolerance");
        }
        const auto factors = cholesky_factors(fit.theta, dm);
        for (std::size_t k = 0; k < dm.random_blocks.size(); ++k) {
            const auto& blk = dm.random_blocks[k];
            RandomTermVariance rv;
            rv.term = blk.label;
            rv.group = blk.group;
            rv.inner_labels = blk.inner_labels;
            rv.covariance = fit.sigma2 * factors[k] * factors[k].transpose();
            for (Eigen::Index i = 0; i < factors[k].rows(); ++i)
                if (factors[k](i, i) < kSingularTheta) fit.singular = true;
            fit.ranef_variances.push_back(std::move(rv));
        }
        if (fit.singular) fit.warnings.push_back("singular fit: a variance component is on the boundary");
    }
    fit.formula = dm.formula;
    fit.method = method;
    fit.beta_labels = dm.x_labels;
    fit.loglik = -0.5 * fit.deviance;
    fit.n_obs = dm.n_obs();
    fit.n_params = dm.n_fixed() + dm.n_theta() + 1;
    fit.response_checksum = dm.response_checksum;
    fit.vcov_beta = 0.5 * (fit.vcov_beta + fit.vcov_beta.transpose()).eval();
    return fit;
}

}  // namespace mixedrank
