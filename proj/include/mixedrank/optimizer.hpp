#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mixedrank {

struct NelderMeadOptions {
    std::size_t max_evals = 10000;
    /// Stop once the spread of deviance values across the simplex falls below this.
    double ftol = 1e-8;
    /// Stop once every vertex lies within this distance of the best one (per coordinate).
    double xtol = 1e-10;
    double initial_step = 0.25;
    /// Fresh-simplex restarts from the incumbent after convergence.
    std::size_t restarts = 2;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evals = 0;
    bool converged = false;
};

/// Deterministic bounded Nelder-Mead. Trial points are projected onto the box
/// [lower, upper]; non-finite objective values count as +infinity.
NelderMeadResult minimize_nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> start, const std::vector<double>& lower,
                                      const std::vector<double>& upper,
                                      const NelderMeadOptions& options = {});

}  // namespace mixedrank
