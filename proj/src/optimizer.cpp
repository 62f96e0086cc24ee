#include "mixedrank/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mixedrank {

namespace {

struct Vertex {
    std::vector<double> x;
    double f;
};

}  // namespace

NelderMeadResult minimize_nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> start, const std::vector<double>& lower,
                                      const std::vector<double>& upper,
                                      const NelderMeadOptions& options) {
    const std::size_t dim = start.size();
    if (lower.size() != dim || upper.size() != dim) {
        throw std::invalid_argument("bounds do not match the dimension of the start point");
    }
    const double inf = std::numeric_limits<double>::infinity();
    NelderMeadResult result;

    auto project = [&](std::vector<double>& x) {
        for (std::size_t i = 0; i < dim; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
    };
    auto eval = [&](std::vector<double> x) {
        project(x);
        double v = f(x);
        ++result.evals;
        if (!std::isfinite(v)) v = inf;
        return Vertex{std::move(x), v};
    };

    project(start);
    Vertex best = eval(start);
    if (dim == 0) {
        result.x = best.x;
        result.value = best.f;
        result.converged = true;
        return result;
    }

    for (std::size_t round = 0; round <= options.restarts; ++round) {
        std::vector<Vertex> simplex;
        simplex.push_back(best);
        for (std::size_t i = 0; i < dim; ++i) {
            std::vector<double> x = best.x;
            double step = std::max(options.initial_step * std::abs(x[i]), options.initial_step);
            if (x[i] + step > upper[i]) step = -step;
            x[i] += step;
            simplex.push_back(eval(x));
        }

        bool converged = false;
        while (result.evals < options.max_evals) {
            std::sort(simplex.begin(), simplex.end(),
                      [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
            const double spread = simplex.back().f - simplex.front().f;
            double size = 0.0;
            for (std::size_t k = 1; k <= dim; ++k)
                for (std::size_t i = 0; i < dim; ++i)
                    size = std::max(size, std::abs(simplex[k].x[i] - simplex[0].x[i]));
            if ((std::isfinite(spread) && spread <= options.ftol) || size <= options.xtol) {
                converged = true;
                break;
            }

            std::vector<double> centroid(dim, 0.0);
            for (std::size_t k = 0; k < dim; ++k)
                for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[k].x[i] / dim;
            auto along = [&](double t) {
                std::vector<double> x(dim);
                for (std::size_t i = 0; i < dim; ++i)
                    x[i] = centroid[i] + t * (simplex[dim].x[i] - centroid[i]);
                return x;
            };

            Vertex reflected = eval(along(-1.0));
            if (reflected.f < simplex[0].f) {
                Vertex expanded = eval(along(-2.0));
                simplex[dim] = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
                continue;
            }
            if (reflected.f < simplex[dim - 1].f) {
                simplex[dim] = std::move(reflected);
                continue;
            }
            const bool outside = reflected.f < simplex[dim].f;
            Vertex contracted = eval(along(outside ? -0.5 : 0.5));
            if (contracted.f < std::min(reflected.f, simplex[dim].f)) {
                simplex[dim] = std::move(contracted);
                continue;
            }
            // Shrink toward the best vertex.
            for (std::size_t k = 1; k <= dim; ++k) {
                std::vector<double> x(dim);
                for (std::size_t i = 0; i < dim; ++i)
                    x[i] = simplex[0].x[i] + 0.5 * (simplex[k].x[i] - simplex[0].x[i]);
                simplex[k] = eval(std::move(x));
            }
        }
        std::sort(simplex.begin(), simplex.end(),
                  [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        const double improvement = best.f - simplex.front().f;
        if (simplex.front().f <= best.f) best = simplex.front();
        result.converged = converged;
        if (!converged) break;
        if (round > 0 && !(improvement > options.ftol)) break;
    }

    result.x = best.x;
    result.value = best.f;
    return result;
}

}  // namespace mixedrank
