#pragma once

#include <cstdint>
#include <string>

#include "mixedrank/dataset.hpp"

namespace mixedrank {

enum class Scenario {
    seed_dependent,
    seed_null,
    benchmark_varying,
    budget_simple,
    budget_null,
    budget_crossover,
    planted_anomaly,
};

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

/// Generator settings. Magnitudes not fixed by a scenario's description live here
/// so they can be tuned without touching the generators.
struct GeneratorConfig {
    std::uint64_t rng_seed = 0;
    std::size_t n_algorithms = 3;
    std::size_t n_seeds = 50;
    /// Seed scenarios: rows per (algorithm, seed) cell. With a single row the
    /// per-seed random effect cannot be separated from the residual.
    std::size_t n_replicates = 3;
    std::size_t n_benchmarks = 3;
    std::size_t n_budget_levels = 10;
    double base_mean = 2.5;
    double base_variance = 0.55;
    Scenario scenario = Scenario::seed_dependent;

    /// Seed scenarios: mean of A-1 is this factor times the seed index.
    double seed_slope = 0.1;
    /// Benchmark scenario: per-algorithm-index mean offsets on B-0, B-1, B-2;
    /// benchmarks beyond the third reuse the B-1 offset.
    double benchmark_offsets[3] = {0.0, 0.3, 0.8};
    /// Budget scenarios: shared slope per budget unit and per-algorithm-index offset.
    double budget_slope = -0.05;
    double algorithm_offset = 0.3;
    /// Budget crossover: A-0 and A-1 move by +/- this per budget unit from the midpoint.
    double crossover_slope = 0.1;
    /// Standard deviation of the per-benchmark intercepts.
    double benchmark_sd = 0.5;
    /// Planted anomaly: half the gap between the two algorithms on each prior instance.
    double prior_effect = 0.4;
    /// Planted anomaly: index of the benchmark whose bad instance mirrors the good one.
    std::size_t anomaly_index = 0;
};

/// Defaults for a scenario (counts sized for the corresponding recipe check).
GeneratorConfig default_config(Scenario s, std::uint64_t rng_seed = 0);

/// Standard normal draw determined only by the seed and the cell coordinates.
double counter_normal(std::uint64_t rng_seed, std::uint64_t stream, std::uint64_t a,
                      std::uint64_t b = 0, std::uint64_t c = 0, std::uint64_t d = 0);

Dataset gen_seed_dependent(const GeneratorConfig& cfg);
Dataset gen_benchmark_dataset(const GeneratorConfig& cfg);
Dataset gen_budget_dataset(const GeneratorConfig& cfg);
/// Two algorithms on benchmarks with a good and a bad prior instance each.
Dataset gen_planted_anomaly(const GeneratorConfig& cfg);

/// Dispatch on cfg.scenario.
Dataset generate(const GeneratorConfig& cfg);

}  // namespace mixedrank
