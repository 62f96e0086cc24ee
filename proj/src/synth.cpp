#include "mixedrank/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mixedrank {

namespace {

constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kBenchmarkStream = 2;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit_open(std::uint64_t bits) {
    // (0, 1): 53 random bits offset by half an ulp.
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

void validate(const GeneratorConfig& cfg) {
    if (cfg.n_algorithms < 1 || cfg.n_seeds < 1 || cfg.n_benchmarks < 1 || cfg.n_budget_levels < 1 ||
        cfg.n_replicates < 1) {
        throw std::invalid_argument("generator counts must be at least 1");
    }
    if (!(cfg.base_variance > 0.0)) throw std::invalid_argument("base_variance must be positive");
}

std::string indexed(const char* prefix, std::size_t i) { return std::string(prefix) + std::to_string(i); }

struct Builder {
    std::vector<double> loss;
    std::vector<std::string> algorithm, benchmark, seed, prior;
    std::vector<double> budget;
};

}  // namespace

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::seed_dependent: return "seed_dependent";
        case Scenario::seed_null: return "seed_null";
        case Scenario::benchmark_varying: return "benchmark_varying";
        case Scenario::budget_simple: return "budget_simple";
        case Scenario::budget_null: return "budget_null";
        case Scenario::budget_crossover: return "budget_crossover";
        case Scenario::planted_anomaly: return "planted_anomaly";
    }
    return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
    for (auto s : {Scenario::seed_dependent, Scenario::seed_null, Scenario::benchmark_varying,
                   Scenario::budget_simple, Scenario::budget_null, Scenario::budget_crossover,
                   Scenario::planted_anomaly}) {
        if (to_string(s) == name) return s;
    }
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

GeneratorConfig default_config(Scenario s, std::uint64_t rng_seed) {
    GeneratorConfig cfg;
    cfg.scenario = s;
    cfg.rng_seed = rng_seed;
    switch (s) {
        case Scenario::seed_dependent:
        case Scenario::seed_null:
            cfg.n_algorithms = 3;
            cfg.n_seeds = 50;
            cfg.n_benchmarks = 1;
            cfg.n_budget_levels = 1;
            break;
        case Scenario::benchmark_varying:
            cfg.n_algorithms = 3;
            cfg.n_seeds = 50;
            cfg.n_benchmarks = 3;
            cfg.n_budget_levels = 1;
            break;
        case Scenario::budget_simple:
        case Scenario::budget_null:
        case Scenario::budget_crossover:
            cfg.n_algorithms = 3;
            cfg.n_seeds = 10;
            cfg.n_benchmarks = 5;
            cfg.n_budget_levels = 10;
            break;
        case Scenario::planted_anomaly:
            cfg.n_algorithms = 2;
            cfg.n_seeds = 20;
            cfg.n_benchmarks = 10;
            cfg.n_budget_levels = 1;
            cfg.prior_effect = 0.5;
            cfg.anomaly_index = 5;
            break;
    }
    return cfg;
}

double counter_normal(std::uint64_t rng_seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b,
                      std::uint64_t c, std::uint64_t d) {
    std::uint64_t h = splitmix(rng_seed);
    for (std::uint64_t part : {stream, a, b, c, d}) h = splitmix(h ^ part);
    const double u1 = unit_open(h);
    const double u2 = unit_open(splitmix(h ^ 0x5bd1e995ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Dataset gen_seed_dependent(const GeneratorConfig& cfg) {
    validate(cfg);
    if (cfg.scenario != Scenario::seed_dependent && cfg.scenario != Scenario::seed_null) {
        throw std::invalid_argument("gen_seed_dependent needs scenario seed_dependent or seed_null");
    }
    if (cfg.scenario == Scenario::seed_dependent && cfg.n_algorithms < 2) {
        throw std::invalid_argument("seed_dependent needs at least two algorithms (A-1 is affected)");
    }
    const double sd = std::sqrt(cfg.base_variance);
    Builder b;
    for (std::size_t a = 0; a < cfg.n_algorithms; ++a) {
        for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
            double mean = cfg.base_mean;
            if (cfg.scenario == Scenario::seed_dependent && a == 1) {
                mean = cfg.seed_slope * static_cast<double>(s);
            }
            for (std::size_t r = 0; r < cfg.n_replicates; ++r) {
                b.loss.push_back(mean + sd * counter_normal(cfg.rng_seed, kNoiseStream, a, s, r));
                b.algorithm.push_back(indexed("A-", a));
                b.seed.push_back(std::to_string(s));
            }
        }
    }
    Dataset ds;
    ds.add_column(Column::numeric("loss", std::move(b.loss)));
    ds.add_column(Column::categorical("algorithm", b.algorithm));
    ds.add_column(Column::categorical("seed", b.seed));
    return ds;
}

Dataset gen_benchmark_dataset(const GeneratorConfig& cfg) {
    validate(cfg);
    if (cfg.n_benchmarks < 3) throw std::invalid_argument("benchmark dataset needs at least 3 benchmarks");
    const double sd = std::sqrt(cfg.base_variance);
    Builder b;
    for (std::size_t m = 0; m < cfg.n_benchmarks; ++m) {
        const double offset = cfg.benchmark_offsets[m < 3 ? m : 1];
        for (std::size_t a = 0; a < cfg.n_algorithms; ++a) {
            for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
                const double mean = cfg.base_mean + offset * static_cast<double>(a);
                b.loss.push_back(mean + sd * counter_normal(cfg.rng_seed, kNoiseStream, a, s, m));
                b.algorithm.push_back(indexed("A-", a));
                b.benchmark.push_back(indexed("B-", m));
                b.seed.push_back(std::to_string(s));
            }
        }
    }
    Dataset ds;
    ds.add_column(Column::numeric("loss", std::move(b.loss)));
    ds.add_column(Column::categorical("algorithm", b.algorithm));
    ds.add_column(Column::categorical("benchmark", b.benchmark));
    ds.add_column(Column::categorical("seed", b.seed));
    return ds;
}

Dataset gen_budget_dataset(const GeneratorConfig& cfg) {
    validate(cfg);
    if (cfg.n_budget_levels < 2) throw std::invalid_argument("budget dataset needs at least 2 budget levels");
    if (cfg.scenario == Scenario::budget_crossover && cfg.n_algorithms < 2) {
        throw std::invalid_argument("budget_crossover needs at least two algorithms");
    }
    if (cfg.scenario != Scenario::budget_simple && cfg.scenario != Scenario::budget_null &&
        cfg.scenario != Scenario::budget_crossover) {
        throw std::invalid_argument("gen_budget_dataset needs a budget_* scenario");
    }
    const double sd = std::sqrt(cfg.base_variance);
    const double midpoint = 0.5 * (1.0 + static_cast<double>(cfg.n_budget_levels));
    Builder b;
    for (std::size_t m = 0; m < cfg.n_benchmarks; ++m) {
        const double intercept = cfg.benchmark_sd * counter_normal(cfg.rng_seed, kBenchmarkStream, m);
        for (std::size_t a = 0; a < cfg.n_algorithms; ++a) {
            for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
                for (std::size_t l = 1; l <= cfg.n_budget_levels; ++l) {
                    const auto budget = static_cast<double>(l);
                    double mean = cfg.base_mean + intercept;
                    if (cfg.scenario == Scenario::budget_crossover && a < 2) {
                        const double swing = cfg.crossover_slope * (budget - midpoint);
                        mean += a == 0 ? swing : -swing;
                    } else {
                        mean += cfg.algorithm_offset * static_cast<double>(a);
                    }
                    if (cfg.scenario != Scenario::budget_null) mean += cfg.budget_slope * budget;
                    b.loss.push_back(mean + sd * counter_normal(cfg.rng_seed, kNoiseStream, a, s, m, l));
                    b.algorithm.push_back(indexed("A-", a));
                    b.benchmark.push_back(indexed("B-", m));
                    b.seed.push_back(std::to_string(s));
                    b.budget.push_back(budget);
                }
            }
        }
    }
    Dataset ds;
    ds.add_column(Column::numeric("loss", std::move(b.loss)));
    ds.add_column(Column::categorical("algorithm", b.algorithm));
    ds.add_column(Column::categorical("benchmark", b.benchmark));
    ds.add_column(Column::categorical("seed", b.seed));
    ds.add_column(Column::numeric("budget", std::move(b.budget)));
    return ds;
}

Dataset gen_planted_anomaly(const GeneratorConfig& cfg) {
    validate(cfg);
    if (cfg.n_algorithms != 2) throw std::invalid_argument("planted_anomaly uses exactly two algorithms");
    if (cfg.anomaly_index >= cfg.n_benchmarks) {
        throw std::invalid_argument("anomaly_index is outside the benchmark range");
    }
    const double sd = std::sqrt(cfg.base_variance);
    const char* priors[2] = {"good", "bad"};
    Builder b;
    for (std::size_t m = 0; m < cfg.n_benchmarks; ++m) {
        const double intercept = cfg.benchmark_sd * counter_normal(cfg.rng_seed, kBenchmarkStream, m);
        for (std::size_t pr = 0; pr < 2; ++pr) {
            // A-1 leads under the good prior and trails under the bad one, except on
            // the planted benchmark where both instances follow the good pattern.
            const bool good_pattern = pr == 0 || m == cfg.anomaly_index;
            for (std::size_t a = 0; a < 2; ++a) {
                const double sign = (a == 1) == good_pattern ? -1.0 : 1.0;
                for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
                    const double mean = cfg.base_mean + intercept + sign * cfg.prior_effect;
                    b.loss.push_back(mean + sd * counter_normal(cfg.rng_seed, kNoiseStream, a, s, m, pr));
                    b.algorithm.push_back(indexed("A-", a));
                    b.benchmark.push_back(indexed("B-", m));
                    b.seed.push_back(std::to_string(s));
                    b.prior.push_back(priors[pr]);
                }
            }
        }
    }
    Dataset ds;
    ds.add_column(Column::numeric("loss", std::move(b.loss)));
    ds.add_column(Column::categorical("algorithm", b.algorithm));
    ds.add_column(Column::categorical("benchmark", b.benchmark));
    ds.add_column(Column::categorical("seed", b.seed));
    ds.add_column(Column::categorical("prior", b.prior));
    return ds;
}

Dataset generate(const GeneratorConfig& cfg) {
    switch (cfg.scenario) {
        case Scenario::seed_dependent:
        case Scenario::seed_null: return gen_seed_dependent(cfg);
        case Scenario::benchmark_varying: return gen_benchmark_dataset(cfg);
        case Scenario::budget_simple:
        case Scenario::budget_null:
        case Scenario::budget_crossover: return gen_budget_dataset(cfg);
        case Scenario::planted_anomaly: return gen_planted_anomaly(cfg);
    }
    throw std::invalid_argument("unknown scenario");
}

}  // namespace mixedrank
