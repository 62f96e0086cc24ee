#include "mixedrank/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mixedrank/cd_diagram.hpp"
#include "mixedrank/dataset.hpp"
#include "mixedrank/design.hpp"
#include "mixedrank/formula.hpp"
#include "mixedrank/lmm.hpp"
#include "mixedrank/recipes.hpp"
#include "mixedrank/report.hpp"
#include "mixedrank/synth.hpp"

namespace mixedrank {

namespace {

struct Settings {
    std::string input;
    std::vector<std::string> columns;
    std::string schema_file;
    std::string formula;
    double alpha = 0.05;
    std::string out_dir;
    std::string format = "text";
    std::uint64_t rng_seed = 0;
    std::string baseline;
    std::string metafeature = "prior";
    std::vector<std::string> pair;
    std::string window;
    std::string scenario;
    std::string method = "ml";
};

/// Files and standard output produced by one subcommand.
struct Output {
    std::string name;
    std::string text;
    std::string json;
    std::vector<std::pair<std::string, std::string>> svgs;  // file stem, document
};

Dataset load(const Settings& s) {
    std::ifstream in(s.input, std::ios::binary);
    if (!in) throw DataError("cannot open input file '" + s.input + "'");
    Schema schema;
    if (!s.schema_file.empty()) {
        std::ifstream cfg(s.schema_file);
        if (!cfg) throw DataError("cannot open schema file '" + s.schema_file + "'");
        schema = Schema::from_config(cfg);
    }
    const Schema flags = Schema::from_assignments(s.columns);
    for (const auto& [col, binding] : flags.by_file_column) schema.by_file_column[col] = binding;
    return load_table(in, schema);
}

std::pair<double, double> parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--budget-window", "expected lo:hi");
    try {
        std::size_t used = 0;
        const std::string lo_text = text.substr(0, colon);
        const std::string hi_text = text.substr(colon + 1);
        const double lo = std::stod(lo_text, &used);
        if (used != lo_text.size()) throw std::invalid_argument(lo_text);
        const double hi = std::stod(hi_text, &used);
        if (used != hi_text.size()) throw std::invalid_argument(hi_text);
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw CLI::ValidationError("--budget-window", "expected numeric lo:hi, got '" + text + "'");
    }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write '" + path.string() + "'");
    f << content;
}

void publish(const Output& o, const Settings& s, std::ostream& out) {
    const bool all = s.format == "all";
    if (!s.out_dir.empty()) {
        std::filesystem::create_directories(s.out_dir);
        const std::filesystem::path dir(s.out_dir);
        if (all || s.format == "text") write_file(dir / (o.name + ".txt"), o.text);
        if ((all || s.format == "json") && !o.json.empty()) write_file(dir / (o.name + ".json"), o.json);
        if (all || s.format == "svg")
            for (const auto& [stem, svg] : o.svgs) write_file(dir / (stem + ".svg"), svg);
        out << o.text;
        return;
    }
    if (s.format == "json" && !o.json.empty()) {
        out << o.json;
    } else if (s.format == "svg" && !o.svgs.empty()) {
        out << o.svgs.front().second;
    } else {
        out << o.text;
    }
}

RecipeOptions recipe_options(const Settings& s) {
    RecipeOptions r;
    r.alpha = s.alpha;
    return r;
}

Output comparison_output(const std::string& name, const ComparisonReport& r) {
    Output o;
    o.name = name;
    o.text = emit_report(r, ReportFormat::text);
    o.json = emit_report(r, ReportFormat::json);
    o.svgs.emplace_back(name + "_cd", render_cd_diagram(r.tukey, r.emm));
    if (r.friedman) o.svgs.emplace_back(name + "_friedman_cd", render_cd_diagram(r.friedman->comparisons));
    return o;
}

Output verdict_output(const std::string& name, const RecipeVerdict& v) {
    Output o;
    o.name = name;
    o.text = emit_report(v, ReportFormat::text);
    o.json = emit_report(v, ReportFormat::json);
    return o;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Settings s;
    CLI::App app{"Mixed-effects significance analysis of benchmark results", "mixedrank"};
    app.require_subcommand(1, 1);

    auto add_input = [&](CLI::App* sub) {
        sub->add_option("--input", s.input, "CSV file with one row per run")->required();
        sub->add_option("--col", s.columns, "role=column mapping (repeatable)");
        sub->add_option("--schema-file", s.schema_file, "file with one role=column mapping per line");
    };
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--alpha", s.alpha, "significance level")->check(CLI::Range(1e-12, 0.999999));
        sub->add_option("--out-dir", s.out_dir, "directory for report files");
        sub->add_option("--format", s.format, "text, json, svg or all")
            ->check(CLI::IsMember({"text", "json", "svg", "all"}));
        sub->add_option("--rng-seed", s.rng_seed, "seed for synthetic data");
    };

    auto* compare = app.add_subcommand("compare", "rank algorithms with EMMs and Tukey HSD");
    add_input(compare);
    add_common(compare);
    compare->add_option("--formula", s.formula, "model formula (default chosen by GLRT)");
    compare->add_option("--baseline", s.baseline, "side-by-side baseline")->check(CLI::IsMember({"friedman"}));

    auto* sanity = app.add_subcommand("sanity", "seed, benchmark and budget checks");
    add_input(sanity);
    add_common(sanity);

    auto* cluster = app.add_subcommand("cluster", "find benchmarks where a metafeature does not change the gap");
    add_input(cluster);
    add_common(cluster);
    cluster->add_option("--metafeature", s.metafeature, "metafeature column (default prior)");
    cluster->add_option("--pair", s.pair, "two algorithms, e.g. --pair A,B")
        ->required()
        ->delimiter(',')
        ->expected(2);

    auto* anytime = app.add_subcommand("anytime", "single comparison over a budget window");
    add_input(anytime);
    add_common(anytime);
    anytime->add_option("--budget-window", s.window, "lo:hi, inclusive")->required();

    auto* synth = app.add_subcommand("synth", "write a synthetic dataset to CSV");
    add_common(synth);
    synth->add_option("--scenario", s.scenario, "scenario name")
        ->required()
        ->check(CLI::IsMember({"seed_dependent", "seed_null", "benchmark_varying", "budget_simple", "budget_null",
                               "budget_crossover", "planted_anomaly"}));

    auto* fit = app.add_subcommand("fit", "fit one model and dump it");
    add_input(fit);
    add_common(fit);
    fit->add_option("--formula", s.formula, "model formula")->required();
    fit->add_option("--method", s.method, "ml or reml")->check(CLI::IsMember({"ml", "reml"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return exit_usage_error;
    }

    try {
        std::optional<std::pair<double, double>> window;
        if (anytime->parsed()) window = parse_window(s.window);

        if (synth->parsed()) {
            if (s.out_dir.empty()) throw CLI::RequiredError("--out-dir");
            const Dataset ds = generate(default_config(scenario_from_string(s.scenario), s.rng_seed));
            std::filesystem::create_directories(s.out_dir);
            const auto path = std::filesystem::path(s.out_dir) / (s.scenario + ".csv");
            std::ofstream f(path, std::ios::binary);
            if (!f) throw DataError("cannot write '" + path.string() + "'");
            ds.write_csv(f);
            out << "wrote " << path.string() << " (" << ds.n_rows() << " rows)\n";
            return exit_ok;
        }

        const Dataset data = load(s);
        if (data.dropped_rows() > 0)
            err << "warning: dropped " << data.dropped_rows() << " rows with missing or non-numeric values\n";
        const RecipeOptions opts = recipe_options(s);

        if (compare->parsed()) {
            ComparisonReport r = autorank_replacement(
                data, s.formula.empty() ? std::nullopt : std::optional<std::string>(s.formula), opts);
            if (s.baseline == "friedman") r.friedman = friedman_baseline(data, s.alpha);
            publish(comparison_output("compare", r), s, out);
        } else if (sanity->parsed()) {
            publish(verdict_output("sanity", sanity_workflow(data, opts)), s, out);
        } else if (cluster->parsed()) {
            publish(verdict_output("cluster", cluster_benchmarks(data, s.metafeature, {s.pair[0], s.pair[1]}, opts)),
                    s, out);
        } else if (anytime->parsed()) {
            publish(comparison_output("anytime", anytime_analysis(data, *window, opts)), s, out);
        } else if (fit->parsed()) {
            const DesignMatrices dm = build_design(parse_formula(s.formula), data);
            const FittedLmm f = fit_lmm(dm, s.method == "reml" ? FitMethod::reml : FitMethod::ml);
            Output o;
            o.name = "fit";
            o.text = emit_report(f, ReportFormat::text);
            o.json = emit_report(f, ReportFormat::json);
            publish(o, s, out);
        }
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_analysis_error;
    }
    return exit_ok;
}

}  // namespace mixedrank
