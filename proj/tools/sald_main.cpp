// Command-line front end: run, sweep, validate, dump-target, defaults.
#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sald/errors.hpp"
#include "sald/harness.hpp"
#include "sald/validation.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        out.push_back(item.substr(first, item.find_last_not_of(" \t") - first + 1));
    }
    return out;
}

std::vector<double> parse_budgets(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw sald::ConfigError("--r: '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw sald::ConfigError("--r: empty budget list");
    return out;
}

void apply_overrides(sald::ExperimentSpec& spec, const std::vector<std::string>& overrides) {
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw sald::ConfigError("--set expects key=value, got '" + kv + "'");
        sald::set_field(spec, kv.substr(0, eq), kv.substr(eq + 1));
    }
}

std::string budget_label(double r) { return fmt::format("{}", r); }

// Keys only `sweep` understands; `run` accepts and ignores them so one file serves both.
const std::vector<std::string> kSweepKeys = {"methods"};

sald::ExperimentSpec load_with_sweep_keys(const std::string& path, std::map<std::string, std::string>& sweep_keys) {
    std::map<std::string, std::string> extra;
    sald::ExperimentSpec spec = sald::load_config(path, &extra);
    for (const auto& [key, value] : extra) {
        if (std::find(kSweepKeys.begin(), kSweepKeys.end(), key) == kSweepKeys.end()) {
            throw sald::ConfigError("unknown config key '" + key + "'");
        }
        sweep_keys[key] = value;
    }
    return spec;
}

int cmd_run(const std::string& config, const std::vector<std::string>& overrides) {
    std::map<std::string, std::string> sweep_keys;
    sald::ExperimentSpec spec = load_with_sweep_keys(config, sweep_keys);
    apply_overrides(spec, overrides);
    if (spec.output.empty()) {
        spec.output = fmt::format("results/{}_{}_r{}", spec.task, spec.method, budget_label(spec.budget));
    }
    spec.validate();
    const sald::RunSummary s = sald::run_experiment(spec);
    fmt::print("{} {} r={}: steps={} particles={} kl={:.4f} mean_penalty={:.4f} wall_ms={:.1f}\n", spec.task,
               spec.method, spec.budget, s.executed_steps, s.budget.particles, s.terminal_kl,
               s.terminal_mean_penalty_exact, s.wall_ms);
    fmt::print("wrote {}.csv and {}.json\n", spec.output, spec.output);
    return 0;
}

int cmd_sweep(const std::string& config, const std::string& budgets, std::string methods,
              const std::vector<std::string>& overrides) {
    std::map<std::string, std::string> sweep_keys;
    sald::ExperimentSpec spec = load_with_sweep_keys(config, sweep_keys);
    if (methods.empty() && sweep_keys.count("methods")) methods = sweep_keys["methods"];
    apply_overrides(spec, overrides);
    if (spec.output.empty()) spec.output = "results/" + spec.task;
    std::vector<std::string> method_list = split_list(methods);
    if (method_list.empty()) {
        method_list = spec.task == "flow_toy" ? std::vector<std::string>{"va_sald_flow"}
                                              : std::vector<std::string>{"sald", "va_sald", "doit"};
    }
    spec.validate();
    const auto rows = sald::run_sweep(spec, method_list, parse_budgets(budgets));
    sald::write_sweep_csv(std::cout, rows);
    bool ok = true;
    for (const auto& row : rows) ok = ok && row.ok;
    std::cerr << "wrote " << spec.output << "_sweep.csv\n";
    return ok ? 0 : kExitFailure;
}

int cmd_validate(const std::string& suite, std::uint64_t seed, unsigned threads, const std::string& report) {
    sald::ValidationOptions options;
    options.seed = seed;
    options.threads = threads;
    const auto results = sald::run_validation(suite, options);
    sald::write_validation_report(std::cout, results);
    if (!report.empty()) {
        std::ofstream out(report);
        if (!out) throw sald::ConfigError("cannot write report '" + report + "'");
        sald::write_validation_report(out, results);
    }
    return sald::all_passed(results) ? 0 : kExitFailure;
}

int cmd_dump_target(const std::string& task, const std::string& config, const std::vector<std::string>& overrides,
                    const std::string& output) {
    sald::ExperimentSpec spec = config.empty() ? sald::ExperimentSpec{} : sald::load_config(config);
    spec.task = task;
    if (task == "flow_toy") spec.method = "va_sald_flow";
    apply_overrides(spec, overrides);
    if (output.empty() || output == "-") {
        sald::dump_target(spec, std::cout);
        return 0;
    }
    std::ofstream out(output);
    if (!out) throw sald::ConfigError("cannot write '" + output + "'");
    sald::dump_target(spec, out);
    return 0;
}

int cmd_defaults() {
    for (const auto& [key, value] : sald::list_fields(sald::ExperimentSpec{})) {
        std::cout << key << " = " << value << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slowed annealed Langevin samplers on 2-D benchmark tasks"};
    app.require_subcommand(1);

    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "Run one experiment from a config file");
    std::string run_config;
    run->add_option("config", run_config, "key = value config file")->required()->check(CLI::ExistingFile);
    run->add_option("--set", overrides, "Override a config key (key=value); repeatable");

    auto* sweep = app.add_subcommand("sweep", "Run every method over a list of budgets");
    std::string sweep_config;
    std::string budgets = "1,2,4,10,50,100";
    std::string methods;
    sweep->add_option("config", sweep_config, "key = value config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--r", budgets, "Comma-separated budgets")->capture_default_str();
    sweep->add_option("--methods", methods, "Comma-separated methods (default: sald,va_sald,doit)");
    sweep->add_option("--set", overrides, "Override a config key (key=value); repeatable");

    auto* validate = app.add_subcommand("validate", "Run the numerical self-checks");
    std::string suite = "all";
    std::uint64_t seed = 20240611;
    unsigned threads = 1;
    std::string report;
    validate->add_option("suite", suite, "Suite name or 'all'")->capture_default_str();
    validate->add_option("--seed", seed, "Base seed")->capture_default_str();
    validate->add_option("--threads", threads, "Worker threads")->capture_default_str();
    validate->add_option("--report", report, "Also write the report CSV here");

    auto* dump = app.add_subcommand("dump-target", "Write a task's guided target density as x,y,density CSV");
    std::string task;
    std::string dump_config;
    std::string dump_output;
    dump->add_option("task", task, "two_moons | eight_gaussian | unguided_sanity | flow_toy")->required();
    dump->add_option("--config", dump_config, "Config file for guide and grid settings");
    dump->add_option("-o,--output", dump_output, "Output path ('-' for stdout)");
    dump->add_option("--set", overrides, "Override a config key (key=value); repeatable");

    app.add_subcommand("defaults", "Print every config key with its default value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(run_config, overrides);
        if (sweep->parsed()) return cmd_sweep(sweep_config, budgets, methods, overrides);
        if (validate->parsed()) return cmd_validate(suite, seed, threads, report);
        if (dump->parsed()) return cmd_dump_target(task, dump_config, overrides, dump_output);
        return cmd_defaults();
    } catch (const sald::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
