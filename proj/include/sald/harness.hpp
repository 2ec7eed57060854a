#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sald/guides.hpp"
#include "sald/metrics.hpp"
#include "sald/samplers.hpp"
#include "sald/targets.hpp"

namespace sald {

// One benchmark run. `particles` is the matched-budget particle count
// (0 selects 10000); DOIT runs particles / proposals of them. eta = 0 selects
// 0.001, or 0.025 for the flow sampler.
struct ExperimentSpec {
    std::string task = "two_moons";
    std::string method = "va_sald";
    double budget = 1.0;
    std::size_t particles = 0;
    double eta = 0.0;
    double guidance_scale = 1.0;
    std::uint64_t seed = 20240611;
    unsigned threads = 1;
    std::uint64_t observe_every = 0;

    BetaSchedule schedule;

    double two_gaussian_offset = 2.25;
    double eight_radius = 3.0;
    double component_var = 1.0;
    // Data mean for unguided_sanity and flow_toy.
    Vec2 data_mean{2.0, 0.0};

    double guide_lambda = 1.0;
    double penalty_length = 1.0;
    TwoMoonsParams moons;
    std::string cloud_path;
    std::size_t cache_nodes = 512;
    bool use_cache = true;
    // flow_toy guide: f = 1/2 weight ||x - center||^2.
    Vec2 quadratic_center{0.0, 0.0};
    double quadratic_weight = 1.0;

    GridSpec kl_grid;
    double kl_eps = kDefaultSmoothingEps;

    std::size_t proposals = 4;
    double reward_temperature = 1.0;
    double doit_strength = 1.0;

    double flow_noise = 0.7;
    double flow_source_std = 1.0;
    std::size_t zo_batch = 32;
    bool zo_normalize = true;

    // Empty: no files written.
    std::string output;
    bool snapshots = false;
    // Off writes wall_ms = 0 so reruns are byte-comparable.
    bool timing = true;

    void validate() const;
    std::size_t resolved_particles() const;
    double resolved_eta() const;
    bool is_flow() const { return method == "va_sald_flow"; }
};

// Applies one key=value assignment; throws ConfigError naming the key.
void set_field(ExperimentSpec& spec, const std::string& key, const std::string& value);
// Every key with its current value, in documentation order.
std::vector<std::pair<std::string, std::string>> list_fields(const ExperimentSpec& spec);

// Flat config text: one key = value per line, '#' starts a comment. Keys that
// the spec does not know are collected in `extra` when given, else rejected.
ExperimentSpec parse_config(std::istream& in, std::map<std::string, std::string>* extra = nullptr);
ExperimentSpec load_config(const std::string& path, std::map<std::string, std::string>* extra = nullptr);

struct BudgetAccounting {
    std::uint64_t steps = 0;
    std::size_t particles = 0;
    std::size_t proposals = 1;
    std::size_t effective_particles = 0;
    double step_size = 0.0;

    std::uint64_t work() const { return steps * particles * proposals; }
};

BudgetAccounting plan_budget(const ExperimentSpec& spec);

struct ResultRow {
    std::string task;
    std::string method;
    double r = 1.0;
    std::uint64_t k = 0;
    double s = 0.0;
    double t = 0.0;
    double kl = 0.0;
    double mean_penalty = 0.0;
    double wall_ms = 0.0;
};

void write_rows_header(std::ostream& out);
void write_row(std::ostream& out, const ResultRow& row);

// Everything a task needs that does not depend on the method or budget: the
// marginal family, the guide, its cache and the guided terminal target grid.
struct TaskContext {
    std::string task;
    std::unique_ptr<VpMarginalFamily> vp;
    std::unique_ptr<FlowMarginalFamily> flow;
    std::unique_ptr<Guide> guide;
    std::unique_ptr<BilinearGuideCache> cache;
    GridDensity target;
    GridDensity base_target;
    // Closed-form terminal moments when the guided target is a single Gaussian.
    bool has_reference_moments = false;
    Vec2 reference_mean;
    double reference_var = 0.0;

    // Guide the samplers see (the cache when enabled).
    const Guide* sampler_guide() const;
};

TaskContext build_task(const ExperimentSpec& spec);

struct RunSummary {
    ExperimentSpec spec;
    BudgetAccounting budget;
    std::vector<ResultRow> rows;
    double terminal_kl = 0.0;
    double terminal_mean_penalty = 0.0;
    double terminal_mean_penalty_exact = 0.0;
    double unguided_kl = 0.0;
    Vec2 terminal_mean;
    Vec2 terminal_var;
    std::uint64_t executed_steps = 0;
    double wall_ms = 0.0;
    std::vector<Vec2> final_positions;
};

// Runs one experiment with a prepared task context; writes <output>.csv and
// <output>.json when spec.output is set.
RunSummary run_experiment(const ExperimentSpec& spec, const TaskContext& task);
RunSummary run_experiment(const ExperimentSpec& spec);

std::string summary_json(const RunSummary& summary);

struct SweepRow {
    std::string task;
    std::string method;
    double r = 1.0;
    std::uint64_t seed = 0;
    BudgetAccounting budget;
    double kl = 0.0;
    double mean_penalty = 0.0;
    double wall_ms = 0.0;
    bool ok = false;
    std::string error;
};

// Seed for budget r of a sweep.
std::uint64_t sweep_seed(std::uint64_t base, double r);

// Throws ConfigError unless steps x particles x proposals agree across methods
// at every r.
void check_budget_parity(const ExperimentSpec& base, const std::vector<std::string>& methods,
                         const std::vector<double>& r_values);

// Runs every (method, r); a failed run is recorded and the sweep continues.
// Writes <output>_sweep.csv plus per-run files when base.output is set.
std::vector<SweepRow> run_sweep(const ExperimentSpec& base, const std::vector<std::string>& methods,
                                const std::vector<double>& r_values);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// Guided terminal target of a task as x,y,density CSV.
void dump_target(const ExperimentSpec& spec, std::ostream& out);

}  // namespace sald
