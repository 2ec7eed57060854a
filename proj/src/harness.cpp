#include "sald/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "sald/errors.hpp"

namespace sald {

namespace {

const std::vector<std::string> kTasks = {"two_moons", "eight_gaussian", "unguided_sanity", "flow_toy"};
const std::vector<std::string> kMethods = {"sald", "va_sald", "doit", "va_sald_flow"};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string v = trim(text);
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out)) {
        throw ConfigError("field '" + key + "': expected a number, got '" + text + "'");
    }
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
    const std::string v = trim(text);
    char* end = nullptr;
    const unsigned long long out = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || v[0] == '-' || end != v.c_str() + v.size()) {
        throw ConfigError("field '" + key + "': expected a non-negative integer, got '" + text + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string v = trim(text);
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ConfigError("field '" + key + "': expected true/false, got '" + text + "'");
}

std::string fmt_double(double v) { return fmt::format("{}", v); }
std::string fmt_bool(bool v) { return v ? "true" : "false"; }

struct Field {
    std::string name;
    std::function<void(ExperimentSpec&, const std::string&, const std::string&)> set;
    std::function<std::string(const ExperimentSpec&)> get;
};

#define SALD_DOUBLE(key, member)                                                                  \
    Field {                                                                                       \
        key, [](ExperimentSpec& s, const std::string& k, const std::string& v) {                  \
            s.member = parse_double(k, v);                                                        \
        },                                                                                        \
            [](const ExperimentSpec& s) { return fmt_double(s.member); }                          \
    }
#define SALD_UINT(key, member, type)                                                              \
    Field {                                                                                       \
        key, [](ExperimentSpec& s, const std::string& k, const std::string& v) {                  \
            s.member = static_cast<type>(parse_uint(k, v));                                       \
        },                                                                                        \
            [](const ExperimentSpec& s) { return std::to_string(s.member); }                      \
    }
#define SALD_BOOL(key, member)                                                                    \
    Field {                                                                                       \
        key, [](ExperimentSpec& s, const std::string& k, const std::string& v) {                  \
            s.member = parse_bool(k, v);                                                          \
        },                                                                                        \
            [](const ExperimentSpec& s) { return fmt_bool(s.member); }                            \
    }
#define SALD_STRING(key, member)                                                                  \
    Field {                                                                                       \
        key, [](ExperimentSpec& s, const std::string&, const std::string& v) {                    \
            s.member = trim(v);                                                                   \
        },                                                                                        \
            [](const ExperimentSpec& s) { return s.member; }                                      \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        SALD_STRING("task", task),
        SALD_STRING("method", method),
        SALD_DOUBLE("r", budget),
        SALD_UINT("particles", particles, std::size_t),
        SALD_DOUBLE("eta", eta),
        SALD_DOUBLE("guidance_scale", guidance_scale),
        SALD_UINT("seed", seed, std::uint64_t),
        SALD_UINT("threads", threads, unsigned),
        SALD_UINT("observe_every", observe_every, std::uint64_t),
        SALD_DOUBLE("beta_min", schedule.beta_min),
        SALD_DOUBLE("beta_max", schedule.beta_max),
        SALD_DOUBLE("horizon", schedule.horizon),
        SALD_DOUBLE("two_gaussian_offset", two_gaussian_offset),
        SALD_DOUBLE("radius", eight_radius),
        SALD_DOUBLE("component_var", component_var),
        SALD_DOUBLE("data_mean_x", data_mean.x),
        SALD_DOUBLE("data_mean_y", data_mean.y),
        SALD_DOUBLE("lambda", guide_lambda),
        SALD_DOUBLE("penalty_length", penalty_length),
        SALD_UINT("moons_points", moons.n_points, std::size_t),
        SALD_DOUBLE("moons_noise", moons.noise),
        SALD_DOUBLE("moons_scale", moons.scale),
        SALD_UINT("moons_seed", moons.seed, std::uint64_t),
        SALD_STRING("cloud_path", cloud_path),
        SALD_UINT("cache_nodes", cache_nodes, std::size_t),
        SALD_BOOL("use_cache", use_cache),
        SALD_DOUBLE("quadratic_center_x", quadratic_center.x),
        SALD_DOUBLE("quadratic_center_y", quadratic_center.y),
        SALD_DOUBLE("quadratic_weight", quadratic_weight),
        SALD_DOUBLE("grid_lo", kl_grid.x_lo),
        SALD_DOUBLE("grid_hi", kl_grid.x_hi),
        SALD_UINT("grid_cells", kl_grid.nx, std::size_t),
        SALD_DOUBLE("kl_eps", kl_eps),
        SALD_UINT("proposals", proposals, std::size_t),
        SALD_DOUBLE("reward_temperature", reward_temperature),
        SALD_DOUBLE("doit_strength", doit_strength),
        SALD_DOUBLE("flow_noise", flow_noise),
        SALD_DOUBLE("flow_source_std", flow_source_std),
        SALD_UINT("zo_batch", zo_batch, std::size_t),
        SALD_BOOL("zo_normalize", zo_normalize),
        SALD_STRING("output", output),
        SALD_BOOL("snapshots", snapshots),
        SALD_BOOL("timing", timing),
    };
    return table;
}

#undef SALD_DOUBLE
#undef SALD_UINT
#undef SALD_BOOL
#undef SALD_STRING

bool contains(const std::vector<std::string>& list, const std::string& item) {
    return std::find(list.begin(), list.end(), item) != list.end();
}

bool is_vp_task(const std::string& task) { return task != "flow_toy"; }

}  // namespace

// ---------------------------------------------------------------------------

void set_field(ExperimentSpec& spec, const std::string& key, const std::string& value) {
    for (const auto& f : fields()) {
        if (f.name == key) {
            f.set(spec, key, value);
            // The KL grid is square: one range and one cell count drive both axes.
            spec.kl_grid.y_lo = spec.kl_grid.x_lo;
            spec.kl_grid.y_hi = spec.kl_grid.x_hi;
            spec.kl_grid.ny = spec.kl_grid.nx;
            return;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> list_fields(const ExperimentSpec& spec) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : fields()) out.emplace_back(f.name, f.get(spec));
    return out;
}

ExperimentSpec parse_config(std::istream& in, std::map<std::string, std::string>* extra) {
    ExperimentSpec spec;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            set_field(spec, key, value);
        } catch (const ConfigError& e) {
            if (extra != nullptr && std::string(e.what()).starts_with("unknown config key")) {
                (*extra)[key] = value;
                continue;
            }
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return spec;
}

ExperimentSpec load_config(const std::string& path, std::map<std::string, std::string>* extra) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, extra);
}

std::size_t ExperimentSpec::resolved_particles() const {
    const std::size_t base = particles > 0 ? particles : 10000;
    // DOIT spends M proposals per particle, so it gets base / M particles.
    return method == "doit" ? base / proposals : base;
}

double ExperimentSpec::resolved_eta() const {
    if (eta > 0.0) return eta;
    return is_flow() ? 0.025 : 0.001;
}

void ExperimentSpec::validate() const {
    if (!contains(kTasks, task)) throw ConfigError("field 'task': unknown task '" + task + "'");
    if (!contains(kMethods, method)) throw ConfigError("field 'method': unknown method '" + method + "'");
    if (is_vp_task(task) == is_flow()) {
        throw ConfigError("field 'method': '" + method + "' does not apply to task '" + task + "'");
    }
    if (!(budget >= 1.0)) throw ConfigError("field 'r': budget must be >= 1");
    if (!(eta >= 0.0)) throw ConfigError("field 'eta': must be positive (0 selects the default)");
    if (!(guidance_scale >= 0.0)) throw ConfigError("field 'guidance_scale': must be >= 0");
    if (threads < 1) throw ConfigError("field 'threads': must be >= 1");
    schedule.validate();
    if (!(component_var > 0.0)) throw ConfigError("field 'component_var': must be positive");
    if (!(guide_lambda > 0.0)) throw ConfigError("field 'lambda': must be positive");
    if (!(penalty_length > 0.0)) throw ConfigError("field 'penalty_length': must be positive");
    if (cache_nodes < 2) throw ConfigError("field 'cache_nodes': must be >= 2");
    kl_grid.validate();
    if (!(kl_eps > 0.0)) throw ConfigError("field 'kl_eps': must be positive");
    if (proposals < 1) throw ConfigError("field 'proposals': must be >= 1");
    if (method == "doit" && (particles > 0 ? particles : 10000) % proposals != 0) {
        throw ConfigError("field 'particles': must be a multiple of 'proposals' for doit");
    }
    if (!(reward_temperature > 0.0)) throw ConfigError("field 'reward_temperature': must be positive");
    if (!(doit_strength >= 0.0)) throw ConfigError("field 'doit_strength': must be >= 0");
    if (!(flow_noise >= 0.0)) throw ConfigError("field 'flow_noise': must be >= 0");
    if (!(flow_source_std > 0.0)) throw ConfigError("field 'flow_source_std': must be positive");
    if (zo_normalize && zo_batch < 2) throw ConfigError("field 'zo_batch': must be >= 2 with normalization");
    if (zo_batch < 1) throw ConfigError("field 'zo_batch': must be >= 1");
    if (is_flow() && schedule.horizon != 1.0) throw ConfigError("field 'horizon': the flow family lives on [0, 1]");
}

BudgetAccounting plan_budget(const ExperimentSpec& spec) {
    spec.validate();
    BudgetAccounting b;
    b.particles = spec.resolved_particles();
    const double horizon = spec.is_flow() ? 1.0 : spec.schedule.horizon;
    if (spec.method == "doit") {
        const DoitSchedule d = doit_step_count(spec.budget, horizon, spec.resolved_eta());
        b.steps = d.steps;
        b.step_size = d.step_size;
        b.proposals = spec.proposals;
    } else {
        b.steps = step_count(spec.budget, horizon, spec.resolved_eta());
        b.step_size = spec.resolved_eta();
        b.proposals = 1;
    }
    b.effective_particles = b.particles * b.proposals;
    return b;
}

// ---------------------------------------------------------------------------

void write_rows_header(std::ostream& out) { out << "task,method,r,k,s,t,kl,mean_penalty,wall_ms\n"; }

void write_row(std::ostream& out, const ResultRow& row) {
    out << fmt::format("{},{},{},{},{},{},{},{},{:.3f}\n", row.task, row.method, row.r, row.k, row.s,
                       row.t, row.kl, row.mean_penalty, row.wall_ms);
}

const Guide* TaskContext::sampler_guide() const {
    if (cache) return cache.get();
    return guide.get();
}

TaskContext build_task(const ExperimentSpec& spec) {
    spec.validate();
    TaskContext ctx;
    ctx.task = spec.task;
    const double c = spec.guidance_scale;

    if (spec.task == "two_moons") {
        ctx.vp = std::make_unique<VpMarginalFamily>(
            VpMarginalFamily{two_gaussian(spec.two_gaussian_offset, spec.component_var), spec.schedule});
        std::vector<Vec2> cloud;
        if (spec.cloud_path.empty()) {
            cloud = two_moons_cloud(spec.moons);
        } else {
            std::ifstream in(spec.cloud_path);
            if (!in) throw ConfigError("field 'cloud_path': cannot open '" + spec.cloud_path + "'");
            cloud = read_points_csv(in);
        }
        ctx.guide = std::make_unique<PointCloudGuide>(std::move(cloud), spec.guide_lambda);
        if (spec.use_cache) {
            GridSpec nodes = spec.kl_grid;
            nodes.nx = spec.cache_nodes;
            nodes.ny = spec.cache_nodes;
            ctx.cache = std::make_unique<BilinearGuideCache>(*ctx.guide, nodes);
        }
    } else if (spec.task == "eight_gaussian") {
        ctx.vp = std::make_unique<VpMarginalFamily>(
            VpMarginalFamily{eight_gaussian(spec.eight_radius, spec.component_var), spec.schedule});
        ctx.guide = std::make_unique<ModePenaltyGuide>(left_half_centers(ctx.vp->data), spec.guide_lambda,
                                                       spec.penalty_length);
    } else if (spec.task == "unguided_sanity") {
        ctx.vp = std::make_unique<VpMarginalFamily>(
            VpMarginalFamily{single_gaussian(spec.data_mean, spec.component_var), spec.schedule});
        ctx.has_reference_moments = true;
        ctx.reference_mean = spec.data_mean;
        ctx.reference_var = spec.component_var;
    } else {
        ctx.flow = std::make_unique<FlowMarginalFamily>(
            FlowMarginalFamily{single_gaussian(spec.data_mean, spec.component_var), spec.flow_source_std});
        ctx.guide = std::make_unique<QuadraticGuide>(spec.quadratic_center, spec.quadratic_weight);
        // Gaussian data times exp(-c w/2 |x - center|^2) is Gaussian again.
        const double precision = 1.0 / spec.component_var + c * spec.quadratic_weight;
        ctx.has_reference_moments = true;
        ctx.reference_mean = (spec.data_mean / spec.component_var +
                              (c * spec.quadratic_weight) * spec.quadratic_center) /
                             precision;
        ctx.reference_var = 1.0 / precision;
    }

    if (ctx.vp) {
        const double T = ctx.vp->horizon();
        ctx.target = guided_target_grid(*ctx.vp, T, ctx.guide.get(), spec.kl_grid, c);
        ctx.base_target = guided_target_grid(*ctx.vp, T, nullptr, spec.kl_grid, 0.0);
    } else {
        const MixtureSnapshot data = ctx.flow->at(0.0);
        ctx.target = guided_target_grid(data, ctx.guide.get(), spec.kl_grid, c);
        ctx.base_target = guided_target_grid(data, nullptr, spec.kl_grid, 0.0);
    }
    return ctx;
}

// ---------------------------------------------------------------------------

namespace {

void ensure_parent(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::ofstream open_output(const std::string& path) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    return out;
}

}  // namespace

RunSummary run_experiment(const ExperimentSpec& spec, const TaskContext& task) {
    RunSummary summary;
    summary.spec = spec;
    summary.budget = plan_budget(spec);
    if (task.task != spec.task) throw ConfigError("task context does not match the spec");

    const Guide* guide = spec.task == "unguided_sanity" ? nullptr : task.sampler_guide();
    const double r = spec.budget;

    SamplerConfig cfg;
    cfg.eta = spec.resolved_eta();
    cfg.budget = r;
    cfg.guidance_scale = spec.guidance_scale;
    cfg.threads = spec.threads;
    cfg.observe_every = spec.observe_every;

    std::ofstream snapshots;
    if (spec.snapshots && !spec.output.empty()) {
        snapshots = open_output(spec.output + "_snapshots.csv");
        snapshots << "step,particle,x,y\n";
    }

    const auto start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        if (!spec.timing) return 0.0;
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    };
    const StepObserver observer = [&](const StepInfo& info, const std::vector<Vec2>& pos) {
        ResultRow row;
        row.task = spec.task;
        row.method = spec.method;
        row.r = r;
        row.k = info.k;
        row.s = info.s;
        row.t = info.t;
        row.kl = kl_grid(pos, task.target, spec.kl_eps, spec.threads).value;
        row.mean_penalty = mean_penalty(pos, guide);
        row.wall_ms = elapsed_ms();
        summary.rows.push_back(row);
        if (info.terminal) summary.executed_steps = info.k;
        if (snapshots.is_open()) {
            for (std::size_t i = 0; i < pos.size(); ++i) {
                snapshots << fmt::format("{},{},{},{}\n", info.k, i, pos[i].x, pos[i].y);
            }
        }
    };

    ParticleEnsemble init = standard_normal_ensemble(summary.budget.particles, {spec.seed});
    ParticleEnsemble out;
    try {
        if (spec.method == "sald") {
            out = run_sald(*task.vp, guide, cfg, std::move(init), observer);
        } else if (spec.method == "va_sald") {
            out = run_va_sald_vp(*task.vp, guide, cfg, std::move(init), observer);
        } else if (spec.method == "doit") {
            DoitConfig doit;
            doit.proposals = spec.proposals;
            doit.reward_temperature = spec.reward_temperature;
            doit.strength = spec.doit_strength;
            doit.budget_label = r;
            out = run_doit(*task.vp, guide, doit, cfg, std::move(init), observer);
        } else {
            ZoEstimatorConfig zo;
            zo.batch_size = spec.zo_batch;
            zo.normalize = spec.zo_normalize;
            Reward reward;
            if (guide != nullptr) reward = [guide](Vec2 x) { return guide->value(x); };
            out = run_va_sald_flow(*task.flow, reward, cfg, zo, spec.flow_noise, std::move(init), observer);
        }
    } catch (const std::exception& e) {
        throw std::runtime_error(fmt::format("{} / {} / r={}: {}", spec.task, spec.method, r, e.what()));
    }
    summary.wall_ms = elapsed_ms();

    if (summary.executed_steps != summary.budget.steps) {
        throw std::logic_error(fmt::format("executed {} steps, planned {}", summary.executed_steps,
                                           summary.budget.steps));
    }
    const ResultRow& last = summary.rows.back();
    summary.terminal_kl = last.kl;
    summary.terminal_mean_penalty = last.mean_penalty;
    summary.terminal_mean_penalty_exact =
        spec.task == "unguided_sanity" ? 0.0 : mean_penalty(out.positions, task.guide.get());
    summary.unguided_kl = kl_grid(out.positions, task.base_target, spec.kl_eps, spec.threads).value;
    summary.terminal_mean = sample_mean(out.positions);
    summary.terminal_var = sample_variance(out.positions);
    summary.final_positions = std::move(out.positions);

    if (!spec.output.empty()) {
        auto csv = open_output(spec.output + ".csv");
        write_rows_header(csv);
        for (const auto& row : summary.rows) write_row(csv, row);
        auto json = open_output(spec.output + ".json");
        json << summary_json(summary) << '\n';
    }
    return summary;
}

RunSummary run_experiment(const ExperimentSpec& spec) { return run_experiment(spec, build_task(spec)); }

std::string summary_json(const RunSummary& s) {
    using json = nlohmann::ordered_json;
    json j;
    j["task"] = s.spec.task;
    j["method"] = s.spec.method;
    j["r"] = s.spec.budget;
    j["seed"] = s.spec.seed;
    j["budget"] = {{"steps", s.budget.steps},
                   {"particles", s.budget.particles},
                   {"proposals", s.budget.proposals},
                   {"effective_particles", s.budget.effective_particles},
                   {"work", s.budget.work()},
                   {"step_size", s.budget.step_size}};
    j["terminal"] = {{"k", s.executed_steps},
                     {"kl", s.terminal_kl},
                     {"mean_penalty", s.terminal_mean_penalty},
                     {"mean_penalty_exact_guide", s.terminal_mean_penalty_exact},
                     {"kl_to_unguided", s.unguided_kl},
                     {"mean", {s.terminal_mean.x, s.terminal_mean.y}},
                     {"variance", {s.terminal_var.x, s.terminal_var.y}}};
    j["wall_ms"] = s.wall_ms;
    json config = json::object();
    for (const auto& [key, value] : list_fields(s.spec)) config[key] = value;
    config["particles"] = std::to_string(s.spec.particles > 0 ? s.spec.particles : 10000);
    config["eta"] = fmt_double(s.spec.resolved_eta());
    j["config"] = config;
    return j.dump(2);
}

// ---------------------------------------------------------------------------

std::uint64_t sweep_seed(std::uint64_t base, double r) {
    return rng::derive_seed(base, std::bit_cast<std::uint64_t>(r));
}

void check_budget_parity(const ExperimentSpec& base, const std::vector<std::string>& methods,
                         const std::vector<double>& r_values) {
    if (methods.empty()) throw ConfigError("sweep needs at least one method");
    if (r_values.empty()) throw ConfigError("sweep needs at least one budget");
    for (double r : r_values) {
        std::uint64_t reference = 0;
        std::string reference_method;
        for (const auto& m : methods) {
            ExperimentSpec spec = base;
            spec.method = m;
            spec.budget = r;
            const std::uint64_t work = plan_budget(spec).work();
            if (reference_method.empty()) {
                reference = work;
                reference_method = m;
            } else if (work != reference) {
                throw ConfigError(fmt::format(
                    "budget parity violated at r={}: {} uses {} particle-steps x proposals, {} uses {}", r,
                    reference_method, reference, m, work));
            }
        }
    }
}

std::vector<SweepRow> run_sweep(const ExperimentSpec& base, const std::vector<std::string>& methods,
                                const std::vector<double>& r_values) {
    check_budget_parity(base, methods, r_values);
    ExperimentSpec task_spec = base;
    task_spec.method = methods.front();
    const TaskContext task = build_task(task_spec);

    std::vector<SweepRow> rows;
    for (double r : r_values) {
        for (const auto& m : methods) {
            ExperimentSpec spec = base;
            spec.method = m;
            spec.budget = r;
            spec.seed = sweep_seed(base.seed, r);
            if (!base.output.empty()) spec.output = fmt::format("{}_{}_r{}", base.output, m, r);
            SweepRow row;
            row.task = spec.task;
            row.method = m;
            row.r = r;
            row.seed = spec.seed;
            row.budget = plan_budget(spec);
            try {
                const RunSummary s = run_experiment(spec, task);
                row.kl = s.terminal_kl;
                row.mean_penalty = s.terminal_mean_penalty_exact;
                row.wall_ms = s.wall_ms;
                row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            rows.push_back(row);
        }
    }
    if (!base.output.empty()) {
        auto csv = open_output(base.output + "_sweep.csv");
        write_sweep_csv(csv, rows);
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "task,method,r,seed,steps,particles,proposals,effective_particles,kl,mean_penalty,wall_ms,"
           "status,error\n";
    for (const auto& row : rows) {
        std::string error = row.error;
        std::replace(error.begin(), error.end(), ',', ';');
        std::replace(error.begin(), error.end(), '\n', ' ');
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{:.3f},{},{}\n", row.task, row.method, row.r,
                           row.seed, row.budget.steps, row.budget.particles, row.budget.proposals,
                           row.budget.effective_particles, row.kl, row.mean_penalty, row.wall_ms,
                           row.ok ? "ok" : "failed", error);
    }
}

void dump_target(const ExperimentSpec& spec, std::ostream& out) {
    ExperimentSpec s = spec;
    if (s.task == "flow_toy") s.method = "va_sald_flow";
    else if (s.is_flow()) s.method = "va_sald";
    const TaskContext task = build_task(s);
    write_grid_csv(out, task.target);
}

}  // namespace sald
