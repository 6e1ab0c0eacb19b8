#include "odelay/cli/commands.hpp"

#include "odelay/errors.hpp"
#include "odelay/staticmap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <thread>

namespace odelay::cli {

namespace {

std::string real_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// omega:amplitude:phase per line, ';'-separated (after merging).
std::string spectrum_text(const InterferenceSpec& spec) {
    std::string out;
    for (const SpectrumLine& l : spec.lines()) {
        if (!out.empty()) {
            out += ';';
        }
        out += real_text(l.omega) + ':' + real_text(l.amplitude) + ':' + real_text(l.phase);
    }
    return out;
}

const char* convention_name(IntegralBound c) {
    switch (c) {
    case IntegralBound::Antiderivative:
        return "antiderivative";
    case IntegralBound::Interval:
        return "interval";
    case IntegralBound::DeltaWeight:
        return "delta";
    }
    return "interval";
}

std::uint64_t effective_seed(const AnalysisConfig& cfg, const RunFlags& flags) {
    return flags.seed.value_or(cfg.seed);
}

ReportRow echo(const std::string& analysis, const AnalysisConfig& cfg, const RunFlags& flags) {
    ReportRow row;
    row.analysis = analysis;
    row.input("G", cfg.comparator.G);
    row.input("C_eff", cfg.comparator.C_eff);
    row.input("V_th", cfg.comparator.V_th);
    row.input("m1", cfg.ramp.m1);
    row.input("command", cfg.ramp.command);
    row.input("t_start", cfg.ramp.t_start);
    row.input("initial", cfg.ramp.initial);
    row.input("spectrum", spectrum_text(cfg.spectrum));
    row.input("merged_lines", static_cast<std::int64_t>(cfg.merged_lines));
    row.input("solver_step", cfg.solver.step);
    row.input("refine_limit", static_cast<std::int64_t>(cfg.solver.quadrature.refine_limit));
    row.input("rel_tol", cfg.solver.quadrature.rel_tol);
    row.input("seed", static_cast<std::int64_t>(effective_seed(cfg, flags)));
    return row;
}

void echo_loop(ReportRow& row, const LoopParams& loop) {
    row.input("t_off", loop.t_off);
    row.input("m2", loop.m2);
    row.input("n_cycles", static_cast<std::int64_t>(loop.n_cycles));
    row.input("valley0", loop.valley0);
}

double relative_containment(double value, double lo, double hi) {
    return std::min(hi - value, value - lo) / std::abs(value);
}

K3Options k3_options(const AnalysisConfig& cfg) {
    K3Options opts;
    opts.quadrature = cfg.solver.quadrature;
    return opts;
}

CycleResult simulate_cycle(const AnalysisConfig& cfg, const InterferenceSpec& spec) {
    const double horizon = default_horizon(cfg.ramp, spec, cfg.comparator, delay_integral_bound(spec));
    return solve_cycle(cfg.ramp, spec, cfg.comparator, horizon, cfg.solver);
}

void put_cycle(ReportRow& row, const CycleResult& c) {
    row.output("t_c", c.t_c);
    row.output("t_on", c.t_on);
    row.output("t_od", c.t_od);
    row.output("peak", c.peak);
    row.output("i_e", c.i_e);
    row.output("w_tc", c.w_tc);
}

// =============================================================================
// Subcommands
// =============================================================================

CommandResult cmd_simulate(const AnalysisConfig& cfg, const RunFlags& flags) {
    ReportRow row = echo("simulate", cfg, flags);
    put_cycle(row, simulate_cycle(cfg, cfg.spectrum));
    return {{row}, std::nullopt, 0};
}

CommandResult cmd_bounds(const AnalysisConfig& cfg, const RunFlags& flags) {
    const double amp = amplitude_bound(cfg.spectrum);
    const double B = delay_integral_bound(cfg.spectrum, flags.b_convention);
    const double m1 = cfg.ramp.m1;
    const CycleResult c = simulate_cycle(cfg, cfg.spectrum);
    const DelayBounds d = delay_bounds(c.w_tc, m1, cfg.comparator, B);

    ReportRow row = echo("bounds", cfg, flags);
    row.input("b_convention", std::string(convention_name(flags.b_convention)));
    row.output("A_ub", amp);
    row.output("B", B);
    row.output("w_tc", c.w_tc);
    row.output("t_od", c.t_od);
    row.output("t_l", d.t_l);
    row.output("t_u", d.t_u);
    row.output("t_od_max", max_overdrive_delay(amp, m1, cfg.comparator, B));
    row.output("t_od_min", min_overdrive_delay(amp, m1, cfg.comparator, B));
    const double mu = stability_mu(amp, m1, cfg.comparator, B);
    if (std::isfinite(mu)) {
        row.output("mu", mu);
    }
    const double margin = relative_containment(c.t_od, d.t_l, d.t_u);
    row.verdict("contained", margin >= -kContainmentRelTol, margin);
    row.verdict("mu_at_least_8", stability_predicate(amp, m1, cfg.comparator, B),
                2.0 * m1 * (cfg.comparator.trip_area() - B) - 8.0 * amp * amp);
    return {{row}, std::nullopt, 0};
}

CommandResult cmd_k3(const AnalysisConfig& cfg, const RunFlags& flags) {
    const KEvalResult k = compute_K3(cfg.spectrum, k3_options(cfg));
    ReportRow row = echo("k3", cfg, flags);
    row.output("k3", k.value);
    row.output("offset", k.offset);
    row.output("psi_l", k.psi_l);
    row.output("psi_h", k.psi_h);
    for (std::size_t i = 0; i < k.phases.size(); ++i) {
        row.output("phase_" + std::to_string(i), k.phases[i]);
    }
    return {{row}, std::nullopt, 0};
}

CommandResult cmd_continuity(const AnalysisConfig& cfg, const RunFlags& flags) {
    const ContinuityReport r = continuity_condition(cfg.spectrum, cfg.ramp.m1, cfg.comparator.V_th,
                                                    cfg.comparator.tau_c(), k3_options(cfg));
    ReportRow row = echo("continuity", cfg, flags);
    row.output("k3_normalized", r.k3);
    row.output("threshold_rhs", r.threshold_rhs);
    row.output("lhs", r.lhs);
    row.verdict("continuous", r.satisfied, r.margin);
    return {{row}, std::nullopt, 0};
}

CommandResult cmd_sector(const AnalysisConfig& cfg, const RunFlags& flags) {
    const double amp = amplitude_bound(cfg.spectrum);
    const double m1 = cfg.ramp.m1;
    const double B = delay_integral_bound(cfg.spectrum, flags.b_convention);
    const double t_min = min_overdrive_delay(amp, m1, cfg.comparator, B);
    const SectorQuotients q = sector_estimate(cfg.ramp, cfg.spectrum, cfg.comparator, 0.0, cfg.solver);
    const double width = 2.0 * amp / t_min;
    const double tol = kSectorTolFactor * m1;

    ReportRow row = echo("sector", cfg, flags);
    row.input("b_convention", std::string(convention_name(flags.b_convention)));
    row.output("q_right", q.q_right);
    row.output("q_left", q.q_left);
    row.output("delta", q.delta);
    row.output("t_od", q.base.t_od);
    row.output("t_od_min", t_min);
    row.output("sector_width", width);
    row.input("sector_tol", tol);
    row.verdict("q_right_in_sector", q.q_right >= -tol && q.q_right <= width + tol,
                std::min(q.q_right + tol, width + tol - q.q_right));
    row.verdict("q_left_in_sector", q.q_left >= -width - tol, q.q_left + width + tol);
    // Each quotient is psi/t of one harvested sample, so the product test reduces
    // to q > -A_ub / t_od_min on both sides.
    const std::vector<SectorSample> samples{{1.0, q.q_right + tol}, {-1.0, -(q.q_left + tol)}};
    row.verdict("sector_product", sector_bound_check(samples, amp, t_min),
                std::min(q.q_right, q.q_left) + amp / t_min + tol);
    row.verdict("stable", stability_condition(q.q_right, q.q_left, m1),
                std::min(q.q_right, q.q_left) + 0.5 * m1);
    return {{row}, std::nullopt, 0};
}

CommandResult cmd_loop(const AnalysisConfig& cfg, const RunFlags& flags) {
    if (!cfg.loop) {
        throw ConfigError("loop", "section required by the loop subcommand");
    }
    const LoopTrajectory traj = iterate_loop(*cfg.loop, cfg.ramp, cfg.spectrum, cfg.comparator, cfg.solver);
    CommandResult out;
    for (const CycleRecord& rec : traj.cycles) {
        ReportRow row = echo("loop", cfg, flags);
        echo_loop(row, *cfg.loop);
        row.output("cycle", static_cast<std::int64_t>(rec.index));
        row.output("cycle_start", rec.t_start);
        row.output("valley", rec.valley);
        put_cycle(row, rec.cycle);
        out.rows.push_back(std::move(row));
    }
    if (traj.error) {
        out.failure = *traj.error;
        out.exit_code = 3;
    }
    return out;
}

CommandResult cmd_aux(const RunFlags& flags) {
    if (!flags.x) {
        throw ConfigError("--x", "required by the aux subcommand");
    }
    if (!flags.mu) {
        throw ConfigError("--mu", "required by the aux subcommand");
    }
    ReportRow row;
    row.analysis = "aux";
    row.input("x", *flags.x);
    row.input("mu", *flags.mu);
    row.output("y", aux_function_y(*flags.x, *flags.mu));
    return {{row}, std::nullopt, 0};
}

struct DrawOutcome {
    InterferenceSpec spec;
    std::uint64_t seed = 0;
    CycleResult cycle;
    DelayBounds bounds;
};

/// Runs work(i) for i in [0, n) on `threads` workers. The exception of the
/// lowest failing index is rethrown, so failures do not depend on scheduling.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& work) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                work(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

CommandResult cmd_sweep(const AnalysisConfig& cfg, const RunFlags& flags) {
    if (flags.draws == 0) {
        throw ConfigError("--draws", "must be >= 1");
    }
    const double amp = amplitude_bound(cfg.spectrum);
    const double m1 = cfg.ramp.m1;
    const double B = delay_integral_bound(cfg.spectrum, flags.b_convention);
    const double t_max = max_overdrive_delay(amp, m1, cfg.comparator, B);
    const double t_min = min_overdrive_delay(amp, m1, cfg.comparator, B);
    const std::uint64_t seed = effective_seed(cfg, flags);

    std::vector<DrawOutcome> draws(flags.draws);
    std::size_t threads = flags.threads;
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    parallel_for(flags.draws, threads, [&](std::size_t i) {
        DrawOutcome& d = draws[i];
        d.seed = derive_seed(seed, i);
        d.spec = random_phase_draw(cfg.spectrum, d.seed);
        d.cycle = simulate_cycle(cfg, d.spec);
        d.bounds = delay_bounds(d.cycle.w_tc, m1, cfg.comparator, B);
    });

    CommandResult out;
    std::int64_t contained = 0;
    std::int64_t contained_global = 0;
    double worst = std::numeric_limits<double>::infinity();
    double sim_min = std::numeric_limits<double>::infinity();
    double sim_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const DrawOutcome& d = draws[i];
        ReportRow row = echo("sweep_draw", cfg, flags);
        row.input("b_convention", std::string(convention_name(flags.b_convention)));
        row.input("draw", static_cast<std::int64_t>(i));
        row.input("draw_seed", std::to_string(d.seed));
        row.input("draw_phases", spectrum_text(d.spec));
        put_cycle(row, d.cycle);
        row.output("t_l", d.bounds.t_l);
        row.output("t_u", d.bounds.t_u);
        const double local = relative_containment(d.cycle.t_od, d.bounds.t_l, d.bounds.t_u);
        const double global = relative_containment(d.cycle.t_od, t_min, t_max);
        row.verdict("contained", local >= -kContainmentRelTol, local);
        row.verdict("contained_global", global >= -kContainmentRelTol, global);
        contained += local >= -kContainmentRelTol ? 1 : 0;
        contained_global += global >= -kContainmentRelTol ? 1 : 0;
        worst = std::min({worst, local, global});
        sim_min = std::min(sim_min, d.cycle.t_od);
        sim_max = std::max(sim_max, d.cycle.t_od);
        out.rows.push_back(std::move(row));
    }

    ReportRow summary = echo("sweep", cfg, flags);
    summary.input("b_convention", std::string(convention_name(flags.b_convention)));
    summary.input("draws", static_cast<std::int64_t>(flags.draws));
    summary.output("contained_count", contained);
    summary.output("contained_global_count", contained_global);
    summary.output("t_od_sim_min", sim_min);
    summary.output("t_od_sim_max", sim_max);
    summary.output("t_od_min", t_min);
    summary.output("t_od_max", t_max);
    summary.verdict("all_contained", worst >= -kContainmentRelTol, worst);
    out.rows.push_back(std::move(summary));
    return out;
}

} // namespace

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names{"simulate", "bounds", "k3",  "continuity",
                                                "sector",   "loop",   "aux", "sweep"};
    return names;
}

bool needs_config(const std::string& name) { return name != "aux"; }

CommandResult run_subcommand(const std::string& name, const AnalysisConfig* config,
                             const RunFlags& flags) {
    if (name == "aux") {
        return cmd_aux(flags);
    }
    if (config == nullptr) {
        throw ConfigError("--config", "required by the " + name + " subcommand");
    }
    static const std::map<std::string, CommandResult (*)(const AnalysisConfig&, const RunFlags&)> table{
        {"simulate", cmd_simulate}, {"bounds", cmd_bounds}, {"k3", cmd_k3},
        {"continuity", cmd_continuity}, {"sector", cmd_sector}, {"loop", cmd_loop},
        {"sweep", cmd_sweep}};
    const auto it = table.find(name);
    if (it == table.end()) {
        throw ConfigError("<subcommand>", "unknown subcommand '" + name + "'");
    }
    return it->second(*config, flags);
}

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr || dynamic_cast<const InvalidArgument*>(&e) != nullptr) {
        return 2;
    }
    if (dynamic_cast<const NonConvergence*>(&e) != nullptr ||
        dynamic_cast<const ThresholdUnreachable*>(&e) != nullptr) {
        return 3;
    }
    if (dynamic_cast<const PreconditionViolation*>(&e) != nullptr ||
        dynamic_cast<const BudgetExceeded*>(&e) != nullptr) {
        return 4;
    }
    return 1;
}

IntegralBound parse_b_convention(const std::string& name) {
    if (name == "interval") {
        return IntegralBound::Interval;
    }
    if (name == "antiderivative") {
        return IntegralBound::Antiderivative;
    }
    if (name == "delta") {
        return IntegralBound::DeltaWeight;
    }
    throw ConfigError("--b-convention", "expected interval, antiderivative or delta");
}

} // namespace odelay::cli
