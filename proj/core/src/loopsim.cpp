#include "odelay/loopsim.hpp"

#include "odelay/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace odelay {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(std::string(what) + " must be finite and > 0");
    }
}

void require_trip_above_bound(const ComparatorParams& cmp, double B) {
    if (!(cmp.trip_area() > B)) {
        std::ostringstream os;
        os.precision(17);
        os << "precondition violated: V_th*tau_c = " << cmp.trip_area() << " <= B = " << B;
        throw PreconditionViolation(os.str());
    }
}

double zero_interference_delay(double m1, const ComparatorParams& cmp) {
    return std::sqrt(2.0 * cmp.trip_area() / m1);
}

// w/m1 + sqrt((w/m1)^2 + (2/m1) * area), the positive root of the trip quadratic.
double positive_root(double w, double m1, double area) {
    const double r = w / m1;
    return r + std::sqrt(r * r + 2.0 * area / m1);
}

double cycle_step(const InterferenceSpec& spec, double m1, const ComparatorParams& cmp,
                  const CycleSolverOptions& opts) {
    if (opts.step > 0.0) {
        return opts.step;
    }
    double step = zero_interference_delay(m1, cmp) / 1000.0;
    if (!spec.empty()) {
        step = std::min(step, 1.0 / (20.0 * spec.omega_max()));
    }
    return step;
}

} // namespace

// =============================================================================
// Parameter checks
// =============================================================================

void ComparatorParams::validate() const {
    require_positive(G, "comparator.G");
    require_positive(C_eff, "comparator.C_eff");
    require_positive(V_th, "comparator.V_th");
}

void RampCycleInput::validate() const {
    require_positive(m1, "ramp.m1");
    if (!std::isfinite(command) || !std::isfinite(t_start) || !std::isfinite(initial)) {
        throw InvalidArgument("ramp: command, t_start and initial must be finite");
    }
}

void LoopParams::validate() const {
    require_positive(t_off, "loop.t_off");
    require_positive(m2, "loop.m2");
    if (n_cycles < 1) {
        throw InvalidArgument("loop.n_cycles must be >= 1");
    }
    if (!std::isfinite(valley0)) {
        throw InvalidArgument("loop.valley0 must be finite");
    }
}

// =============================================================================
// Single cycle
// =============================================================================

CycleResult solve_cycle(const RampCycleInput& input, const InterferenceSpec& spec,
                        const ComparatorParams& cmp, double horizon,
                        const CycleSolverOptions& opts) {
    input.validate();
    cmp.validate();
    if (!(horizon > input.t_start)) {
        throw InvalidArgument("solve_cycle: horizon must lie after t_start");
    }

    QuadratureConfig cfg = opts.quadrature;
    cfg.step = cycle_step(spec, input.m1, cmp, opts);

    const GridFunction overdrive{
        [&](double t) { return input.ramp(t) + spec(t) - input.command; }, input.t_start, horizon};
    const ThresholdCrossing trip = integrate_to_threshold(overdrive, input.t_start, cmp.trip_area(), cfg);

    CycleResult out;
    out.t_c = trip.release;
    out.t_on = trip.theta;
    out.t_od = out.t_on - out.t_c;
    out.peak = input.ramp(out.t_on);
    out.i_e = input.command - out.peak;
    out.w_tc = spec(out.t_c);
    return out;
}

double default_horizon(const RampCycleInput& input, const InterferenceSpec& spec,
                       const ComparatorParams& cmp, double B) {
    const double amp = amplitude_bound(spec);
    const double rise = std::max(0.0, input.command - input.initial) + 2.0 * amp;
    const double longest = positive_root(amp, input.m1, cmp.trip_area() + std::abs(B));
    return input.t_start + rise / input.m1 + 2.0 * longest + zero_interference_delay(input.m1, cmp);
}

// =============================================================================
// Closed-form delay bounds
// =============================================================================

double delay_integral_bound(const InterferenceSpec& spec, IntegralBound convention) {
    return integral_bound_B(spec, convention);
}

DelayBounds delay_bounds(double w_at_tc, double m1, const ComparatorParams& cmp, double B) {
    require_positive(m1, "m1");
    require_trip_above_bound(cmp, B);
    return {positive_root(w_at_tc, m1, cmp.trip_area() - B),
            positive_root(w_at_tc, m1, cmp.trip_area() + B)};
}

double max_overdrive_delay(double amp_bound, double m1, const ComparatorParams& cmp, double B) {
    return delay_bounds(amp_bound, m1, cmp, B).t_u;
}

double min_overdrive_delay(double amp_bound, double m1, const ComparatorParams& cmp, double B) {
    return delay_bounds(-amp_bound, m1, cmp, B).t_l;
}

double stability_mu(double amp_bound, double m1, const ComparatorParams& cmp, double B) {
    const double num = 2.0 * m1 * (cmp.trip_area() - B);
    if (amp_bound == 0.0) {
        return num > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return num / (amp_bound * amp_bound);
}

bool stability_predicate(double amp_bound, double m1, const ComparatorParams& cmp, double B) {
    return cmp.trip_area() > B && stability_mu(amp_bound, m1, cmp, B) >= 8.0;
}

// =============================================================================
// Sector and stability
// =============================================================================

SectorQuotients sector_estimate(const RampCycleInput& input, const InterferenceSpec& spec,
                                const ComparatorParams& cmp, double delta,
                                const CycleSolverOptions& opts) {
    input.validate();
    if (!(delta > 0.0)) {
        const double scale = std::max({std::abs(input.command), amplitude_bound(spec),
                                       input.m1 * zero_interference_delay(input.m1, cmp)});
        delta = 1e-6 * scale;
    }

    const auto solve_at = [&](double command) {
        RampCycleInput in = input;
        in.command = command;
        const double horizon = default_horizon(in, spec, cmp, delay_integral_bound(spec));
        return solve_cycle(in, spec, cmp, horizon, opts);
    };
    SectorQuotients out;
    out.delta = delta;
    out.base = solve_at(input.command);
    const CycleResult up = solve_at(input.command + delta);
    const CycleResult down = solve_at(input.command - delta);

    const double dt_right = up.t_on - out.base.t_on;
    const double dt_left = out.base.t_on - down.t_on;
    const double floor = 1e-13 * std::max(1.0, std::abs(out.base.t_on));
    if (std::abs(dt_right) <= floor || std::abs(dt_left) <= floor) {
        std::ostringstream os;
        os << "sector_estimate: degenerate perturbation, |dt_on| below " << floor
           << " for delta = " << delta << "; use a larger delta";
        throw InvalidArgument(os.str());
    }
    out.q_right = (up.i_e - out.base.i_e) / dt_right;
    out.q_left = (out.base.i_e - down.i_e) / dt_left;
    return out;
}

bool sector_bound_check(const std::vector<SectorSample>& samples, double amp_bound,
                        double t_od_min) {
    require_positive(t_od_min, "t_od_min");
    const double slope = amp_bound / t_od_min;
    return std::all_of(samples.begin(), samples.end(), [slope](const SectorSample& s) {
        return s.t_on_dev == 0.0 || (s.psi + slope * s.t_on_dev) * s.t_on_dev > 0.0;
    });
}

bool stability_condition(double q_right, double q_left, double m1) {
    return std::min(q_right, q_left) > -0.5 * m1;
}

// =============================================================================
// Closed loop
// =============================================================================

LoopTrajectory iterate_loop(const LoopParams& loop, const RampCycleInput& input,
                            const InterferenceSpec& spec, const ComparatorParams& cmp,
                            const CycleSolverOptions& opts) {
    loop.validate();
    input.validate();
    cmp.validate();

    LoopTrajectory traj;
    traj.cycles.reserve(loop.n_cycles);
    const double B = delay_integral_bound(spec);
    double t = input.t_start;
    double valley = loop.valley0;
    for (std::size_t n = 0; n < loop.n_cycles; ++n) {
        RampCycleInput in = input;
        in.t_start = t;
        in.initial = valley;
        try {
            const CycleResult c = solve_cycle(in, spec, cmp, default_horizon(in, spec, cmp, B), opts);
            traj.cycles.push_back({n, t, valley, c});
            valley = c.peak - loop.m2 * loop.t_off;
            t = c.t_on + loop.t_off;
        } catch (const Error& e) {
            traj.error = "cycle " + std::to_string(n) + ": " + e.what();
            break;
        }
    }
    return traj;
}

double aux_function_y(double x, double mu) {
    if (!(mu > 0.0)) {
        throw InvalidArgument("aux_function_y: mu must be > 0");
    }
    return (-1.0 - x) / (x + std::sqrt(x * x + mu));
}

} // namespace odelay
