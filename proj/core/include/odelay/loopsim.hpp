#pragma once

// =============================================================================
// Constant off-time loop with an overdrive-delay comparator
// =============================================================================
// The comparator is a clamped integrator of its overdrive
//
//     v(t) = ramp(t) + w(t) - command,   ramp(t) = initial + m1 (t - t_start),
//
// whose state cannot go negative and which trips once the state reaches
// V_th * tau_c (worst case g = G, tau_c = C_eff / G). The crossing time t_c is
// the last instant the state left zero; the variable delay is t_on - t_c.
//
// Sign convention: i_e = command - peak with peak = ramp(t_on), the current
// actually reached when the comparator trips.
// =============================================================================

#include "odelay/interference.hpp"
#include "odelay/satcore.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace odelay {

struct ComparatorParams {
    double G = 1.0;      ///< transconductance bound, S
    double C_eff = 1.0;  ///< effective capacitance, F
    double V_th = 1.0;   ///< trip threshold, V

    [[nodiscard]] double tau_c() const { return C_eff / G; }
    /// V_th * tau_c: the integrated overdrive needed to trip, V*s.
    [[nodiscard]] double trip_area() const { return V_th * tau_c(); }
    void validate() const;
};

struct RampCycleInput {
    double m1 = 1.0;       ///< comparator-input slope, V/s
    double command = 0.0;  ///< command level at the comparator input, V
    double t_start = 0.0;  ///< cycle start, s; the integrator is reset here
    double initial = 0.0;  ///< ramp value at t_start (valley), V

    [[nodiscard]] double ramp(double t) const { return initial + m1 * (t - t_start); }
    void validate() const;
};

struct CycleResult {
    double t_c = 0.0;
    double t_on = 0.0;
    double t_od = 0.0;
    double peak = 0.0;
    double i_e = 0.0;
    double w_tc = 0.0;  ///< interference at the crossing
};

struct LoopParams {
    double t_off = 1.0;  ///< s
    double m2 = 1.0;     ///< off-slope, V/s
    std::size_t n_cycles = 1;
    double valley0 = 0.0;  ///< V

    void validate() const;
};

struct CycleRecord {
    std::size_t index = 0;
    double t_start = 0.0;
    double valley = 0.0;
    CycleResult cycle;
};

struct LoopTrajectory {
    std::vector<CycleRecord> cycles;
    std::optional<std::string> error;  ///< set when a cycle failed; cycles holds the prefix
};

struct DelayBounds {
    double t_l = 0.0;
    double t_u = 0.0;
};

struct SectorQuotients {
    double q_right = 0.0;
    double q_left = 0.0;
    double delta = 0.0;
    CycleResult base;
};

struct SectorSample {
    double t_on_dev = 0.0;  ///< deviation of t_on from the operating point
    double psi = 0.0;       ///< matching deviation of i_e
};

/// Options for solve_cycle. step == 0 selects min(1/(20 omega_max), t_od_est/1000).
struct CycleSolverOptions {
    double step = 0.0;
    QuadratureConfig quadrature{};
};

/// One on-interval: integrate the clamped overdrive from input.t_start until it
/// reaches V_th * tau_c. `horizon` is the absolute time past which the search
/// gives up (ThresholdUnreachable).
[[nodiscard]] CycleResult solve_cycle(const RampCycleInput& input, const InterferenceSpec& spec,
                                      const ComparatorParams& cmp, double horizon,
                                      const CycleSolverOptions& opts = {});

/// Horizon that always contains the trip for a cycle starting at input.t_start.
[[nodiscard]] double default_horizon(const RampCycleInput& input, const InterferenceSpec& spec,
                                     const ComparatorParams& cmp, double B);

/// Majorant of |integral of w over [t_c, t_on]| used by the delay bounds.
[[nodiscard]] double delay_integral_bound(const InterferenceSpec& spec,
                                          IntegralBound convention = IntegralBound::Interval);

/// t_l and t_u at the given w(t_c). Throws PreconditionViolation when
/// V_th * tau_c <= B.
[[nodiscard]] DelayBounds delay_bounds(double w_at_tc, double m1, const ComparatorParams& cmp,
                                       double B);

[[nodiscard]] double max_overdrive_delay(double amp_bound, double m1, const ComparatorParams& cmp,
                                         double B);

/// t_l evaluated at w(t_c) = -A_ub.
[[nodiscard]] double min_overdrive_delay(double amp_bound, double m1, const ComparatorParams& cmp,
                                         double B);

/// mu = 2 m1 (V_th tau_c - B) / A_ub^2 (infinite when A_ub = 0).
[[nodiscard]] double stability_mu(double amp_bound, double m1, const ComparatorParams& cmp,
                                  double B);

/// mu >= 8 together with V_th tau_c > B.
[[nodiscard]] bool stability_predicate(double amp_bound, double m1, const ComparatorParams& cmp,
                                       double B);

/// Difference quotients di_e / dt_on for a command perturbation of +delta
/// (right) and -delta (left). delta <= 0 selects 1e-6 times the command scale.
[[nodiscard]] SectorQuotients sector_estimate(const RampCycleInput& input,
                                              const InterferenceSpec& spec,
                                              const ComparatorParams& cmp, double delta = 0.0,
                                              const CycleSolverOptions& opts = {});

/// True iff (psi + slope * t) * t > 0 for every sample with t != 0, where
/// slope = A_ub / t_od_min.
[[nodiscard]] bool sector_bound_check(const std::vector<SectorSample>& samples, double amp_bound,
                                      double t_od_min);

/// min(q_right, q_left) > -m1 / 2.
[[nodiscard]] bool stability_condition(double q_right, double q_left, double m1);

/// Runs loop.n_cycles on-intervals; each starts at the previous t_on + t_off
/// from valley = previous peak - m2 * t_off. Interference keeps absolute time.
[[nodiscard]] LoopTrajectory iterate_loop(const LoopParams& loop, const RampCycleInput& input,
                                          const InterferenceSpec& spec,
                                          const ComparatorParams& cmp,
                                          const CycleSolverOptions& opts = {});

/// y(x) = (-1 - x) / (x + sqrt(x^2 + mu)).
[[nodiscard]] double aux_function_y(double x, double mu);

} // namespace odelay
