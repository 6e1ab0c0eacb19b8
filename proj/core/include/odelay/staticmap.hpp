#pragma once

// =============================================================================
// Static current mapping b -> theta and the K functionals
// =============================================================================
// theta = M(b) is the first point where the saturating integral of
// x + w(x) - b, taken from far enough left that the state is still zero,
// reaches k = V_trig * C_eff / G.
//
// K(b, phases) is the same saturating integral stopped at the largest root of
// x + w(x) - b. K3 maximizes it over b in [-A_ub, A_ub] and all phases; the
// static map is continuous whenever k exceeds K3.
// =============================================================================

#include "odelay/interference.hpp"
#include "odelay/satcore.hpp"

#include <cstddef>
#include <vector>

namespace odelay {

struct RootPair {
    double psi_l = 0.0;  ///< lowest root of x + w(x) - b
    double psi_h = 0.0;  ///< largest root
};

struct KEvalResult {
    double value = 0.0;
    double psi_l = 0.0;
    double psi_h = 0.0;
    double offset = 0.0;
    std::vector<double> phases;
};

struct ShiftedArguments {
    double offset = 0.0;
    std::vector<double> phases;
    double shift = 0.0;  ///< psi_l of the original problem
};

struct ContinuityReport {
    double k3 = 0.0;             ///< K3 of the slope-normalized spectrum
    double threshold_rhs = 0.0;  ///< m1 * k3
    double lhs = 0.0;            ///< V_trig * tau
    bool satisfied = false;      ///< lhs >= rhs
    double margin = 0.0;         ///< lhs - rhs
    KEvalResult argmax;          ///< maximizer on the normalized spectrum
};

struct LipschitzProbe {
    double ratio = 0.0;  ///< |theta1 - theta0| / delta_b
    double mu1 = 0.0;
    double mu2 = 0.0;
    double theta0 = 0.0;
    double theta1 = 0.0;

    [[nodiscard]] double bound() const { return mu2 / mu1; }
};

struct K3Options {
    std::size_t grid_budget = 2048;  ///< phase-grid points before refinement
    std::size_t max_dimension = 6;
    std::size_t refine_starts = 4;   ///< best grid points polished by coordinate descent
    double refine_tol = 1e-6;        ///< stop once the phase step is below this fraction of 2*pi
    QuadratureConfig quadrature{};
};

/// Absolute tolerance used for every psi root, and the depth below which a
/// local minimum of x + w(x) - b counts as a (tangential) root.
inline constexpr double kRootTolerance = 1e-12;

/// Lowest and largest roots of x + w(x) - b. The interval [b - A_ub, b + A_ub]
/// is split at the critical points of x + w(x), each piece is monotone and
/// holds at most one root, so shallow dips and tangencies are not missed.
[[nodiscard]] RootPair roots_psi(const InterferenceSpec& spec, double b);

/// K(offset, phases): saturating integral of x + w(x) - offset from
/// offset - A_ub - 1 up to psi_h. `phases` replaces the spectrum's own phases.
[[nodiscard]] KEvalResult eval_K(const InterferenceSpec& spec, double offset,
                                 const std::vector<double>& phases,
                                 const QuadratureConfig& cfg = {});

/// Moves the lowest root to zero: offset' = offset - psi_l, phase_i' = phase_i + omega_i psi_l.
[[nodiscard]] ShiftedArguments shift_transform(double offset, const std::vector<double>& phases,
                                               const InterferenceSpec& spec);

/// Maximum of eval_K over offset in [-A_ub, A_ub] and the phase hypercube.
/// For fixed phases K decreases in the offset between the values where a new
/// largest root appears, which are the local-minimum values of x + w(x); only
/// those offsets and -A_ub are evaluated. The phases are searched by a grid
/// followed by coordinate descent; ties resolve to the lexicographically
/// smallest phase vector. Throws BudgetExceeded when the
/// spectrum has more lines than opts.max_dimension.
[[nodiscard]] KEvalResult compute_K3(const InterferenceSpec& spec, const K3Options& opts = {});

/// theta = M(b) for threshold k > 0.
[[nodiscard]] double static_map(double b, double k, const InterferenceSpec& spec,
                                const QuadratureConfig& cfg = {});

/// V_trig * tau >= m1 * K3(spectrum / m1).
[[nodiscard]] ContinuityReport continuity_condition(const InterferenceSpec& spec, double m1,
                                                    double v_trig, double tau,
                                                    const K3Options& opts = {});

/// Secant slope of M between b0 and b0 + delta_b together with the constants
/// mu1 = min over [theta0, theta1] of x + w(x) - b and
/// mu2 = max over [b0, b0 + delta_b] of theta0 - psi_l(b).
/// Throws PreconditionViolation when mu1 <= 0.
[[nodiscard]] LipschitzProbe lipschitz_probe(const InterferenceSpec& spec, double k, double b0,
                                             double delta_b, const QuadratureConfig& cfg = {});

/// Quadrature settings whose coarsest step resolves the fastest line.
[[nodiscard]] QuadratureConfig resolve_step(const InterferenceSpec& spec,
                                            const QuadratureConfig& cfg);

} // namespace odelay
