#pragma once

// =============================================================================
// Saturating partial sums and the saturating integral operator
// =============================================================================
// The saturating sum clamps the running total to zero after every grid cell:
//
//     S_0 = 0,   S_{n+1} = max(0, S_n + f(x_n) * dx)
//
// and the saturating integral is its limit as dx -> 0. Sample points are the
// left endpoints of each cell.
// =============================================================================

#include "odelay/errors.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>

namespace odelay {

/// A real function together with the closed interval it may be sampled on.
struct GridFunction {
    std::function<double(double)> sampler;
    double domain_lo = -std::numeric_limits<double>::infinity();
    double domain_hi = std::numeric_limits<double>::infinity();

    double operator()(double x) const { return sampler(x); }

    /// Throws InvalidArgument unless the sampler is set and domain_lo < domain_hi.
    void validate() const;
};

struct QuadratureConfig {
    double step = 1e-2;      ///< coarsest grid width
    int refine_limit = 20;   ///< maximum number of step halvings
    double rel_tol = 1e-8;   ///< relative agreement of successive estimates
    double abs_tol = 1e-13;  ///< absolute floor for the agreement test

    void validate() const;

    /// Same settings with a (possibly) smaller starting step.
    [[nodiscard]] QuadratureConfig with_max_step(double max_step) const;
};

/// Result of one literal left-endpoint clamped march over a uniform grid.
struct ClampedSum {
    double value = 0.0;
    std::size_t cells = 0;
    /// Node index where the final positive run starts (0 when the state never clamped).
    std::size_t last_release = 0;
    std::size_t clamp_count = 0;
};

/// Literal saturating partial sum of pre-sampled values on a uniform grid.
/// Throws InvalidArgument on an empty sequence, a non-positive step, or a
/// non-finite sample (the message names the index).
[[nodiscard]] double saturating_partial_sum(std::span<const double> samples, double step);

/// Clamped left-endpoint sum of f over [a, b] split into `cells` equal cells.
[[nodiscard]] ClampedSum clamped_riemann_sum(const GridFunction& f, double a, double b,
                                             std::size_t cells);

/// Limit of the clamped sum under step halving.
///
/// Each level runs the per-cell clamped march to find where its final positive
/// run begins, pins that release point to the sign change of f inside the
/// release cell, and integrates the run with 5-point Gauss-Legendre on the grid
/// cells. Levels are halved until two successive estimates agree to rel_tol.
/// The result is never negative. Throws NonConvergence with the last two
/// estimates when refine_limit is exhausted.
[[nodiscard]] double saturating_integral(const GridFunction& f, double a, double b,
                                         const QuadratureConfig& cfg = {});

struct ThresholdCrossing {
    double theta = 0.0;    ///< first point where the clamped accumulation reaches k
    double release = 0.0;  ///< start of the positive run that reaches k
    int levels = 0;        ///< grid levels used
};

/// Marches the clamped accumulation of f forward from `start` (state 0) and
/// returns the first point where it reaches k. The final cell is resolved by
/// bisection on the accumulated integral. Throws ThresholdUnreachable (with the
/// largest state seen) when f.domain_hi is hit first.
[[nodiscard]] ThresholdCrossing integrate_to_threshold(const GridFunction& f, double start,
                                                       double k,
                                                       const QuadratureConfig& cfg = {});

/// 5-point Gauss-Legendre rule on [lo, hi].
[[nodiscard]] double gauss_legendre5(const std::function<double(double)>& f, double lo,
                                     double hi);

/// Bisection for a sign change of g on [lo, hi]; g(lo) and g(hi) must differ in
/// sign (or one of them be zero). Stops when the bracket is narrower than
/// abs_tol or no longer splits in floating point.
template <class G>
[[nodiscard]] double bisect_sign_change(G&& g, double lo, double hi, double abs_tol = 0.0) {
    double g_lo = g(lo);
    if (g_lo == 0.0) {
        return lo;
    }
    const double g_hi = g(hi);
    if (g_hi == 0.0) {
        return hi;
    }
    if ((g_lo < 0.0) == (g_hi < 0.0)) {
        throw InvalidArgument("bisect_sign_change: no sign change on bracket");
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi) || hi - lo <= abs_tol) {
            break;
        }
        const double g_mid = g(mid);
        if (g_mid == 0.0) {
            return mid;
        }
        if ((g_mid < 0.0) == (g_lo < 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace odelay
