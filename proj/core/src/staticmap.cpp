#include "odelay/staticmap.hpp"

#include "odelay/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace odelay {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

// Values closer than this (relative) are ties for the K3 search.
constexpr double kTieTolerance = 1e-12;

double scan_step(const InterferenceSpec& spec) {
    return (kPi / 10.0) / spec.omega_max();
}

GridFunction offset_integrand(const InterferenceSpec& spec, double offset, double lo, double hi) {
    return GridFunction{[&spec, offset](double x) { return x + spec(x) - offset; }, lo, hi};
}

struct Candidate {
    double value = 0.0;
    double offset = 0.0;
    std::vector<double> phases;
};

bool lexicographically_less(const Candidate& a, const Candidate& b) {
    if (a.phases != b.phases) {
        return std::lexicographical_compare(a.phases.begin(), a.phases.end(), b.phases.begin(),
                                            b.phases.end());
    }
    return a.offset < b.offset;
}

// Strict preference: larger value, or a tie broken lexicographically.
bool preferred(const Candidate& a, const Candidate& b) {
    const double tie = kTieTolerance * std::max({1.0, std::abs(a.value), std::abs(b.value)});
    if (a.value > b.value + tie) {
        return true;
    }
    if (b.value > a.value + tie) {
        return false;
    }
    return lexicographically_less(a, b);
}

struct Critical {
    double x = 0.0;
    bool minimum = false;  ///< slope of x + w(x) turns from negative to positive
};

/// Zeros of 1 + w'(x) in [lo, hi]; empty when the slope bound rules them out.
std::vector<Critical> critical_points(const InterferenceSpec& spec, double lo, double hi) {
    std::vector<Critical> out;
    if (spec.empty() || slope_bound(spec) < 1.0) {
        return out;
    }
    const auto slope = [&spec](double x) { return 1.0 + eval_w_slope(spec, x); };
    const auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / scan_step(spec)));
    const double h = (hi - lo) / static_cast<double>(cells);
    double x0 = lo;
    double s0 = slope(lo);
    for (std::size_t i = 1; i <= cells; ++i) {
        const double x1 = i == cells ? hi : lo + static_cast<double>(i) * h;
        const double s1 = slope(x1);
        if ((s0 < 0.0 && s1 > 0.0) || (s0 > 0.0 && s1 < 0.0)) {
            out.push_back({bisect_sign_change(slope, x0, x1, kRootTolerance), s0 < 0.0});
        } else if (s1 == 0.0 && i < cells) {
            out.push_back({x1, s0 < 0.0});
        }
        x0 = x1;
        s0 = s1;
    }
    return out;
}

/// Offsets at which K can peak for the given phases: -A_ub and every
/// local-minimum value of x + w(x) inside [-A_ub, A_ub].
std::vector<double> peak_offsets(const InterferenceSpec& shaped, double amp) {
    std::vector<double> out{-amp};
    for (const Critical& c : critical_points(shaped, -2.0 * amp, 2.0 * amp)) {
        const double b = c.x + shaped(c.x);
        if (c.minimum && b > -amp && b <= amp) {
            out.push_back(b);
        }
    }
    return out;
}

class KObjective {
public:
    KObjective(const InterferenceSpec& spec, const QuadratureConfig& cfg)
        : spec_(spec), cfg_(cfg), amp_(amplitude_bound(spec)) {}

    /// Best K over the peak offsets of the given phases.
    Candidate evaluate(std::vector<double> phases) const {
        for (double& p : phases) {
            p = wrap_phase(p);
        }
        const InterferenceSpec shaped = spec_.with_phases(phases);
        Candidate best{-1.0, 0.0, phases};
        for (const double b : peak_offsets(shaped, amp_)) {
            const Candidate c{eval_K(spec_, b, phases, cfg_).value, b, phases};
            if (preferred(c, best)) {
                best = c;
            }
        }
        return best;
    }

private:
    const InterferenceSpec& spec_;
    QuadratureConfig cfg_;
    double amp_;
};

Candidate coordinate_descent(const KObjective& objective, Candidate start, double step, double floor) {
    Candidate best = std::move(start);
    while (step >= floor) {
        bool improved = false;
        for (std::size_t i = 0; i < best.phases.size(); ++i) {
            for (const double dir : {1.0, -1.0}) {
                std::vector<double> p = best.phases;
                p[i] += dir * step;
                Candidate c = objective.evaluate(std::move(p));
                if (c.value > best.value && preferred(c, best)) {
                    best = std::move(c);
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            step *= 0.5;
        }
    }
    return best;
}

} // namespace

QuadratureConfig resolve_step(const InterferenceSpec& spec, const QuadratureConfig& cfg) {
    if (spec.empty()) {
        return cfg;
    }
    return cfg.with_max_step(scan_step(spec));
}

// =============================================================================
// Roots and K evaluation
// =============================================================================

RootPair roots_psi(const InterferenceSpec& spec, double b) {
    const double amp = amplitude_bound(spec);
    if (spec.empty() || amp == 0.0) {
        return {b, b};
    }
    const auto f = [&](double x) { return x + spec(x) - b; };
    const double lo = b - amp;
    const double hi = b + amp;

    std::vector<double> nodes{lo};
    std::vector<double> roots;
    for (const Critical& c : critical_points(spec, lo, hi)) {
        nodes.push_back(c.x);
        const double v = f(c.x);
        if (c.minimum && v > 0.0 && v <= kRootTolerance) {
            roots.push_back(c.x);
        }
    }
    nodes.push_back(hi);

    // x + w(x) is monotone between consecutive nodes.
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double p = nodes[i];
        const double q = nodes[i + 1];
        const double fp = f(p);
        const double fq = f(q);
        if (fp == 0.0) {
            roots.push_back(p);
        }
        if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
            roots.push_back(bisect_sign_change(f, p, q, kRootTolerance));
        }
    }
    if (f(hi) == 0.0) {
        roots.push_back(hi);
    }
    if (roots.empty()) {
        // Only reachable through rounding when w touches +-A_ub at an end point.
        const double edge = f(lo) >= 0.0 ? lo : hi;
        return {edge, edge};
    }
    const auto [mn, mx] = std::minmax_element(roots.begin(), roots.end());
    return {*mn, *mx};
}

KEvalResult eval_K(const InterferenceSpec& spec, double offset, const std::vector<double>& phases,
                   const QuadratureConfig& cfg) {
    if (phases.size() != spec.size()) {
        throw InvalidArgument("eval_K: expected " + std::to_string(spec.size()) + " phases, got " +
                              std::to_string(phases.size()));
    }
    const InterferenceSpec shaped = spec.with_phases(phases);
    const RootPair roots = roots_psi(shaped, offset);

    KEvalResult out;
    out.psi_l = roots.psi_l;
    out.psi_h = roots.psi_h;
    out.offset = offset;
    out.phases = shaped.phases();

    const double start = offset - amplitude_bound(shaped) - 1.0;
    const GridFunction f = offset_integrand(shaped, offset, start, roots.psi_h);
    out.value = saturating_integral(f, start, roots.psi_h, resolve_step(shaped, cfg));
    return out;
}

ShiftedArguments shift_transform(double offset, const std::vector<double>& phases,
                                 const InterferenceSpec& spec) {
    const InterferenceSpec shaped = spec.with_phases(phases);
    const double psi_l = roots_psi(shaped, offset).psi_l;
    ShiftedArguments out;
    out.shift = psi_l;
    out.offset = offset - psi_l;
    out.phases = shaped.time_shifted(psi_l).phases();
    return out;
}

// =============================================================================
// K3 search
// =============================================================================

KEvalResult compute_K3(const InterferenceSpec& spec, const K3Options& opts) {
    const std::size_t dim = spec.size();
    if (dim > opts.max_dimension) {
        std::ostringstream os;
        os << "compute_K3: " << dim << " phase dimensions exceed the budget of "
           << opts.max_dimension;
        throw BudgetExceeded(os.str(), dim);
    }
    if (opts.grid_budget < 1 || !(opts.refine_tol > 0.0)) {
        throw InvalidArgument("compute_K3: grid_budget must be >= 1 and refine_tol > 0");
    }
    if (dim == 0 || amplitude_bound(spec) == 0.0) {
        return eval_K(spec, 0.0, spec.phases(), opts.quadrature);
    }

    // Largest per-line count whose dim-th power fits the budget.
    std::size_t points = 1;
    const auto fits = [&](std::size_t n) {
        double total = 1.0;
        for (std::size_t i = 0; i < dim; ++i) {
            total *= static_cast<double>(n);
        }
        return total <= static_cast<double>(opts.grid_budget);
    };
    while (fits(points + 1)) {
        ++points;
    }
    const double phase_step = kTwoPi / static_cast<double>(points);

    const KObjective objective(spec, opts.quadrature);
    std::vector<Candidate> grid;
    std::vector<std::size_t> digits(dim, 0);
    for (;;) {
        std::vector<double> phases(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            phases[i] = phase_step * static_cast<double>(digits[i]);
        }
        grid.push_back(objective.evaluate(std::move(phases)));
        std::size_t d = 0;
        while (d < dim && ++digits[d] == points) {
            digits[d++] = 0;
        }
        if (d == dim) {
            break;
        }
    }

    std::sort(grid.begin(), grid.end(), preferred);
    std::vector<Candidate> starts(grid.begin(),
                                  grid.begin() + static_cast<std::ptrdiff_t>(
                                                     std::min(opts.refine_starts, grid.size())));
    starts.push_back(objective.evaluate(spec.phases()));

    Candidate best = grid.front();
    for (Candidate& s : starts) {
        Candidate polished = coordinate_descent(objective, std::move(s), 0.5 * phase_step,
                                                opts.refine_tol * kTwoPi);
        if (preferred(polished, best)) {
            best = std::move(polished);
        }
    }
    return eval_K(spec, best.offset, best.phases, opts.quadrature);
}

// =============================================================================
// Static map and continuity
// =============================================================================

double static_map(double b, double k, const InterferenceSpec& spec, const QuadratureConfig& cfg) {
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw InvalidArgument("static_map: k must be finite and > 0");
    }
    const double amp = amplitude_bound(spec);
    const double start = b - amp - 1.0;
    // Past b + A_ub the integrand exceeds x - b - A_ub, which alone reaches k by sqrt(2k).
    const double end = b + amp + std::sqrt(2.0 * k) + 1.0;
    const GridFunction f = offset_integrand(spec, b, start, end);
    return integrate_to_threshold(f, start, k, resolve_step(spec, cfg)).theta;
}

ContinuityReport continuity_condition(const InterferenceSpec& spec, double m1, double v_trig,
                                      double tau, const K3Options& opts) {
    if (!(m1 > 0.0)) {
        throw InvalidArgument("continuity_condition: m1 must be > 0");
    }
    if (!(v_trig >= 0.0) || !(tau >= 0.0)) {
        throw InvalidArgument("continuity_condition: V_trig and tau must be >= 0");
    }
    ContinuityReport rep;
    const InterferenceSpec normalized = spec.empty() ? spec : spec.scaled(1.0 / m1);
    rep.argmax = compute_K3(normalized, opts);
    rep.k3 = rep.argmax.value;
    rep.lhs = v_trig * tau;
    rep.threshold_rhs = m1 * rep.k3;
    rep.margin = rep.lhs - rep.threshold_rhs;
    rep.satisfied = rep.margin >= 0.0;
    return rep;
}

LipschitzProbe lipschitz_probe(const InterferenceSpec& spec, double k, double b0, double delta_b,
                               const QuadratureConfig& cfg) {
    if (!(delta_b > 0.0)) {
        throw InvalidArgument("lipschitz_probe: delta_b must be > 0");
    }
    const double b1 = b0 + delta_b;
    LipschitzProbe out;
    out.theta0 = static_map(b0, k, spec, cfg);
    out.theta1 = static_map(b1, k, spec, cfg);
    out.ratio = std::abs(out.theta1 - out.theta0) / delta_b;

    const double lo = std::min(out.theta0, out.theta1);
    const double hi = std::max(out.theta0, out.theta1);
    std::size_t samples = 64;
    if (!spec.empty()) {
        samples = std::max<std::size_t>(
            samples, static_cast<std::size_t>(std::ceil(4.0 * (hi - lo) / scan_step(spec))));
    }
    out.mu1 = hi + spec(hi) - b1;
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples);
        out.mu1 = std::min(out.mu1, x + spec(x) - b1);
    }

    constexpr int kOffsetSamples = 9;
    out.mu2 = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kOffsetSamples; ++i) {
        const double b = b0 + delta_b * static_cast<double>(i) / (kOffsetSamples - 1);
        out.mu2 = std::max(out.mu2, out.theta0 - roots_psi(spec, b).psi_l);
    }

    if (!(out.mu1 > 0.0)) {
        std::ostringstream os;
        os << "continuity precondition violated: mu1 = " << out.mu1
           << " <= 0 on [" << lo << ", " << hi << "] (k is not above K3 at b = " << b0 << ")";
        throw PreconditionViolation(os.str());
    }
    return out;
}

} // namespace odelay
