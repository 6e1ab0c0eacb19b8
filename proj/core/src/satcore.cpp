#include "odelay/satcore.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <string>

namespace odelay {

namespace {

constexpr std::array<double, 5> kGaussNodes = {
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
    0.2369268850561891};

// Largest cell count a single level may use.
constexpr std::size_t kMaxCells = std::size_t{1} << 34;

double sample_checked(const GridFunction& f, double x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite sample f(" << x << ") = " << v;
        throw InvalidArgument(os.str());
    }
    return v;
}

double gl5(const GridFunction& f, double lo, double hi) {
    if (hi <= lo) {
        return 0.0;
    }
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
        sum += kGaussWeights[i] * sample_checked(f, mid + half * kGaussNodes[i]);
    }
    return sum * half;
}

bool agrees(double prev, double cur, double scale, const QuadratureConfig& cfg) {
    return std::abs(cur - prev) <= cfg.rel_tol * std::abs(scale) + cfg.abs_tol;
}

std::size_t initial_cells(double length, double step) {
    const double n = std::ceil(length / step);
    return static_cast<std::size_t>(std::clamp(n, 1.0, 1e9));
}

// Release point of the final positive run, pinned to the sign change of f in
// the cell that ends at node `release_node`.
double pin_release(const GridFunction& f, double a, double h, std::size_t release_node) {
    if (release_node == 0) {
        return a;
    }
    const double lo = a + static_cast<double>(release_node - 1) * h;
    const double hi = a + static_cast<double>(release_node) * h;
    const double f_hi = sample_checked(f, hi);
    if (f_hi < 0.0) {
        // Clamped in the last cell: nothing accumulates past hi.
        return hi;
    }
    return bisect_sign_change([&](double x) { return sample_checked(f, x); }, lo, hi);
}

struct LevelEstimate {
    double value = 0.0;
    bool consistent = true;
};

LevelEstimate integral_level(const GridFunction& f, double a, double b, std::size_t cells,
                             const QuadratureConfig& cfg) {
    const ClampedSum march = clamped_riemann_sum(f, a, b, cells);
    const double h = (b - a) / static_cast<double>(cells);
    const double release = pin_release(f, a, h, march.last_release);

    LevelEstimate est;
    double acc = 0.0;
    double scale = 0.0;
    double cell_lo = release;
    for (std::size_t j = march.last_release; j < cells; ++j) {
        const double cell_hi = (j + 1 == cells) ? b : a + static_cast<double>(j + 1) * h;
        if (cell_hi > cell_lo) {
            acc += gl5(f, cell_lo, cell_hi);
            scale = std::max(scale, std::abs(acc));
            // The continuous accumulation must stay nonnegative along the run
            // for the march's release point to be the right one.
            if (acc < -(cfg.rel_tol * scale + cfg.abs_tol)) {
                est.consistent = false;
            }
        }
        cell_lo = cell_hi;
    }
    est.value = std::max(0.0, acc);
    return est;
}

} // namespace

// =============================================================================
// Configuration
// =============================================================================

void GridFunction::validate() const {
    if (!sampler) {
        throw InvalidArgument("GridFunction: sampler is empty");
    }
    if (!(domain_lo < domain_hi)) {
        throw InvalidArgument("GridFunction: domain_lo must be < domain_hi");
    }
}

void QuadratureConfig::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw InvalidArgument("QuadratureConfig: step must be finite and > 0");
    }
    if (refine_limit < 1) {
        throw InvalidArgument("QuadratureConfig: refine_limit must be >= 1");
    }
    if (!(rel_tol > 0.0)) {
        throw InvalidArgument("QuadratureConfig: rel_tol must be > 0");
    }
    if (!(abs_tol >= 0.0)) {
        throw InvalidArgument("QuadratureConfig: abs_tol must be >= 0");
    }
    if (!(std::ldexp(step, -refine_limit) > std::numeric_limits<double>::min())) {
        throw InvalidArgument("QuadratureConfig: step * 2^-refine_limit underflows");
    }
}

QuadratureConfig QuadratureConfig::with_max_step(double max_step) const {
    QuadratureConfig out = *this;
    if (max_step > 0.0 && max_step < out.step) {
        out.step = max_step;
    }
    return out;
}

double gauss_legendre5(const std::function<double(double)>& f, double lo, double hi) {
    GridFunction g{f, lo, hi};
    return gl5(g, lo, hi);
}

// =============================================================================
// Literal sums
// =============================================================================

double saturating_partial_sum(std::span<const double> samples, double step) {
    if (samples.empty()) {
        throw InvalidArgument("saturating_partial_sum: samples must be nonempty");
    }
    if (!(step > 0.0)) {
        throw InvalidArgument("saturating_partial_sum: step must be > 0");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) {
            throw InvalidArgument("saturating_partial_sum: non-finite sample at index " +
                                  std::to_string(i));
        }
        s = std::max(0.0, s + samples[i] * step);
    }
    return s;
}

ClampedSum clamped_riemann_sum(const GridFunction& f, double a, double b, std::size_t cells) {
    if (!(a < b)) {
        throw InvalidArgument("clamped_riemann_sum: requires a < b");
    }
    if (cells == 0) {
        throw InvalidArgument("clamped_riemann_sum: cells must be > 0");
    }
    const double h = (b - a) / static_cast<double>(cells);
    ClampedSum out;
    out.cells = cells;
    double s = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const double next = s + sample_checked(f, a + static_cast<double>(i) * h) * h;
        if (next < 0.0) {
            s = 0.0;
            out.last_release = i + 1;
            ++out.clamp_count;
        } else {
            s = next;
        }
    }
    out.value = s;
    return out;
}

// =============================================================================
// Saturating integral
// =============================================================================

double saturating_integral(const GridFunction& f, double a, double b,
                           const QuadratureConfig& cfg) {
    cfg.validate();
    if (!f.sampler) {
        throw InvalidArgument("saturating_integral: sampler is empty");
    }
    if (!(a < b)) {
        throw InvalidArgument("saturating_integral: requires a < b");
    }
    if (a < f.domain_lo || b > f.domain_hi) {
        throw InvalidArgument("saturating_integral: [a, b] leaves the function domain");
    }

    std::size_t cells = initial_cells(b - a, cfg.step);
    LevelEstimate prev = integral_level(f, a, b, cells, cfg);
    double before_prev = prev.value;
    for (int level = 1; level <= cfg.refine_limit && cells <= kMaxCells / 2; ++level) {
        cells *= 2;
        const LevelEstimate cur = integral_level(f, a, b, cells, cfg);
        if (prev.consistent && cur.consistent &&
            agrees(prev.value, cur.value, cur.value, cfg)) {
            return cur.value;
        }
        before_prev = prev.value;
        prev = cur;
    }
    std::ostringstream os;
    os << "saturating_integral: no agreement to rel_tol " << cfg.rel_tol << " after "
       << cfg.refine_limit << " halvings on [" << a << ", " << b << "]";
    throw NonConvergence(os.str(), before_prev, prev.value);
}

// =============================================================================
// Forward integration to a threshold
// =============================================================================

namespace {

struct ThresholdLevel {
    double theta = 0.0;
    double release = 0.0;
    bool consistent = true;
};

ThresholdLevel threshold_level(const GridFunction& f, double start, double k, double h) {
    const double hi_limit = f.domain_hi;

    // Literal clamped march until the state reaches k.
    double s = 0.0;
    double s_max = 0.0;
    std::size_t release_node = 0;
    std::size_t i = 0;
    bool crossed = false;
    for (;; ++i) {
        const double x = start + static_cast<double>(i) * h;
        if (x >= hi_limit) {
            break;
        }
        const double next = s + sample_checked(f, x) * h;
        if (next < 0.0) {
            s = 0.0;
            release_node = i + 1;
        } else {
            s = next;
        }
        s_max = std::max(s_max, s);
        if (s >= k) {
            crossed = true;
            break;
        }
    }
    if (!crossed) {
        std::ostringstream os;
        os << "integrate_to_threshold: accumulation peaks at " << s_max
           << " below threshold " << k << " before domain end " << hi_limit;
        throw ThresholdUnreachable(os.str(), s_max);
    }

    ThresholdLevel out;
    out.release = pin_release(f, start, h, release_node);

    // Continuous accumulation of the final run, cell by cell.
    double acc = 0.0;
    double cell_lo = out.release;
    for (std::size_t j = release_node;; ++j) {
        double cell_hi = start + static_cast<double>(j + 1) * h;
        if (cell_hi > hi_limit) {
            cell_hi = hi_limit;
        }
        if (!(cell_hi > cell_lo)) {
            out.consistent = false;
            out.theta = cell_lo;
            return out;
        }
        const double inc = gl5(f, cell_lo, cell_hi);
        if (acc + inc >= k) {
            const double base = acc;
            const double lo = cell_lo;
            out.theta = bisect_sign_change(
                [&](double t) { return base + gl5(f, lo, t) - k; }, cell_lo, cell_hi);
            return out;
        }
        acc += inc;
        if (acc < -1e-12 * k) {
            out.consistent = false;
        }
        cell_lo = cell_hi;
        if (cell_hi >= hi_limit) {
            out.consistent = false;
            out.theta = cell_hi;
            return out;
        }
    }
}

} // namespace

ThresholdCrossing integrate_to_threshold(const GridFunction& f, double start, double k,
                                         const QuadratureConfig& cfg) {
    cfg.validate();
    f.validate();
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw InvalidArgument("integrate_to_threshold: k must be finite and > 0");
    }
    if (!(start >= f.domain_lo && start < f.domain_hi)) {
        throw InvalidArgument("integrate_to_threshold: start outside the function domain");
    }

    double h = cfg.step;
    ThresholdLevel prev = threshold_level(f, start, k, h);
    double before_prev = prev.theta;
    for (int level = 1; level <= cfg.refine_limit; ++level) {
        h *= 0.5;
        const ThresholdLevel cur = threshold_level(f, start, k, h);
        if (prev.consistent && cur.consistent &&
            agrees(prev.theta, cur.theta, cur.theta - start, cfg) &&
            agrees(prev.release, cur.release, cur.theta - start, cfg)) {
            return {cur.theta, cur.release, level + 1};
        }
        before_prev = prev.theta;
        prev = cur;
    }
    std::ostringstream os;
    os << "integrate_to_threshold: crossing did not settle to rel_tol " << cfg.rel_tol
       << " after " << cfg.refine_limit << " halvings";
    throw NonConvergence(os.str(), before_prev, prev.theta);
}

} // namespace odelay
