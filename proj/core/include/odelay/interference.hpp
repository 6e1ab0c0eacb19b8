#pragma once

// Interference w(t) modelled as a finite line spectrum,
//
//     w(t) = sum_i a_i cos(omega_i t + phi_i),
//
// standing in for a continuous |W(omega)| and phase phi(omega).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace odelay {

struct SpectrumLine {
    double omega = 1.0;      ///< rad/s, > 0
    double amplitude = 0.0;  ///< volts at the comparator input, >= 0
    double phase = 0.0;      ///< rad, kept in [0, 2*pi)
};

/// Which majorant of the integrated interference to report.
enum class IntegralBound {
    Antiderivative,  ///< sum a/omega: bounds |integral of w from -inf to t|
    Interval,        ///< 2 * sum a/omega: bounds |integral of w over any [t1, t2]|
    DeltaWeight,     ///< 2*pi * sum a/omega: delta-weight reading of int |W/omega| d omega
};

/// Canonical line spectrum: omegas strictly increasing, duplicates merged by
/// phasor addition, phases wrapped into [0, 2*pi). Immutable once built.
class InterferenceSpec {
public:
    InterferenceSpec() = default;

    /// Validates and canonicalizes. Throws InvalidArgument naming the offending
    /// index ("line 2: omega must be > 0") when a line is malformed.
    static InterferenceSpec from_lines(std::vector<SpectrumLine> lines);

    [[nodiscard]] const std::vector<SpectrumLine>& lines() const noexcept { return lines_; }
    [[nodiscard]] std::size_t size() const noexcept { return lines_.size(); }
    [[nodiscard]] bool empty() const noexcept { return lines_.empty(); }

    /// Number of input lines folded into another line during canonicalization.
    [[nodiscard]] std::size_t merged_count() const noexcept { return merged_; }

    [[nodiscard]] double omega_max() const noexcept;
    [[nodiscard]] std::vector<double> phases() const;

    /// Same omegas and amplitudes with the given phases (wrapped).
    [[nodiscard]] InterferenceSpec with_phases(std::span<const double> phases) const;

    /// phi_i -> phi_i + omega_i * s, i.e. w'(t) = w(t + s).
    [[nodiscard]] InterferenceSpec time_shifted(double s) const;

    /// Every amplitude multiplied by factor (> 0); omegas and phases unchanged.
    [[nodiscard]] InterferenceSpec scaled(double factor) const;

    double operator()(double t) const noexcept;

private:
    std::vector<SpectrumLine> lines_;
    std::size_t merged_ = 0;
};

/// Wraps an angle into [0, 2*pi).
[[nodiscard]] double wrap_phase(double phase) noexcept;

[[nodiscard]] double eval_w(const InterferenceSpec& spec, double t) noexcept;

/// dw/dt.
[[nodiscard]] double eval_w_slope(const InterferenceSpec& spec, double t) noexcept;

/// sum a/omega sin(omega t + phi), the zero-mean antiderivative of w.
[[nodiscard]] double w_antiderivative(const InterferenceSpec& spec, double t) noexcept;

/// A_ub = sum of amplitudes; |w(t)| never exceeds it.
[[nodiscard]] double amplitude_bound(const InterferenceSpec& spec) noexcept;

/// sum a*omega; |dw/dt| never exceeds it.
[[nodiscard]] double slope_bound(const InterferenceSpec& spec) noexcept;

/// B = sum a/omega under the default convention; see IntegralBound.
[[nodiscard]] double integral_bound_B(const InterferenceSpec& spec,
                                      IntegralBound convention = IntegralBound::Antiderivative) noexcept;

/// Same spectrum with phases drawn independently and uniformly on [0, 2*pi).
/// Deterministic for a fixed seed on every platform (mt19937_64, 53-bit mantissa).
[[nodiscard]] InterferenceSpec random_phase_draw(const InterferenceSpec& spec, std::uint64_t seed);

/// Decorrelated per-task seed for the index-th draw of a sweep.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

} // namespace odelay
