#include "odelay/interference.hpp"

#include "odelay/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

namespace odelay {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Omegas closer than this (relative) are treated as one line.
constexpr double kOmegaMergeTol = 1e-12;

void check_line(const SpectrumLine& line, std::size_t index) {
    const std::string where = "line " + std::to_string(index) + ": ";
    if (!std::isfinite(line.omega) || !(line.omega > 0.0)) {
        throw InvalidArgument(where + "omega must be finite and > 0");
    }
    if (!std::isfinite(line.amplitude) || line.amplitude < 0.0) {
        throw InvalidArgument(where + "amplitude must be finite and >= 0");
    }
    if (!std::isfinite(line.phase)) {
        throw InvalidArgument(where + "phase must be finite");
    }
}

} // namespace

double wrap_phase(double phase) noexcept {
    double r = std::fmod(phase, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    // fmod of a tiny negative number can round up to exactly 2*pi.
    return r >= kTwoPi ? 0.0 : r;
}

InterferenceSpec InterferenceSpec::from_lines(std::vector<SpectrumLine> lines) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
        check_line(lines[i], i);
    }
    std::stable_sort(lines.begin(), lines.end(),
                     [](const SpectrumLine& a, const SpectrumLine& b) { return a.omega < b.omega; });

    InterferenceSpec spec;
    for (const SpectrumLine& line : lines) {
        if (!spec.lines_.empty()) {
            SpectrumLine& last = spec.lines_.back();
            if (std::abs(line.omega - last.omega) <= kOmegaMergeTol * line.omega) {
                const std::complex<double> sum = std::polar(last.amplitude, last.phase) +
                                                 std::polar(line.amplitude, line.phase);
                last.amplitude = std::abs(sum);
                last.phase = last.amplitude > 0.0 ? wrap_phase(std::arg(sum)) : 0.0;
                ++spec.merged_;
                continue;
            }
        }
        spec.lines_.push_back({line.omega, line.amplitude, wrap_phase(line.phase)});
    }
    return spec;
}

double InterferenceSpec::omega_max() const noexcept {
    return lines_.empty() ? 0.0 : lines_.back().omega;
}

std::vector<double> InterferenceSpec::phases() const {
    std::vector<double> out;
    out.reserve(lines_.size());
    for (const auto& l : lines_) {
        out.push_back(l.phase);
    }
    return out;
}

InterferenceSpec InterferenceSpec::with_phases(std::span<const double> phases) const {
    if (phases.size() != lines_.size()) {
        throw InvalidArgument("with_phases: expected " + std::to_string(lines_.size()) +
                              " phases, got " + std::to_string(phases.size()));
    }
    InterferenceSpec out = *this;
    for (std::size_t i = 0; i < phases.size(); ++i) {
        if (!std::isfinite(phases[i])) {
            throw InvalidArgument("with_phases: phase " + std::to_string(i) + " is not finite");
        }
        out.lines_[i].phase = wrap_phase(phases[i]);
    }
    return out;
}

InterferenceSpec InterferenceSpec::time_shifted(double s) const {
    InterferenceSpec out = *this;
    for (auto& l : out.lines_) {
        l.phase = wrap_phase(l.phase + l.omega * s);
    }
    return out;
}

InterferenceSpec InterferenceSpec::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw InvalidArgument("scaled: factor must be finite and > 0");
    }
    InterferenceSpec out = *this;
    for (auto& l : out.lines_) {
        l.amplitude *= factor;
    }
    return out;
}

double InterferenceSpec::operator()(double t) const noexcept {
    double sum = 0.0;
    for (const auto& l : lines_) {
        sum += l.amplitude * std::cos(l.omega * t + l.phase);
    }
    return sum;
}

double eval_w(const InterferenceSpec& spec, double t) noexcept { return spec(t); }

double eval_w_slope(const InterferenceSpec& spec, double t) noexcept {
    double sum = 0.0;
    for (const auto& l : spec.lines()) {
        sum -= l.amplitude * l.omega * std::sin(l.omega * t + l.phase);
    }
    return sum;
}

double w_antiderivative(const InterferenceSpec& spec, double t) noexcept {
    double sum = 0.0;
    for (const auto& l : spec.lines()) {
        sum += l.amplitude / l.omega * std::sin(l.omega * t + l.phase);
    }
    return sum;
}

double amplitude_bound(const InterferenceSpec& spec) noexcept {
    double sum = 0.0;
    for (const auto& l : spec.lines()) {
        sum += l.amplitude;
    }
    return sum;
}

double slope_bound(const InterferenceSpec& spec) noexcept {
    double sum = 0.0;
    for (const auto& l : spec.lines()) {
        sum += l.amplitude * l.omega;
    }
    return sum;
}

double integral_bound_B(const InterferenceSpec& spec, IntegralBound convention) noexcept {
    double sum = 0.0;
    for (const auto& l : spec.lines()) {
        sum += l.amplitude / l.omega;
    }
    switch (convention) {
    case IntegralBound::Antiderivative:
        return sum;
    case IntegralBound::Interval:
        return 2.0 * sum;
    case IntegralBound::DeltaWeight:
        return kTwoPi * sum;
    }
    return sum;
}

InterferenceSpec random_phase_draw(const InterferenceSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> phases;
    phases.reserve(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        phases.push_back(kTwoPi * u);
    }
    return spec.with_phases(phases);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    // splitmix64 finalizer over the combined key.
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace odelay
