#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace odm {

struct Constant {
    double level = 0.0;
};

/// intercept + slope * t
struct Ramp {
    double slope = 0.0;
    double intercept = 0.0;
};

/// amplitude * sin(2 pi f t + phase)
struct Sine {
    double amplitude = 1.0;
    double frequency_hz = 1.0;
    double phase = 0.0;
};

struct Segment;

/// Segments evaluated in local time (t - start). Right-continuous at boundaries.
struct Piecewise {
    std::vector<Segment> segments;
};

struct SignalSpec {
    std::variant<Constant, Ramp, Sine, Piecewise> shape;

    /// Throws ParameterError on non-finite fields or badly ordered segments.
    void validate() const;
    [[nodiscard]] double operator()(double t) const;

    /// Start times of piecewise segments after the first, i.e. candidate jump times.
    [[nodiscard]] std::vector<double> boundaries() const;
};

struct Segment {
    double start = 0.0;
    SignalSpec signal;
};

[[nodiscard]] SignalSpec constant(double level);
[[nodiscard]] SignalSpec ramp(double slope, double intercept = 0.0);
[[nodiscard]] SignalSpec sine(double amplitude, double frequency_hz, double phase = 0.0);
[[nodiscard]] SignalSpec piecewise(std::vector<Segment> segments);

struct SampledSignal {
    double delta = 1.0;
    std::vector<double> values; ///< x(k delta), k = 0..n-1
    std::optional<SignalSpec> spec;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

/// Number of grid points k*delta strictly below horizon.
[[nodiscard]] std::int64_t grid_count(double delta, double horizon);

/// Samples spec on [0, horizon) at t_k = k * delta.
[[nodiscard]] SampledSignal sample(const SignalSpec& spec, double delta, double horizon);

struct VariationBound {
    double d = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    int oversample_factor = 32;
};

inline constexpr int kDefaultOversample = 32;

/// Smallest D with sup |x(t) - x(t_k)| <= D delta over oversampled points of every
/// grid cell [t_k, t_{k+1}] contained in [alpha, beta].
[[nodiscard]] VariationBound estimate_variation_bound(const SignalSpec& spec, double delta,
                                                      double alpha, double beta,
                                                      int oversample_factor = kDefaultOversample);

/// Grid cells [t_k, t_{k+1}] fully inside [alpha, beta], as an inclusive k range.
/// Returns nullopt when there is none.
struct CellRange {
    std::int64_t first = 0;
    std::int64_t last = 0;
};
[[nodiscard]] std::optional<CellRange> cells_inside(double delta, double alpha, double beta);

struct GrowthBound {
    double scale = 1.0;    ///< C
    double exponent = 1.0; ///< c
};

struct GrowthViolation {
    std::int64_t k = 0;
    std::int64_t m = 0;
    double lhs = 0.0; ///< |x(t_k + m delta)|
    double rhs = 0.0; ///< C (|x(t_k)| + (m delta)^c)
};

/// Grid check of |x(t_k + m delta)| <= C (|x(t_k)| + (m delta)^c) for all k and m >= 1.
[[nodiscard]] std::vector<GrowthViolation> verify_growth(const SampledSignal& samples,
                                                         const GrowthBound& bound);

/// Smallest C (to rounding) for which verify_growth passes at the given exponent.
[[nodiscard]] GrowthBound fit_growth_bound(const SampledSignal& samples, double exponent = 1.0);

} // namespace odm
