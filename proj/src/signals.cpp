#include "odm/signals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "odm/error.hpp"

namespace odm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw ParameterError(std::string("signal field '") + what + "' is not finite");
}

} // namespace

void SignalSpec::validate() const {
    std::visit(overloaded{
                   [](const Constant& c) { require_finite(c.level, "level"); },
                   [](const Ramp& r) {
                       require_finite(r.slope, "slope");
                       require_finite(r.intercept, "intercept");
                   },
                   [](const Sine& s) {
                       require_finite(s.amplitude, "amplitude");
                       require_finite(s.frequency_hz, "frequency_hz");
                       require_finite(s.phase, "phase");
                   },
                   [](const Piecewise& p) {
                       if (p.segments.empty()) throw ParameterError("piecewise signal has no segments");
                       if (p.segments.front().start != 0.0) {
                           throw ParameterError("first piecewise segment must start at 0");
                       }
                       for (std::size_t i = 0; i < p.segments.size(); ++i) {
                           require_finite(p.segments[i].start, "start");
                           if (i > 0 && !(p.segments[i].start > p.segments[i - 1].start)) {
                               throw ParameterError("piecewise segment starts must be strictly increasing");
                           }
                           p.segments[i].signal.validate();
                       }
                   },
               },
               shape);
}

double SignalSpec::operator()(double t) const {
    return std::visit(overloaded{
                          [](const Constant& c) { return c.level; },
                          [t](const Ramp& r) { return r.intercept + r.slope * t; },
                          [t](const Sine& s) {
                              return s.amplitude *
                                     std::sin(2.0 * std::numbers::pi * s.frequency_hz * t + s.phase);
                          },
                          [t](const Piecewise& p) {
                              // last segment with start <= t; right-continuous at each start
                              auto it = std::upper_bound(
                                  p.segments.begin(), p.segments.end(), t,
                                  [](double v, const Segment& seg) { return v < seg.start; });
                              if (it == p.segments.begin()) return p.segments.front().signal(0.0);
                              const Segment& seg = *std::prev(it);
                              return seg.signal(t - seg.start);
                          },
                      },
                      shape);
}

std::vector<double> SignalSpec::boundaries() const {
    std::vector<double> out;
    if (const auto* p = std::get_if<Piecewise>(&shape)) {
        for (std::size_t i = 1; i < p->segments.size(); ++i) out.push_back(p->segments[i].start);
    }
    return out;
}

SignalSpec constant(double level) { return SignalSpec{Constant{level}}; }
SignalSpec ramp(double slope, double intercept) { return SignalSpec{Ramp{slope, intercept}}; }
SignalSpec sine(double amplitude, double frequency_hz, double phase) {
    return SignalSpec{Sine{amplitude, frequency_hz, phase}};
}
SignalSpec piecewise(std::vector<Segment> segments) {
    return SignalSpec{Piecewise{std::move(segments)}};
}

std::int64_t grid_count(double delta, double horizon) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ParameterError("delta must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ParameterError("horizon must be positive");
    auto n = static_cast<std::int64_t>(std::ceil(horizon / delta));
    while (n > 0 && static_cast<double>(n - 1) * delta >= horizon) --n;
    while (static_cast<double>(n) * delta < horizon) ++n;
    return n;
}

SampledSignal sample(const SignalSpec& spec, double delta, double horizon) {
    spec.validate();
    const std::int64_t n = grid_count(delta, horizon);
    SampledSignal out;
    out.delta = delta;
    out.spec = spec;
    out.values.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) {
        const double v = spec(static_cast<double>(k) * delta);
        if (!std::isfinite(v)) throw ParameterError("signal is not finite at step " + std::to_string(k));
        out.values.push_back(v);
    }
    return out;
}

std::optional<CellRange> cells_inside(double delta, double alpha, double beta) {
    if (!(delta > 0.0)) throw ParameterError("delta must be positive");
    if (!(alpha < beta)) return std::nullopt;
    auto first = static_cast<std::int64_t>(std::ceil(alpha / delta));
    while (first > 0 && static_cast<double>(first - 1) * delta >= alpha) --first;
    while (static_cast<double>(first) * delta < alpha) ++first;
    auto last = static_cast<std::int64_t>(std::floor(beta / delta)) - 1;
    while (static_cast<double>(last + 2) * delta <= beta) ++last;
    while (last >= first && static_cast<double>(last + 1) * delta > beta) --last;
    if (last < first) return std::nullopt;
    return CellRange{first, last};
}

VariationBound estimate_variation_bound(const SignalSpec& spec, double delta, double alpha,
                                        double beta, int oversample_factor) {
    spec.validate();
    if (oversample_factor < 2) throw ParameterError("oversample factor must be at least 2");
    if (!(alpha < beta)) throw ParameterError("variation interval needs alpha < beta");
    const auto cells = cells_inside(delta, alpha, beta);
    if (!cells) throw DomainError("variation interval contains no full grid cell");

    double worst = 0.0;
    for (std::int64_t k = cells->first; k <= cells->last; ++k) {
        const double t_k = static_cast<double>(k) * delta;
        const double x_k = spec(t_k);
        for (int j = 1; j <= oversample_factor; ++j) {
            const double t = j == oversample_factor
                                 ? static_cast<double>(k + 1) * delta
                                 : t_k + (static_cast<double>(j) / oversample_factor) * delta;
            worst = std::max(worst, std::abs(spec(t) - x_k));
        }
    }
    return VariationBound{worst / delta, alpha, beta, oversample_factor};
}

std::vector<GrowthViolation> verify_growth(const SampledSignal& samples, const GrowthBound& bound) {
    std::vector<GrowthViolation> out;
    const auto n = static_cast<std::int64_t>(samples.size());
    for (std::int64_t k = 0; k < n; ++k) {
        const double base = std::abs(samples.values[static_cast<std::size_t>(k)]);
        for (std::int64_t m = 1; k + m < n; ++m) {
            const double lhs = std::abs(samples.values[static_cast<std::size_t>(k + m)]);
            const double rhs =
                bound.scale * (base + std::pow(static_cast<double>(m) * samples.delta, bound.exponent));
            if (lhs > rhs) out.push_back(GrowthViolation{k, m, lhs, rhs});
        }
    }
    return out;
}

GrowthBound fit_growth_bound(const SampledSignal& samples, double exponent) {
    if (!(exponent > 0.0)) throw ParameterError("growth exponent must be positive");
    double ratio = 0.0;
    const auto n = samples.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double base = std::abs(samples.values[k]);
        for (std::size_t m = 1; k + m < n; ++m) {
            const double lhs = std::abs(samples.values[k + m]);
            const double rhs = base + std::pow(static_cast<double>(m) * samples.delta, exponent);
            ratio = std::max(ratio, lhs / rhs);
        }
    }
    GrowthBound bound{ratio > 0.0 ? ratio : std::numeric_limits<double>::min(), exponent};
    // the quotient is rounded; nudge upward until the product form passes
    while (!verify_growth(samples, bound).empty()) {
        bound.scale = std::nextafter(bound.scale, std::numeric_limits<double>::infinity());
    }
    return bound;
}

} // namespace odm
