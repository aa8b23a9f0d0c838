#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "odm/signals.hpp"

namespace odm {

/// One transmitted bit. Plus means the running estimate sat below the sample.
enum class Symbol : std::int8_t { Minus = -1, Plus = 1 };

[[nodiscard]] constexpr int to_int(Symbol s) noexcept { return static_cast<int>(s); }
[[nodiscard]] constexpr Symbol operator-(Symbol s) noexcept {
    return s == Symbol::Plus ? Symbol::Minus : Symbol::Plus;
}

enum class AdaptationRule {
    Modified, ///< three-way rule: grow, hold after a switch, shrink to a floor on a switch
    Jayant,   ///< classical two-way rule: grow on repeat, shrink on switch, no floor
};

[[nodiscard]] std::string_view to_string(AdaptationRule rule) noexcept;
[[nodiscard]] AdaptationRule parse_rule(std::string_view text);

/// Parameters shared by encoder and decoder. Slopes are in signal units per second.
struct CodecParams {
    double y0 = 0.0;
    double m0 = 1.0;
    double mbar = 0.0;
    double a = 1.5;
    double delta = 1.0;
    AdaptationRule rule = AdaptationRule::Modified;

    /// Throws ParameterError unless a in (1, 2], delta > 0, M0 > 0, Mbar >= 0, all finite.
    void validate() const;

    /// Slope floor actually applied by the rule. Jayant never floors.
    [[nodiscard]] double floor() const noexcept {
        return rule == AdaptationRule::Jayant ? 0.0 : mbar;
    }

    /// Copy with a different rule. Switching to Jayant zeroes the floor.
    [[nodiscard]] CodecParams with_rule(AdaptationRule r) const;

    [[nodiscard]] double grid_time(std::int64_t k) const noexcept {
        return static_cast<double>(k) * delta;
    }

    friend bool operator==(const CodecParams&, const CodecParams&) = default;
};

/// Slope kept as anchor * a^exponent with anchor in {M0, Mbar}.
///
/// Every branch of the adaptation rule multiplies by a, divides by a, holds, or
/// resets to the floor, so the integer exponent carries the whole history. A
/// slope that returns to the same exponent is bit-identical to its earlier value,
/// which keeps the steady-state set {Mbar, a*Mbar} exact.
struct StepSize {
    double anchor = 1.0;
    int exponent = 0;

    [[nodiscard]] double value(double a) const noexcept;

    friend bool operator==(const StepSize&, const StepSize&) = default;
};

/// State carried between steps; identical on both ends of the channel.
struct CodecState {
    std::int64_t k = 0;          ///< index of the pending step
    double y = 0.0;              ///< y_{k-1}; y0 before step 0
    StepSize step;               ///< M_{k-1}; M0 before step 0
    double m = 0.0;              ///< step.value(a), cached
    Symbol h_prev = Symbol::Plus; ///< h_{k-1}; h_{-1} = +1
    bool prev_in_switch = false; ///< whether k-1 is a switch index

    friend bool operator==(const CodecState&, const CodecState&) = default;
};

struct StepRecord {
    std::int64_t k = 0;
    double t = 0.0;
    std::optional<double> x; ///< absent on the decoder side
    double y = 0.0;
    Symbol h = Symbol::Plus;
    double m = 0.0;
    bool in_switch = false;
    bool erased = false; ///< decoder substituted this symbol for an erasure

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct Trace {
    CodecParams params;
    std::vector<StepRecord> records;

    [[nodiscard]] std::vector<Symbol> symbols() const;
};

struct StepResult {
    CodecState state;
    Symbol symbol = Symbol::Plus;
    StepRecord record;
};

struct EncodeResult {
    std::vector<Symbol> bits;
    Trace trace;
};

[[nodiscard]] CodecState init_state(const CodecParams& params);

/// +1 if y < x, -1 if y > x, and -h_prev on exact equality.
[[nodiscard]] Symbol symbol_for_sample(double y, double x, Symbol h_prev);

/// Slope for step k given M_{k-1} and switch membership of k and k-1.
[[nodiscard]] double step_size_update(double m_prev, bool in_switch, bool prev_in_switch,
                                      const CodecParams& params);
[[nodiscard]] StepSize step_size_update(const StepSize& m_prev, bool in_switch,
                                        bool prev_in_switch, const CodecParams& params);

[[nodiscard]] StepResult encode_step(const CodecParams& params, const CodecState& state, double x);
/// Throws SequencingError if `k` is not the state's pending step.
[[nodiscard]] StepResult encode_step(const CodecParams& params, const CodecState& state,
                                     std::int64_t k, double x);

[[nodiscard]] StepResult decode_step(const CodecParams& params, const CodecState& state, Symbol h);
[[nodiscard]] StepResult decode_step(const CodecParams& params, const CodecState& state,
                                     std::int64_t k, Symbol h);

/// Piecewise-linear estimate y_k + h_k M_k (t - t_k) on [t_k, t_k + delta].
[[nodiscard]] double reconstruct(const StepRecord& record, double t, double delta);
/// Same, at t_k + fraction * delta with fraction in [0, 1]; fraction 1 lands exactly on y_{k+1}.
[[nodiscard]] double reconstruct_fraction(const StepRecord& record, double fraction, double delta);

[[nodiscard]] EncodeResult encode_signal(const CodecParams& params, const SampledSignal& samples);
[[nodiscard]] Trace decode_bitstream(const CodecParams& params, std::span<const Symbol> bits);

} // namespace odm
