#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odm/codec.hpp"
#include "odm/signals.hpp"

namespace odm {

namespace claim {
inline constexpr const char* kAcquisition = "acquisition";             // tau <= acquisition bound
inline constexpr const char* kSettling = "settling";                   // eta within [tau, tau + window]
inline constexpr const char* kSteadyStepSize = "steady_step_size";     // M_k in {Mbar, a Mbar} after eta
inline constexpr const char* kSteadySwitchFloor = "steady_switch_floor"; // M_k = Mbar at switches after eta
inline constexpr const char* kSampleError = "sample_error";            // |x_k - y_k| <= (a Mbar + D) delta
inline constexpr const char* kIntervalError = "interval_error";        // sup over the cell <= (a Mbar + 2D) delta
inline constexpr const char* kSwitchGap = "switch_gap";                // next switch at most 3 steps away
inline constexpr const char* kSymbolRun = "symbol_run";                // no four equal symbols in a row
inline constexpr const char* kStepContraction = "step_contraction";    // M_{next switch} <= max(M_{s-1}/a, Mbar)
} // namespace claim

struct ClaimStatus {
    std::string id;
    bool applicable = false;
    std::string note;
};

struct Violation {
    std::string claim;
    std::int64_t step = 0;
    std::string detail;
};

struct TheoremReport {
    std::int64_t start = 0; ///< step treated as the initial time (0, or a restart index)
    std::optional<std::int64_t> tau;
    std::optional<std::int64_t> tau_bound;
    std::optional<std::int64_t> eta;
    std::optional<std::int64_t> eta_window_end;
    double d = 0.0;
    double sample_error_bound = 0.0;
    double interval_error_bound = 0.0;
    int oversample_factor = kDefaultOversample;
    std::vector<ClaimStatus> claims;
    std::vector<Violation> violations;

    [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
    [[nodiscard]] const ClaimStatus* find_claim(const std::string& id) const;
    [[nodiscard]] std::size_t count(const std::string& claim_id) const;
};

/// Indices k >= 1 with h_{k-1} h_k < 0, read from the recorded symbols.
[[nodiscard]] std::vector<std::int64_t> switch_set(const Trace& trace);

/// Smallest m >= 0 with M0 (1 + a + ... + a^m) delta >= gap + C (1 + m^c delta^c).
/// Throws DivergenceError if no m <= cap qualifies.
[[nodiscard]] std::int64_t acquisition_bound(const CodecParams& params, double initial_gap,
                                             const GrowthBound& growth,
                                             std::int64_t cap = 1'000'000);

/// ceil(3 log_a(M_tau / Mbar) + 6), clamped to 6 when M_tau <= Mbar.
/// Throws DomainError when the rule has no positive floor.
[[nodiscard]] std::int64_t settling_window(double m_tau, const CodecParams& params);

struct ErrorBounds {
    double sample = 0.0;   ///< (a Mbar + D) delta
    double interval = 0.0; ///< (a Mbar + 2D) delta
};
[[nodiscard]] ErrorBounds steady_error_bounds(const CodecParams& params, double d);

/// First k at or after the first switch following `start` with M_k = Mbar and
/// |x_k - y_k| <= (a Mbar + D) delta. Throws ParameterError for the Jayant rule.
[[nodiscard]] std::optional<std::int64_t> detect_settling(const Trace& trace,
                                                          const SampledSignal& samples, double d,
                                                          std::int64_t start = 0);

/// Checks every claim of the tracking theorem that applies to this run.
///
/// Claims on the steady state need Mbar >= 2D and the Modified rule; otherwise they are
/// reported as not applicable. The acquisition claim is checked only when a growth bound
/// is supplied. Inter-sample errors need `samples.spec` and are evaluated on an
/// oversampled grid. Only grid cells inside [variation.alpha, variation.beta] are used.
[[nodiscard]] TheoremReport verify_theorem(const Trace& trace, const SampledSignal& samples,
                                           const VariationBound& variation,
                                           const std::optional<GrowthBound>& growth,
                                           int oversample_factor = kDefaultOversample);

/// Same checks with step `start` treated as the initial time: y0 and M0 are replaced by
/// y_start and M_start, and only switches after `start` count.
[[nodiscard]] TheoremReport verify_from(const Trace& trace, const SampledSignal& samples,
                                        const VariationBound& variation,
                                        const std::optional<GrowthBound>& growth,
                                        int oversample_factor, std::int64_t start);

/// Restart at the first grid index k with k delta >= jump_time.
[[nodiscard]] TheoremReport verify_after_jump(const Trace& trace, const SampledSignal& samples,
                                              const VariationBound& variation,
                                              const std::optional<GrowthBound>& growth,
                                              int oversample_factor, double jump_time);

/// First grid index k with k delta >= t.
[[nodiscard]] std::int64_t first_index_at_or_after(double t, double delta);

} // namespace odm
