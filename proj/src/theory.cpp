#include "odm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "odm/error.hpp"

namespace odm {

namespace {

// slack for algebraic identities between step sizes; error bounds are compared exactly
constexpr double kAlgebraicRelTol = 1e-12;

template <typename... Args>
std::string describe(const Args&... args) {
    std::ostringstream os;
    os.precision(17);
    (os << ... << args);
    return os.str();
}

std::size_t at(std::int64_t k) { return static_cast<std::size_t>(k); }

std::optional<std::int64_t> first_switch_after(const std::vector<std::int64_t>& switches,
                                               std::int64_t start) {
    auto it = std::upper_bound(switches.begin(), switches.end(), start);
    if (it == switches.end()) return std::nullopt;
    return *it;
}

void check_inputs(const Trace& trace, const SampledSignal& samples) {
    trace.params.validate();
    if (samples.delta != trace.params.delta) {
        throw ParameterError("sample grid delta does not match the trace's codec delta");
    }
    if (samples.size() < trace.records.size()) {
        throw ParameterError("fewer samples than trace records");
    }
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
        if (trace.records[k].k != static_cast<std::int64_t>(k)) {
            throw ParameterError(describe("trace record ", k, " carries step index ", trace.records[k].k));
        }
    }
}

class ReportBuilder {
public:
    explicit ReportBuilder(TheoremReport& report) : report_(report) {}

    void applicable(const char* id, std::string note = {}) {
        report_.claims.push_back(ClaimStatus{id, true, std::move(note)});
    }
    void not_applicable(const char* id, std::string note) {
        report_.claims.push_back(ClaimStatus{id, false, std::move(note)});
    }
    void violation(const char* id, std::int64_t step, std::string detail) {
        report_.violations.push_back(Violation{id, step, std::move(detail)});
    }

private:
    TheoremReport& report_;
};

} // namespace

const ClaimStatus* TheoremReport::find_claim(const std::string& id) const {
    for (const auto& c : claims) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

std::size_t TheoremReport::count(const std::string& claim_id) const {
    return static_cast<std::size_t>(std::count_if(
        violations.begin(), violations.end(), [&](const Violation& v) { return v.claim == claim_id; }));
}

std::vector<std::int64_t> switch_set(const Trace& trace) {
    std::vector<std::int64_t> out;
    for (std::size_t k = 1; k < trace.records.size(); ++k) {
        if (to_int(trace.records[k - 1].h) * to_int(trace.records[k].h) < 0) {
            out.push_back(static_cast<std::int64_t>(k));
        }
    }
    return out;
}

std::int64_t acquisition_bound(const CodecParams& params, double initial_gap,
                               const GrowthBound& growth, std::int64_t cap) {
    params.validate();
    if (!(initial_gap >= 0.0) || !std::isfinite(initial_gap)) {
        throw ParameterError("initial gap must be finite and non-negative");
    }
    if (!(growth.scale >= 0.0) || !(growth.exponent > 0.0)) {
        throw ParameterError("growth bound needs C >= 0 and c > 0");
    }
    double power = 1.0; // a^m
    double sum = 0.0;   // 1 + a + ... + a^m
    for (std::int64_t m = 0; m <= cap; ++m) {
        sum += power;
        const double reach = params.m0 * sum * params.delta;
        const double need =
            initial_gap + growth.scale * (1.0 + std::pow(static_cast<double>(m), growth.exponent) *
                                                    std::pow(params.delta, growth.exponent));
        if (reach >= need) return m;
        power *= params.a;
    }
    throw DivergenceError(describe("acquisition bound not reached within ", cap, " steps"));
}

std::int64_t settling_window(double m_tau, const CodecParams& params) {
    const double floor = params.floor();
    if (!(floor > 0.0)) throw DomainError("settling window needs a positive slope floor");
    if (!(m_tau > 0.0) || !std::isfinite(m_tau)) throw DomainError("M_tau must be positive and finite");
    if (m_tau <= floor) return 6;
    const double raw = 3.0 * std::log(m_tau / floor) / std::log(params.a) + 6.0;
    // a^j ratios land a hair off the integer after the logs
    const double nearest = std::round(raw);
    if (std::abs(raw - nearest) <= 1e-9 * std::max(1.0, std::abs(raw))) {
        return static_cast<std::int64_t>(nearest);
    }
    return static_cast<std::int64_t>(std::ceil(raw));
}

ErrorBounds steady_error_bounds(const CodecParams& params, double d) {
    if (!(d >= 0.0)) throw ParameterError("D must be non-negative");
    const double base = params.a * params.floor();
    return ErrorBounds{(base + d) * params.delta, (base + 2.0 * d) * params.delta};
}

std::optional<std::int64_t> detect_settling(const Trace& trace, const SampledSignal& samples,
                                            double d, std::int64_t start) {
    if (trace.params.rule != AdaptationRule::Modified) {
        throw ParameterError("settling detection applies to the modified rule only");
    }
    check_inputs(trace, samples);
    const auto tau = first_switch_after(switch_set(trace), start);
    if (!tau) return std::nullopt;
    const double mbar = trace.params.mbar;
    const double bound = steady_error_bounds(trace.params, d).sample;
    for (std::int64_t k = *tau; k < static_cast<std::int64_t>(trace.records.size()); ++k) {
        const auto& r = trace.records[at(k)];
        if (r.m == mbar && std::abs(samples.values[at(k)] - r.y) <= bound) return k;
    }
    return std::nullopt;
}

TheoremReport verify_from(const Trace& trace, const SampledSignal& samples,
                          const VariationBound& variation, const std::optional<GrowthBound>& growth,
                          int oversample_factor, std::int64_t start) {
    check_inputs(trace, samples);
    if (oversample_factor < 2) throw ParameterError("oversample factor must be at least 2");
    const auto& params = trace.params;
    const auto& rec = trace.records;
    const auto n = static_cast<std::int64_t>(rec.size());
    if (start < 0 || (n > 0 && start >= n)) throw ParameterError("restart index outside the trace");

    TheoremReport report;
    ReportBuilder out(report);
    report.start = start;
    report.d = variation.d;
    report.oversample_factor = oversample_factor;
    const ErrorBounds bounds = steady_error_bounds(params, variation.d);
    report.sample_error_bound = bounds.sample;
    report.interval_error_bound = bounds.interval;
    if (n == 0) {
        out.not_applicable(claim::kAcquisition, "empty trace");
        return report;
    }

    const auto switches = switch_set(trace);
    const auto is_switch = [&](std::int64_t k) {
        return std::binary_search(switches.begin(), switches.end(), k);
    };
    report.tau = first_switch_after(switches, start);

    // (i) acquisition
    if (!growth) {
        out.not_applicable(claim::kAcquisition, "no growth bound supplied");
    } else {
        CodecParams restarted = params;
        restarted.y0 = rec[at(start)].y;
        restarted.m0 = start == 0 ? params.m0 : rec[at(start)].m;
        const double gap = std::abs(restarted.y0 - samples.values[at(start)]);
        const std::int64_t bound = start + acquisition_bound(restarted, gap, *growth);
        report.tau_bound = bound;
        if (report.tau) {
            out.applicable(claim::kAcquisition);
            if (*report.tau > bound) {
                out.violation(claim::kAcquisition, *report.tau,
                              describe("first switch ", *report.tau, " after bound ", bound));
            }
        } else if (bound <= n - 1) {
            out.applicable(claim::kAcquisition);
            out.violation(claim::kAcquisition, bound, describe("no switch by step ", bound));
        } else {
            out.not_applicable(claim::kAcquisition, "trace ends before the bound without a switch");
        }
    }

    // (D) is certified on these cells only
    const auto cells = cells_inside(params.delta, variation.alpha, variation.beta);
    const std::int64_t d_first = cells ? cells->first : 0;
    const std::int64_t d_last = cells ? std::min(cells->last, n - 1) : -1;

    const char* steady_claims[] = {claim::kSettling,     claim::kSteadyStepSize, claim::kSteadySwitchFloor,
                                   claim::kSampleError,  claim::kIntervalError,  claim::kSwitchGap,
                                   claim::kSymbolRun};
    const auto skip_steady = [&](const std::string& why) {
        for (const char* id : steady_claims) out.not_applicable(id, why);
    };

    // (min): algebraic consequence of the modified rule whenever the next switch is within 3 steps
    if (params.rule == AdaptationRule::Modified) {
        out.applicable(claim::kStepContraction);
        for (std::size_t i = 0; i + 1 < switches.size(); ++i) {
            const std::int64_t s = switches[i];
            const std::int64_t next = switches[i + 1];
            if (s <= start || next > s + 3) continue;
            const double limit = std::max(rec[at(s - 1)].m / params.a, params.mbar);
            if (rec[at(next)].m > limit * (1.0 + kAlgebraicRelTol)) {
                out.violation(claim::kStepContraction, next,
                              describe("M=", rec[at(next)].m, " exceeds max(M_{s-1}/a, Mbar)=", limit,
                                       " for s=", s));
            }
        }
    } else {
        out.not_applicable(claim::kStepContraction, "Jayant rule");
    }

    if (params.rule != AdaptationRule::Modified) {
        skip_steady("Jayant rule has no slope floor");
        return report;
    }
    if (!(params.mbar > 0.0) || params.mbar < 2.0 * variation.d) {
        skip_steady(describe("requires Mbar >= 2D > 0 (Mbar=", params.mbar, ", D=", variation.d, ")"));
        return report;
    }
    if (!report.tau) {
        skip_steady("no switch after the initial time");
        return report;
    }
    const std::int64_t tau = *report.tau;

    // (ii) settling
    const std::int64_t window = settling_window(rec[at(tau)].m, params);
    report.eta_window_end = tau + window;
    report.eta = detect_settling(trace, samples, variation.d, start);
    const bool window_certified = tau >= d_first && tau + window <= d_last;
    if (report.eta && *report.eta <= tau + window) {
        out.applicable(claim::kSettling);
    } else if (window_certified) {
        out.applicable(claim::kSettling);
        out.violation(claim::kSettling, report.eta.value_or(tau + window),
                      report.eta ? describe("settled at ", *report.eta, " after window end ", tau + window)
                                 : describe("not settled by window end ", tau + window));
    } else {
        out.not_applicable(claim::kSettling, "window not covered by the trace and the variation interval");
    }

    if (!report.eta || *report.eta < d_first || *report.eta > d_last) {
        for (const char* id : steady_claims) {
            if (std::string(id) != claim::kSettling) {
                out.not_applicable(id, "no settling index inside the variation interval");
            }
        }
        return report;
    }
    const std::int64_t eta = *report.eta;
    const double mbar = params.mbar;
    const double mbar_raised = StepSize{mbar, 1}.value(params.a);

    // (iii) steady state
    out.applicable(claim::kSteadyStepSize);
    out.applicable(claim::kSteadySwitchFloor);
    out.applicable(claim::kSampleError);
    for (std::int64_t k = eta; k <= d_last; ++k) {
        const auto& r = rec[at(k)];
        if (r.m != mbar && r.m != mbar_raised) {
            out.violation(claim::kSteadyStepSize, k, describe("M=", r.m, " not in {", mbar, ", ", mbar_raised, "}"));
        }
        if (is_switch(k) && r.m != mbar) {
            out.violation(claim::kSteadySwitchFloor, k, describe("switch with M=", r.m));
        }
        const double err = std::abs(samples.values[at(k)] - r.y);
        if (err > bounds.sample) {
            out.violation(claim::kSampleError, k, describe("|x-y|=", err, " > ", bounds.sample));
        }
    }

    if (samples.spec) {
        out.applicable(claim::kIntervalError, describe("oversample factor ", oversample_factor));
        const SignalSpec& spec = *samples.spec;
        for (std::int64_t k = eta; k <= d_last; ++k) {
            const auto& r = rec[at(k)];
            double worst = 0.0;
            for (int j = 0; j <= oversample_factor; ++j) {
                const double fraction = j == oversample_factor ? 1.0 : static_cast<double>(j) / oversample_factor;
                const double t = j == oversample_factor ? static_cast<double>(k + 1) * params.delta
                                                        : r.t + fraction * params.delta;
                worst = std::max(worst, std::abs(spec(t) - reconstruct_fraction(r, fraction, params.delta)));
            }
            if (worst > bounds.interval) {
                out.violation(claim::kIntervalError, k, describe("sup|x-y|=", worst, " > ", bounds.interval));
            }
        }
    } else {
        out.not_applicable(claim::kIntervalError, "samples carry no signal definition");
    }

    out.applicable(claim::kSwitchGap);
    for (std::int64_t s : switches) {
        if (s < eta || s + 3 > d_last) continue;
        const auto next = first_switch_after(switches, s);
        if (!next || *next > s + 3) {
            out.violation(claim::kSwitchGap, s, describe("no switch within 3 steps of ", s));
        }
    }

    out.applicable(claim::kSymbolRun);
    for (std::int64_t m = eta; m + 4 <= d_last; ++m) {
        const Symbol h = rec[at(m + 1)].h;
        if (rec[at(m + 2)].h == h && rec[at(m + 3)].h == h && rec[at(m + 4)].h == h) {
            out.violation(claim::kSymbolRun, m + 1, describe("four equal symbols from step ", m + 1));
        }
    }
    return report;
}

TheoremReport verify_theorem(const Trace& trace, const SampledSignal& samples,
                             const VariationBound& variation, const std::optional<GrowthBound>& growth,
                             int oversample_factor) {
    return verify_from(trace, samples, variation, growth, oversample_factor, 0);
}

std::int64_t first_index_at_or_after(double t, double delta) {
    if (!(delta > 0.0)) throw ParameterError("delta must be positive");
    if (t <= 0.0) return 0;
    auto k = static_cast<std::int64_t>(std::ceil(t / delta));
    while (k > 0 && static_cast<double>(k - 1) * delta >= t) --k;
    while (static_cast<double>(k) * delta < t) ++k;
    return k;
}

TheoremReport verify_after_jump(const Trace& trace, const SampledSignal& samples,
                                const VariationBound& variation, const std::optional<GrowthBound>& growth,
                                int oversample_factor, double jump_time) {
    const std::int64_t kappa = first_index_at_or_after(jump_time, trace.params.delta);
    if (kappa >= static_cast<std::int64_t>(trace.records.size())) {
        throw DomainError("jump time lies beyond the trace");
    }
    return verify_from(trace, samples, variation, growth, oversample_factor, kappa);
}

} // namespace odm
