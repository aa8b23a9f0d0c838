#include "odm/codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "odm/error.hpp"

namespace odm {

std::string_view to_string(AdaptationRule rule) noexcept {
    return rule == AdaptationRule::Jayant ? "jayant" : "modified";
}

AdaptationRule parse_rule(std::string_view text) {
    if (text == "modified") return AdaptationRule::Modified;
    if (text == "jayant") return AdaptationRule::Jayant;
    throw ParameterError("unknown adaptation rule '" + std::string(text) + "'");
}

void CodecParams::validate() const {
    if (!std::isfinite(y0) || !std::isfinite(m0) || !std::isfinite(mbar) || !std::isfinite(a) ||
        !std::isfinite(delta)) {
        throw ParameterError("codec parameters must be finite");
    }
    if (!(a > 1.0 && a <= 2.0)) throw ParameterError("a must lie in (1, 2], got " + std::to_string(a));
    if (!(delta > 0.0)) throw ParameterError("delta must be positive");
    if (!(m0 > 0.0)) throw ParameterError("M0 must be positive");
    if (mbar < 0.0) throw ParameterError("Mbar must be non-negative");
}

CodecParams CodecParams::with_rule(AdaptationRule r) const {
    CodecParams out = *this;
    out.rule = r;
    if (r == AdaptationRule::Jayant) out.mbar = 0.0;
    return out;
}

double StepSize::value(double a) const noexcept {
    return exponent == 0 ? anchor : anchor * std::pow(a, exponent);
}

std::vector<Symbol> Trace::symbols() const {
    std::vector<Symbol> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.h);
    return out;
}

CodecState init_state(const CodecParams& params) {
    params.validate();
    CodecState s;
    s.k = 0;
    s.y = params.y0;
    s.step = StepSize{params.m0, 0};
    s.m = params.m0;
    s.h_prev = Symbol::Plus;
    s.prev_in_switch = false;
    return s;
}

Symbol symbol_for_sample(double y, double x, Symbol h_prev) {
    if (!std::isfinite(y) || !std::isfinite(x)) throw NumericError("non-finite estimate or sample");
    if (y < x) return Symbol::Plus;
    if (y > x) return Symbol::Minus;
    return -h_prev;
}

double step_size_update(double m_prev, bool in_switch, bool prev_in_switch,
                        const CodecParams& params) {
    if (!(m_prev > 0.0) || !std::isfinite(m_prev)) throw NumericError("step size must be positive and finite");
    if (params.rule == AdaptationRule::Jayant) {
        return in_switch ? m_prev / params.a : params.a * m_prev;
    }
    if (in_switch) return std::max(m_prev / params.a, params.mbar);
    if (prev_in_switch) return m_prev;
    return params.a * m_prev;
}

StepSize step_size_update(const StepSize& m_prev, bool in_switch, bool prev_in_switch,
                          const CodecParams& params) {
    if (params.rule == AdaptationRule::Jayant) {
        return StepSize{m_prev.anchor, m_prev.exponent + (in_switch ? -1 : 1)};
    }
    if (in_switch) {
        const StepSize shrunk{m_prev.anchor, m_prev.exponent - 1};
        // max(M/a, Mbar); the floor wins ties so the steady state stays on the Mbar anchor
        if (shrunk.value(params.a) <= params.mbar) return StepSize{params.mbar, 0};
        return shrunk;
    }
    if (prev_in_switch) return m_prev;
    return StepSize{m_prev.anchor, m_prev.exponent + 1};
}

namespace {

void check_sequence(const CodecState& state, std::int64_t k) {
    if (state.k != k) {
        throw SequencingError("state is pending step " + std::to_string(state.k) +
                              " but step " + std::to_string(k) + " was requested");
    }
}

// Shared recursion. `choose` maps the predicted y_k to h_k.
template <typename Choose>
StepResult advance(const CodecParams& params, const CodecState& state, Choose&& choose) {
    const std::int64_t k = state.k;
    StepResult out;
    CodecState& next = out.state;
    next = state;

    if (k > 0) next.y = state.y + static_cast<double>(to_int(state.h_prev)) * state.m * params.delta;
    const Symbol h = choose(next.y);
    const bool in_switch = k > 0 && to_int(h) * to_int(state.h_prev) < 0;
    if (k > 0) {
        next.step = step_size_update(state.step, in_switch, state.prev_in_switch, params);
        next.m = next.step.value(params.a);
    }
    if (!std::isfinite(next.y) || !std::isfinite(next.m) || !(next.m > 0.0)) {
        throw NumericError("codec state left the finite range at step " + std::to_string(k));
    }
    next.k = k + 1;
    next.h_prev = h;
    next.prev_in_switch = in_switch;

    out.symbol = h;
    out.record = StepRecord{k, params.grid_time(k), std::nullopt, next.y, h, next.m, in_switch, false};
    return out;
}

} // namespace

StepResult encode_step(const CodecParams& params, const CodecState& state, double x) {
    if (!std::isfinite(x)) throw NumericError("non-finite sample at step " + std::to_string(state.k));
    auto out = advance(params, state, [&](double y) { return symbol_for_sample(y, x, state.h_prev); });
    out.record.x = x;
    return out;
}

StepResult encode_step(const CodecParams& params, const CodecState& state, std::int64_t k, double x) {
    check_sequence(state, k);
    return encode_step(params, state, x);
}

StepResult decode_step(const CodecParams& params, const CodecState& state, Symbol h) {
    return advance(params, state, [h](double) { return h; });
}

StepResult decode_step(const CodecParams& params, const CodecState& state, std::int64_t k, Symbol h) {
    check_sequence(state, k);
    return decode_step(params, state, h);
}

double reconstruct_fraction(const StepRecord& record, double fraction, double delta) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw DomainError("reconstruction fraction outside [0, 1]");
    }
    const double elapsed = fraction == 1.0 ? delta : fraction * delta;
    return record.y + static_cast<double>(to_int(record.h)) * record.m * elapsed;
}

double reconstruct(const StepRecord& record, double t, double delta) {
    const double t_next = static_cast<double>(record.k + 1) * delta;
    if (!(t >= record.t && t <= t_next)) {
        throw DomainError("t = " + std::to_string(t) + " outside [t_k, t_{k+1}] of step " +
                          std::to_string(record.k));
    }
    const double elapsed = t == t_next ? delta : t - record.t;
    return record.y + static_cast<double>(to_int(record.h)) * record.m * elapsed;
}

EncodeResult encode_signal(const CodecParams& params, const SampledSignal& samples) {
    params.validate();
    if (samples.delta != params.delta) {
        throw ParameterError("sample grid delta does not match codec delta");
    }
    EncodeResult out;
    out.trace.params = params;
    out.bits.reserve(samples.size());
    out.trace.records.reserve(samples.size());
    CodecState state = init_state(params);
    for (double x : samples.values) {
        auto step = encode_step(params, state, x);
        state = step.state;
        out.bits.push_back(step.symbol);
        out.trace.records.push_back(step.record);
    }
    return out;
}

Trace decode_bitstream(const CodecParams& params, std::span<const Symbol> bits) {
    Trace trace;
    trace.params = params;
    trace.records.reserve(bits.size());
    CodecState state = init_state(params);
    for (Symbol h : bits) {
        auto step = decode_step(params, state, h);
        state = step.state;
        trace.records.push_back(step.record);
    }
    return trace;
}

} // namespace odm
