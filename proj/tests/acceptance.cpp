// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance --only A4  run one criterion; exit status reflects that criterion only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "odm/channel.hpp"
#include "odm/codec.hpp"
#include "odm/error.hpp"
#include "odm/harness.hpp"
#include "odm/signals.hpp"
#include "odm/theory.hpp"
#include "support/oracle.hpp"

using namespace odm;
namespace hand = odm::test::hand;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool same_step(const StepRecord& a, const StepRecord& b) {
    return a.k == b.k && a.t == b.t && a.y == b.y && a.h == b.h && a.m == b.m && a.in_switch == b.in_switch;
}

// Sine run of the steady-state class: amplitude 1, 1 Hz, delta 0.01, horizon 4, a = 1.5,
// Mbar = 2D with D from 32x oversampling, M0 = Mbar.
ExperimentConfig sine_run(double y0, double phase) {
    ExperimentConfig c;
    c.signal = sine(1.0, 1.0, phase);
    c.codec = CodecParams{y0, 1.0, 1.0, 1.5, 0.01, AdaptationRule::Modified};
    c.mbar_auto = true;
    c.m0_auto = true;
    c.horizon = 4.0;
    c.oversample_factor = 32;
    return c;
}

std::vector<ExperimentConfig> sine_class() {
    std::vector<ExperimentConfig> runs;
    for (double y0 : {0.0, 0.5, -3.0, 2.0, 10.0}) {
        for (double phase : {0.0, 0.7, 2.1, 4.0}) runs.push_back(sine_run(y0, phase));
    }
    return runs;
}

ExperimentConfig reference_run(double delta, double ramp_slope = 0.02) {
    ExperimentConfig c;
    c.signal = piecewise({{0.0, constant(2.0)}, {1.0, ramp(ramp_slope, -1.0)}});
    c.codec = CodecParams{5.0, 2 * delta, 2 * delta, 1.5, delta, AdaptationRule::Modified};
    c.horizon = 2.0;
    c.comparison = ComparisonSettings{AdaptationRule::Jayant, 1.0};
    return c;
}

std::string steps_text(const std::optional<std::int64_t>& v) {
    return v ? std::to_string(*v) : std::string("unrecovered");
}

// Unrecovered within the horizon ranks after every finite count.
bool no_slower(const std::optional<std::int64_t>& modified, const std::optional<std::int64_t>& baseline) {
    if (!baseline) return true;
    return modified && *modified <= *baseline;
}

Outcome mirror_exactness() {
    const auto start = Clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> delta_dist(0.005, 0.2);
    std::size_t steps = 0;
    std::size_t mismatched_runs = 0;
    for (int run = 0; run < 500; ++run) {
        const double horizon = 5.0;
        const double delta = delta_dist(rng);
        const auto spec = test::random_piecewise(rng, horizon);
        const auto params = test::random_params(rng, delta);
        const auto samples = sample(spec, delta, horizon);
        const auto encoded = encode_signal(params, samples);
        const auto decoded = decode_with_erasures(params, transmit(encoded.bits, Noiseless{}));
        bool same = decoded.records.size() == encoded.trace.records.size();
        for (std::size_t k = 0; same && k < decoded.records.size(); ++k) {
            same = same_step(decoded.records[k], encoded.trace.records[k]);
        }
        mismatched_runs += same ? 0 : 1;
        steps += samples.size();
    }
    const double elapsed = seconds_since(start);
    return {mismatched_runs == 0 && elapsed < 5.0,
            fmt("500 signals, %zu steps, %zu mismatched runs, %.3f s (limit 5 s)", steps, mismatched_runs, elapsed)};
}

Outcome steady_state() {
    const auto start = Clock::now();
    const auto result = simulate(sine_run(0.0, 0.0));
    const double elapsed = seconds_since(start);
    const auto& r = result.report;
    bool checked = true;
    for (const char* id : {claim::kSteadyStepSize, claim::kSteadySwitchFloor, claim::kSampleError, claim::kIntervalError}) {
        const auto* c = r.find_claim(id);
        checked = checked && c && c->applicable;
    }
    return {checked && r.ok() && r.eta.has_value() && elapsed < 1.0,
            fmt("D=%.6f Mbar=%.6f eta=%lld, %zu violations, all claims checked: %s, %.3f s (limit 1 s)", r.d,
                result.params.mbar, static_cast<long long>(r.eta.value_or(-1)), r.violations.size(),
                checked ? "yes" : "no", elapsed)};
}

Outcome lemmas_after_settling() {
    std::size_t runs = 0;
    std::size_t violations = 0;
    std::size_t unchecked = 0;
    for (const auto& config : sine_class()) {
        const auto r = simulate(config).report;
        ++runs;
        violations += r.count(claim::kSymbolRun) + r.count(claim::kSwitchGap);
        for (const char* id : {claim::kSymbolRun, claim::kSwitchGap}) {
            const auto* c = r.find_claim(id);
            if (!c || !c->applicable) ++unchecked;
        }
    }
    return {violations == 0 && unchecked == 0,
            fmt("%zu runs, %zu run/gap violations, %zu unchecked claims", runs, violations, unchecked)};
}

Outcome acquisition() {
    std::ostringstream detail;
    bool pass = true;
    int within_shifted = 0;
    int cases = 0;
    for (double gap : {1.0, 10.0, 100.0}) {
        for (double sign : {1.0, -1.0}) {
            ExperimentConfig c;
            c.signal = ramp(1.0, 0.0);
            c.codec = CodecParams{sign * gap, 0.08, 0.08, 1.5, 0.04, AdaptationRule::Modified};
            c.horizon = 4.0;
            const auto samples = sample(c.signal, c.codec.delta, c.horizon);
            const auto growth = fit_growth_bound(samples, 1.0);
            if (!verify_growth(samples, growth).empty()) throw Error("fitted growth bound does not verify");
            c.growth = growth;
            const auto r = simulate(c).report;
            const bool ok = r.tau && r.tau_bound && *r.tau <= *r.tau_bound && r.count(claim::kAcquisition) == 0;
            pass = pass && ok;
            ++cases;
            if (r.tau && r.tau_bound && *r.tau <= *r.tau_bound + 1) ++within_shifted;
            detail << (cases > 1 ? "; " : "") << "y0=" << sign * gap << " C=" << growth.scale << " tau="
                   << r.tau.value_or(-1) << " bound=" << r.tau_bound.value_or(-1);
        }
    }
    detail << " | tau <= bound+1 in " << within_shifted << "/" << cases;
    return {pass, detail.str()};
}

Outcome settling() {
    std::size_t runs = 0;
    std::size_t inside = 0;
    std::ostringstream worst;
    for (const auto& config : sine_class()) {
        const auto result = simulate(config);
        const auto& r = result.report;
        ++runs;
        if (!r.tau || !r.eta) continue;
        const double m_tau = result.decoded.records[static_cast<std::size_t>(*r.tau)].m;
        const auto window = settling_window(m_tau, result.params);
        if (*r.eta >= *r.tau && *r.eta <= *r.tau + window && r.count(claim::kSettling) == 0) {
            ++inside;
        } else {
            worst << " [y0=" << config.codec.y0 << " tau=" << *r.tau << " eta=" << *r.eta << " window=" << window
                  << "]";
        }
    }
    return {inside == runs, fmt("eta in [tau, tau+window] for %zu/%zu runs", inside, runs) + worst.str()};
}

Outcome hand_trace() {
    const auto encoded = encode_signal(hand::params(), hand::samples());
    const auto decoded = decode_bitstream(hand::params(), encoded.bits);
    std::size_t mismatches = 0;
    for (const Trace* t : {&encoded.trace, &decoded}) {
        if (t->records.size() != hand::kY.size()) {
            ++mismatches;
            continue;
        }
        for (std::size_t k = 0; k < hand::kY.size(); ++k) {
            const auto& r = t->records[k];
            if (r.y != hand::kY[k] || r.m != hand::kM[k] || to_int(r.h) != hand::kH[k]) ++mismatches;
        }
    }
    return {mismatches == 0 && bits_to_string(encoded.bits) == hand::kBody,
            fmt("bits %s, %zu mismatched fields across encoder and decoder", bits_to_string(encoded.bits).c_str(),
                mismatches)};
}

Outcome bit_budget() {
    const auto coarse = simulate(reference_run(0.04)).encoded.bits.size();
    const auto fine = simulate(reference_run(0.02)).encoded.bits.size();
    return {coarse == 50 && fine == 100, fmt("delta=0.04: %zu bits (want 50), delta=0.02: %zu bits (want 100)",
                                             coarse, fine)};
}

Outcome recovery_ordering() {
    const auto report = compare(reference_run(0.04));
    const bool pass = no_slower(report.recovery_steps_modified, report.recovery_steps_baseline);

    int ordered = 0;
    int total = 0;
    for (double delta : {0.04, 0.02}) {
        for (double slope : {0.0, 0.01, 0.02, 0.04}) {
            const auto r = compare(reference_run(delta, slope));
            ordered += no_slower(r.recovery_steps_modified, r.recovery_steps_baseline) ? 1 : 0;
            ++total;
        }
    }
    return {pass, fmt("band=%.6g, modified=%s, jayant=%s | sweep ordered %d/%d", report.band,
                      steps_text(report.recovery_steps_modified).c_str(),
                      steps_text(report.recovery_steps_baseline).c_str(), ordered, total)};
}

Outcome serialization() {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> len(0, 1000);
    std::bernoulli_distribution coin(0.5);
    int identical = 0;
    for (int i = 0; i < 100; ++i) {
        const auto params = test::random_params(rng, 0.01 + 0.01 * (i % 10));
        std::vector<Symbol> bits(len(rng));
        for (auto& b : bits) b = coin(rng) ? Symbol::Plus : Symbol::Minus;
        const auto back = parse_bitstream(format_bitstream(params, bits));
        identical += back.params == params && back.bits == bits ? 1 : 0;
    }

    const auto rejects = [](const std::string& text) {
        try {
            (void)parse_bitstream(text);
        } catch (const FormatError&) {
            return true;
        }
        return false;
    };
    const std::string good = format_bitstream(hand::params(), hand::bits());
    const bool truncated = rejects(good.substr(0, good.size() - 3));
    const bool bad_magic = rejects("ODX/1" + good.substr(5));
    return {identical == 100 && truncated && bad_magic,
            fmt("%d/100 round trips identical, truncated body rejected: %s, bad magic rejected: %s", identical,
                truncated ? "yes" : "no", bad_magic ? "yes" : "no")};
}

struct Criterion {
    const char* id;
    const char* title;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {"A1", "mirror exactness", mirror_exactness},
        {"A2", "steady-state tracking", steady_state},
        {"A3", "symbol runs and switch gaps after settling", lemmas_after_settling},
        {"A4", "acquisition time bound", acquisition},
        {"A5", "settling window", settling},
        {"A6", "hand trace", hand_trace},
        {"A7", "bit budget", bit_budget},
        {"A8", "recovery after a jump", recovery_ordering},
        {"A9", "bitstream serialization", serialization},
    };

    std::string only;
    if (argc == 3 && std::string(argv[1]) == "--only") {
        only = argv[2];
    } else if (argc != 1) {
        std::cerr << "usage: " << argv[0] << " [--only A<n>]\n";
        return 2;
    }

    int failed = 0;
    int ran = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && only != c.id) continue;
        ++ran;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << c.id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << c.title << ": " << o.detail << std::endl;
    }
    if (ran == 0) {
        std::cerr << "unknown criterion " << only << '\n';
        return 2;
    }
    std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
