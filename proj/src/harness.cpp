#include "odm/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "odm/error.hpp"

namespace odm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double get_number(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw ParameterError(std::string("field '") + key + "' missing or not a number");
    }
    return j[key].get<double>();
}

double get_number_or(const Json& j, const char* key, double fallback) {
    return j.contains(key) ? get_number(j, key) : fallback;
}

std::string get_string(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
        throw ParameterError(std::string("field '") + key + "' missing or not a string");
    }
    return j[key].get<std::string>();
}

Json optional_index(const std::optional<std::int64_t>& v) {
    return v ? Json(*v) : Json(nullptr);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(sep, pos);
        out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

double require_double(std::string_view s, std::size_t line, std::size_t column, const char* what) {
    const auto v = parse_double(s);
    if (!v) throw FormatError(std::string("column '") + what + "' is not a number", line, column);
    return *v;
}

// Lines with their 1-based numbers, skipping blank ones.
std::vector<std::pair<std::size_t, std::string_view>> numbered_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> out;
    std::size_t number = 0;
    for (std::string_view line : split(text, '\n')) {
        ++number;
        if (!trim(line).empty()) out.emplace_back(number, trim(line));
    }
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

std::pair<double, double> variation_interval(const ExperimentConfig& config) {
    return config.variation_interval.value_or(std::pair{0.0, config.horizon});
}

CodecParams resolve_params(const ExperimentConfig& config, double d) {
    CodecParams p = config.codec;
    if (config.mbar_auto) p.mbar = 2.0 * d;
    if (config.m0_auto) p.m0 = p.mbar;
    if (p.rule == AdaptationRule::Jayant) p = p.with_rule(AdaptationRule::Jayant);
    p.validate();
    return p;
}

Trace attach_samples(Trace trace, const SampledSignal& samples) {
    for (std::size_t k = 0; k < trace.records.size(); ++k) trace.records[k].x = samples.values[k];
    return trace;
}

} // namespace

// ---- JSON mapping -----------------------------------------------------------

SignalSpec signal_from_json(const Json& j) {
    if (!j.is_object()) throw ParameterError("signal must be a JSON object");
    const std::string type = get_string(j, "type");
    SignalSpec spec;
    if (type == "constant") {
        spec = constant(get_number(j, "level"));
    } else if (type == "ramp") {
        spec = ramp(get_number(j, "slope"), get_number_or(j, "intercept", 0.0));
    } else if (type == "sine") {
        spec = sine(get_number_or(j, "amplitude", 1.0), get_number(j, "frequency_hz"),
                    get_number_or(j, "phase", 0.0));
    } else if (type == "piecewise") {
        if (!j.contains("segments") || !j["segments"].is_array()) {
            throw ParameterError("piecewise signal needs a 'segments' array");
        }
        std::vector<Segment> segments;
        for (const auto& seg : j["segments"]) {
            if (!seg.contains("signal")) throw ParameterError("piecewise segment needs a 'signal'");
            segments.push_back(Segment{get_number(seg, "start"), signal_from_json(seg["signal"])});
        }
        spec = piecewise(std::move(segments));
    } else {
        throw ParameterError("unknown signal type '" + type + "'");
    }
    spec.validate();
    return spec;
}

Json signal_to_json(const SignalSpec& spec) {
    return std::visit(overloaded{
                          [](const Constant& c) { return Json{{"type", "constant"}, {"level", c.level}}; },
                          [](const Ramp& r) {
                              return Json{{"type", "ramp"}, {"slope", r.slope}, {"intercept", r.intercept}};
                          },
                          [](const Sine& s) {
                              return Json{{"type", "sine"},
                                          {"amplitude", s.amplitude},
                                          {"frequency_hz", s.frequency_hz},
                                          {"phase", s.phase}};
                          },
                          [](const Piecewise& p) {
                              Json segs = Json::array();
                              for (const auto& seg : p.segments) {
                                  segs.push_back(Json{{"start", seg.start}, {"signal", signal_to_json(seg.signal)}});
                              }
                              return Json{{"type", "piecewise"}, {"segments", std::move(segs)}};
                          },
                      },
                      spec.shape);
}

Json params_to_json(const CodecParams& params) {
    return Json{{"y0", params.y0},       {"M0", params.m0},       {"Mbar", params.mbar},
                {"a", params.a},         {"delta", params.delta}, {"rule", std::string(to_string(params.rule))}};
}

ChannelModel channel_from_json(const Json& j) {
    if (!j.is_object()) throw ParameterError("channel must be a JSON object");
    const std::string type = get_string(j, "type");
    ChannelModel model;
    if (type == "noiseless") {
        model = Noiseless{};
    } else if (type == "erasure") {
        const double seed = get_number_or(j, "seed", 0.0);
        if (seed < 0.0 || seed != std::floor(seed)) throw ParameterError("erasure seed must be a non-negative integer");
        model = Erasure{get_number(j, "p"), static_cast<std::uint64_t>(seed)};
    } else {
        throw ParameterError("unknown channel type '" + type + "'");
    }
    validate(model);
    return model;
}

Json channel_to_json(const ChannelModel& model) {
    return std::visit(overloaded{
                          [](const Noiseless&) { return Json{{"type", "noiseless"}}; },
                          [](const Erasure& e) { return Json{{"type", "erasure"}, {"p", e.p}, {"seed", e.seed}}; },
                      },
                      model);
}

Json report_to_json(const TheoremReport& report) {
    Json claims = Json::array();
    for (const auto& c : report.claims) {
        claims.push_back(Json{{"id", c.id}, {"applicable", c.applicable}, {"note", c.note}});
    }
    Json violations = Json::array();
    for (const auto& v : report.violations) {
        violations.push_back(Json{{"claim", v.claim}, {"step", v.step}, {"detail", v.detail}});
    }
    return Json{{"ok", report.ok()},
                {"start", report.start},
                {"tau", optional_index(report.tau)},
                {"tau_bound", optional_index(report.tau_bound)},
                {"eta", optional_index(report.eta)},
                {"eta_window_end", optional_index(report.eta_window_end)},
                {"D", report.d},
                {"sample_error_bound", report.sample_error_bound},
                {"interval_error_bound", report.interval_error_bound},
                {"oversample_factor", report.oversample_factor},
                {"claims", std::move(claims)},
                {"violations", std::move(violations)}};
}

// ---- CSV --------------------------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw NumericError("cannot format number");
    return std::string(buf, ptr);
}

std::string trace_to_csv(const Trace& trace) {
    std::string out(kTraceCsvHeader);
    out += '\n';
    for (const auto& r : trace.records) {
        out += std::to_string(r.k);
        out += ',';
        out += format_double(r.t);
        out += ',';
        if (r.x) out += format_double(*r.x);
        out += ',';
        out += format_double(r.y);
        out += r.h == Symbol::Plus ? ",+1," : ",-1,";
        out += format_double(r.m);
        out += r.in_switch ? ",1," : ",0,";
        if (r.x) out += format_double(std::abs(*r.x - r.y));
        out += '\n';
    }
    return out;
}

Trace parse_trace_csv(std::string_view text, const CodecParams& params) {
    const auto lines = numbered_lines(text);
    if (lines.empty() || lines.front().second != kTraceCsvHeader) {
        throw FormatError("trace CSV header must be '" + std::string(kTraceCsvHeader) + "'",
                          lines.empty() ? 1 : lines.front().first);
    }
    Trace trace;
    trace.params = params;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [line_no, line] = lines[i];
        const auto f = split(line, ',');
        if (f.size() != 8) throw FormatError("trace row needs 8 columns", line_no);
        StepRecord r;
        const double k = require_double(f[0], line_no, 0, "k");
        if (k != std::floor(k) || k != static_cast<double>(i - 1)) {
            throw FormatError("rows must be numbered consecutively from 0", line_no, 0);
        }
        r.k = static_cast<std::int64_t>(k);
        r.t = require_double(f[1], line_no, 1, "t");
        if (!trim(f[2]).empty()) r.x = require_double(f[2], line_no, 2, "x");
        r.y = require_double(f[3], line_no, 3, "y");
        const double h = require_double(f[4], line_no, 4, "h");
        if (h != 1.0 && h != -1.0) throw FormatError("h must be +1 or -1", line_no, 4);
        r.h = h > 0 ? Symbol::Plus : Symbol::Minus;
        r.m = require_double(f[5], line_no, 5, "M");
        const double sw = require_double(f[6], line_no, 6, "in_switch");
        if (sw != 0.0 && sw != 1.0) throw FormatError("in_switch must be 0 or 1", line_no, 6);
        r.in_switch = sw == 1.0;
        trace.records.push_back(r);
    }
    return trace;
}

std::vector<double> parse_samples_csv(std::string_view text) {
    const auto lines = numbered_lines(text);
    if (lines.empty()) return {};
    const auto header = split(lines.front().second, ',');
    std::optional<std::size_t> column;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (trim(header[c]) == "x") column = c;
    }
    if (!column) throw FormatError("samples CSV header has no 'x' column", lines.front().first);
    std::vector<double> values;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [line_no, line] = lines[i];
        const auto f = split(line, ',');
        if (f.size() != header.size()) throw FormatError("row has the wrong number of columns", line_no);
        const double v = require_double(f[*column], line_no, *column, "x");
        if (!std::isfinite(v)) throw FormatError("sample is not finite", line_no, *column);
        values.push_back(v);
    }
    return values;
}

// ---- experiments --------------------------------------------------------------

ExperimentConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw ParameterError("config must be a JSON object");
    ExperimentConfig c;
    if (!j.contains("signal")) throw ParameterError("config needs a 'signal' section");
    c.signal = signal_from_json(j["signal"]);

    if (!j.contains("codec") || !j["codec"].is_object()) throw ParameterError("config needs a 'codec' section");
    const Json& codec = j["codec"];
    c.codec.y0 = get_number_or(codec, "y0", c.codec.y0);
    c.codec.a = get_number_or(codec, "a", c.codec.a);
    c.codec.delta = get_number(codec, "delta");
    if (codec.contains("rule")) c.codec.rule = parse_rule(get_string(codec, "rule"));
    if (codec.contains("Mbar") && codec["Mbar"].is_string()) {
        if (codec["Mbar"] != "auto") throw ParameterError("Mbar must be a number or \"auto\"");
        c.mbar_auto = true;
    } else {
        c.codec.mbar = get_number_or(codec, "Mbar", c.codec.mbar);
    }
    if (codec.contains("M0") && codec["M0"].is_string()) {
        if (codec["M0"] != "auto") throw ParameterError("M0 must be a number or \"auto\"");
        c.m0_auto = true;
    } else {
        c.codec.m0 = get_number_or(codec, "M0", c.codec.m0);
    }

    c.horizon = get_number(j, "horizon");
    if (j.contains("channel")) c.channel = channel_from_json(j["channel"]);
    if (j.contains("oversample_factor")) {
        const double f = get_number(j, "oversample_factor");
        if (f != std::floor(f) || f < 2) throw ParameterError("oversample_factor must be an integer >= 2");
        c.oversample_factor = static_cast<int>(f);
    }
    if (j.contains("variation_interval")) {
        const Json& iv = j["variation_interval"];
        if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
            throw ParameterError("variation_interval must be [alpha, beta]");
        }
        c.variation_interval = std::pair{iv[0].get<double>(), iv[1].get<double>()};
    }
    if (j.contains("growth")) {
        c.growth = GrowthBound{get_number(j["growth"], "C"), get_number(j["growth"], "c")};
    }
    if (j.contains("restart_time")) c.restart_time = get_number(j, "restart_time");
    if (j.contains("outputs")) {
        const Json& o = j["outputs"];
        if (o.contains("trace_csv")) c.outputs.trace_csv = get_string(o, "trace_csv");
        if (o.contains("report_json")) c.outputs.report_json = get_string(o, "report_json");
    }
    if (j.contains("comparison")) {
        const Json& cmp = j["comparison"];
        ComparisonSettings s;
        if (cmp.contains("baseline")) s.baseline = parse_rule(get_string(cmp, "baseline"));
        s.proximity_band_multiplier = get_number_or(cmp, "proximity_band_multiplier", 1.0);
        if (!(s.proximity_band_multiplier > 0.0)) throw ParameterError("band multiplier must be positive");
        c.comparison = s;
    }
    return c;
}

Json config_to_json(const ExperimentConfig& config) {
    Json codec = params_to_json(config.codec);
    if (config.mbar_auto) codec["Mbar"] = "auto";
    if (config.m0_auto) codec["M0"] = "auto";
    Json j{{"signal", signal_to_json(config.signal)},
           {"codec", std::move(codec)},
           {"horizon", config.horizon},
           {"channel", channel_to_json(config.channel)},
           {"oversample_factor", config.oversample_factor}};
    if (config.variation_interval) {
        j["variation_interval"] = Json::array({config.variation_interval->first, config.variation_interval->second});
    }
    if (config.growth) j["growth"] = Json{{"C", config.growth->scale}, {"c", config.growth->exponent}};
    if (config.restart_time) j["restart_time"] = *config.restart_time;
    j["outputs"] = Json{{"trace_csv", config.outputs.trace_csv}, {"report_json", config.outputs.report_json}};
    if (config.comparison) {
        j["comparison"] = Json{{"baseline", std::string(to_string(config.comparison->baseline))},
                               {"proximity_band_multiplier", config.comparison->proximity_band_multiplier}};
    }
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParameterError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

SimulationResult simulate(const ExperimentConfig& config) {
    SimulationResult out;
    out.samples = sample(config.signal, config.codec.delta, config.horizon);
    const auto [alpha, beta] = variation_interval(config);
    out.variation = estimate_variation_bound(config.signal, config.codec.delta, alpha, beta,
                                             config.oversample_factor);
    out.params = resolve_params(config, out.variation.d);
    out.encoded = encode_signal(out.params, out.samples);
    out.received = transmit(out.encoded.bits, config.channel);
    out.decoded = attach_samples(decode_with_erasures(out.params, out.received), out.samples);
    out.report = config.restart_time
                     ? verify_after_jump(out.decoded, out.samples, out.variation, config.growth,
                                         config.oversample_factor, *config.restart_time)
                     : verify_theorem(out.decoded, out.samples, out.variation, config.growth,
                                      config.oversample_factor);
    return out;
}

TheoremReport verify_trace(const ExperimentConfig& config, const Trace& trace) {
    const SampledSignal samples = sample(config.signal, config.codec.delta, config.horizon);
    const auto [alpha, beta] = variation_interval(config);
    const VariationBound variation =
        estimate_variation_bound(config.signal, config.codec.delta, alpha, beta, config.oversample_factor);
    Trace checked = trace;
    checked.params = resolve_params(config, variation.d);
    if (checked.records.size() != samples.size()) {
        throw ParameterError("trace has " + std::to_string(checked.records.size()) + " rows but the config yields " +
                             std::to_string(samples.size()) + " samples");
    }
    return config.restart_time ? verify_after_jump(checked, samples, variation, config.growth,
                                                   config.oversample_factor, *config.restart_time)
                               : verify_theorem(checked, samples, variation, config.growth, config.oversample_factor);
}

Json simulation_report_json(const ExperimentConfig& config, const SimulationResult& result) {
    double max_divergence = 0.0;
    double final_divergence = 0.0;
    const auto& sent = result.encoded.trace.records;
    const auto& got = result.decoded.records;
    for (std::size_t k = 0; k < sent.size(); ++k) {
        final_divergence = std::abs(sent[k].y - got[k].y);
        max_divergence = std::max(max_divergence, final_divergence);
    }
    return Json{{"config", config_to_json(config)},
                {"params", params_to_json(result.params)},
                {"samples", result.samples.size()},
                {"bits", result.encoded.bits.size()},
                {"variation",
                 Json{{"D", result.variation.d},
                      {"alpha", result.variation.alpha},
                      {"beta", result.variation.beta},
                      {"oversample_factor", result.variation.oversample_factor}}},
                {"channel",
                 Json{{"model", channel_to_json(config.channel)},
                      {"erased", result.received.erased_count()},
                      {"max_divergence", max_divergence},
                      {"final_divergence", final_divergence}}},
                {"theorem", report_to_json(result.report)}};
}

void write_files_atomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files) {
    namespace fs = std::filesystem;
    std::vector<fs::path> written;
    const auto discard = [&] {
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
    };
    for (const auto& [path, content] : files) {
        fs::path tmp = path;
        tmp += ".tmp";
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) {
            discard();
            throw Error("cannot write " + path.string());
        }
        written.push_back(tmp);
        os << content;
        if (!os.flush()) {
            discard();
            throw Error("failed writing " + path.string());
        }
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::error_code ec;
        fs::rename(written[i], files[i].first, ec);
        if (ec) {
            discard();
            throw Error("cannot move output into place: " + files[i].first.string());
        }
    }
}

// ---- rule comparison -------------------------------------------------------------

std::optional<std::int64_t> recovery_steps(const Trace& trace, const SampledSignal& samples,
                                           std::int64_t jump_index, double band, int hold) {
    const auto n = static_cast<std::int64_t>(std::min(trace.records.size(), samples.size()));
    const auto in_band = [&](std::int64_t k) {
        return std::abs(samples.values[static_cast<std::size_t>(k)] -
                        trace.records[static_cast<std::size_t>(k)].y) <= band;
    };
    for (std::int64_t k = jump_index; k + hold <= n; ++k) {
        bool held = true;
        for (int i = 0; i < hold && held; ++i) held = in_band(k + i);
        if (held) return k - jump_index;
    }
    return std::nullopt;
}

std::optional<double> first_jump(const SignalSpec& spec) {
    const auto* p = std::get_if<Piecewise>(&spec.shape);
    if (!p) return std::nullopt;
    for (std::size_t i = 1; i < p->segments.size(); ++i) {
        const auto& before = p->segments[i - 1];
        const auto& after = p->segments[i];
        if (before.signal(after.start - before.start) != after.signal(0.0)) return after.start;
    }
    return std::nullopt;
}

ComparisonReport compare(const ExperimentConfig& config) {
    if (!config.comparison) throw ParameterError("config has no 'comparison' section");
    const auto jump = first_jump(config.signal);
    if (!jump) throw ParameterError("comparison needs a signal with at least one jump");
    const double delta = config.codec.delta;
    if (!(*jump < config.horizon)) throw ParameterError("jump lies beyond the horizon");

    const SampledSignal samples = sample(config.signal, delta, config.horizon);
    double alpha = *jump;
    double beta = config.horizon;
    for (double b : config.signal.boundaries()) {
        if (b > alpha) {
            beta = b;
            break;
        }
    }
    if (config.variation_interval) std::tie(alpha, beta) = *config.variation_interval;
    const VariationBound variation =
        estimate_variation_bound(config.signal, delta, alpha, beta, config.oversample_factor);

    ExperimentConfig as_modified = config;
    as_modified.codec.rule = AdaptationRule::Modified;
    const CodecParams modified = resolve_params(as_modified, variation.d);
    const CodecParams baseline = modified.with_rule(config.comparison->baseline);

    const auto run = [&](const CodecParams& p) {
        const auto encoded = encode_signal(p, samples);
        return decode_with_erasures(p, transmit(encoded.bits, config.channel));
    };

    ComparisonReport report;
    report.jump_time = *jump;
    report.jump_index = first_index_at_or_after(*jump, delta);
    report.baseline = config.comparison->baseline;
    report.d = variation.d;
    report.band = config.comparison->proximity_band_multiplier *
                  (modified.a * modified.mbar + variation.d) * delta;
    report.recovery_steps_modified = recovery_steps(run(modified), samples, report.jump_index, report.band);
    report.recovery_steps_baseline = recovery_steps(run(baseline), samples, report.jump_index, report.band);
    return report;
}

Json comparison_to_json(const ComparisonReport& report) {
    return Json{{"jump_time", report.jump_time},
                {"jump_index", report.jump_index},
                {"baseline", std::string(to_string(report.baseline))},
                {"D", report.d},
                {"band", report.band},
                {"recovery_steps_modified", optional_index(report.recovery_steps_modified)},
                {"recovery_steps_baseline", optional_index(report.recovery_steps_baseline)}};
}

} // namespace odm
