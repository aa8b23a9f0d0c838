#include "odm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "odm/error.hpp"

namespace odm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// 53 random mantissa bits, independent of the standard library's distributions
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    // a final newline does not open another line
    if (!lines.empty() && lines.back().empty() && !text.empty() && text.back() == '\n') lines.pop_back();
    return lines;
}

double number_field(const nlohmann::json& header, const char* key) {
    if (!header.contains(key) || !header[key].is_number()) {
        throw FormatError(std::string("header field '") + key + "' missing or not a number", 2);
    }
    return header[key].get<double>();
}

} // namespace

std::size_t ReceivedStream::erased_count() const noexcept {
    return static_cast<std::size_t>(std::count(symbols.begin(), symbols.end(), Received::Erased));
}

Received to_received(Symbol s) noexcept {
    return s == Symbol::Plus ? Received::Plus : Received::Minus;
}

void validate(const ChannelModel& model) {
    if (const auto* e = std::get_if<Erasure>(&model)) {
        if (!(e->p >= 0.0 && e->p < 1.0)) throw ParameterError("erasure probability must lie in [0, 1)");
    }
}

ReceivedStream transmit(std::span<const Symbol> bits, const ChannelModel& model) {
    validate(model);
    ReceivedStream out;
    out.symbols.reserve(bits.size());
    std::visit(overloaded{
                   [&](const Noiseless&) {
                       for (Symbol s : bits) out.symbols.push_back(to_received(s));
                   },
                   [&](const Erasure& e) {
                       std::mt19937_64 rng(e.seed);
                       for (Symbol s : bits) {
                           const bool erased = unit_uniform(rng) < e.p;
                           out.symbols.push_back(erased ? Received::Erased : to_received(s));
                       }
                   },
               },
               model);
    return out;
}

Trace decode_with_erasures(const CodecParams& params, const ReceivedStream& received,
                           ErasurePolicy policy) {
    Trace trace;
    trace.params = params;
    trace.records.reserve(received.symbols.size());
    CodecState state = init_state(params);
    for (Received r : received.symbols) {
        const bool erased = r == Received::Erased;
        Symbol h = state.h_prev;
        if (!erased) {
            h = r == Received::Plus ? Symbol::Plus : Symbol::Minus;
        } else if (policy != ErasurePolicy::HoldSymbol) {
            throw ParameterError("unsupported erasure policy");
        }
        auto step = decode_step(params, state, h);
        step.record.erased = erased;
        state = step.state;
        trace.records.push_back(step.record);
    }
    return trace;
}

std::string bits_to_string(std::span<const Symbol> bits) {
    std::string body;
    body.reserve(bits.size());
    for (Symbol s : bits) body.push_back(s == Symbol::Plus ? '1' : '0');
    return body;
}

std::string format_bitstream(const CodecParams& params, std::span<const Symbol> bits) {
    params.validate();
    nlohmann::ordered_json header;
    header["y0"] = params.y0;
    header["M0"] = params.m0;
    header["Mbar"] = params.mbar;
    header["a"] = params.a;
    header["delta"] = params.delta;
    header["rule"] = std::string(to_string(params.rule));
    header["count"] = bits.size();
    std::string out(kBitstreamMagic);
    out += '\n';
    out += header.dump();
    out += '\n';
    out += bits_to_string(bits);
    out += '\n';
    return out;
}

Bitstream parse_bitstream(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty() || lines[0] != kBitstreamMagic) throw FormatError("bad magic, expected ODM/1", 1);
    if (lines.size() < 2) throw FormatError("missing header line", 2);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(lines[1]);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("header is not valid JSON: ") + e.what(), 2, e.byte);
    }
    if (!header.is_object()) throw FormatError("header must be a JSON object", 2);

    Bitstream out;
    out.params.y0 = number_field(header, "y0");
    out.params.m0 = number_field(header, "M0");
    out.params.mbar = number_field(header, "Mbar");
    out.params.a = number_field(header, "a");
    out.params.delta = number_field(header, "delta");
    if (!header.contains("rule") || !header["rule"].is_string()) {
        throw FormatError("header field 'rule' missing or not a string", 2);
    }
    if (!header.contains("count") || !header["count"].is_number_unsigned()) {
        throw FormatError("header field 'count' missing or not a non-negative integer", 2);
    }
    try {
        out.params.rule = parse_rule(header["rule"].get<std::string>());
        out.params.validate();
    } catch (const ParameterError& e) {
        throw FormatError(e.what(), 2);
    }
    const auto count = header["count"].get<std::uint64_t>();

    const std::string_view body = lines.size() > 2 ? lines[2] : std::string_view{};
    if (lines.size() < 3 && count > 0) throw FormatError("missing body line", 3);
    if (body.size() < count) throw FormatError("body truncated: expected " + std::to_string(count) + " symbols", 3, body.size());
    if (body.size() > count) throw FormatError("body longer than header count", 3, count);
    out.bits.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '1') out.bits.push_back(Symbol::Plus);
        else if (body[i] == '0') out.bits.push_back(Symbol::Minus);
        else throw FormatError(std::string("invalid symbol '") + body[i] + "'", 3, i);
    }
    for (std::size_t i = 3; i < lines.size(); ++i) {
        if (!lines[i].empty()) throw FormatError("unexpected content after body", i + 1);
    }
    return out;
}

void write_bitstream(const std::filesystem::path& path, const CodecParams& params,
                     std::span<const Symbol> bits) {
    const std::string text = format_bitstream(params, bits);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << text;
    if (!os.flush()) throw Error("failed writing " + path.string());
}

Bitstream read_bitstream(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_bitstream(buf.str());
}

} // namespace odm
