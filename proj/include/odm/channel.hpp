#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "odm/codec.hpp"

namespace odm {

struct Noiseless {};

/// Binary erasure channel. Each position is dropped independently with probability p;
/// the receiver always knows which positions were dropped.
struct Erasure {
    double p = 0.0;
    std::uint64_t seed = 0;
};

using ChannelModel = std::variant<Noiseless, Erasure>;

enum class Received : std::int8_t { Minus = -1, Erased = 0, Plus = 1 };

struct ReceivedStream {
    std::vector<Received> symbols;

    [[nodiscard]] std::size_t erased_count() const noexcept;
};

[[nodiscard]] Received to_received(Symbol s) noexcept;

/// Throws ParameterError for p outside [0, 1).
void validate(const ChannelModel& model);

[[nodiscard]] ReceivedStream transmit(std::span<const Symbol> bits, const ChannelModel& model);

enum class ErasurePolicy {
    HoldSymbol, ///< substitute h_k := h_{k-1}
};

[[nodiscard]] Trace decode_with_erasures(const CodecParams& params, const ReceivedStream& received,
                                         ErasurePolicy policy = ErasurePolicy::HoldSymbol);

// ODM/1 bitstream file:
//   line 1  ODM/1
//   line 2  {"y0":..,"M0":..,"Mbar":..,"a":..,"delta":..,"rule":"modified"|"jayant","count":n}
//   line 3  n characters from {'0','1'}; '1' is +1
inline constexpr std::string_view kBitstreamMagic = "ODM/1";

struct Bitstream {
    CodecParams params;
    std::vector<Symbol> bits;
};

[[nodiscard]] std::string format_bitstream(const CodecParams& params, std::span<const Symbol> bits);
[[nodiscard]] Bitstream parse_bitstream(std::string_view text);

void write_bitstream(const std::filesystem::path& path, const CodecParams& params,
                     std::span<const Symbol> bits);
[[nodiscard]] Bitstream read_bitstream(const std::filesystem::path& path);

[[nodiscard]] std::string bits_to_string(std::span<const Symbol> bits);

} // namespace odm
