#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "odm/channel.hpp"
#include "odm/codec.hpp"
#include "odm/signals.hpp"
#include "odm/theory.hpp"

namespace odm {

using Json = nlohmann::ordered_json;

// ---- JSON mapping -----------------------------------------------------------

[[nodiscard]] SignalSpec signal_from_json(const Json& j);
[[nodiscard]] Json signal_to_json(const SignalSpec& spec);
[[nodiscard]] Json params_to_json(const CodecParams& params);
[[nodiscard]] ChannelModel channel_from_json(const Json& j);
[[nodiscard]] Json channel_to_json(const ChannelModel& model);
[[nodiscard]] Json report_to_json(const TheoremReport& report);

// ---- CSV --------------------------------------------------------------------

inline constexpr std::string_view kTraceCsvHeader = "k,t,x,y,h,M,in_switch,err_abs";

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] std::string trace_to_csv(const Trace& trace);
/// Rows must be in step order starting at 0. Throws FormatError naming the line.
[[nodiscard]] Trace parse_trace_csv(std::string_view text, const CodecParams& params);

/// Samples file: a header row naming an `x` column (other columns ignored), one row per step.
/// A file with no data rows yields no samples.
[[nodiscard]] std::vector<double> parse_samples_csv(std::string_view text);

// ---- experiments --------------------------------------------------------------

struct Outputs {
    std::string trace_csv = "trace.csv";
    std::string report_json = "report.json";
};

struct ComparisonSettings {
    AdaptationRule baseline = AdaptationRule::Jayant;
    double proximity_band_multiplier = 1.0;
};

/// One experiment. `mbar_auto` sets Mbar = 2D from the variation estimate and
/// `m0_auto` sets M0 = Mbar, both resolved at run time.
struct ExperimentConfig {
    SignalSpec signal = constant(0.0);
    CodecParams codec;
    bool mbar_auto = false;
    bool m0_auto = false;
    double horizon = 1.0;
    ChannelModel channel = Noiseless{};
    int oversample_factor = kDefaultOversample;
    std::optional<std::pair<double, double>> variation_interval; ///< defaults to [0, horizon]
    std::optional<GrowthBound> growth;
    std::optional<double> restart_time; ///< verify from the first step at or after this time
    Outputs outputs;
    std::optional<ComparisonSettings> comparison;
};

[[nodiscard]] ExperimentConfig config_from_json(const Json& j);
[[nodiscard]] Json config_to_json(const ExperimentConfig& config);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

struct SimulationResult {
    SampledSignal samples;
    VariationBound variation;
    CodecParams params; ///< with auto fields resolved
    EncodeResult encoded;
    ReceivedStream received;
    Trace decoded; ///< receiver trace, x attached from the samples
    TheoremReport report;
};

/// Samples, encodes, transmits, decodes, and verifies. No file I/O.
[[nodiscard]] SimulationResult simulate(const ExperimentConfig& config);

/// Verifies a given trace (e.g. read from a CSV) against the configured signal.
[[nodiscard]] TheoremReport verify_trace(const ExperimentConfig& config, const Trace& trace);

[[nodiscard]] Json simulation_report_json(const ExperimentConfig& config, const SimulationResult& result);

/// Writes every (path, content) pair or none: contents go to temporaries first,
/// then are renamed into place.
void write_files_atomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files);

// ---- rule comparison -------------------------------------------------------------

struct ComparisonReport {
    double jump_time = 0.0;
    std::int64_t jump_index = 0;
    std::optional<std::int64_t> recovery_steps_modified;  ///< nullopt: not recovered within the horizon
    std::optional<std::int64_t> recovery_steps_baseline;
    AdaptationRule baseline = AdaptationRule::Jayant;
    double band = 0.0;
    double d = 0.0;
};

/// Steps after `jump_index` until |x_k - y_k| <= band holds for `hold` consecutive steps.
[[nodiscard]] std::optional<std::int64_t> recovery_steps(const Trace& trace, const SampledSignal& samples,
                                                         std::int64_t jump_index, double band,
                                                         int hold = 3);

/// First piecewise boundary where the signal is discontinuous.
[[nodiscard]] std::optional<double> first_jump(const SignalSpec& spec);

/// Runs the modified rule and the baseline on the same samples. Throws ParameterError
/// if the config has no comparison section or the signal has no jump.
[[nodiscard]] ComparisonReport compare(const ExperimentConfig& config);
[[nodiscard]] Json comparison_to_json(const ComparisonReport& report);

} // namespace odm
