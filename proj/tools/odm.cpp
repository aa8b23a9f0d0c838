// odm: command-line front end for the one-bit delta modulation codec.
//
// Configuration precedence: built-in defaults < --config file < command-line flags.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "odm/channel.hpp"
#include "odm/codec.hpp"
#include "odm/error.hpp"
#include "odm/harness.hpp"
#include "odm/theory.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitUsage = 2;

struct Overrides {
    std::optional<double> delta, a, m0, mbar, y0;
    std::optional<std::string> rule;
    std::optional<std::uint64_t> seed;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--delta", delta, "Sampling period");
        cmd.add_option("--a", a, "Step-size multiplier in (1, 2]");
        cmd.add_option("--m0", m0, "Initial step size");
        cmd.add_option("--mbar", mbar, "Step-size floor");
        cmd.add_option("--y0", y0, "Initial estimate");
        cmd.add_option("--rule", rule, "Adaptation rule")->check(CLI::IsMember({"modified", "jayant"}));
        cmd.add_option("--seed", seed, "Erasure channel seed");
    }

    void apply(odm::ExperimentConfig& c) const {
        if (delta) c.codec.delta = *delta;
        if (a) c.codec.a = *a;
        if (y0) c.codec.y0 = *y0;
        if (m0) {
            c.codec.m0 = *m0;
            c.m0_auto = false;
        }
        if (mbar) {
            c.codec.mbar = *mbar;
            c.mbar_auto = false;
        }
        if (rule) c.codec.rule = odm::parse_rule(*rule);
        if (seed) {
            if (auto* e = std::get_if<odm::Erasure>(&c.channel)) e->seed = *seed;
        }
    }

    // Stand-alone encode/decode defaults: y0=0, M0=Mbar=1, a=1.5, delta=1.
    [[nodiscard]] odm::CodecParams params(std::optional<odm::CodecParams> base) const {
        odm::ExperimentConfig c;
        c.codec = base.value_or(odm::CodecParams{0.0, 1.0, 1.0, 1.5, 1.0, odm::AdaptationRule::Modified});
        apply(c);
        c.codec.validate();
        return c.codec;
    }
};

std::string read_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw odm::Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void emit(const std::optional<std::string>& path, const std::string& text) {
    if (path) {
        odm::write_files_atomically({{*path, text}});
    } else {
        std::cout << text;
    }
}

fs::path under(const fs::path& dir, const std::string& name) {
    const fs::path p(name);
    return p.is_absolute() ? p : dir / p;
}

void warn_inapplicable(const odm::TheoremReport& report) {
    for (const auto& c : report.claims) {
        if (!c.applicable && (c.id == odm::claim::kSettling || c.id == odm::claim::kSteadyStepSize)) {
            std::cerr << "warning: " << c.id << " not checked: " << c.note << '\n';
        }
    }
}

void print_summary(const odm::TheoremReport& report) {
    const auto show = [](const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string("-"); };
    std::cout << "tau=" << show(report.tau) << " tau_bound=" << show(report.tau_bound) << " eta=" << show(report.eta)
              << " D=" << odm::format_double(report.d) << " violations=" << report.violations.size() << '\n';
    for (const auto& v : report.violations) {
        std::cout << "  " << v.claim << " at k=" << v.step << ": " << v.detail << '\n';
    }
}

odm::ExperimentConfig load(const std::string& path, const Overrides& o) {
    auto c = odm::load_config(path);
    o.apply(c);
    c.codec.validate();
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"One-bit adaptive delta modulation: simulate, verify, compare, encode, decode"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::string> trace_path;
    std::optional<std::string> output;
    std::string input;
    std::optional<std::string> config_opt;

    Overrides sim_o, ver_o, cmp_o, enc_o, dec_o;

    auto* simulate = app.add_subcommand("simulate", "Run one experiment and write the trace CSV and report JSON");
    simulate->add_option("--config", config_path, "Experiment config (JSON)")->required();
    simulate->add_option("--out", out_dir, "Output directory (default: current directory)");
    sim_o.add_to(*simulate);

    auto* verify = app.add_subcommand("verify", "Check the tracking guarantees; exit 1 on any violation");
    verify->add_option("--config", config_path, "Experiment config (JSON)")->required();
    verify->add_option("--trace", trace_path, "Verify this trace CSV instead of simulating");
    verify->add_option("--out", out_dir, "Also write the report JSON into this directory");
    ver_o.add_to(*verify);

    auto* compare = app.add_subcommand("compare", "Compare recovery after a jump against the baseline rule");
    compare->add_option("--config", config_path, "Experiment config with a comparison section")->required();
    compare->add_option("--out", out_dir, "Also write comparison.json into this directory");
    cmp_o.add_to(*compare);

    auto* encode = app.add_subcommand("encode", "Encode a samples CSV (column 'x') into an ODM/1 bitstream");
    encode->add_option("input", input, "Samples CSV")->required();
    encode->add_option("-o,--output", output, "Bitstream file (default: stdout)");
    encode->add_option("--config", config_opt, "Take codec parameters from this config");
    enc_o.add_to(*encode);

    auto* decode = app.add_subcommand("decode", "Decode an ODM/1 bitstream into a trace CSV");
    decode->add_option("input", input, "Bitstream file")->required();
    decode->add_option("-o,--output", output, "Trace CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate) {
            const auto config = load(config_path, sim_o);
            const auto result = odm::simulate(config);
            warn_inapplicable(result.report);
            const fs::path dir = out_dir.value_or(".");
            const auto trace_file = under(dir, config.outputs.trace_csv);
            const auto report_file = under(dir, config.outputs.report_json);
            odm::write_files_atomically(
                {{trace_file, odm::trace_to_csv(result.decoded)},
                 {report_file, odm::simulation_report_json(config, result).dump(2) + "\n"}});
            std::cout << "wrote " << result.decoded.records.size() << " steps to " << trace_file.string() << " and "
                      << report_file.string() << '\n';
            return kExitOk;
        }
        if (*verify) {
            const auto config = load(config_path, ver_o);
            odm::TheoremReport report;
            odm::Json json;
            if (trace_path) {
                const auto trace = odm::parse_trace_csv(read_file(*trace_path), config.codec);
                report = odm::verify_trace(config, trace);
                json = odm::report_to_json(report);
            } else {
                const auto result = odm::simulate(config);
                report = result.report;
                json = odm::simulation_report_json(config, result);
            }
            warn_inapplicable(report);
            print_summary(report);
            if (out_dir) {
                odm::write_files_atomically({{under(*out_dir, config.outputs.report_json), json.dump(2) + "\n"}});
            }
            return report.ok() ? kExitOk : kExitViolations;
        }
        if (*compare) {
            const auto config = load(config_path, cmp_o);
            const auto text = odm::comparison_to_json(odm::compare(config)).dump(2) + "\n";
            if (out_dir) odm::write_files_atomically({{fs::path(*out_dir) / "comparison.json", text}});
            std::cout << text;
            return kExitOk;
        }
        if (*encode) {
            std::optional<odm::CodecParams> base;
            if (config_opt) {
                const auto c = odm::load_config(*config_opt);
                if ((c.mbar_auto && !enc_o.mbar) || (c.m0_auto && !enc_o.m0)) {
                    throw odm::ParameterError("\"auto\" step sizes need a signal; pass --mbar and --m0");
                }
                base = c.codec;
            }
            const auto params = enc_o.params(base);
            const auto values = odm::parse_samples_csv(read_file(input));
            const auto encoded = odm::encode_signal(params, odm::SampledSignal{params.delta, values, std::nullopt});
            emit(output, odm::format_bitstream(params, encoded.bits));
            return kExitOk;
        }
        if (*decode) {
            const auto stream = odm::parse_bitstream(read_file(input));
            emit(output, odm::trace_to_csv(odm::decode_bitstream(stream.params, stream.bits)));
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
