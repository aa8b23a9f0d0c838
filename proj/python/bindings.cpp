#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "odm/channel.hpp"
#include "odm/codec.hpp"
#include "odm/error.hpp"
#include "odm/harness.hpp"
#include "odm/signals.hpp"
#include "odm/theory.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

std::vector<odm::Symbol> to_symbols(const std::vector<int>& bits) {
    std::vector<odm::Symbol> out;
    out.reserve(bits.size());
    for (int b : bits) {
        if (b != 1 && b != -1) throw odm::ParameterError("symbols must be +1 or -1");
        out.push_back(b > 0 ? odm::Symbol::Plus : odm::Symbol::Minus);
    }
    return out;
}

std::vector<int> to_ints(const std::vector<odm::Symbol>& bits) {
    std::vector<int> out;
    out.reserve(bits.size());
    for (auto s : bits) out.push_back(odm::to_int(s));
    return out;
}

odm::ExperimentConfig parse_config(const std::string& json) {
    return odm::config_from_json(odm::Json::parse(json));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "One-bit adaptive delta modulation codec";

    auto base = py::register_exception<odm::Error>(m, "OdmError", PyExc_RuntimeError);
    py::register_exception<odm::ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<odm::FormatError>(m, "FormatError", base.ptr());
    py::register_exception<odm::NumericError>(m, "NumericError", base.ptr());
    py::register_exception<odm::DomainError>(m, "DomainError", base.ptr());

    py::enum_<odm::AdaptationRule>(m, "AdaptationRule")
        .value("MODIFIED", odm::AdaptationRule::Modified)
        .value("JAYANT", odm::AdaptationRule::Jayant);

    py::class_<odm::CodecParams>(m, "CodecParams")
        .def(py::init([](double y0, double m0, double mbar, double a, double delta, odm::AdaptationRule rule) {
                 odm::CodecParams p{y0, m0, mbar, a, delta, rule};
                 p.validate();
                 return p;
             }),
             "y0"_a = 0.0, "m0"_a = 1.0, "mbar"_a = 1.0, "a"_a = 1.5, "delta"_a = 1.0,
             "rule"_a = odm::AdaptationRule::Modified)
        .def_readonly("y0", &odm::CodecParams::y0)
        .def_readonly("m0", &odm::CodecParams::m0)
        .def_readonly("mbar", &odm::CodecParams::mbar)
        .def_readonly("a", &odm::CodecParams::a)
        .def_readonly("delta", &odm::CodecParams::delta)
        .def_readonly("rule", &odm::CodecParams::rule)
        .def("with_rule", &odm::CodecParams::with_rule, "rule"_a)
        .def("__eq__", [](const odm::CodecParams& a, const odm::CodecParams& b) { return a == b; })
        .def("__repr__", [](const odm::CodecParams& p) { return "CodecParams(" + odm::params_to_json(p).dump() + ")"; });

    py::class_<odm::StepRecord>(m, "StepRecord")
        .def_readonly("k", &odm::StepRecord::k)
        .def_readonly("t", &odm::StepRecord::t)
        .def_readonly("x", &odm::StepRecord::x)
        .def_readonly("y", &odm::StepRecord::y)
        .def_property_readonly("h", [](const odm::StepRecord& r) { return odm::to_int(r.h); })
        .def_readonly("m", &odm::StepRecord::m)
        .def_readonly("in_switch", &odm::StepRecord::in_switch)
        .def_readonly("erased", &odm::StepRecord::erased);

    py::class_<odm::Trace>(m, "Trace")
        .def_readonly("params", &odm::Trace::params)
        .def_readonly("records", &odm::Trace::records)
        .def("__len__", [](const odm::Trace& t) { return t.records.size(); })
        .def("symbols", [](const odm::Trace& t) { return to_ints(t.symbols()); })
        .def("to_csv", [](const odm::Trace& t) { return odm::trace_to_csv(t); })
        .def("reconstruct", [](const odm::Trace& t, std::size_t k, double time) {
            if (k >= t.records.size()) throw py::index_error("step out of range");
            return odm::reconstruct(t.records[k], time, t.params.delta);
        }, "k"_a, "t"_a);

    m.def("encode", [](const odm::CodecParams& params, const std::vector<double>& samples) {
        auto r = odm::encode_signal(params, odm::SampledSignal{params.delta, samples, std::nullopt});
        return py::make_tuple(to_ints(r.bits), std::move(r.trace));
    }, "params"_a, "samples"_a, "Encode samples taken every params.delta. Returns (bits, trace).");

    m.def("decode", [](const odm::CodecParams& params, const std::vector<int>& bits) {
        return odm::decode_bitstream(params, to_symbols(bits));
    }, "params"_a, "bits"_a);

    m.def("step_size_update", py::overload_cast<double, bool, bool, const odm::CodecParams&>(&odm::step_size_update),
          "m_prev"_a, "in_switch"_a, "prev_in_switch"_a, "params"_a);

    m.def("format_bitstream", [](const odm::CodecParams& params, const std::vector<int>& bits) {
        return odm::format_bitstream(params, to_symbols(bits));
    }, "params"_a, "bits"_a);

    m.def("parse_bitstream", [](const std::string& text) {
        auto b = odm::parse_bitstream(text);
        return py::make_tuple(b.params, to_ints(b.bits));
    }, "text"_a);

    m.def("simulate", [](const std::string& config_json) {
        const auto config = parse_config(config_json);
        const auto result = odm::simulate(config);
        return py::make_tuple(result.decoded, odm::simulation_report_json(config, result).dump());
    }, "config_json"_a, "Run an experiment config. Returns (decoded trace, report JSON text).");

    m.def("compare", [](const std::string& config_json) {
        return odm::comparison_to_json(odm::compare(parse_config(config_json))).dump();
    }, "config_json"_a);

    m.def("variation_bound", [](const std::string& signal_json, double delta, double alpha, double beta, int oversample) {
        return odm::estimate_variation_bound(odm::signal_from_json(odm::Json::parse(signal_json)), delta, alpha, beta,
                                             oversample).d;
    }, "signal_json"_a, "delta"_a, "alpha"_a, "beta"_a, "oversample_factor"_a = odm::kDefaultOversample);

#ifdef VERSION_INFO
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
