"""One-bit adaptive delta modulation codec."""

import json as _json

from ._core import (
    AdaptationRule,
    CodecParams,
    DomainError,
    FormatError,
    NumericError,
    OdmError,
    ParameterError,
    StepRecord,
    Trace,
    __version__,
    decode,
    encode,
    format_bitstream,
    parse_bitstream,
    step_size_update,
    variation_bound,
)
from ._core import compare as _compare
from ._core import simulate as _simulate


def simulate(config):
    """Run an experiment. `config` is a dict or JSON text; returns (trace, report dict)."""
    text = config if isinstance(config, str) else _json.dumps(config)
    trace, report = _simulate(text)
    return trace, _json.loads(report)


def compare(config):
    """Recovery comparison after the first jump; returns a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_compare(text))


__all__ = [
    "AdaptationRule",
    "CodecParams",
    "DomainError",
    "FormatError",
    "NumericError",
    "OdmError",
    "ParameterError",
    "StepRecord",
    "Trace",
    "__version__",
    "compare",
    "decode",
    "encode",
    "format_bitstream",
    "parse_bitstream",
    "simulate",
    "step_size_update",
    "variation_bound",
]
