"""Hierarchical quantum assembly: data model, text format and analysis."""

from .analysis import (
    DEFAULT_ANGLE_QUANTUM,
    DEFAULT_CAP,
    Diagnostic,
    FlattenCapExceeded,
    GateCensus,
    RecursionDetected,
    flatten,
    flattened_size,
    gate_census,
    multiplicities,
    postorder,
    quantize_angle,
    validate,
)
from .model import (
    FT_GATESET,
    MNEMONICS,
    PHYSICAL_GATESET,
    Call,
    Gate,
    GateKind,
    Instruction,
    ModuleDef,
    Program,
    QasmError,
)
from .parser import QasmSyntaxError, module_order, parse_program, serialize_program

__all__ = [
    "DEFAULT_ANGLE_QUANTUM",
    "DEFAULT_CAP",
    "FT_GATESET",
    "MNEMONICS",
    "PHYSICAL_GATESET",
    "Call",
    "Diagnostic",
    "FlattenCapExceeded",
    "Gate",
    "GateCensus",
    "GateKind",
    "Instruction",
    "ModuleDef",
    "Program",
    "QasmError",
    "QasmSyntaxError",
    "RecursionDetected",
    "flatten",
    "flattened_size",
    "gate_census",
    "module_order",
    "multiplicities",
    "parse_program",
    "postorder",
    "quantize_angle",
    "serialize_program",
    "validate",
]
