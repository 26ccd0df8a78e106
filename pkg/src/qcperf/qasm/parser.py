"""Line-oriented reader and writer for the assembly text format.

Grammar, one statement per line::

    module <name>(<q0>,<q1>,...) {
        qubit <name>
        <GATE> <q>[,<q2>]
        Rz(<decimal>) <q>
        call <Module>(<q0>,...)
    }

``#`` starts a comment. The entry module is ``main``.
"""

from __future__ import annotations

import re

from .analysis import DEFAULT_CAP, flatten, postorder
from .model import MNEMONICS, Call, Gate, GateKind, ModuleDef, Program, QasmError

_IDENT = r"[A-Za-z_][A-Za-z0-9_.\[\]]*"
_NAME_LIST = rf"\s*(?:{_IDENT}\s*(?:,\s*{_IDENT}\s*)*)?"
_FLOAT = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"

_MODULE_RE = re.compile(rf"^module\s+({_IDENT})\s*\(({_NAME_LIST})\)\s*\{{$")
_QUBIT_RE = re.compile(rf"^qubit\s+({_IDENT})$")
_CALL_RE = re.compile(rf"^call\s+({_IDENT})\s*\(({_NAME_LIST})\)$")
_RZ_RE = re.compile(rf"^Rz\s*\(\s*({_FLOAT})\s*\)\s+(.+)$")
_GATE_RE = re.compile(r"^([A-Za-z]+)\s+(.+)$")
_IDENT_RE = re.compile(rf"^{_IDENT}$")


class QasmSyntaxError(QasmError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


def _split_names(text: str, line: int, col: int) -> tuple[str, ...]:
    text = text.strip()
    if not text:
        return ()
    names = tuple(part.strip() for part in text.split(","))
    for name in names:
        if not _IDENT_RE.match(name):
            raise QasmSyntaxError(f"bad qubit name {name!r}", line, col)
    return names


def _parse_statement(stmt: str, line: int, col: int) -> Gate | Call | str:
    """Returns an instruction, or the declared name for ``qubit`` lines."""
    if m := _QUBIT_RE.match(stmt):
        return m.group(1)
    if re.match(r"^call\s", stmt):
        m = _CALL_RE.match(stmt)
        if not m:
            raise QasmSyntaxError("malformed call", line, col)
        return Call(m.group(1), _split_names(m.group(2), line, col))
    if re.match(r"^Rz\s*\(", stmt):
        m = _RZ_RE.match(stmt)
        if not m:
            raise QasmSyntaxError("malformed Rz", line, col)
        operands = _split_names(m.group(2), line, col + m.start(2))
        if len(operands) != 1:
            raise QasmSyntaxError(f"arity mismatch: Rz takes 1 operand, got {len(operands)}", line, col)
        return Gate(GateKind.Rz, operands, float(m.group(1)))
    m = _GATE_RE.match(stmt)
    if not m:
        raise QasmSyntaxError(f"cannot parse {stmt!r}", line, col)
    mnemonic = m.group(1)
    kind = MNEMONICS.get(mnemonic)
    if kind is None or kind is GateKind.Rz:
        raise QasmSyntaxError(f"unknown gate mnemonic {mnemonic!r}", line, col)
    operands = _split_names(m.group(2), line, col + m.start(2))
    if len(operands) != kind.arity:
        raise QasmSyntaxError(
            f"arity mismatch: {mnemonic} takes {kind.arity} operand(s), got {len(operands)}",
            line,
            col,
        )
    return Gate(kind, operands)


def parse_program(text: str, entry: str = "main") -> Program:
    modules: dict[str, ModuleDef] = {}
    current: dict | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stmt = raw.split("#", 1)[0]
        col = len(stmt) - len(stmt.lstrip()) + 1
        stmt = stmt.strip()
        if not stmt:
            continue
        if current is None:
            m = _MODULE_RE.match(stmt)
            if not m:
                raise QasmSyntaxError("expected 'module <name>(...) {'", lineno, col)
            name = m.group(1)
            if name in modules:
                raise QasmSyntaxError(f"duplicate module name {name!r}", lineno, col)
            current = {
                "name": name,
                "params": _split_names(m.group(2), lineno, col),
                "locals": [],
                "body": [],
                "line": lineno,
            }
            continue
        if stmt == "}":
            modules[current["name"]] = ModuleDef(
                current["name"], current["params"], tuple(current["locals"]), tuple(current["body"])
            )
            current = None
            continue
        if stmt.startswith("module"):
            raise QasmSyntaxError("nested module definition", lineno, col)
        try:
            parsed = _parse_statement(stmt, lineno, col)
        except QasmSyntaxError:
            raise
        except QasmError as exc:
            raise QasmSyntaxError(str(exc), lineno, col) from None
        if isinstance(parsed, str):
            current["locals"].append(parsed)
        else:
            current["body"].append(parsed)

    if current is not None:
        raise QasmSyntaxError(f"unterminated module {current['name']!r}", current["line"])
    if entry not in modules:
        raise QasmError(f"missing {entry} module")
    return Program(modules, entry)


def _format_angle(angle: float) -> str:
    return repr(float(angle))


def _format_instruction(ins: Gate | Call) -> str:
    if isinstance(ins, Call):
        return f"call {ins.module}({','.join(ins.args)})"
    if ins.kind is GateKind.Rz:
        return f"Rz({_format_angle(ins.angle)}) {ins.operands[0]}"
    return f"{ins.kind.value} {','.join(ins.operands)}"


def _format_module(m: ModuleDef) -> list[str]:
    lines = [f"module {m.name}({','.join(m.params)}) {{"]
    lines += [f"    qubit {q}" for q in m.locals]
    lines += [f"    {_format_instruction(ins)}" for ins in m.body]
    lines.append("}")
    return lines


def module_order(p: Program) -> list[str]:
    """Callees before callers, unreachable modules next, entry last."""
    order = [name for name in postorder(p) if name != p.entry]
    seen = set(order) | {p.entry}
    order += [name for name in p.modules if name not in seen]
    return order + [p.entry]


def serialize_program(p: Program, form: str = "structured", cap: int = DEFAULT_CAP) -> str:
    if form == "flat":
        p = flatten(p, cap=cap)
    elif form != "structured":
        raise ValueError(f"unknown form {form!r}")
    lines: list[str] = []
    for i, name in enumerate(module_order(p)):
        if i:
            lines.append("")
        lines += _format_module(p.modules[name])
    return "\n".join(lines) + "\n"
