"""Hierarchical quantum assembly data model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from ..errors import InputError


class GateKind(Enum):
    X = "X"
    Z = "Z"
    H = "H"
    S = "S"
    Sdg = "Sdg"
    T = "T"
    Tdg = "Tdg"
    Rz = "Rz"
    CNOT = "CNOT"
    SWAP = "SWAP"
    PrepZ = "PrepZ"
    MeasZ = "MeasZ"

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.CNOT, GateKind.SWAP) else 1

    def __repr__(self) -> str:
        return f"GateKind.{self.name}"


MNEMONICS = {kind.value: kind for kind in GateKind}

# Gate sets selectable as compile targets. Preparation and measurement are
# always available.
FT_GATESET = frozenset(
    {
        GateKind.X,
        GateKind.Z,
        GateKind.H,
        GateKind.S,
        GateKind.Sdg,
        GateKind.T,
        GateKind.Tdg,
        GateKind.CNOT,
        GateKind.PrepZ,
        GateKind.MeasZ,
    }
)
PHYSICAL_GATESET = FT_GATESET | {GateKind.Rz}


class QasmError(InputError):
    """Raised for malformed programs."""


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    operands: tuple[str, ...]
    angle: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "operands", tuple(self.operands))
        if len(self.operands) != self.kind.arity:
            raise QasmError(
                f"{self.kind.value} takes {self.kind.arity} operand(s), got {len(self.operands)}"
            )
        if self.kind is GateKind.Rz:
            if self.angle is None or not math.isfinite(self.angle):
                raise QasmError("Rz needs one finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise QasmError(f"{self.kind.value} takes no angle")

    @property
    def qubits(self) -> tuple[str, ...]:
        return self.operands


@dataclass(frozen=True)
class Call:
    module: str
    args: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))

    @property
    def qubits(self) -> tuple[str, ...]:
        return self.args


Instruction = Union[Gate, Call]


@dataclass(frozen=True)
class ModuleDef:
    name: str
    params: tuple[str, ...] = ()
    locals: tuple[str, ...] = ()
    body: tuple[Instruction, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "locals", tuple(self.locals))
        object.__setattr__(self, "body", tuple(self.body))

    @property
    def qubits(self) -> tuple[str, ...]:
        return self.params + self.locals

    @property
    def n_qubits(self) -> int:
        return len(self.params) + len(self.locals)

    def calls(self) -> list[Call]:
        return [ins for ins in self.body if isinstance(ins, Call)]

    def gates(self) -> list[Gate]:
        return [ins for ins in self.body if isinstance(ins, Gate)]


@dataclass(frozen=True)
class Program:
    """A set of modules rooted at ``entry``.

    ``modules`` preserves source order; equality ignores it.
    """

    modules: dict[str, ModuleDef] = field(default_factory=dict)
    entry: str = "main"

    @property
    def structured(self) -> bool:
        if any(name != self.entry for name in self.modules):
            return True
        return any(m.calls() for m in self.modules.values())

    @property
    def main(self) -> ModuleDef:
        try:
            return self.modules[self.entry]
        except KeyError:
            raise QasmError(f"missing {self.entry} module") from None

    def __getitem__(self, name: str) -> ModuleDef:
        return self.modules[name]

    def instruction_count(self) -> int:
        return sum(len(m.body) for m in self.modules.values())
