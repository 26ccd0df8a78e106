"""Logical-operation cost tables for concatenated Steane and double-defect surface codes.

Everything here is a pure function of a :class:`DeviceProfile` and a cost
model. Logical tables are :class:`LogicalOpPerf` instances shared read-only by
the mapper and estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .errors import ModelError
from .qasm.model import GateKind

G = GateKind

PHYSICAL_OPS = tuple(GateKind)
LOGICAL_OPS = (G.X, G.Z, G.H, G.S, G.Sdg, G.T, G.Tdg, G.CNOT, G.SWAP, G.PrepZ, G.MeasZ)
QEC = "QEC"


class ThresholdError(ModelError):
    """Physical error rate is too high for the code to suppress it."""


class LevelCapError(ModelError):
    pass


class DistanceCapError(ModelError):
    pass


class DistillationError(ModelError):
    pass


class MissingOpError(ModelError):
    pass


def _frozen(d: Mapping) -> Mapping:
    return MappingProxyType(dict(d))


@dataclass(frozen=True)
class DeviceProfile:
    error_rate: float = 1e-9
    op_time: Mapping[GateKind, float] = field(default_factory=lambda: {k: 1e-6 for k in PHYSICAL_OPS})

    def __post_init__(self) -> None:
        if not 0.0 < self.error_rate < 1.0:
            raise ValueError("error_rate must lie in (0, 1)")
        times = {k: 1e-6 for k in PHYSICAL_OPS}
        times.update(self.op_time)
        if any(not t > 0 for t in times.values()):
            raise ValueError("physical op times must be positive")
        object.__setattr__(self, "op_time", _frozen(times))

    def time(self, kind: GateKind) -> float:
        return self.op_time[kind]


@dataclass(frozen=True)
class LogicalOpPerf:
    """Per-op time (s) and failure probability at one code setting.

    ``move_time`` is the cost of one qubit-passing leg step; ``setup_time`` is
    charged once per run (e.g. preparing reusable magic states).
    """

    time: Mapping[GateKind, float]
    error: Mapping[GateKind, float]
    code: str = "none"
    level: int | None = None
    distance: int | None = None
    move_time: float = 0.0
    setup_time: float = 0.0
    logical_error: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "time", _frozen(self.time))
        object.__setattr__(self, "error", _frozen(self.error))

    def time_of(self, kind: GateKind) -> float:
        try:
            return self.time[kind]
        except KeyError:
            raise MissingOpError(f"no time for {kind.value} in the {self.code} table") from None

    def error_of(self, kind: GateKind) -> float:
        try:
            return self.error[kind]
        except KeyError:
            raise MissingOpError(f"no error rate for {kind.value} in the {self.code} table") from None

    def fidelity(self, kind: GateKind) -> float:
        return 1.0 - self.error_of(kind)

    @property
    def kinds(self) -> frozenset:
        return frozenset(self.time) & frozenset(self.error)

    @classmethod
    def uniform(cls, time: float = 1.0, error: float = 0.0, **kw) -> "LogicalOpPerf":
        kinds = tuple(GateKind)
        kw.setdefault("move_time", time)
        return cls({k: time for k in kinds}, {k: error for k in kinds}, **kw)


def physical_perf(device: DeviceProfile) -> LogicalOpPerf:
    """Unencoded operation: every gate, Rz included, at device time and error."""
    kinds = tuple(GateKind)
    return LogicalOpPerf(
        {k: device.time(k) for k in kinds},
        {k: device.error_rate for k in kinds},
        code="none",
        level=0,
        move_time=device.time(G.SWAP),
    )


# -- concatenated Steane code ---------------------------------------------------

DEFAULT_C_OP = {
    QEC: 1e4,
    "X": 1e4,
    "Z": 1e4,
    "H": 1e4,
    "S": 1e4,
    "Sdg": 1e4,
    "PrepZ": 1e4,
    "MeasZ": 1e4,
    "CNOT": 2e4,
    "T": 5e4,
    "Tdg": 5e4,
    "SWAP": 6e4,
}

# Level-(l-1) steps composing one level-l op: the transversal step plus a QEC
# round (78 steps: Shor-state prep, verification, syndrome extraction) for
# Clifford gates, two QEC rounds for preparation, none after measurement, a
# magic-state injection for T, and three CNOTs for SWAP.
DEFAULT_DEPTHS = {
    QEC: 78,
    "X": 79,
    "Z": 79,
    "H": 79,
    "S": 79,
    "Sdg": 79,
    "CNOT": 79,
    "PrepZ": 157,
    "MeasZ": 3,
    "T": 320,
    "Tdg": 320,
    "SWAP": 237,
}


@dataclass(frozen=True)
class SteaneCostModel:
    c_op: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_C_OP))
    depths: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_DEPTHS))
    qubits_inner: int = 25
    qubits_top: int = 30
    l_max: int = 6

    def __post_init__(self) -> None:
        c_op = dict(DEFAULT_C_OP)
        c_op.update(self.c_op)
        depths = dict(DEFAULT_DEPTHS)
        depths.update(self.depths)
        if any(not c > 0 for c in c_op.values()):
            raise ValueError("c_op constants must be positive")
        if any(d < 1 for d in depths.values()):
            raise ValueError("composition depths must be >= 1")
        if self.l_max < 1:
            raise ValueError("l_max must be >= 1")
        object.__setattr__(self, "c_op", _frozen(c_op))
        object.__setattr__(self, "depths", _frozen(depths))

    def c(self, op: str | GateKind) -> float:
        key = op.value if isinstance(op, GateKind) else op
        try:
            return self.c_op[key]
        except KeyError:
            raise MissingOpError(f"no c_op constant for {key}") from None

    def depth(self, op: str | GateKind) -> int:
        key = op.value if isinstance(op, GateKind) else op
        try:
            return self.depths[key]
        except KeyError:
            raise MissingOpError(f"no composition depth for {key}") from None

    @property
    def worst_op(self) -> str:
        return max(self.c_op, key=lambda k: (self.c_op[k], k))


def log_steane_effective_error(p: float, c: float, level: int) -> float:
    base = c * p * p
    if base >= 1.0:
        raise ThresholdError(f"c_op*p^2 = {base:.3g} >= 1: concatenation does not converge")
    if level == 0:
        return math.log(p)
    return (2**level) * math.log(base) - math.log(c)


def steane_effective_error(p: float, op: str | GateKind, level: int, model: SteaneCostModel | None = None) -> float:
    """``(c p^2)^(2^l) / c`` for ``l >= 1`` and ``p`` at ``l = 0``.

    Evaluated in log space; results below the float range come back as 0.

    Raises:
        ThresholdError: ``c p^2 >= 1``.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    model = model or SteaneCostModel()
    return math.exp(log_steane_effective_error(p, model.c(op), level))


def required_concatenation_level(kq: float, p: float, model: SteaneCostModel | None = None) -> int:
    """Smallest ``l >= 1`` whose worst-op error is at most ``1/KQ``.

    Raises:
        ThresholdError: the worst op is above its pseudo-threshold.
        LevelCapError: no level up to ``l_max`` suffices.
    """
    if kq < 1:
        raise ValueError("KQ must be >= 1")
    model = model or SteaneCostModel()
    c = model.c(model.worst_op)
    bound = -math.log(kq)
    for level in range(1, model.l_max + 1):
        if log_steane_effective_error(p, c, level) <= bound:
            return level
    raise LevelCapError(f"KQ = {kq:.3g} needs more than {model.l_max} concatenation levels at p = {p:g}")


def _base_step(device: DeviceProfile, model: SteaneCostModel, level: int, cache: dict) -> float:
    if level == 0:
        return max(device.time(k) for k in LOGICAL_OPS if k is not G.SWAP)
    return steane_op_time(G.CNOT, level, device, model, cache)


def steane_op_time(
    op: str | GateKind, level: int, device: DeviceProfile, model: SteaneCostModel, cache: dict | None = None
) -> float:
    if level == 0:
        if op == QEC:
            return 0.0
        return device.time(op)
    cache = {} if cache is None else cache
    key = (op, level)
    if key not in cache:
        cache[key] = model.depth(op) * _base_step(device, model, level - 1, cache)
    return cache[key]


def steane_logical_perf(device: DeviceProfile, level: int, model: SteaneCostModel | None = None) -> LogicalOpPerf:
    """Per-op time and error at concatenation ``level``.

    Level 0 is the bare device. At level ``l`` an op takes ``depth(op)``
    level-(l-1) steps, a step being the slowest physical op at level 0 and a
    logical CNOT above that. QEC is folded into each op through its depth.
    """
    model = model or SteaneCostModel()
    if level == 0:
        perf = physical_perf(device)
        return LogicalOpPerf(perf.time, perf.error, code="steane", level=0, move_time=perf.move_time)
    if not 1 <= level <= model.l_max:
        raise LevelCapError(f"level must be in [0, {model.l_max}]")
    cache: dict = {}
    times = {k: steane_op_time(k, level, device, model, cache) for k in LOGICAL_OPS}
    errors = {k: steane_effective_error(device.error_rate, k, level, model) for k in LOGICAL_OPS}
    return LogicalOpPerf(times, errors, code="steane", level=level, move_time=times[G.SWAP])


def steane_physical_qubits(level: int, model: SteaneCostModel | None = None) -> int:
    """Physical qubits per logical data qubit at ``level``."""
    model = model or SteaneCostModel()
    if level == 0:
        return 1
    return model.qubits_inner ** (level - 1) * model.qubits_top


# -- double-defect surface code -------------------------------------------------


@dataclass(frozen=True)
class SurfaceCostModel:
    c1: float = 0.13
    c2: float = 0.61
    eps_th: float = 0.009
    msd_target: float = 1e-12
    msd_time_ratio: float = 20.0
    d_max: int = 101
    r_max: int = 5
    t_correction_prob: float = 0.5
    distill_ancilla_multiplier: int = 1

    def __post_init__(self) -> None:
        if not 0 < self.eps_th < 1:
            raise ValueError("eps_th must lie in (0, 1)")
        if min(self.c1, self.c2, self.msd_target, self.msd_time_ratio) <= 0:
            raise ValueError("surface-code constants must be positive")
        if self.d_max < 3:
            raise ValueError("d_max must be >= 3")
        if not 0 <= self.t_correction_prob <= 1:
            raise ValueError("t_correction_prob must lie in [0, 1]")


def surface_distance_estimate(eps_l: float, eps_p: float, model: SurfaceCostModel | None = None) -> float:
    """Unrounded distance ``2 (log eps_L - log C1) / (log C2 + log(eps_p/eps_th)) - 1``."""
    model = model or SurfaceCostModel()
    if not 0 < eps_l < 1:
        raise ValueError("target logical error must lie in (0, 1)")
    if not 0 < eps_p < model.eps_th:
        raise ThresholdError(f"eps_p = {eps_p:g} is not below threshold {model.eps_th:g}")
    return 2 * (math.log(eps_l) - math.log(model.c1)) / (math.log(model.c2) + math.log(eps_p / model.eps_th)) - 1


def surface_code_distance(eps_l: float, eps_p: float, model: SurfaceCostModel | None = None) -> int:
    """Smallest odd ``d >= 3`` at or above the distance estimate.

    Raises:
        ThresholdError: ``eps_p >= eps_th``.
        DistanceCapError: the distance would exceed ``d_max``.
    """
    model = model or SurfaceCostModel()
    raw = surface_distance_estimate(eps_l, eps_p, model)
    d = max(3, math.ceil(raw))
    if d % 2 == 0:
        d += 1
    if d > model.d_max:
        raise DistanceCapError(f"distance {d} exceeds d_max = {model.d_max}")
    return d


def surface_logical_error(d: int, eps_p: float, model: SurfaceCostModel | None = None) -> float:
    model = model or SurfaceCostModel()
    return model.c1 * (model.c2 * eps_p / model.eps_th) ** ((d + 1) / 2)


def syndrome_round_time(device: DeviceProfile) -> float:
    """One stabilizer measurement: prepare, H, four CNOTs, H, measure."""
    t = device.time
    return t(G.PrepZ) + 2 * t(G.H) + 4 * t(G.CNOT) + t(G.MeasZ)


def qec_cycle_time(d: int, device: DeviceProfile) -> float:
    return d * syndrome_round_time(device)


def surface_logical_perf(d: int, device: DeviceProfile, model: SurfaceCostModel | None = None) -> LogicalOpPerf:
    """Per-op logical time and error at code distance ``d``.

    A QEC cycle is ``d`` syndrome rounds. CNOT is three braids of one cycle
    each; Paulis are frame updates costing nothing; H cuts and reconnects the
    defect (two cycles plus a physical H and SWAP); S consumes a reusable
    |Y> through a CNOT-like braid; T consumes an |A> and needs an S
    correction with probability ``t_correction_prob``. The one-off setup is
    distilling |Y>, ``msd_time_ratio`` times a T gate.
    """
    model = model or SurfaceCostModel()
    if d < 3 or d % 2 == 0:
        raise ValueError(f"code distance must be odd and >= 3, got {d}")
    cycle = qec_cycle_time(d, device)
    cnot = 3 * cycle
    s = cnot
    t = cnot + model.t_correction_prob * s
    times = {
        G.X: 0.0,
        G.Z: 0.0,
        G.H: 2 * cycle + device.time(G.H) + device.time(G.SWAP),
        G.S: s,
        G.Sdg: s,
        G.T: t,
        G.Tdg: t,
        G.CNOT: cnot,
        G.SWAP: 3 * cnot,
        G.PrepZ: cycle,
        G.MeasZ: device.time(G.MeasZ),
    }
    eps_l = surface_logical_error(d, device.error_rate, model)
    errors = {k: (0.0 if k in (G.X, G.Z) else eps_l) for k in times}
    return LogicalOpPerf(
        times,
        errors,
        code="surface",
        distance=d,
        move_time=cycle,
        setup_time=model.msd_time_ratio * t,
        logical_error=eps_l,
    )


# -- magic-state distillation ---------------------------------------------------

# output error of one distillation round: k * eps_in^3
DISTILL_COEFF = {"A": 35.0, "Y": 7.0}
DISTILL_INPUTS = {"A": 15, "Y": 7}


def msd_rounds(eps_p: float, target: float, kind: str = "A", r_max: int = 5) -> int:
    """Fewest rounds ``r`` with ``eps_r <= target``, starting from ``eps_0 = eps_p``.

    Raises:
        DistillationError: the recursion does not reach ``target`` within ``r_max``.
    """
    k = DISTILL_COEFF[kind]
    eps = eps_p
    for r in range(r_max + 1):
        if eps <= target:
            return r
        nxt = k * eps**3
        if nxt >= eps:
            raise DistillationError(f"eps = {eps:g} is above the {kind}-state distillation threshold")
        eps = nxt
    raise DistillationError(f"{kind}-state distillation needs more than {r_max} rounds")


def factory_capacity(max_parallel_t: int, msd_time_ratio: float = 20.0) -> int:
    """|A> states to keep in flight: ``ceil(max parallel T * time(MSD)/time(T))``."""
    if max_parallel_t < 0:
        raise ValueError("parallelism must be >= 0")
    return math.ceil(max_parallel_t * msd_time_ratio)


def factory_qubits(
    max_parallel_t: int, max_parallel_s: int, q_l: int, r: int, msd_time_ratio: float = 20.0
) -> tuple[int, int]:
    """Physical qubits of the |A> and |Y> factories."""
    if r < 1:
        raise ValueError("distillation rounds must be >= 1")
    if q_l < 1:
        raise ValueError("Q_L must be >= 1")
    cap = factory_capacity(max_parallel_t, msd_time_ratio)
    a = cap * (15 * q_l) ** (r - 1) * (16 * q_l)
    y = max(max_parallel_t, max_parallel_s) * (7 * q_l) ** (r - 1) * (8 * q_l)
    return a, y
