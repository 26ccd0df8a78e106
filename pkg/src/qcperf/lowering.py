"""Gate-set lowering: Rz synthesis, SWAP expansion and controlled-Rn variants.

Single-qubit sequences are returned in application order: the first gate
acts first, so the matching unitary is ``U[-1] @ ... @ U[0]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Union

import numpy as np

from .qasm.model import FT_GATESET, Gate, GateKind, ModuleDef, Program, QasmError

SYNTH_ALPHABET = (GateKind.H, GateKind.T, GateKind.Tdg, GateKind.S, GateKind.Sdg)
STATISTICAL_ALPHABET = (GateKind.H, GateKind.S, GateKind.T)
MAX_EXHAUSTIVE_LENGTH = 24

# gate count and ancilla count of one controlled-Rn under each construction
CONTROLLED_RN_VARIANTS = {"standard_35": (35, 0), "ancilla_21": (21, 1)}


class LoweringError(QasmError):
    pass


class NoSolutionError(LoweringError):
    pass


@dataclass(frozen=True)
class StatisticalSynth:
    """Seeded stand-in for an external synthesizer: only the length matters."""

    mean_length: int = 45
    spread: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mean_length < 1:
            raise ValueError("mean_length must be >= 1")
        if self.spread < 0:
            raise ValueError("spread must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")


@dataclass(frozen=True)
class ExhaustiveSynth:
    """Breadth-first search for a shortest word; only practical for short words."""

    max_length: int = 12

    def __post_init__(self) -> None:
        if not 0 <= self.max_length <= MAX_EXHAUSTIVE_LENGTH:
            raise ValueError(f"max_length must be in [0, {MAX_EXHAUSTIVE_LENGTH}]")


Synthesizer = Union[StatisticalSynth, ExhaustiveSynth]


@dataclass(frozen=True)
class DecomposeSpec:
    precision: float = 1e-2
    synthesizer: Synthesizer = field(default_factory=StatisticalSynth)
    controlled_rn_variant: str = "standard_35"

    def __post_init__(self) -> None:
        if not 0.0 < self.precision < 1.0:
            raise ValueError("precision must lie in (0, 1)")
        if self.controlled_rn_variant not in CONTROLLED_RN_VARIANTS:
            raise ValueError(f"unknown controlled-Rn variant {self.controlled_rn_variant!r}")


def reduce_angle(theta: float) -> float:
    """Maps ``theta`` into (-pi, pi]."""
    r = math.remainder(theta, 2 * math.pi)
    return math.pi if r <= -math.pi else r


def angle_bucket(theta: float, precision: float) -> int:
    """Signed bucket index of the reduced angle; bucket 0 is exactly the identity band."""
    r = reduce_angle(theta)
    k = math.floor(abs(r) / precision)
    return -k if r < 0 else k


def _zigzag(k: int) -> int:
    return 2 * k if k >= 0 else -2 * k - 1


# -- single-qubit unitaries ---------------------------------------------------

_W8 = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
UNITARIES = {
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.Sdg: np.array([[1, 0], [0, -1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, _W8]], dtype=complex),
    GateKind.Tdg: np.array([[1, 0], [0, _W8.conjugate()]], dtype=complex),
}


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def sequence_unitary(seq: Iterable[GateKind]) -> np.ndarray:
    u = np.eye(2, dtype=complex)
    for g in seq:
        u = UNITARIES[g] @ u
    return u


def phase_invariant_distance(u: np.ndarray, v: np.ndarray) -> float:
    """min over phi of the operator norm of ``u - exp(i phi) v`` for unitaries.

    With eigenphases a, b of ``v^dagger u`` and delta their angular separation,
    the optimum puts phi midway and the distance is ``2 sin(delta / 4)``.
    """
    w = v.conj().T @ u
    a, b = np.angle(np.linalg.eigvals(w))
    delta = abs(a - b) % (2 * math.pi)
    delta = min(delta, 2 * math.pi - delta)
    return 2.0 * math.sin(delta / 4.0)


def _phase_key(u: np.ndarray) -> tuple:
    flat = u.ravel()
    pivot = flat[np.argmax(np.abs(flat) > 1e-9)]
    v = flat * (abs(pivot) / pivot)
    return tuple(np.round(np.concatenate([v.real, v.imag]), 9) + 0.0)


def _exhaustive(theta: float, precision: float, max_length: int) -> tuple[GateKind, ...]:
    target = rz_matrix(theta)
    frontier = [((), np.eye(2, dtype=complex))]
    seen = {_phase_key(frontier[0][1])}
    for _ in range(max_length):
        nxt = []
        for word, u in frontier:
            for g in SYNTH_ALPHABET:
                w = UNITARIES[g] @ u
                key = _phase_key(w)
                if key in seen:
                    continue
                seen.add(key)
                word2 = word + (g,)
                if phase_invariant_distance(w, target) <= precision:
                    return word2
                nxt.append((word2, w))
        frontier = nxt
    raise NoSolutionError(f"no word of length <= {max_length} reaches Rz({theta!r}) within {precision}")


def _statistical(bucket: int, synth: StatisticalSynth) -> tuple[GateKind, ...]:
    rng = np.random.default_rng([synth.seed, _zigzag(bucket)])
    lo = max(1, synth.mean_length - synth.spread)
    hi = max(lo, synth.mean_length + synth.spread)
    n = int(rng.integers(lo, hi + 1))
    picks = rng.integers(0, len(STATISTICAL_ALPHABET), size=n)
    return tuple(STATISTICAL_ALPHABET[i] for i in picks)


@lru_cache(maxsize=4096)
def _decompose_cached(theta: float, spec: DecomposeSpec) -> tuple[GateKind, ...]:
    bucket = angle_bucket(theta, spec.precision)
    if bucket == 0:
        return ()
    synth = spec.synthesizer
    if isinstance(synth, ExhaustiveSynth):
        return _exhaustive(reduce_angle(theta), spec.precision, synth.max_length)
    return _statistical(bucket, synth)


def decompose_rz(theta: float, spec: DecomposeSpec | None = None) -> tuple[GateKind, ...]:
    """Replacement sequence for ``Rz(theta)``.

    Angles within ``precision`` of zero (after reduction) give the empty
    sequence. The statistical synthesizer keys its seeded draw on the angle's
    precision-sized bucket, so angles in one bucket share a sequence. The
    exhaustive synthesizer returns a shortest word within ``precision`` in
    operator norm, up to global phase.

    Raises:
        NoSolutionError: exhaustive search found nothing up to ``max_length``.
    """
    if not math.isfinite(theta):
        raise LoweringError("Rz angle must be finite")
    return _decompose_cached(float(theta), spec or DecomposeSpec())


def swap_as_cnots(a: str, b: str) -> list[Gate]:
    return [Gate(GateKind.CNOT, (a, b)), Gate(GateKind.CNOT, (b, a)), Gate(GateKind.CNOT, (a, b))]


def _lower_module(m: ModuleDef, target: frozenset, spec: DecomposeSpec) -> ModuleDef:
    body = []
    for ins in m.body:
        if not isinstance(ins, Gate) or ins.kind in target:
            body.append(ins)
        elif ins.kind is GateKind.Rz:
            q = ins.operands[0]
            body.extend(Gate(g, (q,)) for g in decompose_rz(ins.angle, spec))
        elif ins.kind is GateKind.SWAP and GateKind.CNOT in target:
            body.extend(swap_as_cnots(*ins.operands))
        else:
            raise LoweringError(f"{m.name}: {ins.kind.value} cannot be lowered to the target gate set")
    for ins in body:
        if isinstance(ins, Gate) and ins.kind not in target:
            raise LoweringError(f"{m.name}: synthesized {ins.kind.value} is outside the target gate set")
    return ModuleDef(m.name, m.params, m.locals, tuple(body))


def lower_gateset(
    p: Program, target: Iterable[GateKind] = FT_GATESET, spec: DecomposeSpec | None = None
) -> Program:
    """Rewrites every module so that its gates lie in ``target``; calls are kept."""
    target = frozenset(target)
    spec = spec or DecomposeSpec()
    return Program({name: _lower_module(m, target, spec) for name, m in p.modules.items()}, p.entry)


def expand_controlled_rn(variant: str) -> tuple[int, int]:
    """(H/S/T gate count, extra ancilla count) of one controlled-Rn."""
    try:
        return CONTROLLED_RN_VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown controlled-Rn variant {variant!r}") from None


CONTROLLED_RN_MODULE = "CRn"


def controlled_rn_body(variant: str, control: str = "c", target: str = "t") -> ModuleDef:
    """A cost-equivalent body for a two-parameter controlled-Rn module.

    The body has the variant's H/S/T count (cycling H, T, S) on the target,
    bracketed by two CNOTs from the control; the ancilla variant routes the
    CNOTs through one extra local.
    """
    n_gates, n_anc = expand_controlled_rn(variant)
    locals_ = tuple(f"anc{i}" for i in range(n_anc))
    link = locals_[0] if locals_ else control
    cycle = (GateKind.H, GateKind.T, GateKind.S)
    singles = [Gate(cycle[i % 3], (target,)) for i in range(n_gates)]
    half = n_gates // 2
    if locals_:
        body = [Gate(GateKind.CNOT, (control, link))] + singles[:half]
        body += [Gate(GateKind.CNOT, (link, target))] + singles[half:]
    else:
        body = singles[:half] + [Gate(GateKind.CNOT, (control, target))]
        body += singles[half:] + [Gate(GateKind.CNOT, (control, target))]
    return ModuleDef(CONTROLLED_RN_MODULE, (control, target), locals_, tuple(body))


def apply_controlled_rn_variant(p: Program, variant: str, module: str = CONTROLLED_RN_MODULE) -> Program:
    """Swaps the body of ``module`` (which must take two params) for the variant's."""
    if module not in p.modules:
        raise LoweringError(f"program has no {module!r} module")
    old = p.modules[module]
    if len(old.params) != 2:
        raise LoweringError(f"{module!r} must take exactly two params")
    new = controlled_rn_body(variant, *old.params)
    clash = set(new.locals) & set(old.params)
    if clash:
        raise LoweringError(f"ancilla name clashes with params: {sorted(clash)}")
    modules = dict(p.modules)
    modules[module] = ModuleDef(module, old.params, new.locals, new.body)
    return Program(modules, p.entry)
