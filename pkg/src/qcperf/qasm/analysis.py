"""Call-graph analysis: validation, multiplicities, census and flattening."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .model import Call, Gate, GateKind, ModuleDef, Program, QasmError

DEFAULT_CAP = 10**8
DEFAULT_ANGLE_QUANTUM = 1e-6


class RecursionDetected(QasmError):
    pass


class FlattenCapExceeded(QasmError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    module: str
    index: int | None
    category: str
    message: str

    def __str__(self) -> str:
        where = self.module if self.index is None else f"{self.module}[{self.index}]"
        return f"{where}: {self.category}: {self.message}"


def _find_back_edge(p: Program) -> tuple[str, int] | None:
    """First call (module, index) closing a cycle, in deterministic DFS order."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {name: WHITE for name in p.modules}
    roots = [p.entry] + [n for n in p.modules if n != p.entry] if p.entry in p.modules else list(p.modules)

    for root in roots:
        if color[root] != WHITE:
            continue
        color[root] = GREY
        stack = [(root, 0)]
        while stack:
            name, i = stack[-1]
            body = p.modules[name].body
            if i >= len(body):
                color[name] = BLACK
                stack.pop()
                continue
            stack[-1] = (name, i + 1)
            ins = body[i]
            if not isinstance(ins, Call) or ins.module not in p.modules:
                continue
            c = color[ins.module]
            if c == GREY:
                return name, i
            if c == WHITE:
                color[ins.module] = GREY
                stack.append((ins.module, 0))
    return None


def postorder(p: Program) -> list[str]:
    """Modules reachable from the entry, callees before callers."""
    if _find_back_edge(p) is not None:
        raise RecursionDetected("call graph has a cycle")
    order: list[str] = []
    done: set[str] = set()

    def visit(name: str) -> None:
        done.add(name)
        for call in p.modules[name].calls():
            if call.module not in done:
                if call.module not in p.modules:
                    raise QasmError(f"call to undefined module {call.module!r}")
                visit(call.module)
        order.append(name)

    visit(p.main.name)
    return order


def multiplicities(p: Program) -> dict[str, int]:
    """How many times each reachable module runs per execution of the entry."""
    order = postorder(p)
    mult = {name: 0 for name in order}
    mult[p.entry] = 1
    for name in reversed(order):  # callers before callees
        m = mult[name]
        if not m:
            continue
        for call in p.modules[name].calls():
            mult[call.module] += m
    return mult


def validate(p: Program) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    if p.entry not in p.modules:
        return [Diagnostic(p.entry, None, "missing-entry", f"no {p.entry} module")]
    if p.main.params:
        diags.append(Diagnostic(p.entry, None, "entry-params", "entry module must take no parameters"))

    for m in p.modules.values():
        overlap = sorted(set(m.params) & set(m.locals))
        if overlap:
            diags.append(Diagnostic(m.name, None, "param-local-overlap", f"both param and local: {overlap}"))
        for group in (m.params, m.locals):
            dup = sorted(q for q, n in Counter(group).items() if n > 1)
            if dup:
                diags.append(Diagnostic(m.name, None, "duplicate-qubit", f"declared more than once: {dup}"))
        known = set(m.qubits)
        for i, ins in enumerate(m.body):
            ops = ins.qubits
            for q in ops:
                if q not in known:
                    diags.append(Diagnostic(m.name, i, "unknown-operand", f"{q!r} is not a param or local"))
            if len(set(ops)) != len(ops):
                diags.append(Diagnostic(m.name, i, "duplicate-operand", f"repeated operand in {ops}"))
            if isinstance(ins, Call):
                callee = p.modules.get(ins.module)
                if callee is None:
                    diags.append(Diagnostic(m.name, i, "undefined-module", f"no module {ins.module!r}"))
                elif len(callee.params) != len(ins.args):
                    diags.append(
                        Diagnostic(
                            m.name,
                            i,
                            "arity-mismatch",
                            f"{ins.module} takes {len(callee.params)} argument(s), got {len(ins.args)}",
                        )
                    )

    back = _find_back_edge(p)
    if back is not None:
        name, i = back
        target = p.modules[name].body[i].module
        diags.append(Diagnostic(name, i, "recursion", f"call to {target} closes a cycle"))
        return diags

    reachable = set(postorder_safe(p))
    for name in p.modules:
        if name not in reachable:
            diags.append(Diagnostic(name, None, "dead-module", "not reachable from entry"))
    return diags


def postorder_safe(p: Program) -> list[str]:
    """Like :func:`postorder` but skips undefined callees."""
    order: list[str] = []
    done: set[str] = set()
    stack = [(p.entry, iter(p.modules[p.entry].calls()))]
    done.add(p.entry)
    while stack:
        name, it = stack[-1]
        for call in it:
            if call.module in p.modules and call.module not in done:
                done.add(call.module)
                stack.append((call.module, iter(p.modules[call.module].calls())))
                break
        else:
            order.append(name)
            stack.pop()
    return order


def quantize_angle(angle: float, quantum: float = DEFAULT_ANGLE_QUANTUM) -> float:
    # integer bucket first so -0.0 and 0.0 share a key
    k = round(angle / quantum)
    return k * quantum if k else 0.0


@dataclass(frozen=True)
class GateCensus:
    counts: dict[GateKind, int]
    total: int
    rz_angles: dict[float, int] = field(default_factory=dict)
    per_module: dict[str, dict[GateKind, int]] = field(default_factory=dict, compare=False)

    def __getitem__(self, kind: GateKind) -> int:
        return self.counts.get(kind, 0)

    def nonzero(self) -> dict[GateKind, int]:
        return {k: v for k, v in self.counts.items() if v}

    def proportion(self, kind: GateKind) -> float:
        return self[kind] / self.total if self.total else 0.0


def _direct_counts(m: ModuleDef, quantum: float) -> tuple[Counter, Counter]:
    kinds: Counter = Counter()
    angles: Counter = Counter()
    for ins in m.body:
        if isinstance(ins, Gate):
            kinds[ins.kind] += 1
            if ins.kind is GateKind.Rz:
                angles[quantize_angle(ins.angle, quantum)] += 1
    return kinds, angles


def gate_census(p: Program, quantum: float = DEFAULT_ANGLE_QUANTUM) -> GateCensus:
    """Counts gates executed by one run of the entry, without inlining.

    ``per_module`` holds the expanded census of a single invocation of each
    reachable module.
    """
    order = postorder(p)
    mult = multiplicities(p)
    counts: Counter = Counter()
    angles: Counter = Counter()
    expanded: dict[str, Counter] = {}
    for name in order:
        m = p.modules[name]
        kinds, rz = _direct_counts(m, quantum)
        for k, v in kinds.items():
            counts[k] += v * mult[name]
        for a, v in rz.items():
            angles[a] += v * mult[name]
        own = Counter(kinds)
        for call in m.calls():
            own.update(expanded[call.module])
        expanded[name] = own

    full = {kind: counts.get(kind, 0) for kind in GateKind}
    per_module = {name: {k: c[k] for k in GateKind if c[k]} for name, c in expanded.items()}
    return GateCensus(full, sum(full.values()), dict(sorted(angles.items())), per_module)


def flattened_size(p: Program) -> int:
    mult = multiplicities(p)
    return sum(mult[name] * len(p.modules[name].gates()) for name in mult)


def inlined_local(module: str, local: str) -> str:
    return f"{module}.{local}"


def flatten(p: Program, cap: int = DEFAULT_CAP) -> Program:
    """Inline every call into a single entry module.

    Callee locals are renamed ``<Module>.<local>``; without recursion at most
    one invocation of a module is live at a time, so each module's locals are
    shared across its invocations.
    """
    size = flattened_size(p)
    if size > cap:
        raise FlattenCapExceeded(f"flattened program has {size} instructions, cap is {cap}")
    main = p.main
    if not p.structured:
        return p

    order = postorder(p)
    taken = set(main.qubits)
    local_names: dict[str, dict[str, str]] = {}
    for name in reversed(order):
        if name == p.entry:
            continue
        mapping = {}
        for q in p.modules[name].locals:
            new = inlined_local(name, q)
            while new in taken:
                new += "_"
            taken.add(new)
            mapping[q] = new
        local_names[name] = mapping

    body: list[Gate] = []

    def emit(name: str, binding: dict[str, str]) -> None:
        for ins in p.modules[name].body:
            if isinstance(ins, Gate):
                body.append(Gate(ins.kind, tuple(binding[q] for q in ins.operands), ins.angle))
            else:
                callee = p.modules[ins.module]
                inner = dict(local_names[ins.module])
                inner.update(zip(callee.params, (binding[a] for a in ins.args)))
                emit(ins.module, inner)

    emit(p.entry, {q: q for q in main.qubits})
    new_locals = list(main.locals)
    for name in reversed(order):
        if name != p.entry:
            new_locals.extend(local_names[name].values())
    flat = ModuleDef(main.name, main.params, tuple(new_locals), tuple(body))
    return Program({main.name: flat}, p.entry)
