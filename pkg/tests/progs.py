"""Program builders shared by the tests."""

from __future__ import annotations

import random
from pathlib import Path

from qcperf.qasm import Call, Gate, GateKind, ModuleDef, Program, parse_program

G = GateKind
CAT_PATH = Path(__file__).resolve().parents[1] / "src" / "qcperf" / "data" / "cat.qasm"
ONE_QUBIT = [G.X, G.Z, G.H, G.S, G.Sdg, G.T, G.Tdg, G.PrepZ, G.MeasZ]


def cat_program(measure: bool = True) -> Program:
    p = parse_program(CAT_PATH.read_text())
    if measure:
        return p
    main = p.main
    body = tuple(ins for ins in main.body if not (isinstance(ins, Gate) and ins.kind is G.MeasZ))
    return Program({"MakeCAT": p["MakeCAT"], "main": ModuleDef("main", (), main.locals, body)})


def flat_program(n_qubits: int, gates: list[tuple]) -> Program:
    """Single main module with locals q0..q{n-1}; gates are (kind, i[, j])."""
    qs = tuple(f"q{i}" for i in range(n_qubits))
    body = tuple(Gate(g[0], tuple(qs[i] for i in g[1:])) for g in gates)
    return Program({"main": ModuleDef("main", (), qs, body)})


def random_program(
    rng: random.Random,
    max_modules: int = 5,
    max_gates: int = 50,
    with_rz: bool = True,
    with_swap: bool = True,
    max_calls: int = 3,
) -> Program:
    """Random valid DAG program: module i only calls modules with larger index."""
    n = rng.randint(1, max_modules)
    names = ["main"] + [f"M{i}" for i in range(1, n)]
    shapes = {}
    for i, name in enumerate(names):
        params = 0 if i == 0 else rng.randint(0, 3)
        locals_ = rng.randint(0 if params else 1, 4)
        shapes[name] = (tuple(f"p{k}" for k in range(params)), tuple(f"l{k}" for k in range(locals_)))
    modules = {}
    for i in reversed(range(n)):
        name = names[i]
        params, locals_ = shapes[name]
        qubits = params + locals_
        body = []
        kinds = ONE_QUBIT + ([G.Rz] if with_rz else [])
        for _ in range(rng.randint(0, max_gates)):
            if len(qubits) >= 2 and rng.random() < 0.3:
                a, b = rng.sample(qubits, 2)
                kind = G.SWAP if with_swap and rng.random() < 0.2 else G.CNOT
                body.append(Gate(kind, (a, b)))
            else:
                kind = rng.choice(kinds)
                angle = rng.choice([0.0, -0.0, 1e-7, rng.uniform(-7, 7)]) if kind is G.Rz else None
                body.append(Gate(kind, (rng.choice(qubits),), angle))
        callees = [names[j] for j in range(i + 1, n) if len(shapes[names[j]][0]) <= len(qubits)]
        for _ in range(rng.randint(0, max_calls) if callees else 0):
            callee = rng.choice(callees)
            args = tuple(rng.sample(qubits, len(shapes[callee][0])))
            body.insert(rng.randint(0, len(body)), Call(callee, args))
        modules[name] = ModuleDef(name, params, locals_, tuple(body))
    # source order: main first, like hand-written files would not guarantee
    return Program({name: modules[name] for name in names})


def reference_inline(p: Program) -> list[tuple]:
    """Naive recursive inliner: (kind, angle, operand names) in execution order."""
    out = []

    def go(name, binding, prefix):
        m = p.modules[name]
        for ins in m.body:
            if isinstance(ins, Gate):
                out.append((ins.kind, ins.angle, tuple(binding[q] for q in ins.operands)))
            else:
                callee = p.modules[ins.module]
                inner = {q: f"{ins.module}.{q}" for q in callee.locals}
                inner.update({pq: binding[a] for pq, a in zip(callee.params, ins.args)})
                go(ins.module, inner, prefix)

    go(p.entry, {q: q for q in p.main.qubits}, "")
    return out


def naive_census(p: Program, quantum: float = 1e-6) -> dict:
    counts = {}
    for kind, angle, _ in reference_inline(p):
        counts[kind] = counts.get(kind, 0) + 1
    return counts
