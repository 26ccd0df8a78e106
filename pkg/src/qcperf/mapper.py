"""System mapping: schedules a program on a layout and measures it.

Each module is scheduled once, in post-order, against its own region with
its parameters ready at time 0; the resulting :class:`ModuleRecord` (the
global table) is then reused at every call site. Inside a module the local
table is the per-qubit ready time and cell. A call waits for its arguments
and for every region the callee may touch, passes the arguments in over the
bus, runs the callee's recorded body, and passes them back.

Steane-style (and unencoded) schedules route CNOTs with SWAPs and pass
qubits by SWAP chains. Surface-code schedules skip routing (braids reach any
qubit in the region), serialize braids per region, and pass qubits by
multi-cell moves.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .architecture import ArchitectureLayout, Cell, CellRole, Region, defect_spacing
from .building_blocks import LogicalOpPerf, MissingOpError
from .errors import ModelError
from .qasm.analysis import gate_census, postorder
from .qasm.model import Gate, GateKind, Program

G = GateKind
SURFACE_LEGS = 3  # exit, bus, entry


class RoutingError(ModelError):
    pass


class OccupancyError(AssertionError):
    pass


@dataclass(frozen=True)
class TraceEvent:
    time: float
    op: str
    cells: tuple

    def format(self) -> str:
        return f"t={self.time!r} {self.op} {' '.join(format_cell(c) for c in self.cells)}".rstrip()


def format_cell(cell: Cell) -> str:
    if isinstance(cell, tuple) and len(cell) == 2 and all(isinstance(v, int) for v in cell):
        return f"({cell[0]},{cell[1]})"
    if isinstance(cell, tuple) and len(cell) == 2:
        return str(cell[1])  # arbitrary-graph node
    return str(cell)


@dataclass(frozen=True)
class PassingCost:
    time: float
    swaps: int
    steps: int
    distances: tuple[int, ...] = ()


@dataclass(frozen=True)
class ModuleRecord:
    """Outcome of one invocation of a module, relative to its start."""

    name: str
    time: float
    tallies: dict[GateKind, int]
    depth: int
    max_parallel_t: int
    max_parallel_s: int
    final_param_cells: tuple
    trace: tuple[TraceEvent, ...] = ()


@dataclass(frozen=True)
class MappingResult:
    t_one: float
    tallies: dict[GateKind, int]
    k: int
    q: int
    max_parallel_t: int
    max_parallel_s: int
    modules: dict[str, ModuleRecord] = field(compare=False)
    setup_time: float = 0.0
    trace: tuple[TraceEvent, ...] | None = field(default=None, compare=False)

    @property
    def kq(self) -> int:
        return self.k * self.q

    @property
    def swap_count(self) -> int:
        return self.tallies.get(G.SWAP, 0)

    @property
    def total_gates(self) -> int:
        return sum(self.tallies.values())

    def trace_text(self) -> str:
        return "".join(e.format() + "\n" for e in self.trace or ())


# -- routing ----------------------------------------------------------------------


def shortest_path(
    layout: ArchitectureLayout, src: Cell, dst: Cell, allowed: frozenset | set | None = None
) -> list[Cell]:
    """Breadth-first shortest path; neighbours are expanded in sorted order.

    Raises:
        RoutingError: ``dst`` is unreachable through ``allowed`` cells.
    """
    if src == dst:
        return [src]
    parent = {src: None}
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        for nb in layout.neighbors(cur):
            if nb in parent or (allowed is not None and nb not in allowed and nb != dst):
                continue
            parent[nb] = cur
            if nb == dst:
                path = [dst]
                while path[-1] != src:
                    path.append(parent[path[-1]])
                return path[::-1]
            queue.append(nb)
    raise RoutingError(f"no path from {format_cell(src)} to {format_cell(dst)}")


def route_cnot(
    layout: ArchitectureLayout, cell_a: Cell, cell_b: Cell, allowed: frozenset | set | None = None
) -> list[tuple[Cell, Cell]]:
    """SWAPs that walk the qubit at ``cell_a`` until it neighbours ``cell_b``.

    A path of L edges gives L - 1 SWAPs; adjacent cells give none.
    """
    if layout.all_to_all:
        return []
    path = shortest_path(layout, cell_a, cell_b, allowed)
    return [(path[i], path[i + 1]) for i in range(len(path) - 2)]


def routable_cells(region: Region, fillers_routable: bool = True) -> frozenset:
    if fillers_routable:
        return region.cells
    return frozenset(c for c, r in region.roles.items() if r is not CellRole.FILLER)


def passing_distance(
    layout: ArchitectureLayout, src: Cell, src_region: Region, dst: Cell, dst_region: Region
) -> tuple[int, int, int]:
    """(exit, bus, entry) edge counts of a shortest source-region -> bus -> target-region path.

    Without a bus the path may step from one region straight into the other.
    """
    bus = layout.bus.cells if layout.bus else frozenset()
    zones = (src_region.cells, bus, dst_region.cells)
    start = (src, 0)
    legs = {start: (0, 0, 0)}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        cur, phase = state
        if cur == dst and phase == 2:
            return legs[state]
        nexts = [phase] if phase == 2 else [phase, phase + 1]
        if phase == 0 and not bus:
            nexts = [0, 2]
        for nb in layout.neighbors(cur):
            for nphase in nexts:
                if nb not in zones[nphase] or (nb, nphase) in legs:
                    continue
                leg = phase if nphase == phase else (0 if phase == 0 and bus else 2)
                step = list(legs[state])
                step[leg] += 1
                legs[(nb, nphase)] = tuple(step)
                queue.append((nb, nphase))
    raise RoutingError(
        f"cannot pass {format_cell(src)} -> {format_cell(dst)} "
        f"between {src_region.module} and {dst_region.module}"
    )


def pass_qubits(
    layout: ArchitectureLayout,
    perf: LogicalOpPerf,
    source: Region,
    target: Region,
    src_cells: Sequence[Cell],
    dst_cells: Sequence[Cell],
) -> PassingCost:
    """Cost of moving qubits at ``src_cells`` (in ``source``) to ``dst_cells`` (in ``target``).

    Forward passing goes caller -> callee; backward passing is the same call
    with the regions swapped. SWAP-based codes move up to ``bandwidth``
    qubits per wave, each wave lasting the longest path; surface-code passing
    is one multi-cell move per leg, with ``ceil(d/4)`` qubits per wave.

    Raises:
        RoutingError: no bus to carry a non-empty argument list, or no path.
    """
    n = len(src_cells)
    if n != len(dst_cells):
        raise ValueError("source and destination cell lists differ in length")
    if n == 0 or layout.all_to_all:
        return PassingCost(0.0, 0, 0)
    if perf.code == "surface":
        waves = -(-n // defect_spacing(perf.distance or 3))
        steps = waves * SURFACE_LEGS
        return PassingCost(steps * perf.move_time, 0, steps)
    bw = layout.bandwidth
    if bw <= 0:
        raise RoutingError(f"no bus to pass {n} qubit(s) from {source.module} to {target.module}")
    dists = tuple(sum(passing_distance(layout, s, source, t, target)) for s, t in zip(src_cells, dst_cells))
    waves = -(-n // bw)
    steps = waves * max(dists)
    return PassingCost(steps * perf.move_time, sum(dists), steps, dists)


# -- parallelism ------------------------------------------------------------------


def max_overlap(intervals: Iterable[tuple[float, float, int]]) -> int:
    """Largest total weight of half-open intervals covering one instant."""
    events = []
    for start, end, w in intervals:
        if w and end > start:
            events.append((start, 1, w))
            events.append((end, 0, -w))
    best = cur = 0
    for _, _, w in sorted(events):
        cur += w
        best = max(best, cur)
    return best


# -- scheduling ---------------------------------------------------------------------


class _Mapper:
    def __init__(
        self,
        p: Program,
        layout: ArchitectureLayout,
        perf: LogicalOpPerf,
        fillers_routable: bool,
        trace: bool,
        debug: bool,
    ):
        self.p = p
        self.layout = layout
        self.perf = perf
        self.surface = perf.code == "surface"
        self.route = not self.surface and not layout.all_to_all
        self.fillers_routable = fillers_routable
        self.want_trace = trace or debug
        self.debug = debug
        self.records: dict[str, ModuleRecord] = {}
        self.closure: dict[str, frozenset] = {}
        self._pass_cache: dict = {}

    # passing --------------------------------------------------------------

    def passing(self, caller: str, callee: str, src_cells: Sequence[Cell], dst_cells: Sequence[Cell]) -> PassingCost:
        key = (caller, callee, tuple(src_cells), tuple(dst_cells))
        if key not in self._pass_cache:
            self._pass_cache[key] = pass_qubits(
                self.layout, self.perf, self.layout.regions[caller], self.layout.regions[callee], src_cells, dst_cells
            )
        return self._pass_cache[key]

    # module scheduling ------------------------------------------------------

    def module(self, name: str) -> ModuleRecord:
        if name in self.records:
            return self.records[name]
        m = self.p.modules[name]
        region = self.layout.regions[name]
        allowed = routable_cells(region, self.fillers_routable)
        perf = self.perf

        ready = {q: 0.0 for q in m.qubits}
        depth = {q: 0 for q in m.qubits}
        cell = dict(region.home)
        occupant = {c: q for q, c in cell.items()}
        cell_free: dict[Cell, float] = {}
        region_free: dict[str, float] = {}
        braid_free = 0.0
        # calls with no arguments leave no trace on the local table
        call_end, call_depth = 0.0, 0
        tallies: Counter = Counter()
        t_iv: list = []
        s_iv: list = []
        events: list[TraceEvent] = []
        emit = events.append if self.want_trace else None

        def cell_time(c: Cell) -> float:
            q = occupant.get(c)
            return ready[q] if q is not None else cell_free.get(c, 0.0)

        def do_swap(c1: Cell, c2: Cell) -> None:
            q1, q2 = occupant.get(c1), occupant.get(c2)
            start = max(cell_time(c1), cell_time(c2))
            end = start + perf.time_of(G.SWAP)
            step = max(depth[q] for q in (q1, q2) if q is not None) + 1
            for c, q in ((c2, q1), (c1, q2)):
                if q is None:
                    occupant.pop(c, None)
                    cell_free[c] = end
                else:
                    occupant[c] = q
                    cell[q] = c
                    ready[q] = end
                    depth[q] = step
            tallies[G.SWAP] += 1
            if emit:
                emit(TraceEvent(start, "SWAP", (c1, c2)))
            if self.debug:
                self._check_occupancy(name, cell, occupant)

        for ins in m.body:
            if isinstance(ins, Gate):
                ops = ins.operands
                if ins.kind is G.CNOT and len(ops) == 2:
                    a, b = ops
                    if self.route and not self.layout.adjacent(cell[a], cell[b]):
                        for c1, c2 in route_cnot(self.layout, cell[a], cell[b], allowed):
                            do_swap(c1, c2)
                start = max(ready[q] for q in ops)
                if self.surface and ins.kind in (G.CNOT, G.SWAP):
                    start = max(start, braid_free)
                end = start + perf.time_of(ins.kind)
                if self.surface and ins.kind in (G.CNOT, G.SWAP):
                    braid_free = end
                step = max(depth[q] for q in ops) + 1
                for q in ops:
                    ready[q] = end
                    depth[q] = step
                tallies[ins.kind] += 1
                if ins.kind in (G.T, G.Tdg):
                    t_iv.append((start, end, 1))
                elif ins.kind in (G.S, G.Sdg):
                    s_iv.append((start, end, 1))
                if emit:
                    emit(TraceEvent(start, ins.kind.value, tuple(cell[q] for q in ops)))
                continue

            callee = self.p.modules[ins.module]
            rec = self.module(ins.module)
            args = ins.args
            src = tuple(cell[a] for a in args)
            dst = tuple(self.layout.regions[ins.module].home[q] for q in callee.params)
            fwd = self.passing(name, ins.module, src, dst)
            bwd = self.passing(ins.module, name, rec.final_param_cells, src)
            touched = self.closure[ins.module]
            start = max([ready[a] for a in args] + [region_free.get(r, 0.0) for r in touched] + [0.0])
            body_start = start + fwd.time
            body_end = body_start + rec.time
            end = body_end + bwd.time
            step = max([depth[a] for a in args] + [0]) + fwd.steps + rec.depth + bwd.steps
            for a in args:
                ready[a] = end
                depth[a] = step
            for r in touched:
                region_free[r] = end
            call_end, call_depth = max(call_end, end), max(call_depth, step)
            tallies.update(rec.tallies)
            tallies[G.SWAP] += fwd.swaps + bwd.swaps
            t_iv.append((body_start, body_end, rec.max_parallel_t))
            s_iv.append((body_start, body_end, rec.max_parallel_s))
            if emit:
                emit(TraceEvent(start, f"FP:{ins.module}", dst))
                events.extend(TraceEvent(body_start + e.time, e.op, e.cells) for e in rec.trace)
                emit(TraceEvent(body_end, f"BP:{ins.module}", src))

        times = [ready[q] for q in m.qubits]
        rec = ModuleRecord(
            name=name,
            time=max(times + [call_end]),
            tallies={k: v for k, v in tallies.items() if v},
            depth=max(list(depth.values()) + [call_depth]),
            max_parallel_t=max_overlap(t_iv),
            max_parallel_s=max_overlap(s_iv),
            final_param_cells=tuple(cell[q] for q in m.params),
            trace=tuple(sorted(events, key=lambda e: e.time)) if self.want_trace else (),
        )
        self.records[name] = rec
        return rec

    def _check_occupancy(self, name: str, cell: dict, occupant: dict) -> None:
        if len(set(cell.values())) != len(cell):
            raise OccupancyError(f"{name}: two qubits share a cell")
        for q, c in cell.items():
            if occupant.get(c) != q:
                raise OccupancyError(f"{name}: occupancy table out of sync at {format_cell(c)}")
        region = self.layout.regions[name]
        stray = [c for c in cell.values() if c not in region.roles]
        if stray:
            raise OccupancyError(f"{name}: qubit left its region at {format_cell(stray[0])}")

    def run(self) -> MappingResult:
        order = postorder(self.p)
        for name in order:
            closure = {name}
            for call in self.p.modules[name].calls():
                closure |= self.closure[call.module]
            self.closure[name] = frozenset(closure)
        for name in order:
            self.module(name)
        main = self.records[self.p.entry]
        k = sum(len(self.p.modules[n].locals) for n in order)
        return MappingResult(
            t_one=self.perf.setup_time + main.time,
            tallies=dict(sorted(main.tallies.items(), key=lambda kv: kv[0].value)),
            k=k,
            q=main.depth,
            max_parallel_t=main.max_parallel_t,
            max_parallel_s=main.max_parallel_s,
            modules=dict(self.records),
            setup_time=self.perf.setup_time,
            trace=main.trace if self.want_trace else None,
        )


def _check_coverage(p: Program, layout: ArchitectureLayout, perf: LogicalOpPerf) -> None:
    census = gate_census(p)
    for kind, n in census.nonzero().items():
        perf.time_of(kind)
        perf.error_of(kind)
    if perf.code != "surface" and not layout.all_to_all:
        perf.time_of(G.SWAP)
    missing = [name for name in postorder(p) if name not in layout.regions]
    if missing:
        raise MissingOpError(f"layout has no region for {missing}")


def map_program(
    p: Program,
    layout: ArchitectureLayout,
    perf: LogicalOpPerf,
    *,
    fillers_routable: bool = True,
    trace: bool = False,
    debug: bool = False,
) -> MappingResult:
    """Schedules ``p`` on ``layout`` with per-op costs from ``perf``.

    Args:
        fillers_routable: let routing SWAPs pass through empty region cells.
        trace: keep a time-ordered event list (``MappingResult.trace``).
        debug: also re-check occupancy consistency after every SWAP.

    Raises:
        MissingOpError: ``perf`` lacks a gate the program uses.
        RoutingError: a CNOT or a passing cannot be routed.
    """
    _check_coverage(p, layout, perf)
    return _Mapper(p, layout, perf, fillers_routable, trace, debug).run()


def braid_schedule(cnots: Sequence[Gate]) -> list[tuple[int, Gate]]:
    """Slots for braids issued in one logical step: one at a time, in order."""
    return list(enumerate(cnots))
