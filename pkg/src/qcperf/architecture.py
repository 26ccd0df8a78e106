"""Placement of modules onto a cell grid, the communication bus, and surface-code floor plans.

Cells are ``(x, y)`` grid coordinates. Every module gets a rectangular region
whose parameter cells come first in row-major order, then locals, then empty
filler cells. Regions are joined by a bus strip (1D global) or bus lanes
(2D global); ``all_to_all`` has neither and every pair of qubits interacts.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Hashable, Iterable

from .errors import InputError
from .qasm.model import ModuleDef, Program, QasmError

Cell = Hashable

GLOBAL_KINDS = ("1d", "2d", "all_to_all", "arbitrary")
LOCAL_KINDS = ("1d", "2d")


class LayoutError(InputError):
    pass


class CellRole(Enum):
    PARAM = "param"
    LOCAL = "local"
    FILLER = "filler"


@dataclass(frozen=True)
class Region:
    module: str
    width: int
    height: int
    origin: tuple[int, int]
    roles: dict[Cell, CellRole]
    home: dict[str, Cell]

    @property
    def cells(self) -> frozenset:
        return frozenset(self.roles)

    def cells_with(self, role: CellRole) -> list[Cell]:
        return sorted(c for c, r in self.roles.items() if r is role)

    def cell_of(self, qubit: str) -> Cell:
        return self.home[qubit]


@dataclass(frozen=True)
class BusSpec:
    bandwidth: int
    length: int
    cells: frozenset = frozenset()


@dataclass(frozen=True)
class ArchitectureLayout:
    global_kind: str
    local_kind: str
    regions: dict[str, Region]
    bus: BusSpec | None
    adjacency: dict[Cell, tuple[Cell, ...]] | None
    width: int = 0
    height: int = 0
    order: tuple[str, ...] = ()

    @property
    def total_cells(self) -> int:
        bus = len(self.bus.cells) if self.bus else 0
        return sum(len(r.roles) for r in self.regions.values()) + bus

    @property
    def all_to_all(self) -> bool:
        return self.adjacency is None

    @property
    def bandwidth(self) -> int:
        return self.bus.bandwidth if self.bus else 0

    def neighbors(self, cell: Cell) -> tuple[Cell, ...]:
        if self.adjacency is None:
            raise LayoutError("all-to-all layouts have no neighbourhood structure")
        return self.adjacency.get(cell, ())

    def adjacent(self, a: Cell, b: Cell) -> bool:
        return self.adjacency is None or b in self.adjacency.get(a, ())

    def render(self) -> str:
        """ASCII picture, top row first: P param, L local, . filler, = bus."""
        if self.global_kind not in ("1d", "2d"):
            raise LayoutError("only grid layouts can be rendered")
        glyph = {CellRole.PARAM: "P", CellRole.LOCAL: "L", CellRole.FILLER: "."}
        grid = [[" "] * self.width for _ in range(self.height)]
        for r in self.regions.values():
            for (x, y), role in r.roles.items():
                grid[y][x] = glyph[role]
        if self.bus:
            for x, y in self.bus.cells:
                grid[y][x] = "="
        return "\n".join("".join(row).rstrip() for row in reversed(grid))


def bus_bandwidth(p: Program) -> int:
    return max((len(m.params) for m in p.modules.values()), default=0)


def local_shape(n_qubits: int, local_kind: str) -> tuple[int, int]:
    if n_qubits < 1:
        raise LayoutError("a region needs at least one qubit")
    if local_kind == "1d":
        return n_qubits, 1
    if local_kind == "2d":
        w = math.isqrt(n_qubits - 1) + 1  # ceil(sqrt(n))
        return w, -(-n_qubits // w)
    raise LayoutError(f"unknown local layout {local_kind!r}")


def build_region(
    m: ModuleDef,
    local_kind: str = "2d",
    origin: tuple[int, int] = (0, 0),
    shape: tuple[int, int] | None = None,
) -> Region:
    """Rectangular region for ``m`` placed at ``origin`` (its lower-left cell).

    ``shape`` overrides the local-layout extent (used to pad regions to a
    uniform size); it must have room for every qubit.
    """
    n = m.n_qubits
    if n < 1:
        raise LayoutError(f"module {m.name!r} has no qubits")
    width, height = shape or local_shape(n, local_kind)
    if width * height < n:
        raise LayoutError(f"{width}x{height} region cannot hold {n} qubits")
    ox, oy = origin
    roles: dict[Cell, CellRole] = {}
    home: dict[str, Cell] = {}
    names = list(m.params) + list(m.locals)
    for i in range(width * height):
        cell = (ox + i % width, oy + i // width)
        if i < len(m.params):
            roles[cell] = CellRole.PARAM
            home[names[i]] = cell
        elif i < n:
            roles[cell] = CellRole.LOCAL
            home[names[i]] = cell
        else:
            roles[cell] = CellRole.FILLER
    return Region(m.name, width, height, origin, roles, home)


def first_call_order(p: Program) -> list[str]:
    """Entry, then callees in order of first appearance (depth first), then unreachable modules."""
    order: list[str] = []
    seen: set[str] = set()

    def visit(name: str) -> None:
        seen.add(name)
        order.append(name)
        for call in p.modules[name].calls():
            if call.module in p.modules and call.module not in seen:
                visit(call.module)

    visit(p.entry)
    order += [name for name in p.modules if name not in seen]
    return order


def _grid_adjacency(cells: Iterable[tuple[int, int]]) -> dict[Cell, tuple[Cell, ...]]:
    cells = set(cells)
    adj = {}
    for x, y in cells:
        adj[(x, y)] = tuple(
            sorted(c for c in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)) if c in cells)
        )
    return adj


def _layout_1d(p: Program, local_kind: str, with_bus: bool) -> ArchitectureLayout:
    bw = bus_bandwidth(p) if with_bus else 0
    order = first_call_order(p)
    regions: dict[str, Region] = {}
    x = 0
    for name in order:
        r = build_region(p.modules[name], local_kind, origin=(x, bw))
        regions[name] = r
        x += r.width
    height = bw + max(r.height for r in regions.values())
    bus = None
    if bw:
        bus = BusSpec(bw, x, frozenset((i, j) for i in range(x) for j in range(bw)))
    cells = [c for r in regions.values() for c in r.roles] + (list(bus.cells) if bus else [])
    adjacency = _grid_adjacency(cells) if with_bus else None
    kind = "1d" if with_bus else "all_to_all"
    return ArchitectureLayout(kind, local_kind, regions, bus, adjacency, x, height, tuple(order))


def _layout_2d(p: Program, local_kind: str) -> ArchitectureLayout:
    bw = bus_bandwidth(p)
    order = first_call_order(p)
    shapes = [local_shape(p.modules[name].n_qubits, local_kind) for name in order]
    n = max(max(w, h) for w, h in shapes)
    cols = max(1, math.isqrt(len(order)))
    rows = -(-len(order) // cols)
    pitch = n + bw
    regions: dict[str, Region] = {}
    for i, name in enumerate(order):
        c, r = i % cols, i // cols
        regions[name] = build_region(p.modules[name], local_kind, origin=(c * pitch, r * pitch), shape=(n, n))
    width = cols * n + (cols - 1) * bw
    height = rows * n + (rows - 1) * bw
    occupied = {cell for r in regions.values() for cell in r.roles}
    bus = None
    if bw and len(order) > 1:
        bus_cells = set()
        for x in range(width):
            for y in range(height):
                in_gap = x % pitch >= n or y % pitch >= n
                if in_gap and (x, y) not in occupied:
                    bus_cells.add((x, y))
        bus = BusSpec(bw, max(width, height), frozenset(bus_cells))
    cells = list(occupied) + (list(bus.cells) if bus else [])
    return ArchitectureLayout("2d", local_kind, regions, bus, _grid_adjacency(cells), width, height, tuple(order))


def read_edge_list(path: str | Path) -> list[tuple[str, str]]:
    edges = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise LayoutError(f"{path}:{lineno}: expected 'u v'")
        edges.append((parts[0], parts[1]))
    return edges


def _node_key(label: str):
    return (0, int(label), "") if label.lstrip("-").isdigit() else (1, 0, label)


def _layout_arbitrary(p: Program, edges: Iterable[tuple[str, str]]) -> ArchitectureLayout:
    if p.structured:
        raise LayoutError("arbitrary layouts accept only non-structured programs; flatten first")
    adj: dict[str, set[str]] = {}
    for u, v in edges:
        u, v = str(u), str(v)
        if u == v:
            continue
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    if not adj:
        raise LayoutError("adjacency graph is empty")
    nodes = sorted(adj, key=_node_key)
    seen = {nodes[0]}
    queue = deque([nodes[0]])
    while queue:
        for nb in adj[queue.popleft()]:
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    if len(seen) != len(nodes):
        raise LayoutError("adjacency graph is disconnected")
    main = p.main
    if main.n_qubits > len(nodes):
        raise LayoutError(f"{main.n_qubits} qubits do not fit on {len(nodes)} nodes")
    # node labels double as cells; qubits take nodes in sorted label order
    cells = [(_node_key(n), n) for n in nodes]
    names = list(main.params) + list(main.locals)
    roles = {}
    home = {}
    for i, cell in enumerate(cells):
        if i < len(main.params):
            roles[cell] = CellRole.PARAM
        elif i < len(names):
            roles[cell] = CellRole.LOCAL
        else:
            roles[cell] = CellRole.FILLER
        if i < len(names):
            home[names[i]] = cell
    region = Region(main.name, len(cells), 1, (0, 0), roles, home)
    by_label = dict((n, c) for c, n in ((c, c[1]) for c in cells))
    adjacency = {by_label[u]: tuple(sorted(by_label[v] for v in vs)) for u, vs in adj.items()}
    return ArchitectureLayout("arbitrary", "1d", {main.name: region}, None, adjacency, len(cells), 1, (main.name,))


def build_layout(
    p: Program,
    global_kind: str = "1d",
    local_kind: str = "2d",
    edges: Iterable[tuple[str, str]] | None = None,
) -> ArchitectureLayout:
    """One region per module, joined by a bus sized to the widest parameter list.

    Raises:
        LayoutError: unknown kind, empty module, or an unusable adjacency graph.
    """
    if local_kind not in LOCAL_KINDS:
        raise LayoutError(f"unknown local layout {local_kind!r}")
    try:
        p.main
    except QasmError as exc:
        raise LayoutError(str(exc)) from None
    if global_kind == "1d":
        return _layout_1d(p, local_kind, with_bus=True)
    if global_kind == "all_to_all":
        return _layout_1d(p, local_kind, with_bus=False)
    if global_kind == "2d":
        return _layout_2d(p, local_kind)
    if global_kind == "arbitrary":
        if edges is None:
            raise LayoutError("arbitrary layout needs an edge list")
        return _layout_arbitrary(p, edges)
    raise LayoutError(f"unknown global layout {global_kind!r}")


def communication_qubits(p: Program, global_kind: str, local_kind: str) -> int:
    """Logical qubits spent on the bus, by the closed-form bus-size rules.

    1D global: bandwidth times the summed module widths, where a width is 1
    for 1D local layouts and floor(sqrt(Q^M)) for 2D ones. 2D global:
    ``2 bw n A B + (n A)^2`` with ``n = floor(sqrt(max Q^M))``,
    ``B = floor(sqrt(|M|))`` and ``A = B - 1``.
    """
    bw = bus_bandwidth(p)
    sizes = [m.n_qubits for m in p.modules.values()]
    if global_kind == "1d":
        if local_kind == "1d":
            length = len(sizes)
        else:
            length = sum(math.isqrt(q) for q in sizes)
        return bw * length
    if global_kind == "2d":
        n = math.isqrt(max(sizes))
        b = math.isqrt(len(sizes))
        a = b - 1
        return 2 * bw * n * a * b + (n * a) ** 2
    return 0


# -- surface-code floor plans ---------------------------------------------------


def defect_spacing(d: int) -> int:
    """Data-qubit separation between neighbouring logical qubits, ceil(d/4)."""
    return -(-d // 4)


@dataclass(frozen=True)
class SurfaceFootprint:
    d: int
    spacing: int
    a: int
    b: int
    rows: int
    cols: int
    q_l: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "q_l", self.rows * self.cols)

    @property
    def lattice_data(self) -> int:
        """Data sites of the checkerboard lattice (corners are data)."""
        return -(-self.q_l // 2)

    @property
    def lattice_syndrome(self) -> int:
        return self.q_l // 2

    # Each minimal defect vacates one lattice site: one data site and one
    # syndrome site in total, so data + syndrome + DEFECT_SITES == q_l.
    DEFECT_SITES = 2

    @property
    def data_qubits(self) -> int:
        return self.lattice_data - 1

    @property
    def syndrome_qubits(self) -> int:
        return self.lattice_syndrome - 1


def _ab(d: int) -> tuple[int, int, int]:
    if d < 1:
        raise ValueError("code distance must be >= 1")
    s = defect_spacing(d)
    return 2 * d - 2 + s, 4 * d - 4 + 3 * s, s


def surface_footprint(d: int) -> SurfaceFootprint:
    """Physical qubits of one double-defect logical qubit at distance ``d``."""
    a, b, s = _ab(d)
    return SurfaceFootprint(d, s, a, b, rows=2 * b + 1, cols=2 * a + 1)


def surface_grid_qubits(n_h: int, n_w: int, d: int) -> int:
    """Physical qubits for an ``n_h`` x ``n_w`` array of logical qubits."""
    if n_h < 1 or n_w < 1:
        raise ValueError("grid extents must be >= 1")
    a, b, s = _ab(d)
    return (2 * (n_w * a + (n_w - 1) * s) + 1) * (2 * (n_h * b + (n_h - 1) * s) + 1)
