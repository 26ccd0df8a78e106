"""End metrics and parameter sweeps.

:func:`estimate` runs the whole pipeline for one configuration: lower the
program, build the layout, pick the code level or distance, map, and turn
the mapping into time, fidelity and qubit totals.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from . import architecture as arch
from .building_blocks import (
    DeviceProfile,
    LogicalOpPerf,
    factory_capacity,
    factory_qubits,
    msd_rounds,
    physical_perf,
    required_concatenation_level,
    steane_logical_perf,
    steane_physical_qubits,
    surface_code_distance,
    surface_logical_error,
    surface_logical_perf,
)
from .config import RunConfig
from .errors import InputError, ModelError
from .lowering import CONTROLLED_RN_MODULE, apply_controlled_rn_variant, lower_gateset
from .mapper import MappingResult, map_program
from .qasm.analysis import flatten
from .qasm.model import FT_GATESET, PHYSICAL_GATESET, GateKind, Program

G = GateKind
SCHEMA_VERSION = "1.0"


class FidelityFloorError(ModelError):
    pass


# -- metrics ------------------------------------------------------------------------


def log_algorithm_fidelity(tallies: Mapping[GateKind, int], perf: LogicalOpPerf) -> float:
    total = 0.0
    for kind, n in tallies.items():
        if n:
            err = perf.error_of(kind)
            if err >= 1.0:
                return -math.inf
            total += n * math.log1p(-err)
    return total


def algorithm_fidelity(tallies: Mapping[GateKind, int], perf: LogicalOpPerf, floor: float = 1e-300) -> float:
    """Product of per-gate fidelities raised to their counts, via log space.

    Results below ``floor`` are reported as 0.
    """
    log_f = log_algorithm_fidelity(tallies, perf)
    if log_f == -math.inf or (floor > 0 and log_f < math.log(floor)):
        return 0.0
    return math.exp(log_f)


def surface_fidelity(kq: float, eps_l: float) -> float:
    """``1 - KQ eps_L``.

    Raises:
        FidelityFloorError: ``KQ eps_L >= 1``.
    """
    fail = kq * eps_l
    if fail >= 1.0:
        raise FidelityFloorError(f"KQ * eps_L = {fail:.3g} >= 1: no success probability left")
    return 1.0 - fail


def average_time(t_one: float, f_alg: float) -> float:
    """Expected time to one successful run; infinite when the fidelity is 0."""
    if f_alg <= 0.0:
        return math.inf
    return t_one / f_alg


def swap_ratio(tallies: Mapping[GateKind, int]) -> float:
    total = sum(tallies.values())
    if total <= 0:
        raise ValueError("swap ratio of an empty tally")
    return tallies.get(G.SWAP, 0) / total


@dataclass(frozen=True)
class QubitTotals:
    q_comp: int
    q_comm: int
    code_total: int
    factory_a: int = 0
    factory_y: int = 0
    factory_extra: int = 0
    grid: int = 0
    bus: int = 0
    per_logical: int = 1

    @property
    def total(self) -> int:
        return self.code_total + self.factory_a + self.factory_y + self.factory_extra


def computation_qubits(p: Program) -> int:
    return sum(m.n_qubits for m in p.modules.values())


def steane_qubits(q_comp: int, q_comm: int, level: int) -> int:
    """``25^(l-1) 30 Q_comp + 25^l Q_comm``; the bare count at level 0."""
    if level == 0:
        return q_comp + q_comm
    return 25 ** (level - 1) * 30 * q_comp + 25**level * q_comm


def surface_module_qubits(p: Program) -> dict[str, int]:
    """Logical qubits per module: params, locals and a CNOT ancilla pair if needed."""
    out = {}
    for name, m in p.modules.items():
        has_cnot = any(g.kind is G.CNOT for g in m.gates())
        out[name] = m.n_qubits + (2 if has_cnot else 0)
    return out


def surface_qubits(
    p: Program, d: int, local_kind: str, mapping: MappingResult, eps_p: float, model
) -> QubitTotals:
    fp = arch.surface_footprint(d)
    shapes = [arch.local_shape(n, local_kind) for n in surface_module_qubits(p).values() if n]
    n_w = sum(w for w, _ in shapes) or 1
    n_h = max((h for _, h in shapes), default=1)
    grid = arch.surface_grid_qubits(n_h, n_w, d)
    cols = 2 * (n_w * fp.a + (n_w - 1) * fp.spacing) + 1
    has_calls = any(m.calls() for m in p.modules.values())
    bus = 2 * (fp.spacing + d) * cols if has_calls else 0
    max_t, max_s = mapping.max_parallel_t, mapping.max_parallel_s
    r_a = max(1, msd_rounds(eps_p, model.msd_target, "A", model.r_max))
    r_y = max(1, msd_rounds(eps_p, model.msd_target, "Y", model.r_max))
    a_q, _ = factory_qubits(max_t, max_s, fp.q_l, r_a, model.msd_time_ratio)
    _, y_q = factory_qubits(max_t, max_s, fp.q_l, r_y, model.msd_time_ratio)
    units = factory_capacity(max_t, model.msd_time_ratio) + max(max_t, max_s)
    extra = units * (1 + 2 * model.distill_ancilla_multiplier) * fp.q_l
    q_comp = computation_qubits(p)
    return QubitTotals(q_comp, 0, grid + bus, a_q, y_q, extra, grid, bus, fp.q_l)


def qubit_totals(
    p: Program,
    global_kind: str,
    local_kind: str,
    code: str,
    mapping: MappingResult,
    level: int | None = None,
    distance: int | None = None,
    eps_p: float | None = None,
    surface_model=None,
) -> QubitTotals:
    """Physical-qubit totals for the chosen code."""
    if code == "surface":
        if distance is None or eps_p is None or surface_model is None:
            raise ValueError("surface totals need distance, eps_p and the surface model")
        return surface_qubits(p, distance, local_kind, mapping, eps_p, surface_model)
    q_comp = computation_qubits(p)
    q_comm = arch.communication_qubits(p, global_kind, local_kind)
    lvl = 0 if code == "none" else int(level or 0)
    return QubitTotals(q_comp, q_comm, steane_qubits(q_comp, q_comm, lvl), per_logical=steane_physical_qubits(lvl))


# -- report -------------------------------------------------------------------------


def _json_float(x: float) -> float | str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


@dataclass(frozen=True)
class EstimateReport:
    code: str
    level: int | None
    distance: int | None
    selected_by: str
    t_one: float
    f_alg: float
    log_f_alg: float
    t_avg: float
    saturated: bool
    qubits: QubitTotals
    swap_ratio: float
    k: int
    q: int
    tallies: dict[GateKind, int]
    max_parallel_t: int
    max_parallel_s: int
    logical_error: float | None
    setup_time: float
    layout: dict
    config: dict = field(default_factory=dict, compare=False)
    mapping: MappingResult | None = field(default=None, compare=False, repr=False)

    @property
    def kq(self) -> int:
        return self.k * self.q

    @property
    def level_or_distance(self) -> int | None:
        return self.distance if self.code == "surface" else self.level

    def to_dict(self) -> dict:
        q = self.qubits
        return {
            "schema_version": SCHEMA_VERSION,
            "code": self.code,
            "level": self.level,
            "distance": self.distance,
            "selected_by": self.selected_by,
            "T_one_s": _json_float(self.t_one),
            "setup_time_s": self.setup_time,
            "F_alg": self.f_alg,
            "log_F_alg": _json_float(self.log_f_alg),
            "T_avg_s": _json_float(self.t_avg),
            "saturated": self.saturated,
            "swap_ratio": self.swap_ratio,
            "K": self.k,
            "Q": self.q,
            "KQ": self.kq,
            "depth_counts_swaps": True,
            "max_parallel_T": self.max_parallel_t,
            "max_parallel_S": self.max_parallel_s,
            "logical_error": self.logical_error,
            "tallies": {k.value: v for k, v in sorted(self.tallies.items(), key=lambda kv: kv[0].value)},
            "qubits": {
                "Q_comp": q.q_comp,
                "Q_comm": q.q_comm,
                "per_logical": q.per_logical,
                "code_total": q.code_total,
                "grid": q.grid,
                "bus": q.bus,
                "factory_A": q.factory_a,
                "factory_Y": q.factory_y,
                "factory_extra": q.factory_extra,
                "total": q.total,
            },
            "layout": self.layout,
            "config": self.config,
        }

    def summary(self) -> str:
        setting = {"steane": f"level {self.level}", "surface": f"distance {self.distance}"}.get(self.code, "physical")
        lines = [
            f"code            {self.code} ({setting}, {self.selected_by})",
            f"T_one           {self.t_one:.6g} s",
            f"F_alg           {self.f_alg:.6g}  (log {self.log_f_alg:.6g})",
            f"T_avg           {self.t_avg:.6g} s" + ("  [saturated: fidelity ~ 0]" if self.saturated else ""),
            f"K, Q, KQ        {self.k}, {self.q}, {self.kq}",
            f"SWAP ratio      {self.swap_ratio:.6g}",
            f"parallel T / S  {self.max_parallel_t} / {self.max_parallel_s}",
            f"qubits          {self.qubits.total} physical "
            f"(Q_comp {self.qubits.q_comp}, Q_comm {self.qubits.q_comm}, {self.qubits.per_logical} per logical)",
        ]
        if self.code == "surface":
            lines.append(
                f"factories       A {self.qubits.factory_a}, "
                f"Y {self.qubits.factory_y}, extra {self.qubits.factory_extra}"
            )
        return "\n".join(lines) + "\n"


# -- pipeline -----------------------------------------------------------------------


@dataclass(frozen=True)
class Prepared:
    program: Program
    layout: arch.ArchitectureLayout


def prepare(p: Program, cfg: RunConfig) -> Prepared:
    """Lowering, optional compile variant, and layout construction."""
    if cfg.compile_variant is not None and CONTROLLED_RN_MODULE in p.modules:
        p = apply_controlled_rn_variant(p, cfg.compile_variant)
    target = set(PHYSICAL_GATESET if cfg.code == "none" else FT_GATESET)
    if not cfg.expand_swap:
        target.add(G.SWAP)
    lowered = lower_gateset(p, target, cfg.decompose)
    edges = None
    if cfg.global_layout == "arbitrary":
        lowered = flatten(lowered, cap=cfg.flatten_cap)
        edges = arch.read_edge_list(cfg.edges)
    layout = arch.build_layout(lowered, cfg.global_layout, cfg.local_layout, edges)
    return Prepared(lowered, layout)


def _map(prep: Prepared, perf: LogicalOpPerf, cfg: RunConfig) -> MappingResult:
    return map_program(prep.program, prep.layout, perf, fillers_routable=cfg.fillers_routable, trace=cfg.trace)


def probe_kq(prep: Prepared, cfg: RunConfig) -> int:
    """KQ from a unit-cost mapping (routing and passing included)."""
    if cfg.code == "surface":
        probe = LogicalOpPerf.uniform(code="surface", distance=3)
    else:
        probe = LogicalOpPerf.uniform(code=cfg.code)
    return max(1, _map(prep, probe, cfg).kq)


def select_level(prep: Prepared, cfg: RunConfig) -> int:
    return required_concatenation_level(probe_kq(prep, cfg), cfg.device.error_rate, cfg.steane)


def select_distance(prep: Prepared, cfg: RunConfig) -> int:
    eps_l = (1.0 - cfg.target_fidelity) / probe_kq(prep, cfg)
    return surface_code_distance(eps_l, cfg.device.error_rate, cfg.surface)


def layout_summary(layout: arch.ArchitectureLayout) -> dict:
    return {
        "global": layout.global_kind,
        "local": layout.local_kind,
        "regions": {
            name: {"width": r.width, "height": r.height, "origin": list(r.origin)}
            for name, r in layout.regions.items()
        }
        if layout.global_kind != "arbitrary"
        else {name: {"nodes": r.width} for name, r in layout.regions.items()},
        "bandwidth": layout.bandwidth,
        "cells": layout.total_cells,
    }


def estimate(p: Program, cfg: RunConfig, prepared: Prepared | None = None) -> EstimateReport:
    """Full estimate for one configuration.

    Raises:
        InputError: the program or layout is unusable.
        ModelError: a cost-model precondition fails (threshold, caps, fidelity floor).
    """
    prep = prepared or prepare(p, cfg)
    level = distance = None
    selected_by = "config"
    eps_l = None
    if cfg.code == "none":
        perf = physical_perf(cfg.device)
        level = 0
    elif cfg.code == "steane":
        level = cfg.level
        if level is None:
            level = select_level(prep, cfg)
            selected_by = "formula"
        perf = steane_logical_perf(cfg.device, level, cfg.steane)
    else:
        distance = cfg.distance
        if distance is None:
            distance = select_distance(prep, cfg)
            selected_by = "formula"
        perf = surface_logical_perf(distance, cfg.device, cfg.surface)
        eps_l = surface_logical_error(distance, cfg.device.error_rate, cfg.surface)

    mapping = _map(prep, perf, cfg)
    if cfg.code == "surface":
        f_alg = surface_fidelity(mapping.kq, eps_l)
        log_f = math.log(f_alg)
    else:
        log_f = log_algorithm_fidelity(mapping.tallies, perf)
        f_alg = algorithm_fidelity(mapping.tallies, perf, cfg.fidelity_floor)
    t_avg = average_time(mapping.t_one, f_alg)
    totals = qubit_totals(
        prep.program,
        cfg.global_layout,
        cfg.local_layout,
        cfg.code,
        mapping,
        level=level,
        distance=distance,
        eps_p=cfg.device.error_rate,
        surface_model=cfg.surface,
    )
    total_gates = sum(mapping.tallies.values())
    return EstimateReport(
        code=cfg.code,
        level=level,
        distance=distance,
        selected_by=selected_by,
        t_one=mapping.t_one,
        f_alg=f_alg,
        log_f_alg=log_f,
        t_avg=t_avg,
        saturated=f_alg < cfg.saturation_threshold,
        qubits=totals,
        swap_ratio=swap_ratio(mapping.tallies) if total_gates else 0.0,
        k=mapping.k,
        q=mapping.q,
        tallies=dict(mapping.tallies),
        max_parallel_t=mapping.max_parallel_t,
        max_parallel_s=mapping.max_parallel_s,
        logical_error=eps_l,
        setup_time=mapping.setup_time,
        layout=layout_summary(prep.layout),
        config=cfg.to_dict(),
        mapping=mapping,
    )


# -- sweeps -------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    value: Any
    report: EstimateReport | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.report is not None


@dataclass(frozen=True)
class SweepSeries:
    parameter: str
    points: tuple[SweepPoint, ...]
    selected: Any = None

    @property
    def ok_points(self) -> list[SweepPoint]:
        return [pt for pt in self.points if pt.ok]

    @property
    def argmin(self) -> SweepPoint | None:
        """Point with the smallest finite T_avg (first on ties)."""
        best = None
        for pt in self.ok_points:
            t = pt.report.t_avg
            if math.isfinite(t) and (best is None or t < best.report.t_avg):
                best = pt
        return best

    def csv_rows(self) -> list[list[str]]:
        rows = [["param", "T_one_s", "F_alg", "T_avg_s", "qubits_total", "swap_ratio", "level_or_distance", "status"]]
        for pt in self.points:
            if pt.ok:
                r = pt.report
                rows.append(
                    [
                        str(pt.value),
                        repr(r.t_one),
                        repr(r.f_alg),
                        "inf" if math.isinf(r.t_avg) else repr(r.t_avg),
                        str(r.qubits.total),
                        repr(r.swap_ratio),
                        "" if r.level_or_distance is None else str(r.level_or_distance),
                        "ok",
                    ]
                )
            else:
                rows.append([str(pt.value), "", "", "", "", "", "", f"failed: {pt.error}"])
        return rows

    def summary(self) -> str:
        best = self.argmin
        lines = [f"sweep over {self.parameter}: {len(self.ok_points)}/{len(self.points)} points succeeded"]
        if best is None:
            lines.append("argmin T_avg: none (no finite point)")
        else:
            lines.append(f"argmin T_avg: {self.parameter} = {best.value} (T_avg {best.report.t_avg:.6g} s)")
        if self.selected is not None:
            lines.append(f"formula-selected {self.parameter}: {self.selected}")
        return "\n".join(lines) + "\n"


def point_config(cfg: RunConfig, parameter: str, value: Any) -> RunConfig:
    if parameter == "level":
        return cfg.with_(code="steane", level=int(value), sweep=None)
    if parameter == "distance":
        return cfg.with_(code="surface", distance=int(value), sweep=None)
    if parameter == "error_rate":
        return cfg.with_(device=DeviceProfile(float(value), dict(cfg.device.op_time)), sweep=None)
    if parameter == "variant":
        return cfg.with_(compile_variant=str(value), sweep=None)
    raise ValueError(f"unknown sweep parameter {parameter!r}")


def _sort_key(parameter: str, value: Any):
    return str(value) if parameter == "variant" else float(value)


def sweep(
    p: Program, cfg: RunConfig, parameter: str, values: Sequence[Any], workers: int = 1
) -> SweepSeries:
    """One full estimate per value; failures are recorded, not raised.

    Level and distance sweeps also report the formula-selected value.
    """
    if not values:
        raise ValueError("sweep needs at least one value")
    values = sorted(dict.fromkeys(values), key=lambda v: _sort_key(parameter, v))
    shared = None
    if parameter in ("level", "distance"):
        code = "steane" if parameter == "level" else "surface"
        try:
            shared = prepare(p, cfg.with_(code=code))
        except (InputError, ModelError, ValueError) as exc:
            raise InputError(str(exc)) from exc

    def run(value: Any) -> SweepPoint:
        try:
            pcfg = point_config(cfg, parameter, value)
            return SweepPoint(value, estimate(p, pcfg, shared))
        except (ModelError, ValueError) as exc:
            return SweepPoint(value, error=f"{type(exc).__name__}: {exc}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = tuple(pool.map(run, values))
    else:
        points = tuple(run(v) for v in values)

    selected = None
    if shared is not None:
        try:
            if parameter == "level":
                selected = select_level(shared, cfg.with_(code="steane"))
            else:
                selected = select_distance(shared, cfg.with_(code="surface"))
        except ModelError:
            selected = None
    return SweepSeries(parameter, points, selected)
