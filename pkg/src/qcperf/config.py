"""Run configuration: defaults, TOML loading and a resolved dictionary echo.

A config file is TOML. Every key is optional::

    input = "cat.qasm"
    output_dir = "out"
    code = "steane"            # none | steane | surface
    level = 1                  # omit to select from KQ
    distance = 9               # omit to select from KQ and target_fidelity
    target_fidelity = 0.7
    compile_variant = "ancilla_21"

    [device]
    error_rate = 1e-9
    op_time = 1e-6             # one value for every op, or a table per op

    [layout]
    global = "1d"              # 1d | 2d | all_to_all | arbitrary
    local = "2d"               # 1d | 2d
    edges = "device.edges"     # edge list, arbitrary layouts only

    [decompose]
    precision = 0.01
    synthesizer = "statistical"  # statistical | exhaustive
    mean_length = 45
    spread = 5
    seed = 0
    max_length = 12
    controlled_rn_variant = "standard_35"

    [steane]                   # c_op and depths are tables keyed by op name (and QEC)
    l_max = 6

    [surface]
    c1 = 0.13
    c2 = 0.61
    eps_th = 0.009
    msd_target = 1e-12
    msd_time_ratio = 20
    d_max = 101

    [mapper]
    fillers_routable = true
    trace = false
    expand_swap = false

    [sweep]
    parameter = "level"        # level | distance | error_rate | variant
    values = [1, 2, 3, 4]
    workers = 1
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .architecture import GLOBAL_KINDS, LOCAL_KINDS
from .building_blocks import DeviceProfile, SteaneCostModel, SurfaceCostModel
from .errors import InputError
from .lowering import CONTROLLED_RN_VARIANTS, DecomposeSpec, ExhaustiveSynth, StatisticalSynth
from .qasm.analysis import DEFAULT_CAP
from .qasm.model import MNEMONICS

CODES = ("none", "steane", "surface")
SWEEP_PARAMETERS = ("level", "distance", "error_rate", "variant")


class ConfigError(InputError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    workers: int = 1

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"unknown sweep parameter {self.parameter!r}")
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        if self.workers < 1:
            raise ConfigError("sweep workers must be >= 1")
        object.__setattr__(self, "values", tuple(self.values))


@dataclass(frozen=True)
class RunConfig:
    input: str | None = None
    output_dir: str = "out"
    code: str = "steane"
    level: int | None = None
    distance: int | None = None
    target_fidelity: float = 0.7
    fidelity_floor: float = 1e-300
    saturation_threshold: float = 1e-6
    compile_variant: str | None = None
    device: DeviceProfile = field(default_factory=DeviceProfile)
    global_layout: str = "1d"
    local_layout: str = "2d"
    edges: str | None = None
    decompose: DecomposeSpec = field(default_factory=DecomposeSpec)
    steane: SteaneCostModel = field(default_factory=SteaneCostModel)
    surface: SurfaceCostModel = field(default_factory=SurfaceCostModel)
    fillers_routable: bool = True
    trace: bool = False
    expand_swap: bool = False
    flatten_cap: int = DEFAULT_CAP
    sweep: SweepSpec | None = None

    def __post_init__(self) -> None:
        if self.code not in CODES:
            raise ConfigError(f"code must be one of {CODES}")
        if self.global_layout not in GLOBAL_KINDS:
            raise ConfigError(f"layout.global must be one of {GLOBAL_KINDS}")
        if self.local_layout not in LOCAL_KINDS:
            raise ConfigError(f"layout.local must be one of {LOCAL_KINDS}")
        if self.global_layout == "arbitrary" and not self.edges:
            raise ConfigError("layout.global = 'arbitrary' needs layout.edges")
        if self.code == "surface" and self.global_layout == "arbitrary":
            raise ConfigError("surface code needs a grid or all_to_all layout")
        for name in ("target_fidelity", "saturation_threshold"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1)")
        if not 0.0 <= self.fidelity_floor < 1.0:
            raise ConfigError("fidelity_floor must lie in [0, 1)")
        if self.level is not None and self.level < 0:
            raise ConfigError("level must be >= 0")
        if self.distance is not None and (self.distance < 3 or self.distance % 2 == 0):
            raise ConfigError("distance must be odd and >= 3")
        if self.compile_variant is not None and self.compile_variant not in CONTROLLED_RN_VARIANTS:
            raise ConfigError(f"unknown compile_variant {self.compile_variant!r}")

    def with_(self, **changes: Any) -> "RunConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        """Fully resolved settings, JSON-friendly and deterministic."""
        synth = self.decompose.synthesizer
        synth_d = {"synthesizer": "exhaustive", "max_length": synth.max_length} if isinstance(
            synth, ExhaustiveSynth
        ) else {
            "synthesizer": "statistical",
            "mean_length": synth.mean_length,
            "spread": synth.spread,
            "seed": synth.seed,
        }
        return {
            "input": self.input,
            "output_dir": self.output_dir,
            "code": self.code,
            "level": self.level,
            "distance": self.distance,
            "target_fidelity": self.target_fidelity,
            "fidelity_floor": self.fidelity_floor,
            "saturation_threshold": self.saturation_threshold,
            "compile_variant": self.compile_variant,
            "device": {
                "error_rate": self.device.error_rate,
                "op_time": {k.value: v for k, v in self.device.op_time.items()},
            },
            "layout": {"global": self.global_layout, "local": self.local_layout, "edges": self.edges},
            "decompose": {
                "precision": self.decompose.precision,
                "controlled_rn_variant": self.decompose.controlled_rn_variant,
                **synth_d,
            },
            "steane": {
                "c_op": dict(self.steane.c_op),
                "depths": dict(self.steane.depths),
                "qubits_inner": self.steane.qubits_inner,
                "qubits_top": self.steane.qubits_top,
                "l_max": self.steane.l_max,
            },
            "surface": {f.name: getattr(self.surface, f.name) for f in fields(self.surface)},
            "mapper": {
                "fillers_routable": self.fillers_routable,
                "trace": self.trace,
                "expand_swap": self.expand_swap,
                "flatten_cap": self.flatten_cap,
            },
            "sweep": None
            if self.sweep is None
            else {"parameter": self.sweep.parameter, "values": list(self.sweep.values), "workers": self.sweep.workers},
        }


def _take(table: Mapping, key: str, kind: type | tuple, where: str, default: Any = None) -> Any:
    if key not in table:
        return default
    v = table[key]
    if kind is float and isinstance(v, int) and not isinstance(v, bool):
        v = float(v)
    if not isinstance(v, kind) or (isinstance(v, bool) and kind is not bool):
        raise ConfigError(f"{where}{key}: expected {getattr(kind, '__name__', kind)}, got {v!r}")
    if isinstance(v, float) and not math.isfinite(v):
        raise ConfigError(f"{where}{key}: must be finite")
    return v


def _check_keys(table: Mapping, allowed: set, where: str) -> None:
    extra = sorted(set(table) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where or 'top level'}: {', '.join(extra)}")


def _op_table(table: Any, where: str, allow_qec: bool) -> dict:
    if not isinstance(table, Mapping):
        raise ConfigError(f"{where}: expected a table")
    out = {}
    for k, v in table.items():
        if k not in MNEMONICS and not (allow_qec and k == "QEC"):
            raise ConfigError(f"{where}.{k}: unknown operation")
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{where}.{k}: expected a number")
        out[k] = v
    return out


def config_from_dict(data: Mapping, base_dir: Path | None = None) -> RunConfig:
    """Builds a :class:`RunConfig`; relative paths resolve against ``base_dir``."""
    top = {
        "input", "output_dir", "code", "level", "distance", "target_fidelity", "fidelity_floor",
        "saturation_threshold", "compile_variant", "device", "layout", "decompose", "steane",
        "surface", "mapper", "sweep",
    }
    _check_keys(data, top, "")
    kw: dict[str, Any] = {}

    def path(v: str | None) -> str | None:
        if v is None or base_dir is None or Path(v).is_absolute():
            return v
        return str(base_dir / v)

    kw["input"] = path(_take(data, "input", str, ""))
    if "output_dir" in data:
        kw["output_dir"] = path(_take(data, "output_dir", str, ""))
    for key in ("code", "compile_variant"):
        if key in data:
            kw[key] = _take(data, key, str, "")
    for key in ("level", "distance"):
        if key in data:
            kw[key] = _take(data, key, int, "")
    for key in ("target_fidelity", "fidelity_floor", "saturation_threshold"):
        if key in data:
            kw[key] = _take(data, key, float, "")

    try:
        dev = data.get("device", {})
        _check_keys(dev, {"error_rate", "op_time"}, "device")
        dkw: dict[str, Any] = {}
        if "error_rate" in dev:
            dkw["error_rate"] = _take(dev, "error_rate", float, "device.")
        if "op_time" in dev:
            ot = dev["op_time"]
            if isinstance(ot, (int, float)) and not isinstance(ot, bool):
                dkw["op_time"] = {k: float(ot) for k in MNEMONICS.values()}
            else:
                dkw["op_time"] = {MNEMONICS[k]: float(v) for k, v in _op_table(ot, "device.op_time", False).items()}
        kw["device"] = DeviceProfile(**dkw)

        lay = data.get("layout", {})
        _check_keys(lay, {"global", "local", "edges"}, "layout")
        if "global" in lay:
            kw["global_layout"] = _take(lay, "global", str, "layout.")
        if "local" in lay:
            kw["local_layout"] = _take(lay, "local", str, "layout.")
        kw["edges"] = path(_take(lay, "edges", str, "layout."))

        dec = data.get("decompose", {})
        _check_keys(
            dec,
            {"precision", "synthesizer", "mean_length", "spread", "seed", "max_length", "controlled_rn_variant"},
            "decompose",
        )
        mode = _take(dec, "synthesizer", str, "decompose.", "statistical")
        if mode == "statistical":
            synth = StatisticalSynth(
                mean_length=_take(dec, "mean_length", int, "decompose.", 45),
                spread=_take(dec, "spread", int, "decompose.", 5),
                seed=_take(dec, "seed", int, "decompose.", 0),
            )
        elif mode == "exhaustive":
            synth = ExhaustiveSynth(max_length=_take(dec, "max_length", int, "decompose.", 12))
        else:
            raise ConfigError(f"decompose.synthesizer: unknown mode {mode!r}")
        kw["decompose"] = DecomposeSpec(
            precision=_take(dec, "precision", float, "decompose.", 1e-2),
            synthesizer=synth,
            controlled_rn_variant=_take(dec, "controlled_rn_variant", str, "decompose.", "standard_35"),
        )

        st = data.get("steane", {})
        _check_keys(st, {"c_op", "depths", "qubits_inner", "qubits_top", "l_max"}, "steane")
        skw: dict[str, Any] = {}
        if "c_op" in st:
            skw["c_op"] = {k: float(v) for k, v in _op_table(st["c_op"], "steane.c_op", True).items()}
        if "depths" in st:
            depths = _op_table(st["depths"], "steane.depths", True)
            if any(not float(v).is_integer() for v in depths.values()):
                raise ConfigError("steane.depths: values must be integers")
            skw["depths"] = {k: int(v) for k, v in depths.items()}
        for key in ("qubits_inner", "qubits_top", "l_max"):
            if key in st:
                skw[key] = _take(st, key, int, "steane.")
        kw["steane"] = SteaneCostModel(**skw)

        su = data.get("surface", {})
        sf = {f.name: f.type for f in fields(SurfaceCostModel)}
        _check_keys(su, set(sf), "surface")
        sukw = {}
        for key in su:
            kind = int if key in ("d_max", "r_max", "distill_ancilla_multiplier") else float
            sukw[key] = _take(su, key, kind, "surface.")
        kw["surface"] = SurfaceCostModel(**sukw)

        mp = data.get("mapper", {})
        _check_keys(mp, {"fillers_routable", "trace", "expand_swap", "flatten_cap"}, "mapper")
        for key in ("fillers_routable", "trace", "expand_swap"):
            if key in mp:
                kw[key] = _take(mp, key, bool, "mapper.")
        if "flatten_cap" in mp:
            kw["flatten_cap"] = _take(mp, "flatten_cap", int, "mapper.")

        if "sweep" in data:
            sw = data["sweep"]
            _check_keys(sw, {"parameter", "values", "workers"}, "sweep")
            values = sw.get("values")
            if not isinstance(values, list):
                raise ConfigError("sweep.values: expected a list")
            kw["sweep"] = SweepSpec(
                parameter=_take(sw, "parameter", str, "sweep.", ""),
                values=tuple(values),
                workers=_take(sw, "workers", int, "sweep.", 1),
            )
        return RunConfig(**kw)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data, base_dir=path.parent)
