import json
import math
import random

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from progs import cat_program, flat_program, random_program
from qcperf.architecture import surface_footprint, surface_grid_qubits
from qcperf.building_blocks import DeviceProfile, LogicalOpPerf, SteaneCostModel, SurfaceCostModel
from qcperf.config import RunConfig
from qcperf.errors import InputError, ModelError
from qcperf.estimator import (
    FidelityFloorError,
    algorithm_fidelity,
    average_time,
    computation_qubits,
    estimate,
    log_algorithm_fidelity,
    prepare,
    probe_kq,
    steane_qubits,
    surface_fidelity,
    surface_module_qubits,
    sweep,
    swap_ratio,
)
from qcperf.qasm import GateKind as G, parse_program


class TestMetrics:
    @settings(max_examples=100)
    @given(
        st.dictionaries(st.sampled_from([G.H, G.T, G.CNOT, G.SWAP]), st.integers(0, 10**7)),
        st.floats(1e-12, 0.5),
    )
    def test_fidelity_matches_mpmath(self, tallies, err):
        perf = LogicalOpPerf.uniform(error=err)
        mpmath.mp.dps = 50
        exact = mpmath.mpf(1)
        for n in tallies.values():
            exact *= (1 - mpmath.mpf(err)) ** n
        got = algorithm_fidelity(tallies, perf, floor=0.0)
        if exact < mpmath.mpf("1e-300"):
            assert got < 1e-290
        else:
            assert got == pytest.approx(float(exact), rel=1e-9)
        assert log_algorithm_fidelity(tallies, perf) == pytest.approx(float(mpmath.log(exact)), rel=1e-9, abs=1e-12)

    def test_floor(self):
        perf = LogicalOpPerf.uniform(error=0.5)
        assert algorithm_fidelity({G.H: 2000}, perf) == 0.0
        assert algorithm_fidelity({G.H: 20}, perf) == pytest.approx(0.5**20)

    def test_certain_failure(self):
        perf = LogicalOpPerf.uniform(error=1.0)
        assert log_algorithm_fidelity({G.H: 1}, perf) == -math.inf
        assert algorithm_fidelity({G.H: 1}, perf) == 0.0

    def test_average_time(self):
        assert average_time(10.0, 0.5) == 20.0
        assert average_time(10.0, 0.0) == math.inf

    def test_surface_fidelity(self):
        assert surface_fidelity(100, 1e-3) == pytest.approx(0.9)
        with pytest.raises(FidelityFloorError):
            surface_fidelity(1000, 1e-3)

    def test_swap_ratio(self):
        assert swap_ratio({G.SWAP: 1, G.H: 3}) == 0.25
        assert swap_ratio({G.H: 3}) == 0.0
        with pytest.raises(ValueError):
            swap_ratio({})


class TestQubitCounts:
    @settings(max_examples=100)
    @given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 8))
    def test_steane_big_int(self, q_comp, q_comm, level):
        want = q_comp + q_comm if level == 0 else 25 ** (level - 1) * 30 * q_comp + 25**level * q_comm
        assert steane_qubits(q_comp, q_comm, level) == want

    def test_cat_steane(self):
        p = cat_program()
        cfg = RunConfig(level=1, global_layout="1d", local_layout="1d")
        r = estimate(p, cfg)
        assert r.qubits.q_comp == computation_qubits(p) == 10
        assert r.qubits.q_comm == 5 * 2
        assert r.qubits.total == 30 * 10 + 25 * 10

    def test_surface_module_qubits(self):
        assert surface_module_qubits(cat_program()) == {"main": 5, "MakeCAT": 7}

    def test_cat_surface_oracle(self):
        p = cat_program()
        cfg = RunConfig(code="surface", distance=3, device=DeviceProfile(1e-3), local_layout="1d")
        r = estimate(p, cfg)
        q = r.qubits
        fp = surface_footprint(3)
        assert q.grid == surface_grid_qubits(1, 5 + 7, 3)
        cols = 2 * (12 * fp.a + 11 * fp.spacing) + 1
        assert q.bus == 2 * (1 + 3) * cols
        # no T or S in the CAT program: factories sized for zero parallelism
        assert (q.factory_a, q.factory_y, q.factory_extra) == (0, 0, 0)
        assert q.total == q.grid + q.bus

    def test_surface_factories_follow_parallel_t(self):
        p = flat_program(3, [(G.T, 0), (G.T, 1), (G.T, 2)])
        cfg = RunConfig(code="surface", distance=5, device=DeviceProfile(1e-3), global_layout="all_to_all")
        r = estimate(p, cfg)
        q_l = surface_footprint(5).q_l
        assert r.max_parallel_t == 3
        # eps_p = 1e-3: two |A> rounds and two |Y> rounds reach 1e-12
        assert r.qubits.factory_a == 60 * (15 * q_l) * (16 * q_l)
        assert r.qubits.factory_y == 3 * (7 * q_l) * (8 * q_l)
        assert r.qubits.factory_extra == (60 + 3) * 3 * q_l


class TestEstimate:
    def test_physical(self):
        r = estimate(cat_program(), RunConfig(code="none", device=DeviceProfile(1e-3)))
        assert r.level == 0
        assert r.f_alg == pytest.approx((1 - 1e-3) ** sum(r.tallies.values()))

    def test_level_selection(self):
        r = estimate(cat_program(), RunConfig())
        assert r.selected_by == "formula"
        assert r.level == 1
        assert r.f_alg > 0.999

    def test_distance_selection(self):
        cfg = RunConfig(code="surface", device=DeviceProfile(1e-3))
        r = estimate(cat_program(), cfg)
        assert r.distance >= 3 and r.distance % 2 == 1
        assert r.f_alg >= cfg.target_fidelity
        assert r.setup_time > 0

    def test_saturation(self):
        flat_cost = SteaneCostModel({k: 2 for k in SteaneCostModel().c_op})
        cfg = RunConfig(level=1, device=DeviceProfile(0.6), steane=flat_cost, global_layout="all_to_all")
        gates = [(G.H, i % 5) for i in range(60)]
        r = estimate(flat_program(5, gates), cfg)
        assert r.saturated
        assert "saturated" in r.summary()

    def test_report_is_json(self):
        gates = [(G.H, 0)] * 1200
        r = estimate(flat_program(1, gates), RunConfig(code="none", device=DeviceProfile(0.5)))
        text = json.dumps(r.to_dict(), sort_keys=True, allow_nan=False)
        data = json.loads(text)
        assert data["F_alg"] == 0.0 and data["T_avg_s"] == "inf"
        assert data["log_F_alg"] == pytest.approx(1200 * math.log(0.5))

    def test_compile_variant(self):
        text = (
            "module CRn(c,t) {\n CNOT c,t\n}\n"
            "module main() {\n qubit a\n qubit b\n call CRn(a,b)\n call CRn(b,a)\n}\n"
        )
        p = parse_program(text)
        base = RunConfig(level=1, global_layout="all_to_all")
        std = estimate(p, base.with_(compile_variant="standard_35"))
        anc = estimate(p, base.with_(compile_variant="ancilla_21"))
        assert std.t_one > anc.t_one
        assert anc.k == std.k + 1

    def test_probe_kq_is_positive(self):
        p = cat_program()
        cfg = RunConfig()
        assert probe_kq(prepare(p, cfg), cfg) > 1

    def test_arbitrary_flattens(self, tmp_path):
        edges = tmp_path / "g.edges"
        edges.write_text("\n".join(f"{i} {i + 1}" for i in range(9)) + "\n")
        cfg = RunConfig(level=1, global_layout="arbitrary", edges=str(edges))
        r = estimate(cat_program(), cfg)
        assert r.layout["global"] == "arbitrary"
        assert r.tallies.get(G.SWAP, 0) == 0

    def test_threshold_is_model_error(self):
        with pytest.raises(ModelError):
            estimate(cat_program(), RunConfig(device=DeviceProfile(0.5)))

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**31), st.sampled_from(["none", "steane", "surface"]))
    def test_random_programs_run(self, seed, code):
        p = random_program(random.Random(seed), with_rz=True)
        cfg = RunConfig(code=code, device=DeviceProfile(1e-5), level=1 if code == "steane" else None)
        r = estimate(p, cfg)
        assert r.t_one >= 0 and 0 <= r.f_alg <= 1
        assert 0 <= r.swap_ratio < 1


class TestSweep:
    def test_level_sweep(self):
        series = sweep(cat_program(), RunConfig(), "level", [3, 1, 2, 2])
        assert [pt.value for pt in series.points] == [1, 2, 3]
        ts = [pt.report.t_one for pt in series.points]
        assert ts == sorted(ts)
        assert series.selected == 1
        assert series.argmin.value == 1

    def test_failures_recorded(self):
        series = sweep(cat_program(), RunConfig(), "level", [1, 9])
        assert series.points[1].error.startswith("LevelCapError")
        rows = series.csv_rows()
        assert rows[0] == ["param", "T_one_s", "F_alg", "T_avg_s", "qubits_total", "swap_ratio", "level_or_distance", "status"]
        assert rows[1][-1] == "ok" and rows[2][-1].startswith("failed")

    def test_workers_agree(self):
        cfg = RunConfig(code="surface", device=DeviceProfile(1e-4))
        a = sweep(cat_program(), cfg, "distance", [3, 5, 7, 9])
        b = sweep(cat_program(), cfg, "distance", [3, 5, 7, 9], workers=4)
        assert a.csv_rows() == b.csv_rows()

    def test_error_rate_sweep(self):
        series = sweep(cat_program(), RunConfig(level=1), "error_rate", [1e-9, 1e-6, 1e-3])
        fs = [pt.report.f_alg for pt in series.points]
        assert fs == sorted(fs, reverse=True)

    def test_empty(self):
        with pytest.raises(ValueError):
            sweep(cat_program(), RunConfig(), "level", [])

    def test_unknown_parameter(self):
        series = sweep(cat_program(), RunConfig(), "colour", [1])
        assert not series.points[0].ok
