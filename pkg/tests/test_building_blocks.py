import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from qcperf.building_blocks import (
    DEFAULT_C_OP,
    LOGICAL_OPS,
    DeviceProfile,
    DistanceCapError,
    DistillationError,
    LevelCapError,
    LogicalOpPerf,
    MissingOpError,
    SteaneCostModel,
    SurfaceCostModel,
    ThresholdError,
    factory_capacity,
    factory_qubits,
    msd_rounds,
    physical_perf,
    qec_cycle_time,
    required_concatenation_level,
    steane_effective_error,
    steane_logical_perf,
    steane_physical_qubits,
    surface_code_distance,
    surface_distance_estimate,
    surface_logical_error,
    surface_logical_perf,
)
from qcperf.qasm import GateKind as G

DEV = DeviceProfile(error_rate=1e-9)


def steane_oracle(p, c, level):
    mpmath.mp.dps = 60
    p, c = mpmath.mpf(p), mpmath.mpf(c)
    return (c * p * p) ** (2**level) / c


class TestDevice:
    def test_defaults(self):
        assert all(DEV.time(k) == 1e-6 for k in G)

    def test_partial_override(self):
        d = DeviceProfile(1e-4, {G.CNOT: 5e-6})
        assert d.time(G.CNOT) == 5e-6 and d.time(G.H) == 1e-6

    @pytest.mark.parametrize("p", [0.0, 1.0, -1e-3])
    def test_bad_rate(self, p):
        with pytest.raises(ValueError):
            DeviceProfile(p)

    def test_bad_time(self):
        with pytest.raises(ValueError):
            DeviceProfile(1e-3, {G.H: 0.0})

    def test_physical_perf(self):
        perf = physical_perf(DeviceProfile(1e-3))
        assert perf.fidelity(G.Rz) == pytest.approx(1 - 1e-3)
        assert perf.level == 0

    def test_missing_op(self):
        perf = LogicalOpPerf({G.H: 1.0}, {G.H: 0.0})
        with pytest.raises(MissingOpError):
            perf.time_of(G.T)
        with pytest.raises(MissingOpError):
            perf.error_of(G.T)


class TestSteaneError:
    def test_worked_example(self):
        assert steane_effective_error(1e-9, "H", 1) == pytest.approx(1e-32, rel=1e-12)

    def test_level_zero(self):
        assert steane_effective_error(3.7e-5, "T", 0) == 3.7e-5

    @settings(max_examples=200)
    @given(
        st.floats(1e-12, 1e-3),
        st.sampled_from(sorted(DEFAULT_C_OP)),
        st.integers(1, 4),
    )
    def test_mpmath_oracle(self, p, op, level):
        c = DEFAULT_C_OP[op]
        if c * p * p >= 1:
            return
        got = steane_effective_error(p, op, level)
        want = steane_oracle(p, c, level)
        if want < mpmath.mpf("1e-300"):
            assert got < 1e-290
        else:
            assert got == pytest.approx(float(want), rel=1e-9)

    def test_strictly_decreasing(self):
        vals = [steane_effective_error(1e-3, "CNOT", l, SteaneCostModel({"CNOT": 100})) for l in range(6)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_above_threshold(self):
        with pytest.raises(ThresholdError):
            steane_effective_error(0.02, "SWAP", 1)


class TestLevel:
    def test_minimal_level(self):
        assert required_concatenation_level(1e6, 1e-9) == 1

    def test_level_one_boundary(self):
        # a level-1 answer exactly when the worst op's level-1 error is within 1/KQ
        model = SteaneCostModel()
        c = model.c(model.worst_op)
        p = 1e-5
        kq_ok = 1 / ((c * p * p) ** 2 / c)
        assert required_concatenation_level(kq_ok * 0.99, p, model) == 1
        assert required_concatenation_level(kq_ok * 1.01, p, model) == 2

    def test_monotone_in_kq(self):
        model = SteaneCostModel()
        levels = [required_concatenation_level(10**e, 1e-5, model) for e in range(0, 200, 5)]
        assert levels == sorted(levels)
        assert levels[-1] > levels[0]

    def test_cap(self):
        with pytest.raises(LevelCapError):
            required_concatenation_level(1e300, 3e-3, SteaneCostModel(l_max=2))

    def test_kq_below_one(self):
        with pytest.raises(ValueError):
            required_concatenation_level(0.5, 1e-9)


class TestSteanePerf:
    def test_level_zero_is_physical(self):
        perf = steane_logical_perf(DEV, 0)
        assert perf.time_of(G.CNOT) == 1e-6
        assert perf.fidelity(G.T) == pytest.approx(1 - 1e-9)

    def test_recursion_oracle(self):
        model = SteaneCostModel()
        depth = model.depths
        step = 1e-6
        for level in range(1, 5):
            perf = steane_logical_perf(DEV, level, model)
            for op in LOGICAL_OPS:
                assert perf.time_of(op) == pytest.approx(depth[op.value] * step, rel=1e-12)
            step = depth["CNOT"] * step

    def test_time_increases_with_level(self):
        perfs = [steane_logical_perf(DEV, l) for l in range(5)]
        for op in LOGICAL_OPS:
            ts = [pf.time_of(op) for pf in perfs]
            assert all(a < b for a, b in zip(ts, ts[1:]))

    def test_fidelity_increases_with_level(self):
        dev = DeviceProfile(1e-4)
        perfs = [steane_logical_perf(dev, l) for l in range(4)]
        for op in LOGICAL_OPS:
            fs = [pf.fidelity(op) for pf in perfs]
            assert all(a <= b for a, b in zip(fs, fs[1:]))
            assert all(0 < f <= 1 for f in fs)

    def test_level_out_of_range(self):
        with pytest.raises(LevelCapError):
            steane_logical_perf(DEV, 7)

    def test_qubits_per_logical(self):
        assert [steane_physical_qubits(l) for l in range(4)] == [1, 30, 750, 18750]

    def test_missing_op(self):
        with pytest.raises(MissingOpError):
            SteaneCostModel().c("Rz")


def eq2_oracle(eps_l, eps_p, c1=0.13, c2=0.61, th=0.009):
    mpmath.mp.dps = 40
    num = 2 * (mpmath.log(eps_l) - mpmath.log(c1))
    den = mpmath.log(c2) + mpmath.log(mpmath.mpf(eps_p) / th)
    return num / den - 1


class TestSurfaceDistance:
    def test_grid_oracle(self):
        model = SurfaceCostModel(d_max=10_001)
        for i in range(10):
            eps_l = 10.0 ** (-4 - 2.5 * i)
            ds = []
            for j in range(10):
                eps_p = 10.0 ** (-2.2 - 0.35 * j)  # decreasing
                raw = surface_distance_estimate(eps_l, eps_p, model)
                assert raw == pytest.approx(float(eq2_oracle(eps_l, eps_p)), rel=1e-9)
                d = surface_code_distance(eps_l, eps_p, model)
                assert d % 2 == 1 and d >= 3 and d >= raw and d - 2 < max(raw, 3)
                ds.append(d)
            assert ds == sorted(ds, reverse=True)

    def test_decreasing_eps_p(self):
        assert surface_code_distance(1e-15, 1e-4) < surface_code_distance(1e-15, 1e-3)

    def test_threshold(self):
        with pytest.raises(ThresholdError):
            surface_code_distance(1e-10, 0.009)

    def test_cap(self):
        with pytest.raises(DistanceCapError):
            surface_code_distance(1e-15, 0.0089)

    def test_logical_error_meets_target(self):
        for eps_l in (1e-6, 1e-10, 1e-14):
            d = surface_code_distance(eps_l, 1e-3)
            assert surface_logical_error(d, 1e-3) <= eps_l * (1 + 1e-12)


class TestSurfacePerf:
    def test_composition(self):
        dev = DeviceProfile(1e-4)
        perf = surface_logical_perf(3, dev)
        round_ = 1e-6 * (1 + 2 + 4 + 1)
        cycle = 3 * round_
        assert perf.time_of(G.X) == perf.time_of(G.Z) == 0.0
        assert perf.time_of(G.CNOT) == pytest.approx(3 * cycle)
        assert perf.time_of(G.T) == pytest.approx(4.5 * cycle)
        assert perf.setup_time == pytest.approx(20 * 4.5 * cycle)
        assert perf.move_time == pytest.approx(cycle)

    def test_cycle_linear_in_d(self):
        cycles = [qec_cycle_time(d, DEV) for d in (3, 5, 7, 9)]
        assert [c / cycles[0] for c in cycles] == pytest.approx([1, 5 / 3, 7 / 3, 3])

    @pytest.mark.parametrize("d", [1, 2, 4])
    def test_bad_distance(self, d):
        with pytest.raises(ValueError):
            surface_logical_perf(d, DEV)

    def test_fidelities_in_range(self):
        perf = surface_logical_perf(5, DeviceProfile(1e-3))
        assert all(0 < perf.fidelity(k) <= 1 for k in perf.kinds)


class TestDistillation:
    def test_two_rounds(self):
        assert msd_rounds(1e-3, 1e-12) == 2

    def test_zero_rounds(self):
        assert msd_rounds(1e-3, 1e-3) == 0

    def test_second_round_value(self):
        eps = Fraction(1, 1000)
        for _ in range(2):
            eps = 35 * eps**3
        assert float(eps) == pytest.approx(1.5006875e-21)
        assert eps <= Fraction(1, 10**12)

    def test_non_increasing_in_eps_p(self):
        rs = [msd_rounds(10.0**-e, 1e-12) for e in (2, 3, 4, 5, 6, 8, 12)]
        assert rs == sorted(rs, reverse=True)

    def test_above_threshold(self):
        with pytest.raises(DistillationError):
            msd_rounds(0.2, 1e-12)

    def test_r_max(self):
        with pytest.raises(DistillationError):
            msd_rounds(1e-2, 1e-300, r_max=2)

    def test_y_uses_its_own_coefficient(self):
        assert msd_rounds(0.3, 1e-12, "Y") >= 1
        with pytest.raises(DistillationError):
            msd_rounds(0.3, 1e-12, "A")


class TestFactory:
    def test_capacity(self):
        assert factory_capacity(1, 20) == 20
        assert factory_capacity(0, 20) == 0
        assert factory_capacity(3, 20) == 60
        assert factory_capacity(1, 2.5) == 3

    def test_big_int_oracle(self):
        for r in (1, 2, 3):
            for q_l in (21, 253):
                for t in range(5):
                    for s in range(5):
                        a, y = factory_qubits(t, s, q_l, r, 20)
                        assert a == t * 20 * pow(15 * q_l, r - 1) * 16 * q_l
                        assert y == max(t, s) * pow(7 * q_l, r - 1) * 8 * q_l

    def test_worked_example(self):
        assert factory_qubits(1, 1, 253, 2, 20) == (20 * 3795 * 4048, 1771 * 2024)

    def test_bad_input(self):
        with pytest.raises(ValueError):
            factory_qubits(1, 1, 253, 0)
        with pytest.raises(ValueError):
            factory_capacity(-1)
