"""
Concatenation level trade-off
=============================

A 50-gate toy program on a deliberately noisy device. Each extra Steane
level multiplies run time but squares the per-op error; the expected time
to a successful run, T_avg = T_one / F_alg, has an interior minimum.
"""

import random

from qcperf.building_blocks import DeviceProfile, SteaneCostModel
from qcperf.config import RunConfig
from qcperf.estimator import sweep
from qcperf.qasm import Gate, GateKind, ModuleDef, Program

rng = random.Random(9)
qubits = ("q0", "q1", "q2", "q3")
body = []
for i in range(50):
    if i % 5 == 4:
        body.append(Gate(GateKind.CNOT, (qubits[i % 4], qubits[(i + 1) % 4])))
    else:
        body.append(Gate(rng.choice([GateKind.H, GateKind.T, GateKind.S]), (qubits[i % 4],)))
prog = Program({"main": ModuleDef("main", (), qubits, tuple(body))})

# c_op = 2 for every op and p = 0.6: c p^2 = 0.72, just under the pseudo-threshold
model = SteaneCostModel({k: 2 for k in SteaneCostModel().c_op})
cfg = RunConfig(device=DeviceProfile(0.6), steane=model, global_layout="all_to_all")

series = sweep(prog, cfg, "level", [1, 2, 3, 4])
print(f"{'level':>5} {'T_one':>12} {'F_alg':>12} {'T_avg':>12}")
for pt in series.points:
    r = pt.report
    flag = "  <- saturated" if r.saturated else ""
    print(f"{pt.value:>5} {r.t_one:12.4g} {r.f_alg:12.4g} {r.t_avg:12.4g}{flag}")
print()
print(series.summary())
