"""
Code distance trade-off
=======================

Forty calls to a small T/CNOT block on the surface code at p = 1e-3.
The distance picked from KQ is compared with its neighbours; the
smallest distance cannot keep KQ * eps_L below one and is reported
as a failed point.
"""

from qcperf.building_blocks import DeviceProfile
from qcperf.config import RunConfig
from qcperf.estimator import estimate, sweep
from qcperf.qasm import parse_program

block = "\n".join([" T a\n CNOT a,b\n H b\n S a"] * 5)
qubits = "".join(f" qubit q{i}\n" for i in range(6))
calls = "".join(f" call Blk(q{i % 6},q{(i + 1) % 6})\n" for i in range(40))
prog = parse_program(f"module Blk(a,b) {{\n{block}\n}}\nmodule main() {{\n{qubits}{calls}}}\n")

cfg = RunConfig(code="surface", device=DeviceProfile(1e-3))
base = estimate(prog, cfg)
print(base.summary())

f = base.distance
series = sweep(prog, cfg, "distance", [f - 2, f, f + 2, f + 4])
for row in series.csv_rows():
    print(",".join(row))
print()
print(series.summary())
