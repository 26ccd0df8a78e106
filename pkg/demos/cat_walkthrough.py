"""
CAT state on a two-region layout
================================

Parse the bundled five-qubit CAT program, lay it out, and follow one run
through forward passing, the MakeCAT body and backward passing.
"""

from importlib.resources import files

from qcperf.architecture import build_layout
from qcperf.building_blocks import LogicalOpPerf
from qcperf.mapper import map_program, pass_qubits
from qcperf.qasm import gate_census, parse_program

text = files("qcperf").joinpath("data/cat.qasm").read_text()
prog = parse_program(text)
print(text)

# one region per module, joined by a bus as wide as the widest parameter list
layout = build_layout(prog, "1d", "1d")
print(layout.render())
print()

# every op (and every passing step) costs one time unit
unit = LogicalOpPerf.uniform(time=1.0)
main, cat = layout.regions["main"], layout.regions["MakeCAT"]
src = [main.home[q] for q in prog.main.locals]
dst = [cat.home[q] for q in prog["MakeCAT"].params]
fwd = pass_qubits(layout, unit, main, cat, src, dst)
bwd = pass_qubits(layout, unit, cat, main, dst, src)
print("forward passing distances:", fwd.distances, "-> D_f =", fwd.steps)
print("backward passing distances:", bwd.distances, "-> D_b =", bwd.steps)

res = map_program(prog, layout, unit, trace=True)
print("gate census:", {k.value: v for k, v in gate_census(prog).nonzero().items()})
print("T_one =", res.t_one, " (PrepZ + D_f + H + 4 CNOT + D_b + MeasZ =", 1 + fwd.steps + 1 + 4 + bwd.steps + 1, ")")
print("K =", res.k, " Q =", res.q, " SWAPs =", res.swap_count)
print()
print(res.trace_text())
