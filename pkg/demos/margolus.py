"""
Judging a gate as a whole
=========================

The Margolus gate is built from RY rotations, which create superposition on
their own. Only the combined gate is a permutation up to phases, so the
target can be uncomputed once the sequence is wrapped into one gate.
"""

import numpy as np

from quncomp import NonQfree, Session, analysis, ir, sim, uncompute

u = sim.unitary_of(ir.margolus_circuit())
toffoli = ir.mcx(2).builtin_unitary()
print("same support as Toffoli:", np.array_equal(np.abs(u) > 1e-9, np.abs(toffoli) > 1e-9))
print("phases on the support:", np.round(u[np.abs(u) > 1e-9], 12))


def build(s, wrapped):
    wires = [s.qvar("a"), s.qvar("b"), s.qvar("t")]
    body = ir.margolus_circuit()
    if wrapped:
        s.apply(ir.GateDef("margolus", 3, ir.WRAPPED, definition=body), *wires)
    else:
        for ins in body:
            s.apply(ins.gate, *[wires[o] for o in ins.operands])
    return wires[2]


s = Session()
t = build(s, wrapped=False)
try:
    uncompute(s, t)
except NonQfree as exc:
    print("unwrapped:", exc)

s = Session()
t = build(s, wrapped=True)
print("wrapped:", uncompute(s, t))
print("qfree(margolus) =", analysis.is_qfree(s.gates["margolus"]))
