"""
Inline versus revert
====================

``t2`` feeds ``t4`` and is released while ``t4`` is still needed. Uncomputing
``t4`` later requires the value of ``t2`` again.

* inline keeps ``t2`` allocated and moves its uncomputation after ``t4``'s
* revert recomputes ``t2`` on another qubit, at the cost of two more Toffolis
"""

from quncomp import Session, gates, linalg, sim, uncompute


def scenario(strategy):
    s = Session()
    q0, q1, q3, out, t2, t4 = (s.qvar(n) for n in ("q0", "q1", "q3", "out", "t2", "t4"))
    gates.mcx([q0, q1], t2)
    gates.mcx([t2, q3], t4)
    uncompute(s, t2, strategy)
    v = s.qvar("v")          # reuses t2's qubit
    gates.x(v)
    gates.cx(t4, out)
    uncompute(s, t4, strategy)
    return s


maps = {}
for strategy in ("inline", "revert"):
    s = scenario(strategy)
    counts = s.circuit.gate_counts()
    toffolis = sum(n for g, n in counts.items() if g.startswith(("mcx_", "pt2cx")))
    print(f"{strategy:>6}: {toffolis} Toffoli-type gates, {s.circuit.num_qubits} qubits")
    maps[strategy] = sim.io_map(s.circuit, [0, 1, 2, 3])
    assert sim.is_disentangled(s.circuit, [0, 1, 2, 3])

# both strategies implement the same map on the surviving qubits
print("distance:", linalg.global_phase_distance(maps["inline"], maps["revert"]))
