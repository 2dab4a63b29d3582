import math

import numpy as np
import pytest

from quncomp import ir, linalg, sim
from quncomp.errors import CircuitError, QuncompError, UnknownGate
from quncomp.ir import Alloc, Apply, Circuit, Dealloc, GateDef

from scenarios import margolus_printed


def test_builtin_matrices():
    assert np.array_equal(ir.x().builtin_unitary(), [[0, 1], [1, 0]])
    t = ir.mcx(2).builtin_unitary()
    assert t[7, 6] == 1 and t[6, 7] == 1 and t[5, 5] == 1
    assert ir.mcz(2).builtin_unitary()[7, 7] == -1
    assert ir.cx() is ir.mcx(1) and ir.cx().name == "cx"


def test_ry_matrix_and_naming():
    m = ir.ry_matrix(math.pi / 2)
    assert linalg.max_abs_diff(m, np.array([[1, -1], [1, 1]]) / math.sqrt(2)) < 1e-15
    assert ir.ry(math.pi / 4) is ir.ry(math.pi / 4)
    assert ir.ry(math.pi / 4).name.startswith("ry(0.785398")


def test_gatedef_validation():
    with pytest.raises(QuncompError):
        GateDef("bad", 2, ir.COMPOSITE, definition=Circuit.block(3))
    with pytest.raises(QuncompError):
        ir.builtin("bad", np.eye(3))


def test_circuit_rejects_invalid_instructions():
    c = Circuit()
    c.append(Alloc(0))
    with pytest.raises(CircuitError):
        c.append(Alloc(0))
    with pytest.raises(CircuitError) as info:
        c.append(Apply(ir.cx(), (0, 1)))
    assert info.value.index == 1
    with pytest.raises(CircuitError):
        Circuit.block(2, [Apply(ir.cx(), (0, 0))])
    with pytest.raises(CircuitError):
        c.append(Dealloc(3))
    with pytest.raises(CircuitError):
        Circuit.block(1, [Alloc(0)])


def test_arity_mismatch_is_reported():
    with pytest.raises(CircuitError, match="expects 2"):
        Circuit.block(3, [Apply(ir.cx(), (0, 1, 2))])


def test_insert_revalidates():
    c = Circuit(0, [Alloc(0), Apply(ir.x(), (0,))])
    with pytest.raises(CircuitError):
        c.insert(0, Apply(ir.h(), (0,)))
    assert len(c) == 2
    c.insert(1, Apply(ir.h(), (0,)))
    assert [i.gate.name for i in c.gates()] == ["h", "x"]


def test_reuse_counts_one_physical_qubit():
    c = Circuit(0, [Alloc(0), Dealloc(0), Alloc(0)])
    assert c.num_physical_qubits == 1
    assert c.live_qubits == {0}


def test_gate_counts_sorted():
    c = Circuit.block(2, [Apply(ir.x(), (0,)), Apply(ir.cx(), (0, 1)), Apply(ir.x(), (1,))])
    assert list(c.gate_counts().items()) == [("cx", 1), ("x", 2)]


def test_inverse_rules():
    assert ir.inverse(ir.mcx(2)) is ir.mcx(2)
    assert ir.inverse(ir.ry(0.3)) is ir.ry(-0.3)
    pt = ir.pt2cx()
    inv = ir.inverse(pt)
    assert inv.name == "pt2cx_dg" and ir.inverse(inv) is pt
    u = sim.unitary_of(pt.definition)
    ui = sim.unitary_of(inv.definition)
    assert linalg.max_abs_diff(ui @ u, np.eye(8)) < 1e-12


def test_inverse_keeps_wrapped_kind():
    w = GateDef("w", 1, ir.WRAPPED, definition=Circuit.block(1, [Apply(ir.h(), (0,))]))
    assert ir.inverse(w).kind == ir.WRAPPED and ir.inverse(w).opaque


def test_lookup_gate():
    assert ir.lookup_gate("mcx_3") is ir.mcx(3)
    assert ir.lookup_gate("cz") is ir.mcz(1)
    assert ir.lookup_gate("pt2cx_dg") is ir.inverse(ir.pt2cx())
    assert ir.lookup_gate("ry(0.5)") is ir.ry(0.5)
    with pytest.raises(UnknownGate):
        ir.lookup_gate("toffoli")


def test_margolus_is_toffoli_up_to_relative_phase():
    u = sim.unitary_of(ir.margolus_circuit())
    t = ir.mcx(2).builtin_unitary()
    support = np.abs(u) > 1e-9
    assert np.array_equal(support, np.abs(t) > 1e-9)
    assert np.allclose(np.abs(u[support]), 1, atol=1e-9)
    # the only deviation is a sign on |101>
    assert abs(u[5, 5] + 1) < 1e-12


def test_margolus_in_printed_sign_order_flips_on_the_wrong_control_pattern():
    u = sim.unitary_of(margolus_printed())
    support = np.abs(u) > 1e-9
    t = ir.mcx(2).builtin_unitary()
    assert not np.array_equal(support, np.abs(t) > 1e-9)
    # it flips the target for controls 10 instead of 11
    assert support[5, 4] and support[4, 5] and support[7, 7]


def test_json_round_trip():
    c = Circuit(0, [Alloc(0), Alloc(1), Apply(ir.cx(), (0, 1))])
    w = GateDef("w", 2, ir.WRAPPED, definition=Circuit.block(2, [Apply(ir.h(), (0,)), Apply(ir.cx(), (0, 1))]))
    c.append(Apply(w, (1, 0)))
    c.append(Dealloc(1, unchecked=True))
    d = ir.circuit_to_dict(c)
    assert d["qubits"] == 2 and d["gates"]["w"]["kind"] == "wrapped"
    back = ir.circuit_from_dict(d)
    assert ir.circuit_to_dict(back) == d
    assert back[-1].unchecked
