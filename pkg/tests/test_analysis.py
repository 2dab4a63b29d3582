import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quncomp import analysis, ir, linalg
from quncomp.analysis import Permeability
from quncomp.errors import NotPermeable, PreconditionViolation, WidthCapExceeded
from quncomp.ir import Apply, Circuit, GateDef

from scenarios import block_diagonal_unitary

seeds = st.integers(0, 2**32 - 1)


def test_qfree_examples():
    assert analysis.is_qfree(ir.cx())
    assert analysis.is_qfree(ir.mcx(5))
    assert not analysis.is_qfree(ir.h())
    assert not analysis.is_qfree(ir.ry(np.pi / 4))
    # a diagonal phase is qfree: one nonzero per column
    assert analysis.qfree_matrix(np.diag([1, 1j, -1, 1]))


def test_cx_permeability():
    v = analysis.permeability(ir.cx())
    assert v.per_qubit == (Permeability.PERMEABLE, Permeability.NOT_PERMEABLE)


def test_permeable_gate_need_not_be_controlled():
    # |0><0| (x) X + |1><1| (x) Z: neither block is the identity
    u = np.kron(np.diag([1, 0]), [[0, 1], [1, 0]]) + np.kron(np.diag([0, 1]), np.diag([1, -1]))
    assert analysis.permeable_matrix(u, 0) and analysis.commutes_with_z(u, 0)
    assert not analysis.permeable_matrix(u, 1)
    dec = analysis.block_decompose(u, 1)
    assert all(not np.allclose(b, np.eye(2)) for b in dec.blocks)


def test_permeability_of_composite_uses_combined_unitary():
    body = Circuit.block(2, [Apply(ir.h(), (1,)), Apply(ir.cz(), (0, 1)), Apply(ir.h(), (1,))])
    g = GateDef("cx_via_cz", 2, ir.COMPOSITE, definition=body)
    assert analysis.is_qfree(g)
    assert analysis.is_permeable(g, 0) and not analysis.is_permeable(g, 1)
    assert linalg.max_abs_diff(analysis.synthesize_unitary(g), ir.cx().builtin_unitary()) < 1e-12


def test_axioms_avoid_matrices_for_wide_gates():
    g = ir.mcx(12)
    assert analysis.is_qfree(g) and analysis.is_permeable(g, 0) and not analysis.is_permeable(g, 12)


def test_width_cap():
    body = Circuit.block(11, [Apply(ir.h(), (q,)) for q in range(11)])
    g = GateDef("wide", 11, ir.WRAPPED, definition=body)
    with pytest.raises(WidthCapExceeded):
        analysis.synthesize_unitary(g)
    assert set(analysis.permeability(g).per_qubit) == {Permeability.UNKNOWN}


def test_permeable_index_check():
    with pytest.raises(IndexError):
        analysis.is_permeable(ir.cx(), 2)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 3))
def test_block_test_matches_commutator_on_random_unitaries(seed, n):
    rng = np.random.default_rng(seed)
    q = int(rng.integers(0, n))
    u = block_diagonal_unitary(rng, n, q) if rng.random() < 0.5 else linalg.random_unitary(1 << n, rng)
    for i in range(n):
        assert analysis.permeable_matrix(u, i) == analysis.commutes_with_z(u, i)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(0, 3))
def test_block_decompose_round_trip(seed, n, p):
    p = min(p, n)
    rng = np.random.default_rng(seed)
    # direct sum over the first p qubits
    blocks = [linalg.random_unitary(1 << (n - p), rng) for _ in range(1 << p)]
    u = np.zeros((1 << n, 1 << n), dtype=complex)
    r = 1 << (n - p)
    for i, b in enumerate(blocks):
        u[i * r:(i + 1) * r, i * r:(i + 1) * r] = b
    dec = analysis.block_decompose(u, p)
    assert len(dec.blocks) == 1 << p
    assert linalg.max_abs_diff(dec.reassemble(), u) < 1e-12
    for q in range(p):
        assert analysis.permeable_matrix(u, q)


def test_block_decompose_rejects_non_permeable():
    with pytest.raises(NotPermeable):
        analysis.block_decompose(ir.h().builtin_unitary(), 1)
    with pytest.raises(ValueError):
        analysis.block_decompose(np.eye(2), 2)


def _perm_tail(rng, n, p):
    """Random n-qubit unitary permeable on its last p qubits."""
    dim_head = 1 << (n - p)
    u = np.zeros((1 << n, 1 << n), dtype=complex)
    for j in range(1 << p):
        b = linalg.random_unitary(dim_head, rng)
        proj = np.zeros((1 << p, 1 << p))
        proj[j, j] = 1
        u += np.kron(b, proj)
    return u


def _perm_head(rng, m, p):
    dim_tail = 1 << (m - p)
    v = np.zeros((1 << m, 1 << m), dtype=complex)
    for j in range(1 << p):
        proj = np.zeros((1 << p, 1 << p))
        proj[j, j] = 1
        v += np.kron(proj, linalg.random_unitary(dim_tail, rng))
    return v


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 3), st.integers(0, 3))
def test_permeable_overlap_commutes(seed, n, m, p):
    p = min(p, n, m)
    rng = np.random.default_rng(seed)
    assert analysis.check_theorem1(_perm_tail(rng, n, p), _perm_head(rng, m, p), p)


def test_precondition_violations_are_not_commutation_failures(rng):
    h = ir.h().builtin_unitary()
    with pytest.raises(PreconditionViolation):
        analysis.check_theorem1(h, h, 1)
    with pytest.raises(PreconditionViolation):
        analysis.check_theorem1(np.eye(2), np.eye(2), 2)


def test_caches_are_keyed_by_tolerance():
    g = GateDef("near_diag", 1, ir.COMPOSITE, definition=Circuit.block(1, [Apply(ir.ry(1e-6), (0,))]))
    assert not analysis.is_qfree(g, 1e-9)
    assert analysis.is_qfree(g, 1e-3)
