"""Acceptance criteria, one test each.

Every test records a ``criterion N: PASS|FAIL`` line that is printed in the
terminal summary (and immediately with ``-s``).
"""

import contextlib
import json
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from quncomp import Session, analysis, gates, ir, linalg, sim, uncompute
from quncomp.dag import build_dag, linearize
from quncomp.errors import PreconditionViolation, UncomputeError
from quncomp.ir import Apply, Circuit, GateDef

from scenarios import block_diagonal_unitary, two_ands, mcx_family, random_library_circuit, triple_and


@contextlib.contextmanager
def criterion(number, title, budget=None):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        if budget is not None:
            assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"
    except BaseException as exc:
        line = f"criterion {number:2d}: FAIL  {title} ({type(exc).__name__}: {exc})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    line = f"criterion {number:2d}: PASS  {title} [{time.perf_counter() - start:.3f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_01_triple_and_golden():
    with criterion(1, "triple_AND compiles to pt2cx / mcx / pt2cx_dg with local freed", budget=1.0):
        s, report = triple_and("inline")
        c = s.circuit
        assert c.num_qubits == 5
        names = [g.gate.name for g in c.gates()]
        assert names == ["pt2cx", "mcx_2", "pt2cx_dg"]
        pt, mid, ptdg = c.gates()
        assert pt.operands == ptdg.operands == (0, 1, 3) and mid.operands == (3, 2, 4)
        assert report.freed == [3] and 3 in s.free_pool
        before_dealloc = Circuit(0, [i for i in c if not (isinstance(i, ir.Dealloc) and i.qubit == 3)])
        for bits in sim.basis_inputs([0, 1, 2]):
            want = bits[0] & bits[1] & bits[2]
            st_ = sim.run(before_dealloc, bits)
            assert sim.prob_one(st_, 3) < 1e-9
            assert abs(sim.prob_one(st_, 4) - want) < 1e-9
            final = sim.run(c, bits)
            assert abs(sim.prob_one(final, 4) - want) < 1e-9


def test_criterion_02_two_ands_gate_counts():
    with criterion(2, "Inline uses 4 multi-controlled X, Revert 6, same action on live qubits", budget=1.0):
        inline, revert = two_ands("inline"), two_ands("revert")
        assert mcx_family(inline.circuit) == 4
        assert mcx_family(revert.circuit) == 6
        inputs = [0, 1, 2, 3]
        a = sim.io_map(inline.circuit, inputs)
        b = sim.io_map(revert.circuit, inputs)
        assert linalg.global_phase_distance(a, b) < 1e-9


def test_criterion_03_margolus():
    with criterion(3, "unwrapped Margolus -> NonQfree(ry); wrapped succeeds; Toffoli support", budget=1.0):
        from quncomp.errors import NonQfree

        s = Session()
        wires = [s.qvar("a"), s.qvar("b"), s.qvar("t")]
        for ins in ir.margolus_circuit():
            s.apply(ins.gate, *[wires[o] for o in ins.operands])
        with pytest.raises(NonQfree) as info:
            uncompute(s, wires[2])
        assert info.value.gate_name.startswith("ry(")

        s = Session()
        wires = [s.qvar("a"), s.qvar("b"), s.qvar("t")]
        s.apply(GateDef("margolus", 3, ir.WRAPPED, definition=ir.margolus_circuit()), *wires)
        uncompute(s, wires[2])
        assert not wires[2].allocated

        u = analysis.synthesize_unitary(GateDef("margolus_chk", 3, ir.COMPOSITE, definition=ir.margolus_circuit()))
        t = ir.mcx(2).builtin_unitary()
        support = np.abs(u) > 1e-9
        assert np.array_equal(support, np.abs(t) > 1e-9)
        assert np.max(np.abs(np.abs(u[support]) - 1)) < 1e-9


def _criterion4_cases():
    rng = np.random.default_rng(4)
    cases = []
    for k in range(200):
        n = int(rng.integers(1, 4))
        if k % 2 == 0:
            u = block_diagonal_unitary(rng, n, int(rng.integers(0, n)))
        else:
            u = linalg.random_unitary(1 << n, rng)
        cases.append(u)
    return cases


def test_criterion_04_permeability_oracle():
    with criterion(4, "is_permeable agrees with the Z commutator on 200 random unitaries", budget=5.0):
        mismatches = 0
        for k, u in enumerate(_criterion4_cases()):
            g = ir.builtin(f"rand{k}", u)
            for q in range(g.arity):
                direct = linalg.max_abs_diff(
                    linalg.embed(np.diag([1, -1]), [q], g.arity) @ u,
                    u @ linalg.embed(np.diag([1, -1]), [q], g.arity),
                ) < 1e-9
                mismatches += analysis.is_permeable(g, q) != direct
        assert mismatches == 0


def _tail_permeable(rng, n, p):
    u = np.zeros((1 << n, 1 << n), dtype=complex)
    for j in range(1 << p):
        proj = np.zeros((1 << p, 1 << p))
        proj[j, j] = 1
        u += np.kron(linalg.random_unitary(1 << (n - p), rng), proj)
    return u


def _head_permeable(rng, m, p):
    v = np.zeros((1 << m, 1 << m), dtype=complex)
    for j in range(1 << p):
        proj = np.zeros((1 << p, 1 << p))
        proj[j, j] = 1
        v += np.kron(proj, linalg.random_unitary(1 << (m - p), rng))
    return v


def test_criterion_05_permeable_overlap_commutes():
    with criterion(5, "100 valid (U, V, p) commute; 20 invalid rejected at the precondition", budget=5.0):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            p = int(rng.integers(0, min(n, m) + 1))
            assert analysis.check_theorem1(_tail_permeable(rng, n, p), _head_permeable(rng, m, p), p)
        rejected = 0
        for _ in range(20):
            n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            p = int(rng.integers(1, min(n, m) + 1))
            u, v = linalg.random_unitary(1 << n, rng), linalg.random_unitary(1 << m, rng)
            try:
                analysis.check_theorem1(u, v, p)
            except PreconditionViolation:
                rejected += 1
        assert rejected == 20


def test_criterion_06_block_decomposition_round_trip():
    with criterion(6, "block_decompose + reassemble reproduces every permeable case"):
        checked = 0
        for u in _criterion4_cases():
            n = linalg.num_qubits(u)
            perm = [q for q in range(n) if analysis.permeable_matrix(u, q)]
            if not perm:
                continue
            order = perm + [q for q in range(n) if q not in perm]
            t = u.reshape([2] * (2 * n)).transpose(order + [n + q for q in order]).reshape(u.shape)
            dec = analysis.block_decompose(t, len(perm))
            back = dec.reassemble().reshape([2] * (2 * n))
            inv = list(np.argsort(order))
            back = back.transpose(inv + [n + q for q in inv]).reshape(u.shape)
            assert linalg.max_abs_diff(back, u) < 1e-9
            checked += 1
        assert checked >= 100


def test_criterion_07_dag_round_trip():
    with criterion(7, "100 random circuits keep their unitary through two linearizations", budget=30.0):
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(1, 7))
            c = random_library_circuit(rng, n, int(rng.integers(0, 21)))
            dag = build_dag(c)
            prio = {nid: rng.random() for nid in dag.nodes}
            u = sim.unitary_of(c)
            assert linalg.global_phase_distance(u, sim.unitary_of(linearize(dag))) < 1e-9
            alt = linearize(dag, key=lambda node: prio[node.id])
            assert linalg.global_phase_distance(u, sim.unitary_of(alt)) < 1e-9


def test_criterion_08_qubit_reuse():
    with criterion(8, "uncompute, delete, alloc d, cx(result, d) uses 5 physical qubits"):
        s, report = triple_and(reuse=True)
        assert s.circuit.num_physical_qubits == 5
        assert s.variables["d"].qubits == report.freed == [3]
        last = s.circuit[-1]
        assert last.gate.name == "cx" and last.operands == (4, 3)


def test_criterion_09_grover():
    with criterion(9, "Grover n=3, k=2 hits sin^2(5 asin(1/sqrt 8)); no-uncompute variant is lower", budget=2.0):
        exact = math.sin(5 * math.asin(1 / math.sqrt(8))) ** 2
        good = sim.grover_success_probability(3, [5], 2)
        bad = sim.grover_success_probability(3, [5], 2, uncompute=False)
        assert abs(good - exact) < 1e-6
        assert bad < good


def _failing_cases():
    def non_qfree():
        s = Session()
        t = s.qvar("t")
        gates.h(t)
        return s, t, "inline"

    def margolus():
        s = Session()
        wires = [s.qvar("a"), s.qvar("b"), s.qvar("t")]
        for ins in ir.margolus_circuit():
            s.apply(ins.gate, *[wires[o] for o in ins.operands])
        return s, wires[2], "inline"

    def entangled():
        s = Session()
        t, o = s.qvar("t"), s.qvar("o")
        s.apply(GateDef("xx", 2, ir.WRAPPED,
                        definition=Circuit.block(2, [Apply(ir.x(), (0,)), Apply(ir.x(), (1,))])), t, o)
        return s, t, "inline"

    def overwritten(strategy):
        def build():
            s = Session()
            a, t, r = s.qvar("a"), s.qvar("t"), s.qvar("r")
            gates.cx(a, t)
            gates.x(a)
            gates.mcx([a, t], r)
            return s, t, strategy
        return build

    def unchecked_replay():
        s = Session()
        q0, q1, q3, t2, t4 = (s.qvar(n) for n in ("q0", "q1", "q3", "t2", "t4"))
        gates.mcx([q0, q1], t2)
        gates.mcx([t2, q3], t4)
        t2.delete(unchecked=True)
        return s, t4, "revert"

    def too_wide():
        s = Session()
        t = s.qvar("t", 11)
        s.apply(GateDef("wide", 11, ir.WRAPPED,
                        definition=Circuit.block(11, [Apply(ir.x(), (q,)) for q in range(11)])), t)
        return s, t, "inline"

    return [non_qfree, margolus, entangled, overwritten("inline"), overwritten("revert"),
            unchecked_replay, too_wide]


def test_criterion_10_transactional_failures():
    with criterion(10, "every failing uncompute leaves the serialized circuit byte-identical"):
        for build in _failing_cases():
            s, var, strategy = build()
            before = json.dumps(s.snapshot())
            with pytest.raises(UncomputeError):
                uncompute(s, var, strategy)
            assert json.dumps(s.snapshot()) == before
            assert var.allocated
