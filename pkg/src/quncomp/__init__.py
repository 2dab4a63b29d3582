"""Automatic uncomputation of quantum ancillas.

The package is organised in layers:

* :mod:`quncomp.linalg`, :mod:`quncomp.ir`: matrices, gates and circuits
* :mod:`quncomp.analysis`: qfree and permeability predicates
* :mod:`quncomp.dag`: permeability-aware dependency graph
* :mod:`quncomp.session`, :mod:`quncomp.uncompute`: quantum variables, qubit
  reuse and the uncompute pass
* :mod:`quncomp.sim`: statevector simulator used as the verification oracle
"""

from . import analysis, dag, gates, ir, linalg, sim
from .analysis import (
    Permeability,
    WIDTH_CAP,
    block_decompose,
    check_theorem1,
    is_permeable,
    is_qfree,
    permeability,
    synthesize_unitary,
)
from .dag import build_dag, insert_inverse, insert_term, linearize
from .errors import (
    AnalysisUnavailable,
    EntangledTargets,
    NonQfree,
    QuncompError,
    ValueUnavailable,
)
from .ir import Alloc, Apply, Circuit, Dealloc, GateDef, inverse, lookup_gate
from .session import QuantumVariable, Qubit, Session, alloc_variable, apply_gate, delete, gate_wrap
from .sim import Histogram, Statevector, grover_demo, histogram, prob_one, run, unitary_of
from .uncompute import (
    UncomputeReport,
    auto_uncompute,
    auto_uncompute_scope,
    substitute_phase_tolerant,
    uncompute,
)

__version__ = "0.1.0"

__all__ = [
    "Alloc", "AnalysisUnavailable", "Apply", "Circuit", "Dealloc", "EntangledTargets",
    "GateDef", "Histogram", "NonQfree", "Permeability", "QuantumVariable", "Qubit",
    "QuncompError", "Session", "Statevector", "UncomputeReport", "ValueUnavailable",
    "WIDTH_CAP", "alloc_variable", "analysis", "apply_gate", "auto_uncompute",
    "auto_uncompute_scope", "block_decompose", "build_dag", "check_theorem1", "dag",
    "delete", "gate_wrap", "gates", "grover_demo", "histogram", "insert_inverse",
    "insert_term", "inverse", "ir", "is_permeable", "is_qfree", "linalg", "linearize",
    "lookup_gate", "permeability", "prob_one", "run", "sim", "substitute_phase_tolerant",
    "synthesize_unitary", "uncompute", "unitary_of",
]
