"""Exception hierarchy.

Every error raised by the package derives from :class:`QuncompError`. The
``kind`` attribute is the short machine-readable tag printed by the CLI as
``ERROR:<kind>:<message>``.
"""


class QuncompError(Exception):
    kind = "Error"


class DimensionMismatch(QuncompError, ValueError):
    kind = "DimensionMismatch"


class CircuitError(QuncompError):
    """Raised when a circuit violates an invariant; ``index`` is the offending instruction."""

    kind = "CircuitError"

    def __init__(self, message, index=None):
        self.index = index
        if index is not None:
            message = f"instruction {index}: {message}"
        super().__init__(message)


class UnknownGate(QuncompError, KeyError):
    kind = "UnknownGate"

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class WidthCapExceeded(QuncompError):
    kind = "WidthCapExceeded"


class NotPermeable(QuncompError):
    kind = "NotPermeable"


class PreconditionViolation(QuncompError):
    kind = "PreconditionViolation"


class DagCycleError(QuncompError):
    kind = "DagCycle"


class WrapError(QuncompError):
    kind = "WrapError"


class SessionError(QuncompError):
    kind = "SessionError"


class DuplicateName(SessionError):
    kind = "DuplicateName"


class DeadQubit(SessionError):
    kind = "DeadQubit"


class NotProvablyZero(SessionError):
    kind = "NotProvablyZero"


class UncomputeError(QuncompError):
    """Base for failures of the uncomputation pass.

    ``variable`` is filled in by the caller that knows which variable was
    being uncomputed (e.g. the auto-uncompute scope).
    """

    kind = "UncomputeError"
    variable = None


class NonQfree(UncomputeError):
    kind = "NonQfree"

    def __init__(self, gate_name, qubit):
        self.gate_name = gate_name
        self.qubit = qubit
        super().__init__(f"gate {gate_name} acting on qubit {qubit} is not qfree")


class ValueUnavailable(UncomputeError):
    kind = "ValueUnavailable"

    def __init__(self, qubit, reason=""):
        self.qubit = qubit
        msg = f"value of qubit {qubit} is no longer available"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class EntangledTargets(UncomputeError):
    kind = "EntangledTargets"


class AnalysisUnavailable(UncomputeError):
    kind = "AnalysisUnavailable"


class SimulationError(QuncompError):
    kind = "SimulationError"


class DeallocError(SimulationError):
    kind = "DeallocError"


class SimulatorCapExceeded(SimulationError):
    kind = "SimulatorCapExceeded"


class ParseError(QuncompError):
    kind = "ParseError"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
