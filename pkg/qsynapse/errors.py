class QSynapseError(Exception):
    """Base class for all qsynapse errors."""


class NotHermitian(QSynapseError, ValueError):
    """Matrix handed to the Hermitian eigensolver is not Hermitian."""


class ZeroProbabilityOutcome(QSynapseError, ValueError):
    """Requested measurement branch has (numerically) zero probability."""


class InvariantViolation(QSynapseError, RuntimeError):
    def __init__(self, message, t=None):
        """Raised when a state leaves its physical domain.

        Parameters
        ----------
        message : str
            Description of the violated invariant.
        t : float, optional
            Simulation time at which the violation was detected.
        """
        if t is not None:
            message = f'{message} (t={t:g})'
        super().__init__(message)
        self.t = t


class ParseError(QSynapseError, ValueError):
    def __init__(self, diagnostics):
        """Raised when an experiment document cannot be turned into a config.

        Parameters
        ----------
        diagnostics : List[tuple]
            Triples of (field, message, line). `line` is None for
            field-level errors.
        """
        self.diagnostics = list(diagnostics)
        lines = []
        for field, message, line in self.diagnostics:
            where = field if line is None else f'{field} (line {line})'
            lines.append(f'{where}: {message}')
        super().__init__('\n'.join(lines))
