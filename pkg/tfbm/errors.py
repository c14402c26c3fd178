__all__ = [
    'TfbmError',
    'ParameterError',
    'DomainError',
    'PoleError',
    'DataFormatError',
    'NumericalError',
    'ConvergenceError',
    'NumericalDegeneracyError',
    'FactorizationError',
    'EmbeddingError',
    'InsufficientSampleError',
]


class TfbmError(Exception):
    """Root of every error raised by the package."""


class ParameterError(TfbmError, ValueError):
    """Invalid user-supplied parameter; the CLI exits with code 2."""


class DomainError(ParameterError):
    pass


class PoleError(DomainError):
    pass


class DataFormatError(ParameterError):
    """Malformed input file."""


class InsufficientSampleError(ParameterError):
    pass


class NumericalError(TfbmError, ArithmeticError):
    """Numerical failure; the CLI exits with code 3."""


class ConvergenceError(NumericalError):
    pass


class NumericalDegeneracyError(NumericalError):
    pass


class FactorizationError(NumericalError):
    pass


class EmbeddingError(NumericalError):
    """Circulant embedding has a negative eigenvalue beyond tolerance."""

    def __init__(self, min_eigenvalue, max_eigenvalue):
        self.min_eigenvalue = min_eigenvalue
        self.max_eigenvalue = max_eigenvalue
        super().__init__(
            f'circulant embedding failed: eigenvalue {min_eigenvalue:.3e} '
            f'(largest {max_eigenvalue:.3e})')
