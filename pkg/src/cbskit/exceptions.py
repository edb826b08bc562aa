"""Exception hierarchy shared by all cbskit modules."""


class CBSError(ValueError):
    """Base class for input and numerical errors raised by cbskit."""


class DimensionMismatchError(CBSError):
    pass


class NotPositiveSemidefiniteError(CBSError):
    """A matrix expected to be SPSD has an eigenvalue or pivot below tolerance."""


class InconsistentPencilError(CBSError):
    """The pencil B - lambda*M has components of B on the kernel of M."""


class ConvergenceError(CBSError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateSimplexError(CBSError):
    def __init__(self, message, element_index=None):
        super().__init__(message)
        self.element_index = element_index
