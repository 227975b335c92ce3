"""Exception types raised across the package."""


class NonHermitianError(ValueError):
    pass


class NonFiniteError(ValueError):
    pass


class EigenDecompositionError(RuntimeError):
    pass


class SparsityError(ValueError):
    """A matrix row holds more nonzeros than the declared sparsity."""


class StructureError(ValueError):
    """Row-tree data is inconsistent or addressed out of range."""


class PaddingAmplitudeError(ValueError):
    """Amplitude found on coefficient-register padding indices."""


class LeakageError(RuntimeError):
    """Norm escaping the success subspace exceeded the allowed budget."""
