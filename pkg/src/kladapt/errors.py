"""Exception types shared across the package.

The CLI maps these onto exit codes: format problems exit 2, numerical
failures exit 3, protocol/usage violations exit 1.
"""


class InvalidParameterError(ValueError):
    """A scalar parameter is outside its valid range."""


class ShapeError(ValueError):
    """Array dimensions do not match what an operation requires."""


class InvalidWeightError(ValueError):
    """A sample weight lies outside [0, 1]."""


class FrozenModelError(RuntimeError):
    """Statistics update attempted on a finalized model."""


class NotFinalizedError(RuntimeError):
    """Scoring attempted before the classifier was solved."""


class EmptyModelError(RuntimeError):
    """Finalize attempted with no class statistics at all."""


class DegenerateScaleError(ArithmeticError):
    """Weighted covariance scale (weight sum - 1) is not positive."""


class SingularCovarianceError(ArithmeticError):
    """Covariance solve failed even after ridge regularization."""


class DegenerateEmbeddingError(ValueError):
    """An embedding with zero norm cannot be cosine-scored."""


class ProtocolError(RuntimeError):
    """The source-free or labeling protocol was violated."""


class FormatError(ValueError):
    """A binary file failed validation.

    ``offset`` is the byte position at which the problem was detected.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
