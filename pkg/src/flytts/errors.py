"""Exception types shared across the engine."""


class ShapeError(ValueError):
    """Tensor extents do not agree with what an operation requires."""


class MissingWeightError(KeyError):
    """A named tensor or parameter set is absent from a weight store."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing weight"


class WeightFormatError(ValueError):
    """A serialized weight container is malformed, truncated or corrupt."""
