"""Exception hierarchy shared by all icevar modules.

The CLI maps these onto distinct exit codes (config 2, data 3, numerics 4),
so library code should raise the most specific class that applies.
"""


class IcevarError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(IcevarError):
    """Invalid configuration: bad value, unknown key, malformed file."""


class DataError(IcevarError):
    """Invalid input data: unbalanced panel, constant column, short unit,
    missing values, or a model/panel standardization mismatch."""


class NumericalError(IcevarError):
    """Numerical failure: diverging training loss, non-finite generated
    series, degenerate (zero-variance) curves."""


class TrainingDiverged(NumericalError):
    """Non-finite training loss; carries the epoch and batch where it died."""

    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(
            f"non-finite training loss {loss!r} at epoch {epoch}, batch {batch}"
        )
