"""Exception types shared across the toolkit."""


class GrowthCodeError(Exception):
    """Base class for toolkit errors."""


class CorruptPacketError(GrowthCodeError, ValueError):
    """A packet cannot be parsed or does not belong to the decoder's block."""


class NumericalInstabilityError(GrowthCodeError, ArithmeticError):
    """The ODE integration left the region where its state is meaningful."""

    def __init__(self, message, tau=None, eta=None):
        super().__init__(message)
        self.tau = tau
        self.eta = eta


class InsufficientDataError(GrowthCodeError, ValueError):
    """Too few usable points to fit a model."""


class UnsupportedModelError(GrowthCodeError, ValueError):
    """The model's parameters do not support the requested operation."""


class NoInteriorMinimumError(GrowthCodeError, ValueError):
    """The distortion has no stationary point (e.g. zero residual loss)."""
