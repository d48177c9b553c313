"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the region where the model is defined."""


class DegenerateInputError(ValueError):
    """An estimator is undefined for the given data.

    ``quantity`` names the vanishing quantity, e.g. ``"F2_DFA,x"``.
    """

    def __init__(self, quantity: str, message: str | None = None):
        self.quantity = quantity
        super().__init__(message or f"degenerate input: {quantity} = 0")
