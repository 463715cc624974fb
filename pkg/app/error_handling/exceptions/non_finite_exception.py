class NonFiniteException(ArithmeticError):
    """
    Raised in checked mode when a freshly created tensor holds NaN or Inf.

    NOTE: the check happens at node creation, so the operation name points at
    the first op that produced a bad value rather than where it was noticed.
    """

    def __init__(self, detail: str = "Non-finite values in tensor", operation: str = None, bad_count: int = 0):
        self.detail = detail
        self.operation = operation
        self.bad_count = bad_count
        super().__init__(str(self))

    def __str__(self) -> str:
        base_msg = f"NonFiniteException: {self.detail}"
        if self.operation:
            base_msg += f" (operation: {self.operation}, non-finite entries: {self.bad_count})"
        return base_msg
