class ContractException(Exception):
    """Exception raised when an operation is called outside its preconditions."""

    def __init__(self, detail: str = "Operation contract violated", operation: str = None):
        self.detail = detail
        self.operation = operation
        super().__init__(self.detail)

    def __str__(self) -> str:
        operation_info = f" (operation: {self.operation})" if self.operation else ""
        return f"ContractException: {self.detail}{operation_info}"
