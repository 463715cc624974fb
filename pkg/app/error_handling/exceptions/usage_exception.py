class UsageException(Exception):
    """Exception raised for unknown subcommands or malformed command-line flags."""

    def __init__(self, detail: str = "Invalid command-line usage", usage: str = None):
        self.detail = detail
        self.usage = usage
        super().__init__(self.detail)
