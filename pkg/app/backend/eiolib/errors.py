from typing import Optional

EXIT_RUNTIME_FAILURE = 1
EXIT_INPUT_VALIDATION = 2


# EioError is the base for every failure the library reports on purpose; exit_code is what the CLI returns for it
class EioError(Exception):
    exit_code: int = EXIT_RUNTIME_FAILURE

    def __init__(self, error: str, exit_code: Optional[int] = None):
        super().__init__(error)
        self.error = error
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.error or ""


class InputValidationError(EioError):
    exit_code = EXIT_INPUT_VALIDATION


class DimensionMismatchError(InputValidationError):
    pass


class MalformedInputError(InputValidationError):
    """
    A CSV or JSON input that cannot be parsed.

    Attributes:
        path (str): File the problem was found in
        line (Optional[int]): 1-based line number, when known
    """

    def __init__(self, error: str, path: str, line: Optional[int] = None):
        location = f"{path}:{line}" if line is not None else path
        super().__init__(f"{location}: {error}")
        self.path = path
        self.line = line


class SingularBlockError(EioError):
    def __init__(self, block: str, detail: str = ""):
        message = f"block '{block}' is singular or not positive definite"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)
        self.block = block


class InfeasibleParameterError(EioError):
    pass
