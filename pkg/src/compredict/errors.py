"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside its documented range."""


class ConvergenceError(ArithmeticError):
    """An iterative numeric routine failed to converge."""

    def __init__(self, message, iterations):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


class EncodingError(ValueError):
    """A transition stream or candidate violates the encoding grammar."""


class DecodeError(ValueError):
    """A compressed stream could not be decoded."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class BackendError(RuntimeError):
    """An external compressor process failed."""

    def __init__(self, message, stderr=b""):
        detail = stderr.decode("utf-8", "replace").strip() if stderr else ""
        super().__init__(f"{message}: {detail}" if detail else message)
        self.stderr = stderr
