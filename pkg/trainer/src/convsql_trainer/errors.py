class TrainerError(Exception):
    """Base class for everything this package raises on purpose."""


class CorpusFormatError(TrainerError):
    """A corpus file failed validation; training never started."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}: "
            if line is not None:
                where = f"{path}:{line}: "
        super().__init__(f"{where}{message}")
