"""Exception types shared across the toolkit."""

from __future__ import annotations


class ConvsqlError(Exception):
    """Base class for all toolkit errors."""


class LexError(ConvsqlError):
    """Raised when the scanner hits an illegal or unterminated token."""

    def __init__(self, position: int, message: str):
        super().__init__(f"lex error at position {position}: {message}")
        self.position = position


class SqlSyntaxError(ConvsqlError):
    """Raised when the token stream does not match the dialect grammar."""

    def __init__(self, position: int, expected: str, got: str = ""):
        detail = f"expected {expected}"
        if got:
            detail += f", got {got!r}"
        super().__init__(f"syntax error at position {position}: {detail}")
        self.position = position
        self.expected = expected


class UnsupportedFeature(ConvsqlError):
    """Raised for SQL constructs outside the supported dialect."""

    def __init__(self, construct: str):
        super().__init__(f"unsupported SQL construct: {construct}")
        self.construct = construct


class UnknownIdentifier(ConvsqlError):
    """Raised when a table or column name does not resolve against the schema."""

    def __init__(self, name: str):
        super().__init__(f"unknown identifier: {name!r}")
        self.name = name


class SchemaFormatError(ConvsqlError):
    """Raised on malformed schema-catalog or dataset files."""

    def __init__(self, detail: str, db_id: str | None = None):
        prefix = f"[{db_id}] " if db_id else ""
        super().__init__(f"{prefix}{detail}")
        self.db_id = db_id
        self.detail = detail


class InteractionParseError(ConvsqlError):
    """Raised when a gold SQL inside a dataset file fails to parse."""

    def __init__(self, interaction_id: str, turn: int, cause: Exception):
        super().__init__(
            f"interaction {interaction_id!r} turn {turn}: gold SQL does not parse: {cause}"
        )
        self.interaction_id = interaction_id
        self.turn = turn
        self.cause = cause


class MissingPrediction(ConvsqlError):
    """Raised when a predictions file does not cover a gold turn."""

    def __init__(self, interaction_id: str, turn: int):
        super().__init__(f"no prediction for interaction {interaction_id!r} turn {turn}")
        self.interaction_id = interaction_id
        self.turn = turn


class EndpointError(ConvsqlError):
    """Raised when a generation endpoint fails after retries."""

    def __init__(self, turn: int, cause: Exception | str):
        super().__init__(f"endpoint failed at turn {turn}: {cause}")
        self.turn = turn
        self.cause = cause
