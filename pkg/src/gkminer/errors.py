class GKMinerError(Exception):
    pass


class ParseError(GKMinerError):
    """Malformed input file (graph, key file, gold standard)."""


class GraphLoadError(ParseError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class UnknownTypeError(GKMinerError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class KeyFileError(ParseError):
    pass


class InvariantError(GKMinerError):
    """A mining postcondition (minimality, k-bound, acyclicity) was violated."""
