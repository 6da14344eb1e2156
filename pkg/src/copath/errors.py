"""Exception types shared across the package."""


class CopathError(Exception):
    """Base class for every error raised by this package."""


class BudgetExceeded(CopathError):
    """An enumeration would produce more elements than the configured budget."""

    def __init__(self, needed, budget):
        super().__init__(f"enumeration needs {needed} elements but the budget is {budget}")
        self.needed = needed
        self.budget = budget


class NonConformant(CopathError):
    """A value does not match the shape prescribed by its functor and carrier."""


class TypeMismatch(CopathError):
    """A transformation term does not type-check against its source shape."""


class NotACongruence(CopathError):
    """A quotient map identifies states with incompatible one-step behaviour."""

    def __init__(self, witness):
        x, y = witness
        super().__init__(f"states {x!r} and {y!r} are merged but behave differently")
        self.witness = witness


class NotClosed(CopathError):
    """A subset of states is not closed under the structure map."""

    def __init__(self, witness):
        super().__init__(f"state {witness!r} has successors outside the subset")
        self.witness = witness


class UnknownBuiltin(CopathError):
    """No built-in constraint is registered under the requested name."""


class NotClosedWithinBound(CopathError):
    """Bounded congruence closure did not stabilise; the monoid may be infinite."""

    def __init__(self, bound, frontier):
        super().__init__(
            f"word classes still grow at the length bound {bound}; frontier witness {frontier!r}"
        )
        self.bound = bound
        self.frontier = frontier


class NonSingularConstraint(CopathError):
    """A net construction was asked to use a constraint whose shape is not an iterate of the signature."""


class NotSatisfying(CopathError):
    """A behaviour map was requested for a coalgebra that violates the constraint system."""

    def __init__(self, witness):
        super().__init__(f"constraint violated at state {witness!r}")
        self.witness = witness


class DepthTooShallow(CopathError):
    """A truncated behaviour is too shallow to settle the requested membership question."""


class WrongAlphabet(CopathError):
    """An operation requires a specific input alphabet."""


class UnknownLetter(CopathError):
    """A word uses a letter outside the automaton's alphabet."""


class ParseError(CopathError):
    """Positioned syntax error for the text grammars."""

    def __init__(self, message, line, col, expected=()):
        detail = f"{line}:{col}: {message}"
        if expected:
            detail += " (expected one of: " + ", ".join(sorted(expected)) + ")"
        super().__init__(detail)
        self.line = line
        self.col = col
        self.expected = tuple(expected)


class ValidationError(CopathError):
    """A parsed document is well-formed JSON but violates the schema."""
