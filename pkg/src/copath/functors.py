"""Syntactic set endofunctors and their evaluation over finite carriers.

A functor expression is a finite tree built from constants, the identity,
finite products and coproducts, exponents by a finite alphabet, and the
finite powerset.  ``Exp`` and ``FinPow`` carry an inner expression so the
grammar is closed under composition: composing two expressions substitutes
the second into the identity leaves of the first (:func:`compose`), which
is what makes iterates ``F^n`` expressible (:func:`compose_power`).

Elements of ``F(X)`` are plain nested tuples whose first entry is a tag:

    ("const", name)            element of a constant carrier
    ("id", name)               element of the carrier X
    ("prod", (v1, ..., vk))    tuple
    ("in", i, v)               tagged coproduct injection
    ("exp", ((a, v), ...))     total map from the alphabet, in alphabet order
    ("set", (v1, ..., vk))     finite set, sorted and duplicate free

Tuples hash and compare cheaply, and set contents are canonicalised
(sorted under the tuple order, duplicates removed), so structural equality
of values coincides with extensional equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product as iproduct
from typing import Callable, Mapping, Union

from .errors import BudgetExceeded, NonConformant

DEFAULT_BUDGET = 10**6

Value = tuple


@dataclass(frozen=True)
class Carrier:
    """An ordered finite set of distinct element names.

    The order given at construction is the canonical one; every
    enumeration in the package walks carriers in this order.
    """

    elements: tuple[str, ...]
    _index: frozenset = field(init=False, repr=False, compare=False)

    def __init__(self, elements):
        object.__setattr__(self, "elements", tuple(elements))
        if len(set(self.elements)) != len(self.elements):
            raise ValueError(f"duplicate element names in carrier: {self.elements}")
        object.__setattr__(self, "_index", frozenset(self.elements))

    def __contains__(self, name) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


class FunctorExpr:
    """Marker base class for functor expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(FunctorExpr):
    values: Carrier

    def __init__(self, values):
        if not isinstance(values, Carrier):
            values = Carrier(values)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class Identity(FunctorExpr):
    pass


@dataclass(frozen=True)
class Prod(FunctorExpr):
    factors: tuple[FunctorExpr, ...]

    def __init__(self, factors):
        factors = tuple(factors)
        if not factors:
            raise ValueError("a product needs at least one factor")
        object.__setattr__(self, "factors", factors)


@dataclass(frozen=True)
class Coprod(FunctorExpr):
    summands: tuple[FunctorExpr, ...]

    def __init__(self, summands):
        summands = tuple(summands)
        if not summands:
            raise ValueError("a coproduct needs at least one summand")
        object.__setattr__(self, "summands", summands)


@dataclass(frozen=True)
class Exp(FunctorExpr):
    """``inner^A`` for a finite, ordered, duplicate-free alphabet ``A``."""

    letters: tuple[str, ...]
    inner: FunctorExpr

    def __init__(self, letters, inner=None):
        letters = tuple(letters)
        if not letters:
            raise ValueError("an exponent needs a non-empty alphabet")
        if len(set(letters)) != len(letters):
            raise ValueError(f"duplicate letters in alphabet: {letters}")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "inner", Identity() if inner is None else inner)


@dataclass(frozen=True)
class FinPow(FunctorExpr):
    """Finite powerset of ``inner``."""

    inner: FunctorExpr

    def __init__(self, inner=None):
        object.__setattr__(self, "inner", Identity() if inner is None else inner)


def moore_functor(outputs, letters) -> Prod:
    """The Moore automaton signature: outputs times next-state per letter."""
    if not isinstance(outputs, Carrier):
        outputs = Carrier(outputs)
    return Prod((Const(outputs), Exp(tuple(letters))))


def ts_functor() -> FinPow:
    """The transition system signature: finite sets of successor states."""
    return FinPow()


def lts_functor(letters) -> FinPow:
    """The labelled transition system signature: finite sets of (letter, state) pairs."""
    return FinPow(Prod((Const(Carrier(tuple(letters))), Identity())))


def moore_parts(expr: FunctorExpr):
    """Return ``(outputs, letters)`` if ``expr`` is a Moore signature, else None."""
    if (
        isinstance(expr, Prod)
        and len(expr.factors) == 2
        and isinstance(expr.factors[0], Const)
        and isinstance(expr.factors[1], Exp)
        and expr.factors[1].inner == Identity()
    ):
        return expr.factors[0].values, expr.factors[1].letters
    return None


def lts_parts(expr: FunctorExpr):
    """Return the letter tuple if ``expr`` is a labelled transition signature, else None."""
    if isinstance(expr, FinPow) and isinstance(expr.inner, Prod):
        inner = expr.inner
        if (
            len(inner.factors) == 2
            and isinstance(inner.factors[0], Const)
            and inner.factors[1] == Identity()
        ):
            return inner.factors[0].values.elements
    return None


def compose(outer: FunctorExpr, inner: FunctorExpr) -> FunctorExpr:
    """The composite ``outer . inner``, by substitution into identity leaves."""
    if isinstance(outer, Const):
        return outer
    if isinstance(outer, Identity):
        return inner
    if isinstance(outer, Prod):
        return Prod(tuple(compose(f, inner) for f in outer.factors))
    if isinstance(outer, Coprod):
        return Coprod(tuple(compose(s, inner) for s in outer.summands))
    if isinstance(outer, Exp):
        return Exp(outer.letters, compose(outer.inner, inner))
    if isinstance(outer, FinPow):
        return FinPow(compose(outer.inner, inner))
    raise TypeError(f"not a functor expression: {outer!r}")


def compose_power(expr: FunctorExpr, n: int) -> FunctorExpr:
    """The n-fold iterate of ``expr``; the zeroth iterate is the identity."""
    if n < 0:
        raise ValueError("iterate count must be non-negative")
    result: FunctorExpr = Identity()
    for _ in range(n):
        result = compose(expr, result)
    return result


def cardinality(expr: FunctorExpr, size) -> int:
    """Size of ``expr`` applied to a carrier, by closed-form arithmetic."""
    n = len(size) if isinstance(size, Carrier) else int(size)
    if isinstance(expr, Const):
        return len(expr.values)
    if isinstance(expr, Identity):
        return n
    if isinstance(expr, Prod):
        total = 1
        for f in expr.factors:
            total *= cardinality(f, n)
        return total
    if isinstance(expr, Coprod):
        return sum(cardinality(s, n) for s in expr.summands)
    if isinstance(expr, Exp):
        return cardinality(expr.inner, n) ** len(expr.letters)
    if isinstance(expr, FinPow):
        return 2 ** cardinality(expr.inner, n)
    raise TypeError(f"not a functor expression: {expr!r}")


def check_budget(expr: FunctorExpr, carrier: Carrier, budget: int = DEFAULT_BUDGET) -> int:
    size = cardinality(expr, carrier)
    if size > budget:
        raise BudgetExceeded(size, budget)
    return size


def enumerate_values(expr: FunctorExpr, carrier: Carrier, budget: int = DEFAULT_BUDGET) -> list[Value]:
    """All elements of ``expr`` applied to ``carrier``, in canonical order.

    The result is duplicate-free and deterministic.  Raises
    :class:`BudgetExceeded` before doing any work if the closed-form
    cardinality is over budget.
    """
    check_budget(expr, carrier, budget)
    return _enumerate(expr, carrier)


def _enumerate(expr: FunctorExpr, carrier: Carrier) -> list[Value]:
    if isinstance(expr, Const):
        return [("const", b) for b in expr.values]
    if isinstance(expr, Identity):
        return [("id", x) for x in carrier]
    if isinstance(expr, Prod):
        parts = [_enumerate(f, carrier) for f in expr.factors]
        return [("prod", combo) for combo in iproduct(*parts)]
    if isinstance(expr, Coprod):
        return [
            ("in", i, v)
            for i, summand in enumerate(expr.summands)
            for v in _enumerate(summand, carrier)
        ]
    if isinstance(expr, Exp):
        inner = _enumerate(expr.inner, carrier)
        return [
            ("exp", tuple(zip(expr.letters, combo)))
            for combo in iproduct(inner, repeat=len(expr.letters))
        ]
    if isinstance(expr, FinPow):
        members = sorted(_enumerate(expr.inner, carrier))
        return [
            ("set", subset)
            for k in range(len(members) + 1)
            for subset in combinations(members, k)
        ]
    raise TypeError(f"not a functor expression: {expr!r}")


def conforms(expr: FunctorExpr, carrier: Carrier, v: Value) -> bool:
    """Whether ``v`` is a well-formed element of ``expr`` applied to ``carrier``."""
    try:
        return _conforms(expr, carrier, v)
    except (TypeError, IndexError):
        return False


def _conforms(expr, carrier, v) -> bool:
    if isinstance(expr, Const):
        return v[0] == "const" and len(v) == 2 and v[1] in expr.values
    if isinstance(expr, Identity):
        return v[0] == "id" and len(v) == 2 and v[1] in carrier
    if isinstance(expr, Prod):
        return (
            v[0] == "prod"
            and len(v) == 2
            and len(v[1]) == len(expr.factors)
            and all(_conforms(f, carrier, w) for f, w in zip(expr.factors, v[1]))
        )
    if isinstance(expr, Coprod):
        return (
            v[0] == "in"
            and len(v) == 3
            and 0 <= v[1] < len(expr.summands)
            and _conforms(expr.summands[v[1]], carrier, v[2])
        )
    if isinstance(expr, Exp):
        if v[0] != "exp" or len(v) != 2:
            return False
        entries = v[1]
        if tuple(a for a, _ in entries) != expr.letters:
            return False
        return all(_conforms(expr.inner, carrier, w) for _, w in entries)
    if isinstance(expr, FinPow):
        if v[0] != "set" or len(v) != 2:
            return False
        members = v[1]
        if list(members) != sorted(set(members)):
            return False
        return all(_conforms(expr.inner, carrier, m) for m in members)
    raise TypeError(f"not a functor expression: {expr!r}")


def map_inner(expr: FunctorExpr, fn: Callable[[Value], Value], v: Value) -> Value:
    """Apply ``fn`` at every identity leaf of ``expr`` inside ``v``.

    This is the action of ``expr`` on an arbitrary substitution: the
    payload found at each identity position (an ``("id", name)`` leaf when
    ``v`` lives over a plain carrier, or a whole subtree when ``v`` lives
    over a composite) is replaced by ``fn(payload)``.  Powerset layers are
    re-canonicalised, since substitution may collapse members.
    """
    if isinstance(expr, Const):
        return v
    if isinstance(expr, Identity):
        return fn(v)
    if isinstance(expr, Prod):
        return ("prod", tuple(map_inner(f, fn, w) for f, w in zip(expr.factors, v[1])))
    if isinstance(expr, Coprod):
        return ("in", v[1], map_inner(expr.summands[v[1]], fn, v[2]))
    if isinstance(expr, Exp):
        return ("exp", tuple((a, map_inner(expr.inner, fn, w)) for a, w in v[1]))
    if isinstance(expr, FinPow):
        return ("set", tuple(sorted({map_inner(expr.inner, fn, m) for m in v[1]})))
    raise TypeError(f"not a functor expression: {expr!r}")


def fmap(expr: FunctorExpr, f: Union[Mapping[str, str], Callable[[str], str]], v: Value,
         carrier: Carrier | None = None) -> Value:
    """The action of ``expr`` on a renaming of carrier elements.

    ``f`` may be a mapping or a callable on element names and must be total
    on the names occurring in ``v``.  When ``carrier`` is given, ``v`` is
    first checked for conformance and :class:`NonConformant` is raised on
    mismatch.
    """
    if carrier is not None and not conforms(expr, carrier, v):
        raise NonConformant(f"value {v!r} does not conform to the given functor and carrier")
    get = f.__getitem__ if isinstance(f, Mapping) else f
    return map_inner(expr, lambda leaf: ("id", get(leaf[1])), v)


def value_size(v: Value) -> int:
    """Number of nodes in a value tree (used to budget unfoldings)."""
    tag = v[0]
    if tag in ("const", "id"):
        return 1
    if tag == "prod":
        return 1 + sum(value_size(w) for w in v[1])
    if tag == "in":
        return 1 + value_size(v[2])
    if tag == "exp":
        return 1 + sum(value_size(w) for _, w in v[1])
    if tag == "set":
        return 1 + sum(value_size(m) for m in v[1])
    raise TypeError(f"not a value: {v!r}")


def render_value(v: Value) -> str:
    """A compact deterministic text form, used to name derived carriers."""
    tag = v[0]
    if tag in ("const", "id"):
        return str(v[1])
    if tag == "prod":
        return "(" + ",".join(render_value(w) for w in v[1]) + ")"
    if tag == "in":
        return f"in{v[1]}({render_value(v[2])})"
    if tag == "exp":
        return "[" + ",".join(f"{a}:{render_value(w)}" for a, w in v[1]) + "]"
    if tag == "set":
        return "{" + ",".join(render_value(m) for m in v[1]) + "}"
    raise TypeError(f"not a value: {v!r}")
