"""Single-proposition modal formulas and their two frame semantics.

Formulas come from the grammar ``p | false | or | diamond`` over exactly one
proposition symbol.  A frame (a transition system) validates a condition
when the condition holds at every state under every valuation of the one
proposition, which is decidable by brute force: there are ``2^|X|``
valuations.  The same conditions translate compositionally into equational
constraints over the powerset signature, and the two semantics are checked
against each other in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coalgebra import Coalgebra, ComposeShape, IdShape, PathShape, ProdShape, SigShape
from .constraints import (
    BinUnion,
    Comp,
    Empty,
    EquationalConstraint,
    Proj,
    Singleton,
    Term,
    Tuple,
    Union,
    Whisker,
)
from .errors import BudgetExceeded, NonConformant
from .functors import ts_functor

FRAME_STATE_BOUND = 12


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class P(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Diamond(Formula):
    body: Formula


def modal_depth(phi: Formula) -> int:
    if isinstance(phi, (P, Bot)):
        return 0
    if isinstance(phi, Or):
        return max(modal_depth(phi.left), modal_depth(phi.right))
    if isinstance(phi, Diamond):
        return 1 + modal_depth(phi.body)
    raise TypeError(f"not a formula: {phi!r}")


@dataclass(frozen=True)
class KripkeModel:
    """A frame together with the set of states where the proposition holds."""

    frame: Coalgebra
    valuation: frozenset

    def __init__(self, frame, valuation):
        if frame.functor != ts_functor():
            raise NonConformant("Kripke models live over the powerset signature")
        valuation = frozenset(valuation)
        for x in valuation:
            if x not in frame.carrier:
                raise NonConformant(f"valuation mentions unknown state {x!r}")
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "valuation", valuation)


def successors(frame: Coalgebra, x) -> list:
    return [m[1] for m in frame.structure[x][1]]


def sat(model: KripkeModel, x, phi: Formula) -> bool:
    """The usual recursive satisfaction relation."""
    if isinstance(phi, P):
        return x in model.valuation
    if isinstance(phi, Bot):
        return False
    if isinstance(phi, Or):
        return sat(model, x, phi.left) or sat(model, x, phi.right)
    if isinstance(phi, Diamond):
        return any(sat(model, y, phi.body) for y in successors(model.frame, x))
    raise TypeError(f"not a formula: {phi!r}")


def _valuations(frame: Coalgebra):
    states = frame.carrier.elements
    for mask in range(2 ** len(states)):
        yield frozenset(states[i] for i in range(len(states)) if mask >> i & 1)


def frame_valid(frame: Coalgebra, phi: Formula, psi: Formula, mode: str = "iff") -> bool:
    """Whether the condition ``phi <-> psi`` (or ``phi -> psi``) holds on the frame.

    Quantifies over all single-proposition valuations and all states.
    """
    if mode not in ("iff", "implies"):
        raise ValueError(f"unknown mode {mode!r}")
    if len(frame.carrier) > FRAME_STATE_BOUND:
        raise BudgetExceeded(2 ** len(frame.carrier), 2 ** FRAME_STATE_BOUND)
    for valuation in _valuations(frame):
        model = KripkeModel(frame, valuation)
        for x in frame.carrier:
            a = sat(model, x, phi)
            b = sat(model, x, psi)
            if mode == "iff" and a != b:
                return False
            if mode == "implies" and a and not b:
                return False
    return True


# ---------------------------------------------------------------------------
# Translation into equational constraints.

def formula_shape(phi: Formula) -> PathShape:
    """The path shape whose unfolding a formula's denotation consumes."""
    if isinstance(phi, (P, Bot)):
        return IdShape()
    if isinstance(phi, Or):
        return ProdShape((formula_shape(phi.left), formula_shape(phi.right)))
    if isinstance(phi, Diamond):
        return ComposeShape(SigShape(), formula_shape(phi.body))
    raise TypeError(f"not a formula: {phi!r}")


def formula_term(phi: Formula) -> Term:
    """The denotation: a transformation from the formula's shape to sets of states."""
    if isinstance(phi, P):
        return Singleton()
    if isinstance(phi, Bot):
        return Empty()
    if isinstance(phi, Or):
        return Comp(
            BinUnion(),
            Tuple((Comp(formula_term(phi.left), Proj(0)), Comp(formula_term(phi.right), Proj(1)))),
        )
    if isinstance(phi, Diamond):
        return Comp(Union(), Whisker(SigShape(), formula_term(phi.body)))
    raise TypeError(f"not a formula: {phi!r}")


def natform_to_constraint(phi: Formula, psi: Formula) -> EquationalConstraint:
    """The equational constraint equivalent to the frame condition ``phi <-> psi``."""
    shape = ProdShape((formula_shape(phi), formula_shape(psi)))
    left = Comp(formula_term(phi), Proj(0))
    right = Comp(formula_term(psi), Proj(1))
    return EquationalConstraint(ts_functor(), shape, left, right, "frame-condition")


def implication_constraint(phi: Formula, psi: Formula) -> EquationalConstraint:
    """``phi -> psi`` reduced to the equivalence ``phi or psi <-> psi``."""
    return natform_to_constraint(Or(phi, psi), psi)


# ---------------------------------------------------------------------------
# Normal forms and the one condition outside the grammar.

def diamond_levels(phi: Formula) -> frozenset:
    """The set of n with ``diamond^n p`` a disjunct of the normal form."""
    if isinstance(phi, P):
        return frozenset({0})
    if isinstance(phi, Bot):
        return frozenset()
    if isinstance(phi, Or):
        return diamond_levels(phi.left) | diamond_levels(phi.right)
    if isinstance(phi, Diamond):
        return frozenset(n + 1 for n in diamond_levels(phi.body))
    raise TypeError(f"not a formula: {phi!r}")


def from_levels(levels) -> Formula:
    """The canonical disjunction of iterated diamonds with the given depths."""
    levels = sorted(levels)
    if not levels:
        return Bot()
    disjuncts = []
    for n in levels:
        phi: Formula = P()
        for _ in range(n):
            phi = Diamond(phi)
        disjuncts.append(phi)
    result = disjuncts[0]
    for d in disjuncts[1:]:
        result = Or(result, d)
    return result


def symmetry_frame_valid(frame: Coalgebra) -> bool:
    """Validity of "p implies box diamond p", with the box evaluated directly.

    The box is outside the natural grammar, so this evaluator quantifies the
    semantics by hand: wherever p holds, every successor must have some
    successor satisfying p.
    """
    if len(frame.carrier) > FRAME_STATE_BOUND:
        raise BudgetExceeded(2 ** len(frame.carrier), 2 ** FRAME_STATE_BOUND)
    for valuation in _valuations(frame):
        for x in frame.carrier:
            if x not in valuation:
                continue
            for y in successors(frame, x):
                if not any(z in valuation for z in successors(frame, y)):
                    return False
    return True
