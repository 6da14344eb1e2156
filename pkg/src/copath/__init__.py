"""Finite coalgebras, equational path constraints, and relatively final automata."""

from .functors import (
    Carrier,
    Const,
    Coprod,
    Exp,
    FinPow,
    FunctorExpr,
    Identity,
    Prod,
    cardinality,
    compose,
    compose_power,
    enumerate_values,
    fmap,
    lts_functor,
    moore_functor,
    ts_functor,
)
from .coalgebra import (
    Coalgebra,
    ComposeShape,
    IdShape,
    PathShape,
    ProdShape,
    SigShape,
    StateMap,
    coproduct,
    image,
    is_homomorphism,
    is_subcoalgebra,
    path_unfold,
    restrict,
    sig_power,
    step_n,
)
from .constraints import (
    ConstraintSystem,
    EquationalConstraint,
    PredicateConstraint,
    builtin,
    satisfies,
    satisfies_system,
    satisfies_via_subfunctor,
    word_equation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
