"""Finite coalgebras, homomorphisms, and structural operations.

A coalgebra pairs a finite carrier with a structure map sending each state
to an element of the signature functor applied to the carrier.  This module
also hosts the path-shape grammar (identity, the signature, products,
composites) together with the unfolding of a coalgebra along a shape, and
the three operations under which constraint-defined classes are closed:
coproducts, homomorphic images, and subcoalgebra restriction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BudgetExceeded, NonConformant, NotACongruence, NotClosed
from .functors import (
    DEFAULT_BUDGET,
    Carrier,
    FunctorExpr,
    Identity,
    Prod,
    Value,
    compose,
    compose_power,
    conforms,
    enumerate_values,
    fmap,
    map_inner,
    value_size,
)


@dataclass(frozen=True)
class Coalgebra:
    functor: FunctorExpr
    carrier: Carrier
    structure: dict

    def __init__(self, functor, carrier, structure):
        if not isinstance(carrier, Carrier):
            carrier = Carrier(carrier)
        structure = dict(structure)
        missing = [x for x in carrier if x not in structure]
        if missing:
            raise NonConformant(f"structure map is missing states: {missing}")
        extra = [x for x in structure if x not in carrier]
        if extra:
            raise NonConformant(f"structure map mentions unknown states: {extra}")
        for x, v in structure.items():
            if not conforms(functor, carrier, v):
                raise NonConformant(f"structure of state {x!r} does not conform: {v!r}")
        object.__setattr__(self, "functor", functor)
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "structure", structure)

    def states(self):
        return self.carrier.elements

    def __eq__(self, other):
        return (
            isinstance(other, Coalgebra)
            and self.functor == other.functor
            and self.carrier == other.carrier
            and self.structure == other.structure
        )

    def __hash__(self):
        return hash((self.functor, self.carrier, tuple(sorted(self.structure.items()))))


@dataclass(frozen=True)
class StateMap:
    """A total map between two carriers."""

    source: Carrier
    target: Carrier
    mapping: dict

    def __init__(self, source, target, mapping):
        if not isinstance(source, Carrier):
            source = Carrier(source)
        if not isinstance(target, Carrier):
            target = Carrier(target)
        mapping = dict(mapping)
        for x in source:
            if x not in mapping:
                raise NonConformant(f"map is not total: missing {x!r}")
            if mapping[x] not in target:
                raise NonConformant(f"map sends {x!r} outside the target carrier")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "mapping", mapping)

    def __getitem__(self, x):
        return self.mapping[x]

    def __eq__(self, other):
        return (
            isinstance(other, StateMap)
            and self.source == other.source
            and self.target == other.target
            and self.mapping == other.mapping
        )

    def __hash__(self):
        return hash((self.source, self.target, tuple(sorted(self.mapping.items()))))

    def is_surjective(self) -> bool:
        return set(self.mapping.values()) == set(self.target.elements)

    @staticmethod
    def identity(carrier: Carrier) -> "StateMap":
        return StateMap(carrier, carrier, {x: x for x in carrier})


# ---------------------------------------------------------------------------
# Path shapes.

class PathShape:
    """Marker base class for path shapes over a signature functor."""

    __slots__ = ()


@dataclass(frozen=True)
class IdShape(PathShape):
    pass


@dataclass(frozen=True)
class SigShape(PathShape):
    """The signature functor itself."""


@dataclass(frozen=True)
class ProdShape(PathShape):
    factors: tuple[PathShape, ...]

    def __init__(self, factors):
        factors = tuple(factors)
        if not factors:
            raise ValueError("a product shape needs at least one factor")
        object.__setattr__(self, "factors", factors)


@dataclass(frozen=True)
class ComposeShape(PathShape):
    outer: PathShape
    inner: PathShape


def sig_power(n: int) -> PathShape:
    """The shape of n consecutive unfolding steps."""
    shape: PathShape = IdShape()
    for _ in range(n):
        shape = ComposeShape(SigShape(), shape) if not isinstance(shape, IdShape) else SigShape()
    return shape


def shape_functor(shape: PathShape, ambient: FunctorExpr) -> FunctorExpr:
    """Resolve a path shape to a concrete functor expression."""
    if isinstance(shape, IdShape):
        return Identity()
    if isinstance(shape, SigShape):
        return ambient
    if isinstance(shape, ProdShape):
        return Prod(tuple(shape_functor(f, ambient) for f in shape.factors))
    if isinstance(shape, ComposeShape):
        return compose(shape_functor(shape.outer, ambient), shape_functor(shape.inner, ambient))
    raise TypeError(f"not a path shape: {shape!r}")


# ---------------------------------------------------------------------------
# Unfolding.

def _guard_table(table: dict, budget: int) -> dict:
    total = sum(value_size(v) for v in table.values())
    if total > budget:
        raise BudgetExceeded(total, budget)
    return table


def step_n(coalg: Coalgebra, n: int, budget: int = DEFAULT_BUDGET) -> dict:
    """The n-step unfolding: each state's tree of all length-n paths.

    Step zero embeds each state as an identity leaf; step n+1 applies the
    signature's action to the n-step table underneath one structure layer.
    The resulting values conform to the n-fold iterate of the signature.
    The budget bounds the total node count of the unfolded trees.
    """
    table = {x: ("id", x) for x in coalg.carrier}
    for _ in range(n):
        prev = table
        table = _guard_table(
            {
                x: map_inner(coalg.functor, lambda leaf: prev[leaf[1]], coalg.structure[x])
                for x in coalg.carrier
            },
            budget,
        )
    return table


def path_unfold(coalg: Coalgebra, shape: PathShape, budget: int = DEFAULT_BUDGET) -> dict:
    """Unfold a coalgebra along a path shape.

    Identity embeds states, the signature shape is the structure map itself,
    products pair unfoldings, and a composite unfolds the outer shape and
    then substitutes the inner unfolding at every state leaf.  The budget
    bounds the total node count of the resulting trees.
    """
    return _guard_table(_unfold(coalg, shape), budget)


def _unfold(coalg: Coalgebra, shape: PathShape) -> dict:
    if isinstance(shape, IdShape):
        return {x: ("id", x) for x in coalg.carrier}
    if isinstance(shape, SigShape):
        return dict(coalg.structure)
    if isinstance(shape, ProdShape):
        parts = [_unfold(coalg, f) for f in shape.factors]
        return {x: ("prod", tuple(p[x] for p in parts)) for x in coalg.carrier}
    if isinstance(shape, ComposeShape):
        outer = _unfold(coalg, shape.outer)
        inner = _unfold(coalg, shape.inner)
        outer_expr = shape_functor(shape.outer, coalg.functor)
        return {
            x: map_inner(outer_expr, lambda leaf: inner[leaf[1]], outer[x])
            for x in coalg.carrier
        }
    raise TypeError(f"not a path shape: {shape!r}")


# ---------------------------------------------------------------------------
# Homomorphisms and covariety operations.

def is_homomorphism(h: StateMap, source: Coalgebra, target: Coalgebra) -> bool:
    """Whether ``h`` commutes with the two structure maps."""
    if source.functor != target.functor:
        raise NonConformant("the two coalgebras have different signatures")
    if h.source != source.carrier or h.target != target.carrier:
        raise NonConformant("the map does not connect the two carriers")
    f = h.mapping
    return all(
        fmap(source.functor, f, source.structure[x]) == target.structure[f[x]]
        for x in source.carrier
    )


def coproduct(parts: list[Coalgebra]):
    """Disjoint union of coalgebras over one signature.

    States of the i-th summand are renamed to ``"i.name"``.  Returns the
    sum together with the injections, which are checked to be
    homomorphisms.
    """
    if not parts:
        raise ValueError("coproduct of an empty family is not supported")
    functor = parts[0].functor
    if any(c.functor != functor for c in parts):
        raise NonConformant("coproduct summands must share one signature")
    names = [f"{i}.{x}" for i, c in enumerate(parts) for x in c.carrier]
    carrier = Carrier(names)
    structure = {}
    injections = []
    for i, c in enumerate(parts):
        inj = {x: f"{i}.{x}" for x in c.carrier}
        for x in c.carrier:
            structure[inj[x]] = fmap(functor, inj, c.structure[x])
        injections.append(StateMap(c.carrier, carrier, inj))
    total = Coalgebra(functor, carrier, structure)
    for c, inj in zip(parts, injections):
        if not is_homomorphism(inj, c, total):
            raise NonConformant("coproduct injection failed the homomorphism check")
    return total, injections


def image(coalg: Coalgebra, h: StateMap) -> Coalgebra:
    """Quotient along a surjection whose kernel respects one-step behaviour.

    Raises :class:`NotACongruence` with a witness pair when two identified
    states have different images of their structure under ``h``; otherwise
    returns the unique structure on the target making ``h`` a homomorphism.
    """
    if h.source != coalg.carrier:
        raise NonConformant("map source does not match the carrier")
    if not h.is_surjective():
        raise NonConformant("homomorphic images require a surjective map")
    pushed = {}
    representative = {}
    for x in coalg.carrier:
        q = h[x]
        v = fmap(coalg.functor, h.mapping, coalg.structure[x])
        if q in pushed and pushed[q] != v:
            raise NotACongruence((representative[q], x))
        pushed[q] = v
        representative.setdefault(q, x)
    return Coalgebra(coalg.functor, h.target, pushed)


def is_subcoalgebra(subset, coalg: Coalgebra, budget: int = DEFAULT_BUDGET):
    """Decide closure of a subset of states under the structure map.

    Membership of each state's structure in the functor applied to the
    subset is tested against the enumeration of that smaller set, embedded
    along the inclusion (which preserves names, so the embedding is the
    identity on values).  Returns ``(closed, witness)``.
    """
    subset = list(subset)
    for u in subset:
        if u not in coalg.carrier:
            raise NonConformant(f"{u!r} is not a state")
    sub_carrier = Carrier([x for x in coalg.carrier if x in set(subset)])
    allowed = set(enumerate_values(coalg.functor, sub_carrier, budget))
    for u in sub_carrier:
        if coalg.structure[u] not in allowed:
            return False, u
    return True, None


def restrict(subset, coalg: Coalgebra, budget: int = DEFAULT_BUDGET) -> Coalgebra:
    """The induced coalgebra on a closed subset; raises :class:`NotClosed` otherwise."""
    closed, witness = is_subcoalgebra(subset, coalg, budget)
    if not closed:
        raise NotClosed(witness)
    sub_carrier = Carrier([x for x in coalg.carrier if x in set(subset)])
    return Coalgebra(coalg.functor, sub_carrier, {u: coalg.structure[u] for u in sub_carrier})


# ---------------------------------------------------------------------------
# Builders for the three stock system families.

def moore_value(output, successors, letters) -> Value:
    return (
        "prod",
        (
            ("const", output),
            ("exp", tuple((a, ("id", successors[a])) for a in letters)),
        ),
    )


def moore_coalgebra(outputs, letters, spec) -> Coalgebra:
    """Build a Moore automaton from ``{state: (output, {letter: successor})}``."""
    from .functors import moore_functor

    letters = tuple(letters)
    functor = moore_functor(outputs, letters)
    structure = {
        x: moore_value(out, succ, letters) for x, (out, succ) in spec.items()
    }
    return Coalgebra(functor, Carrier(spec.keys()), structure)


def transition_system(edges) -> Coalgebra:
    """Build a transition system from ``{state: iterable of successors}``."""
    from .functors import ts_functor

    structure = {
        x: ("set", tuple(sorted(("id", y) for y in set(succs))))
        for x, succs in edges.items()
    }
    return Coalgebra(ts_functor(), Carrier(edges.keys()), structure)


def labelled_system(letters, edges) -> Coalgebra:
    """Build a labelled transition system from ``{state: iterable of (letter, successor)}``."""
    from .functors import lts_functor

    structure = {
        x: (
            "set",
            tuple(
                sorted(
                    ("prod", (("const", a), ("id", y))) for a, y in set(pairs)
                )
            ),
        )
        for x, pairs in edges.items()
    }
    return Coalgebra(lts_functor(letters), Carrier(edges.keys()), structure)
