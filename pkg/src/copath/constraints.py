"""Equational and predicate path constraints over finite coalgebras.

A constraint pairs a path shape ``J`` with two ways of extracting a value
from every ``J``-unfolding; a coalgebra satisfies it when both extractions
agree at every state.  Extractions are written in a closed combinator
language of natural transformations, so naturality (which the closure
theory needs) holds by construction rather than by trust in user code:

    IdT                 J => J
    Proj(i)             J_0 x ... x J_k => J_i
    Tuple(t_1,...)      J => H_1 x ... x H_k     (pairing)
    Comp(outer, inner)  outer . inner            (inner first)
    Whisker(K, t)       K.J => K.H, applying t under one K layer
    Der(a)              (B x Id^A) . J => J      (follow input a)
    Out                 (B x Id^A) . J => B      (read the output)
    Singleton           J => Pow.J               x |-> {x}
    Empty               J => Pow.J               x |-> {}
    Union               Pow.Pow.J => Pow.J       flatten
    BinUnion            Pow.J x Pow.J => Pow.J
    Strength            Id x Pow.J => Pow.(Id x J)
    Insert              Id x Pow => Pow          (x, U) |-> {x} u U
    PiLetter(a)         Pow.((A x Id).J) => Pow.J   a-labelled members

Type checking is bidirectional: given a source shape, the target shape of a
term is inferred.  Shapes are normalised to composition chains of atoms so
that whiskering and the letter projections can peel one layer at a time.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .coalgebra import (
    Coalgebra,
    ComposeShape,
    IdShape,
    PathShape,
    ProdShape,
    SigShape,
    StateMap,
    path_unfold,
    shape_functor,
    sig_power,
)
from .errors import NonConformant, TypeMismatch, UnknownBuiltin
from .functors import (
    DEFAULT_BUDGET,
    Carrier,
    Const,
    FinPow,
    FunctorExpr,
    Identity,
    Prod,
    Value,
    compose,
    enumerate_values,
    fmap,
    lts_parts,
    map_inner,
    moore_parts,
)

# ---------------------------------------------------------------------------
# Shape chains.  A chain is a tuple of atoms read outermost-first; the empty
# chain is the identity.  An atom is either a plain functor expression or a
# product of chains.


@dataclass(frozen=True)
class ProdAtom:
    chains: tuple

    def __init__(self, chains):
        object.__setattr__(self, "chains", tuple(tuple(c) for c in chains))


def resolve_shape(shape, ambient: FunctorExpr) -> tuple:
    """Normalise a path shape (or bare functor expression) to an atom chain."""
    if isinstance(shape, FunctorExpr):
        return (shape,) if shape != Identity() else ()
    if isinstance(shape, IdShape):
        return ()
    if isinstance(shape, SigShape):
        return (ambient,)
    if isinstance(shape, ProdShape):
        return (ProdAtom(tuple(resolve_shape(f, ambient) for f in shape.factors)),)
    if isinstance(shape, ComposeShape):
        return resolve_shape(shape.outer, ambient) + resolve_shape(shape.inner, ambient)
    raise TypeError(f"not a path shape: {shape!r}")


def chain_functor(chain) -> FunctorExpr:
    """Collapse an atom chain to one functor expression by substitution."""
    result: FunctorExpr = Identity()
    for atom in reversed(chain):
        result = compose(_atom_functor(atom), result)
    return result


def _atom_functor(atom) -> FunctorExpr:
    if isinstance(atom, ProdAtom):
        return Prod(tuple(chain_functor(c) for c in atom.chains))
    return atom


# ---------------------------------------------------------------------------
# Transformation terms.


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class IdT(Term):
    pass


@dataclass(frozen=True)
class Proj(Term):
    index: int


@dataclass(frozen=True)
class Tuple(Term):
    parts: tuple

    def __init__(self, parts):
        object.__setattr__(self, "parts", tuple(parts))


@dataclass(frozen=True)
class Comp(Term):
    outer: Term
    inner: Term


@dataclass(frozen=True)
class Whisker(Term):
    layer: object  # PathShape or FunctorExpr
    body: Term


@dataclass(frozen=True)
class Der(Term):
    letter: str


@dataclass(frozen=True)
class Out(Term):
    pass


@dataclass(frozen=True)
class Singleton(Term):
    pass


@dataclass(frozen=True)
class Empty(Term):
    pass


@dataclass(frozen=True)
class Union(Term):
    pass


@dataclass(frozen=True)
class BinUnion(Term):
    pass


@dataclass(frozen=True)
class Strength(Term):
    pass


@dataclass(frozen=True)
class Insert(Term):
    pass


@dataclass(frozen=True)
class PiLetter(Term):
    letter: str


_POW = FinPow()


def check_term(term: Term, source: tuple, ambient: FunctorExpr) -> tuple:
    """Infer the target chain of ``term`` at the given source chain.

    Raises :class:`TypeMismatch` when the term cannot be applied.
    """
    if isinstance(term, IdT):
        return source
    if isinstance(term, Proj):
        if len(source) != 1 or not isinstance(source[0], ProdAtom):
            raise TypeMismatch(f"projection needs a product source, got {source!r}")
        chains = source[0].chains
        if not 0 <= term.index < len(chains):
            raise TypeMismatch(f"projection index {term.index} out of range")
        return chains[term.index]
    if isinstance(term, Tuple):
        return (ProdAtom(tuple(check_term(t, source, ambient) for t in term.parts)),)
    if isinstance(term, Comp):
        return check_term(term.outer, check_term(term.inner, source, ambient), ambient)
    if isinstance(term, Whisker):
        layer = resolve_shape(term.layer, ambient)
        if source[: len(layer)] != layer:
            raise TypeMismatch(f"cannot whisker {layer!r} off the source {source!r}")
        return layer + check_term(term.body, source[len(layer):], ambient)
    if isinstance(term, Der):
        parts = moore_parts(ambient)
        if parts is None:
            raise TypeMismatch("input derivatives need a Moore signature")
        if not source or source[0] != ambient:
            raise TypeMismatch(f"derivative needs the signature on top of {source!r}")
        if term.letter not in parts[1]:
            raise TypeMismatch(f"letter {term.letter!r} is not in the input alphabet")
        return source[1:]
    if isinstance(term, Out):
        parts = moore_parts(ambient)
        if parts is None:
            raise TypeMismatch("outputs need a Moore signature")
        if not source or source[0] != ambient:
            raise TypeMismatch(f"output needs the signature on top of {source!r}")
        return (Const(parts[0]),)
    if isinstance(term, Singleton) or isinstance(term, Empty):
        return (_POW,) + source
    if isinstance(term, Union):
        if len(source) < 2 or source[0] != _POW or source[1] != _POW:
            raise TypeMismatch(f"union needs two powerset layers, got {source!r}")
        return source[1:]
    if isinstance(term, BinUnion):
        if (
            len(source) != 1
            or not isinstance(source[0], ProdAtom)
            or len(source[0].chains) != 2
        ):
            raise TypeMismatch(f"binary union needs a pair source, got {source!r}")
        c1, c2 = source[0].chains
        if c1 != c2 or not c1 or c1[0] != _POW:
            raise TypeMismatch(f"binary union needs two equal powerset chains, got {source!r}")
        return c1
    if isinstance(term, Strength):
        if (
            len(source) != 1
            or not isinstance(source[0], ProdAtom)
            or len(source[0].chains) != 2
            or source[0].chains[0] != ()
            or not source[0].chains[1]
            or source[0].chains[1][0] != _POW
        ):
            raise TypeMismatch(f"strength needs a source Id x Pow.J, got {source!r}")
        rest = source[0].chains[1][1:]
        return (_POW, ProdAtom(((), rest)))
    if isinstance(term, Insert):
        if source != (ProdAtom(((), (_POW,))),):
            raise TypeMismatch(f"insert needs the source Id x Pow, got {source!r}")
        return (_POW,)
    if isinstance(term, PiLetter):
        if not source:
            raise TypeMismatch("letter projection needs a non-empty source")
        letters = lts_parts(source[0]) if isinstance(source[0], FunctorExpr) else None
        if letters is None or term.letter not in letters:
            raise TypeMismatch(
                f"letter projection needs a labelled transition layer with {term.letter!r}"
            )
        return (_POW,) + source[1:]
    raise TypeError(f"not a transformation term: {term!r}")


def eval_nat(term: Term, value: Value, ambient: FunctorExpr) -> Value:
    """Evaluate a transformation term at one value.

    Evaluation is structural; run :func:`check_term` first when the term
    comes from untrusted input.  Shape errors surface as
    :class:`TypeMismatch`.
    """
    try:
        return _eval(term, value, ambient)
    except (IndexError, KeyError, StopIteration) as exc:
        raise TypeMismatch(f"term {term!r} does not fit value {value!r}") from exc


def _eval(term, v, ambient):
    if isinstance(term, IdT):
        return v
    if isinstance(term, Proj):
        return v[1][term.index]
    if isinstance(term, Tuple):
        return ("prod", tuple(_eval(t, v, ambient) for t in term.parts))
    if isinstance(term, Comp):
        return _eval(term.outer, _eval(term.inner, v, ambient), ambient)
    if isinstance(term, Whisker):
        expr = chain_functor(resolve_shape(term.layer, ambient))
        return map_inner(expr, lambda sub: _eval(term.body, sub, ambient), v)
    if isinstance(term, Der):
        entries = v[1][1][1]
        for a, sub in entries:
            if a == term.letter:
                return sub
        raise TypeMismatch(f"no branch for input {term.letter!r}")
    if isinstance(term, Out):
        return v[1][0]
    if isinstance(term, Singleton):
        return ("set", (v,))
    if isinstance(term, Empty):
        return ("set", ())
    if isinstance(term, Union):
        return ("set", tuple(sorted({m for s in v[1] for m in s[1]})))
    if isinstance(term, BinUnion):
        s1, s2 = v[1]
        return ("set", tuple(sorted(set(s1[1]) | set(s2[1]))))
    if isinstance(term, Strength):
        x, us = v[1]
        return ("set", tuple(sorted(("prod", (x, u)) for u in us[1])))
    if isinstance(term, Insert):
        x, us = v[1]
        return ("set", tuple(sorted(set(us[1]) | {x})))
    if isinstance(term, PiLetter):
        return (
            "set",
            tuple(sorted({m[1][1] for m in v[1] if m[1][0][1] == term.letter})),
        )
    raise TypeError(f"not a transformation term: {term!r}")


# ---------------------------------------------------------------------------
# Constraints.


@dataclass(frozen=True)
class EquationalConstraint:
    """Two extractions over one path shape that must agree pointwise."""

    functor: FunctorExpr
    shape: PathShape
    left: Term
    right: Term
    name: str = "constraint"

    def __post_init__(self):
        src = resolve_shape(self.shape, self.functor)
        lt = check_term(self.left, src, self.functor)
        rt = check_term(self.right, src, self.functor)
        if lt != rt:
            raise TypeMismatch(
                f"left and right sides have different targets: {lt!r} vs {rt!r}"
            )
        object.__setattr__(self, "_target", lt)

    @property
    def target(self):
        return self._target


PREDICATES = {}


def predicate(name):
    def register(fn):
        PREDICATES[name] = fn
        return fn

    return register


@predicate("deterministic")
def _is_function_graph(v: Value, ambient: FunctorExpr) -> bool:
    letters = lts_parts(ambient)
    counts = Counter(m[1][0][1] for m in v[1])
    return all(counts[a] == 1 for a in letters) and sum(counts.values()) == len(letters)


@dataclass(frozen=True)
class PredicateConstraint:
    """A decidable, renaming-invariant predicate on unfoldings of one shape."""

    functor: FunctorExpr
    shape: PathShape
    predicate: str
    name: str = "predicate"

    def __post_init__(self):
        if self.predicate not in PREDICATES:
            raise UnknownBuiltin(f"unknown predicate {self.predicate!r}")

    def holds_on(self, v: Value) -> bool:
        return PREDICATES[self.predicate](v, self.functor)


@dataclass(frozen=True)
class ConstraintSystem:
    constraints: tuple

    def __init__(self, constraints):
        constraints = tuple(constraints)
        functors = {k.functor for k in constraints}
        if len(functors) > 1:
            raise NonConformant("all constraints in a system must share one signature")
        object.__setattr__(self, "constraints", constraints)

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)


@dataclass(frozen=True)
class SatResult:
    holds: bool
    state: str | None = None
    left: Value | None = None
    right: Value | None = None
    constraint: str | None = None

    def __bool__(self):
        return self.holds


def satisfies(coalg: Coalgebra, constraint, budget: int = DEFAULT_BUDGET) -> SatResult:
    """Check a constraint at every state; on failure report the first witness."""
    if coalg.functor != constraint.functor:
        raise NonConformant("constraint and coalgebra have different signatures")
    unfolding = path_unfold(coalg, constraint.shape, budget)
    if isinstance(constraint, PredicateConstraint):
        for x in coalg.carrier:
            if not constraint.holds_on(unfolding[x]):
                return SatResult(False, x, unfolding[x], None, constraint.name)
        return SatResult(True, constraint=constraint.name)
    for x in coalg.carrier:
        lhs = eval_nat(constraint.left, unfolding[x], coalg.functor)
        rhs = eval_nat(constraint.right, unfolding[x], coalg.functor)
        if lhs != rhs:
            return SatResult(False, x, lhs, rhs, constraint.name)
    return SatResult(True, constraint=constraint.name)


def satisfies_system(coalg: Coalgebra, system: ConstraintSystem, budget: int = DEFAULT_BUDGET) -> SatResult:
    for k in system:
        res = satisfies(coalg, k, budget)
        if not res:
            return res
    return SatResult(True)


def subfunctor_extension(constraint, carrier: Carrier, budget: int = DEFAULT_BUDGET) -> frozenset:
    """The extension of the constraint's subfunctor at one carrier.

    Filters the full enumeration of the shape, keeping the values on which
    both extractions agree (or the predicate holds).  This is the
    extensional equaliser, independent of any coalgebra.
    """
    expr = shape_functor(constraint.shape, constraint.functor)
    values = enumerate_values(expr, carrier, budget)
    if isinstance(constraint, PredicateConstraint):
        return frozenset(v for v in values if constraint.holds_on(v))
    return frozenset(
        v
        for v in values
        if eval_nat(constraint.left, v, constraint.functor)
        == eval_nat(constraint.right, v, constraint.functor)
    )


def satisfies_via_subfunctor(
    coalg: Coalgebra,
    constraint,
    budget: int = DEFAULT_BUDGET,
    extension: frozenset | None = None,
) -> SatResult:
    """The second route to satisfaction: membership in the filtered subfunctor.

    A precomputed ``extension`` (from :func:`subfunctor_extension` at this
    coalgebra's carrier) may be supplied to share work across coalgebras on
    one carrier.
    """
    if coalg.functor != constraint.functor:
        raise NonConformant("constraint and coalgebra have different signatures")
    if extension is None:
        extension = subfunctor_extension(constraint, coalg.carrier, budget)
    unfolding = path_unfold(coalg, constraint.shape, budget)
    for x in coalg.carrier:
        if unfolding[x] not in extension:
            return SatResult(False, x, unfolding[x], None, constraint.name)
    return SatResult(True, constraint=constraint.name)


def check_naturality(
    term: Term,
    shape: PathShape,
    ambient: FunctorExpr,
    f: StateMap,
    budget: int = DEFAULT_BUDGET,
):
    """Test the naturality square of ``term`` at one carrier map.

    Returns ``(natural, witness)`` where the witness is the first source
    value on which the square fails to commute.
    """
    source = resolve_shape(shape, ambient)
    target = check_term(term, source, ambient)
    j_expr = chain_functor(source)
    h_expr = chain_functor(target)
    for v in enumerate_values(j_expr, f.source, budget):
        lhs = fmap(h_expr, f.mapping, eval_nat(term, v, ambient))
        rhs = eval_nat(term, fmap(j_expr, f.mapping, v), ambient)
        if lhs != rhs:
            return False, v
    return True, None


def check_naturality_raw(j_expr, h_expr, family, f: StateMap, budget: int = DEFAULT_BUDGET):
    """Naturality test for a raw per-carrier function family.

    ``family(carrier)`` must return the component at that carrier.  Used to
    demonstrate that genuinely non-natural operations fail the square.
    """
    at_src = family(f.source)
    at_tgt = family(f.target)
    for v in enumerate_values(j_expr, f.source, budget):
        lhs = fmap(h_expr, f.mapping, at_src(v))
        rhs = at_tgt(fmap(j_expr, f.mapping, v))
        if lhs != rhs:
            return False, v
    return True, None


# ---------------------------------------------------------------------------
# Built-in constraints.


def word_derivative(word) -> Term:
    """Follow the letters of ``word`` in order through a Moore unfolding."""
    term: Term = IdT()
    for a in reversed(tuple(word)):
        term = Der(a) if isinstance(term, IdT) else Comp(Der(a), Whisker(SigShape(), term))
    return term


def projection_word(word) -> Term:
    """The set of states reachable by the trace ``word`` in a labelled system."""
    word = tuple(word)
    if not word:
        return Singleton()
    head, tail = word[0], word[1:]
    return Comp(Union(), Comp(Whisker(FinPow(), projection_word(tail)), PiLetter(head)))


def word_equation(functor: FunctorExpr, w, u) -> EquationalConstraint:
    """The constraint equating the endpoints of the traces ``w`` and ``u``."""
    w, u = tuple(w), tuple(u)
    parts = moore_parts(functor)
    if parts is None:
        raise TypeMismatch("word equations need a Moore signature")
    for a in w + u:
        if a not in parts[1]:
            raise TypeMismatch(f"letter {a!r} is not in the input alphabet")
    label = f"word_equation({''.join(w)},{''.join(u)})"
    if len(w) == len(u):
        return EquationalConstraint(
            functor, sig_power(len(w)), word_derivative(w), word_derivative(u), label
        )
    shape = ProdShape((sig_power(len(w)), sig_power(len(u))))
    return EquationalConstraint(
        functor,
        shape,
        Comp(word_derivative(w), Proj(0)),
        Comp(word_derivative(u), Proj(1)),
        label,
    )


def builtin(name: str, params, functor: FunctorExpr):
    """Construct one of the named constraints over the given signature."""
    params = list(params)
    if name == "commutativity":
        a, b = params
        return word_equation(functor, (a, b), (b, a))
    if name == "word_equation":
        w, u = params
        return word_equation(functor, tuple(w), tuple(u))
    if name == "transitivity":
        if functor != FinPow():
            raise TypeMismatch("transitivity is a transition system constraint")
        shape = ProdShape((SigShape(), ComposeShape(SigShape(), SigShape())))
        rho = Comp(BinUnion(), Tuple((Proj(0), Comp(Union(), Proj(1)))))
        return EquationalConstraint(functor, shape, Proj(0), rho, "transitivity")
    if name == "symmetry":
        if functor != FinPow():
            raise TypeMismatch("symmetry is a transition system constraint")
        shape = ProdShape((IdShape(), ComposeShape(SigShape(), SigShape())))
        rho = Comp(Whisker(FinPow(), Insert()), Strength())
        return EquationalConstraint(functor, shape, Proj(1), rho, "symmetry")
    if name == "determinism":
        if lts_parts(functor) is None:
            raise TypeMismatch("determinism is a labelled transition system constraint")
        return PredicateConstraint(functor, SigShape(), "deterministic", "determinism")
    if name == "independence":
        a, b = params
        letters = lts_parts(functor)
        if letters is None:
            raise TypeMismatch("independence is a labelled transition system constraint")
        if a not in letters or b not in letters:
            raise TypeMismatch(f"letters {a!r}, {b!r} must be in the alphabet")
        shape = ComposeShape(SigShape(), SigShape())
        return EquationalConstraint(
            functor,
            shape,
            projection_word((a, b)),
            projection_word((b, a)),
            f"independence({a},{b})",
        )
    raise UnknownBuiltin(f"no built-in constraint named {name!r}")


def system_from_relations(functor: FunctorExpr, relations) -> ConstraintSystem:
    """One word equation per relation pair, as a system."""
    return ConstraintSystem([word_equation(functor, w, u) for w, u in relations])
