"""Behavioural equivalence, finite finality approximants, and monoid-indexed automata.

The pieces fit together as follows.  Partition refinement decides
behavioural equivalence on any finite coalgebra in the functor grammar.
The terminal sequence gives finite approximants of the final coalgebra for
a signature, and the terminal net extends it with dedicated levels for a
system of single-iterate equational constraints.  From a monoid
presentation with a decidable bounded word problem we build the Moore
automaton carried by functions from the monoid into the output set, which
is final among the automata satisfying the induced word equations; a
report-producing witness check verifies the finality properties that are
checkable at this scale (simplicity, existence of a behaviour map into it,
uniqueness against exhaustive search on small test automata).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct

from .coalgebra import Coalgebra, StateMap, image, is_homomorphism, step_n
from .constraints import (
    ConstraintSystem,
    SatResult,
    satisfies_system,
    system_from_relations,
)
from .errors import (
    BudgetExceeded,
    NonConformant,
    NonSingularConstraint,
    NotClosedWithinBound,
    NotSatisfying,
)
from .functors import (
    DEFAULT_BUDGET,
    Carrier,
    FunctorExpr,
    Value,
    cardinality,
    compose_power,
    enumerate_values,
    fmap,
    map_inner,
    moore_functor,
    moore_parts,
    render_value,
)

ONE = Carrier(["*"])


# ---------------------------------------------------------------------------
# Moore navigation helpers.

def moore_output(coalg: Coalgebra, x) -> str:
    return coalg.structure[x][1][0][1]


def moore_step(coalg: Coalgebra, x, letter) -> str:
    for a, leaf in coalg.structure[x][1][1][1]:
        if a == letter:
            return leaf[1]
    raise KeyError(letter)


def follow_word(coalg: Coalgebra, x, word) -> str:
    for a in word:
        x = moore_step(coalg, x, a)
    return x


def output_language(coalg: Coalgebra, x, depth: int) -> dict:
    """Outputs of all states reachable by words of length at most ``depth``."""
    parts = moore_parts(coalg.functor)
    if parts is None:
        raise NonConformant("output languages need a Moore signature")
    letters = parts[1]
    table = {"": moore_output(coalg, x)}
    frontier = {"": x}
    for _ in range(depth):
        new_frontier = {}
        for w, y in frontier.items():
            for a in letters:
                z = moore_step(coalg, y, a)
                new_frontier[w + a] = z
                table[w + a] = moore_output(coalg, z)
        frontier = new_frontier
    return table


# ---------------------------------------------------------------------------
# Partition refinement.

@dataclass(frozen=True)
class Partition:
    carrier: Carrier
    blocks: tuple

    def __init__(self, carrier, blocks):
        blocks = tuple(tuple(b) for b in blocks)
        seen = [x for b in blocks for x in b]
        if sorted(seen) != sorted(carrier.elements) or len(seen) != len(set(seen)):
            raise NonConformant("blocks must partition the carrier")
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "blocks", blocks)

    def block_of(self, x) -> tuple:
        for b in self.blocks:
            if x in b:
                return b
        raise KeyError(x)

    @property
    def is_discrete(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    def __len__(self):
        return len(self.blocks)


@dataclass(frozen=True)
class MinimizeResult:
    partition: Partition
    quotient: Coalgebra
    projection: StateMap


def minimize(coalg: Coalgebra) -> MinimizeResult:
    """Coarsest behaviour-respecting partition, with the quotient coalgebra.

    Blocks are split by the image of each state's structure under the
    current block labelling until a fixpoint; block ids are the
    lexicographically smallest member names, so the result is canonical.
    """
    states = coalg.carrier.elements
    label = {x: 0 for x in states}
    while True:
        signature = {
            x: (label[x], fmap(coalg.functor, lambda y: str(label[y]), coalg.structure[x]))
            for x in states
        }
        order = {}
        for x in states:
            order.setdefault(signature[x], len(order))
        new_label = {x: order[signature[x]] for x in states}
        if len(order) == len(set(label.values())):
            break
        label = new_label
    groups = {}
    for x in states:
        groups.setdefault(label[x], []).append(x)
    blocks = sorted(groups.values(), key=lambda b: states.index(b[0]))
    partition = Partition(coalg.carrier, blocks)
    ids = {x: min(b) for b in partition.blocks for x in b}
    quotient_carrier = Carrier(
        sorted({min(b) for b in partition.blocks}, key=lambda r: states.index(r))
    )
    projection = StateMap(coalg.carrier, quotient_carrier, ids)
    quotient = image(coalg, projection)
    if not is_homomorphism(projection, coalg, quotient):
        raise NonConformant("refinement produced a non-homomorphic projection")
    return MinimizeResult(partition, quotient, projection)


def behaviourally_equivalent(coalg: Coalgebra, x, y) -> bool:
    result = minimize(coalg)
    return result.projection[x] == result.projection[y]


# ---------------------------------------------------------------------------
# Terminal sequence.

@dataclass(frozen=True)
class TerminalSequence:
    """Finite levels of iterated applications to the singleton, with projections.

    ``levels[k]`` lists the elements of the k-th iterate applied to the
    one-element carrier; ``projections[k]`` maps each level k+1 element to
    its level k shadow (the functor's action on the unique map).
    """

    functor: FunctorExpr
    levels: tuple
    projections: tuple

    def carrier_at(self, k) -> Carrier:
        return Carrier([render_value(v) for v in self.levels[k]])


def connect_value(functor: FunctorExpr, k: int, v: Value) -> Value:
    """The level k+1 to level k projection applied to one value."""
    return map_inner(compose_power(functor, k), lambda sub: ("id", "*"), v)


def terminal_sequence(functor: FunctorExpr, depth: int, budget: int = DEFAULT_BUDGET) -> TerminalSequence:
    levels = []
    projections = []
    for k in range(depth + 1):
        levels.append(tuple(enumerate_values(compose_power(functor, k), ONE, budget)))
    for k in range(depth):
        step = {}
        allowed = set(levels[k])
        for v in levels[k + 1]:
            w = connect_value(functor, k, v)
            if w not in allowed:
                raise NonConformant("projection left the previous level")
            step[v] = w
        projections.append(step)
    return TerminalSequence(functor, tuple(levels), tuple(projections))


def behaviour_at_depth(coalg: Coalgebra, k: int, budget: int = DEFAULT_BUDGET) -> dict:
    """Each state's depth-k behaviour: the k-step unfolding with states erased."""
    table = step_n(coalg, k, budget)
    expr = compose_power(coalg.functor, k)
    return {x: fmap(expr, lambda _: "*", table[x]) for x in coalg.carrier}


# ---------------------------------------------------------------------------
# Terminal net approximants.

def _singular_length(constraint, ambient) -> int:
    """The iterate count n with the constraint's shape equal to F^n, else raise."""
    from .constraints import resolve_shape

    chain = resolve_shape(constraint.shape, ambient)
    if any(atom != ambient for atom in chain):
        raise NonSingularConstraint(
            f"constraint {constraint.name!r} is not over an iterate of the signature"
        )
    if not hasattr(constraint, "left"):
        raise NonSingularConstraint(
            f"constraint {constraint.name!r} is not equational"
        )
    return len(chain)


@dataclass(frozen=True)
class NetObject:
    word: tuple
    carrier: Carrier
    values: dict  # name -> flat value over the word's expansion applied to ONE

    def __len__(self):
        return len(self.carrier)


class TerminalNet:
    """Objects and generator arrows of the constraint-extended terminal diagram.

    Words are tuples over ``"F"`` and constraint indices.  Every object is
    represented flatly: its elements are values of the word's expansion
    (constraints replaced by their iterate) applied to the one-element
    carrier, with constraint positions filtered by the constraint's
    equation.  Flat representation makes the subset inclusions literal.
    """

    def __init__(self, system: ConstraintSystem, budget: int = DEFAULT_BUDGET):
        if not len(system):
            raise NonSingularConstraint("a net needs at least one constraint")
        self.system = system
        self.functor = system.constraints[0].functor
        self.lengths = [_singular_length(k, self.functor) for k in system]
        self.budget = budget
        self._objects = {(): NetObject((), ONE, {"*": ("id", "*")})}

    def _check_word(self, word):
        word = tuple(word)
        for sym in word:
            if sym != "F" and not (isinstance(sym, int) and 0 <= sym < len(self.system)):
                raise NonSingularConstraint(f"unknown net symbol {sym!r}")
        return word

    def object(self, word) -> NetObject:
        word = self._check_word(word)
        if word in self._objects:
            return self._objects[word]
        base = self.object(word[1:])
        sym = word[0]
        power = 1 if sym == "F" else self.lengths[sym]
        expr = compose_power(self.functor, power)
        if cardinality(expr, len(base.carrier)) > self.budget:
            raise BudgetExceeded(cardinality(expr, len(base.carrier)), self.budget)
        shallow = enumerate_values(expr, base.carrier, self.budget)
        flat = [
            map_inner(expr, lambda leaf: base.values[leaf[1]], v) for v in shallow
        ]
        if sym != "F":
            constraint = self.system.constraints[sym]
            from .constraints import eval_nat

            flat = [
                v
                for v in flat
                if eval_nat(constraint.left, v, self.functor)
                == eval_nat(constraint.right, v, self.functor)
            ]
        flat = sorted(set(flat))
        obj = NetObject(
            word,
            Carrier([render_value(v) for v in flat]),
            {render_value(v): v for v in flat},
        )
        self._objects[word] = obj
        return obj

    def bang(self, word) -> dict:
        """The arrow into the empty-word object."""
        return {name: "*" for name in self.object(word).carrier}

    def expansion(self, word) -> tuple:
        """The word with every constraint symbol replaced by signature steps."""
        out = []
        for sym in self._check_word(word):
            out.extend(["F"] * (1 if sym == "F" else self.lengths[sym]))
        return tuple(out)

    def inclusion(self, word) -> dict:
        """For a word headed by a constraint: the subset arrow into its expansion.

        Flat representation makes this the identity on element names; the
        arrow records it as an explicit map into the bigger object.
        """
        word = self._check_word(word)
        if not word or word[0] == "F":
            raise NonSingularConstraint("inclusions start at a constraint-headed word")
        target = self.object(self.expansion(word[:1]) + word[1:])
        src = self.object(word)
        for name in src.carrier:
            if name not in target.carrier:
                raise NonConformant("constraint object escaped its expansion")
        return {name: name for name in src.carrier}

    def lift(self, sym, arrow: dict, src_word, tgt_word) -> dict:
        """Apply a symbol's functor to an arrow between two objects.

        ``arrow`` maps element names of ``object(src_word)`` to element
        names of ``object(tgt_word)``; the result does the same one level
        up.  For constraint symbols the lifted arrow stays inside the
        filtered subsets, which is checked.
        """
        src_word, tgt_word = self._check_word(src_word), self._check_word(tgt_word)
        power = 1 if sym == "F" else self.lengths[self._check_word((sym,))[0]]
        expr = compose_power(self.functor, power)
        src = self.object(src_word)
        tgt = self.object(tgt_word)
        lifted_src = self.object((sym,) + src_word)
        lifted_tgt = self.object((sym,) + tgt_word)
        # the identity leaves of the symbol's iterate hold whole src elements;
        # send each through the arrow and replace it with the target's value
        by_value = {v: name for name, v in src.values.items()}
        out = {}
        for name, v in lifted_src.values.items():
            mapped = map_inner(expr, lambda sub: tgt.values[arrow[by_value[sub]]], v)
            mapped_name = render_value(mapped)
            if mapped_name not in lifted_tgt.carrier:
                raise NonConformant("lifted arrow left the target object")
            out[name] = mapped_name
        return out


# ---------------------------------------------------------------------------
# Monoid presentations.

@dataclass(frozen=True)
class Presentation:
    alphabet: tuple
    relations: tuple
    bound: int

    def __init__(self, alphabet, relations, bound):
        alphabet = tuple(alphabet)
        relations = tuple((str(w), str(u)) for w, u in relations)
        if any(len(a) != 1 for a in alphabet):
            raise NonConformant("presentation letters must be single characters")
        for w, u in relations:
            for a in w + u:
                if a not in alphabet:
                    raise NonConformant(f"relation letter {a!r} is not in the alphabet")
        longest = max((max(len(w), len(u)) for w, u in relations), default=0)
        if bound < longest:
            raise NonConformant("the closure bound must cover the relation words")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "relations", relations)
        object.__setattr__(self, "bound", bound)


@dataclass(frozen=True)
class FiniteMonoid:
    """A finite monoid with generators; laws are checked at construction."""

    elements: tuple
    unit: str
    table: dict
    generators: dict
    presentation: Presentation | None = None

    def __init__(self, elements, unit, table, generators, presentation=None):
        elements = tuple(elements)
        table = dict(table)
        generators = dict(generators)
        if unit not in elements:
            raise NonConformant("the unit must be an element")
        for a, g in generators.items():
            if g not in elements:
                raise NonConformant(f"generator image {g!r} is not an element")
        for s in elements:
            for t in elements:
                if (s, t) not in table or table[(s, t)] not in elements:
                    raise NonConformant("multiplication table is not total")
        for s in elements:
            if table[(unit, s)] != s or table[(s, unit)] != s:
                raise NonConformant("unit laws fail")
        for s in elements:
            for t in elements:
                for u in elements:
                    if table[(table[(s, t)], u)] != table[(s, table[(t, u)])]:
                        raise NonConformant("associativity fails")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "generators", generators)
        object.__setattr__(self, "presentation", presentation)

    def __len__(self):
        return len(self.elements)

    def mul(self, s, t) -> str:
        return self.table[(s, t)]

    def word_class(self, word) -> str:
        m = self.unit
        for a in word:
            m = self.mul(m, self.generators[a])
        return m


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        self.parent[max(rx, ry)] = min(rx, ry)
        return True


def _words_upto(alphabet, bound):
    words = [""]
    frontier = [""]
    for _ in range(bound):
        frontier = [w + a for w in frontier for a in alphabet]
        words.extend(frontier)
    return words


def monoid_from_presentation(pres: Presentation) -> FiniteMonoid:
    """Bounded congruence closure of the word relations.

    All words up to the bound are merged under every relation applied in
    every context that stays within the bound, to a fixpoint.  The attempt
    succeeds only if the classes are closed at the frontier: no class's
    shortest representative reaches the bound, and extending any word by a
    generator is consistent with extending its representative.  Otherwise
    :class:`NotClosedWithinBound` reports a frontier witness, the expected
    outcome for presentations of infinite monoids.
    """
    alphabet, bound = pres.alphabet, pres.bound
    words = _words_upto(alphabet, bound)
    uf = _UnionFind()
    for w in words:
        uf.find(w)
    changed = True
    while changed:
        changed = False
        for w, u in pres.relations:
            room = bound - max(len(w), len(u))
            for s in _words_upto(alphabet, room):
                rest = room - len(s)
                for t in _words_upto(alphabet, rest):
                    if uf.union(s + w + t, s + u + t):
                        changed = True
    classes = {}
    for w in words:
        classes.setdefault(uf.find(w), []).append(w)
    rep_of = {}
    for root, members in classes.items():
        rep = min(members, key=lambda w: (len(w), w))
        for w in members:
            rep_of[w] = rep
    reps = sorted(set(rep_of.values()), key=lambda w: (len(w), w))
    for rep in reps:
        if len(rep) >= bound:
            raise NotClosedWithinBound(bound, rep)
    # extension consistency: stepping any word by a generator agrees with
    # stepping its representative
    for w in words:
        for a in alphabet:
            if len(w) + 1 <= bound and rep_of[w + a] != rep_of[rep_of[w] + a]:
                raise NotClosedWithinBound(bound, w + a)
    step = {(rep, a): rep_of[rep + a] for rep in reps for a in alphabet}
    table = {}
    for s in reps:
        for t in reps:
            m = s
            for a in t:
                m = step[(m, a)]
            table[(s, t)] = m
    generators = {a: rep_of[a] for a in alphabet}
    return FiniteMonoid(reps, rep_of[""], table, generators, pres)


# ---------------------------------------------------------------------------
# Relatively final Moore automata.

@dataclass(frozen=True)
class FinalMoore:
    """The Moore automaton of all maps from a finite monoid into the outputs."""

    coalgebra: Coalgebra
    monoid: FiniteMonoid
    outputs: Carrier
    assignments: dict  # state name -> dict monoid element -> output

    def state_of(self, assignment: dict) -> str:
        return _assignment_name(self.monoid, assignment)

    def system(self) -> ConstraintSystem:
        if self.monoid.presentation is None:
            raise NonConformant("the monoid carries no presentation")
        return system_from_relations(
            self.coalgebra.functor, self.monoid.presentation.relations
        )


def _assignment_name(monoid: FiniteMonoid, assignment: dict) -> str:
    outs = [assignment[m] for m in monoid.elements]
    if all(len(o) == 1 for o in outs):
        return "".join(outs)
    return ",".join(outs)


def relative_final_moore(outputs, monoid: FiniteMonoid, budget: int = DEFAULT_BUDGET) -> FinalMoore:
    """The automaton on output-valued functions of the monoid.

    A state is a function from monoid elements to outputs; its output reads
    the unit, and an input letter shifts the function by right
    multiplication with that letter's generator.
    """
    if not isinstance(outputs, Carrier):
        outputs = Carrier(outputs)
    if monoid.presentation is None:
        raise NonConformant("relatively final automata need a presented monoid")
    size = len(outputs) ** len(monoid)
    if size > budget:
        raise BudgetExceeded(size, budget)
    letters = monoid.presentation.alphabet
    functor = moore_functor(outputs, letters)
    assignments = {}
    spec = {}
    for combo in iproduct(outputs.elements, repeat=len(monoid)):
        theta = dict(zip(monoid.elements, combo))
        name = _assignment_name(monoid, theta)
        assignments[name] = theta
        successors = {}
        for a in letters:
            shifted = {m: theta[monoid.mul(m, monoid.generators[a])] for m in monoid.elements}
            successors[a] = _assignment_name(monoid, shifted)
        spec[name] = (theta[monoid.unit], successors)
    from .coalgebra import moore_coalgebra

    coalg = moore_coalgebra(outputs, letters, spec)
    return FinalMoore(coalg, monoid, outputs, assignments)


def behaviour_into(coalg: Coalgebra, final: FinalMoore, budget: int = DEFAULT_BUDGET) -> StateMap:
    """The unique homomorphism into the relatively final automaton.

    Each state is sent to the function assigning to a monoid class the
    output reached by its representative word.  The construction refuses to
    run when the source violates the word equations, and re-verifies that
    longer words in one class give the same outputs.
    """
    system = final.system()
    if coalg.functor != final.coalgebra.functor:
        raise NonConformant("source and target have different signatures")
    verdict = satisfies_system(coalg, system, budget)
    if not verdict:
        raise NotSatisfying(verdict.state)
    monoid = final.monoid
    mapping = {}
    for x in coalg.carrier:
        theta = {
            m: moore_output(coalg, follow_word(coalg, x, m)) for m in monoid.elements
        }
        mapping[x] = final.state_of(theta)
    # well-definedness spot check: all words one letter past the longest
    # representative agree with their class representative
    max_rep = max((len(m) for m in monoid.elements), default=0)
    for w in _words_upto(monoid.presentation.alphabet, max_rep + 1):
        rep = monoid.word_class(w)
        for x in coalg.carrier:
            if moore_output(coalg, follow_word(coalg, x, w)) != moore_output(
                coalg, follow_word(coalg, x, rep)
            ):
                raise NotSatisfying(x)
    h = StateMap(coalg.carrier, final.coalgebra.carrier, mapping)
    if not is_homomorphism(h, coalg, final.coalgebra):
        raise NonConformant("behaviour map failed the homomorphism check")
    return h


# ---------------------------------------------------------------------------
# Finality witnesses.

@dataclass(frozen=True)
class FinalityEntry:
    index: int
    satisfied: bool
    hom_exists: bool | None = None
    unique: bool | None = None


@dataclass(frozen=True)
class FinalityReport:
    simple: bool
    entries: tuple

    @property
    def all_ok(self) -> bool:
        return self.simple and all(
            e.hom_exists and e.unique in (True, None)
            for e in self.entries
            if e.satisfied
        )

    @property
    def skipped(self) -> tuple:
        return tuple(e.index for e in self.entries if not e.satisfied)


def count_homomorphisms(source: Coalgebra, target: Coalgebra, limit=2) -> int:
    """Exhaustively count homomorphisms, stopping once ``limit`` are found."""
    found = 0
    states = source.carrier.elements
    for images in iproduct(target.carrier.elements, repeat=len(states)):
        h = StateMap(source.carrier, target.carrier, dict(zip(states, images)))
        if is_homomorphism(h, source, target):
            found += 1
            if found >= limit:
                return found
    return found


def finality_witness(
    final: FinalMoore,
    tests,
    uniqueness_bound: int = 4,
    budget: int = DEFAULT_BUDGET,
) -> FinalityReport:
    """Check the finite fingerprints of finality against test automata.

    The report records: whether the candidate is simple (no two states
    behaviourally equivalent, necessary for finality); for every test
    automaton satisfying the word equations, that the behaviour map exists
    and is a homomorphism; and, for tests small enough to search
    exhaustively, that it is the only homomorphism.  Violating tests are
    recorded as skipped.
    """
    simple = minimize(final.coalgebra).partition.is_discrete
    system = final.system()
    entries = []
    for i, test in enumerate(tests):
        if not satisfies_system(test, system, budget):
            entries.append(FinalityEntry(i, False))
            continue
        try:
            behaviour_into(test, final, budget)
            exists = True
        except (NotSatisfying, NonConformant):
            exists = False
        unique = None
        if exists and len(test.carrier) <= uniqueness_bound:
            unique = count_homomorphisms(test, final.coalgebra, limit=2) == 1
        entries.append(FinalityEntry(i, True, exists, unique))
    return FinalityReport(simple, tuple(entries))
