"""Exhaustive and seeded generators of small coalgebras.

Everything here is deterministic: exhaustive enumerations walk carriers in
canonical order, and the random generators are driven by an explicit
``random.Random`` instance so a fixed seed reproduces the same stream.
"""

from __future__ import annotations

import random
from itertools import product as iproduct

from .coalgebra import Coalgebra, labelled_system, moore_coalgebra, transition_system


def state_names(n: int) -> list[str]:
    return [f"q{i}" for i in range(n)]


def all_moore(n: int, letters, outputs) -> list[Coalgebra]:
    """Every Moore automaton on n states, in canonical order."""
    letters = tuple(letters)
    outputs = tuple(outputs)
    states = state_names(n)
    per_state = [
        (out, dict(zip(letters, succs)))
        for out in outputs
        for succs in iproduct(states, repeat=len(letters))
    ]
    result = []
    for choice in iproduct(per_state, repeat=n):
        result.append(
            moore_coalgebra(outputs, letters, dict(zip(states, choice)))
        )
    return result


def all_transition_systems(n: int) -> list[Coalgebra]:
    """Every transition system on n states (all 2^(n*n) edge relations)."""
    states = state_names(n)
    subsets = []
    for mask in range(2 ** n):
        subsets.append([states[i] for i in range(n) if mask >> i & 1])
    result = []
    for choice in iproduct(range(2 ** n), repeat=n):
        result.append(
            transition_system({x: subsets[m] for x, m in zip(states, choice)})
        )
    return result


def all_labelled_systems(n: int, letters, max_edges=None) -> list[Coalgebra]:
    """Every labelled system on n states, optionally with a bounded edge count."""
    letters = tuple(letters)
    states = state_names(n)
    pairs = [(a, y) for a in letters for y in states]
    result = []
    for choice in iproduct(range(2 ** len(pairs)), repeat=n):
        edges = {
            x: [pairs[i] for i in range(len(pairs)) if m >> i & 1]
            for x, m in zip(states, choice)
        }
        if max_edges is not None and sum(len(v) for v in edges.values()) > max_edges:
            continue
        result.append(labelled_system(letters, edges))
    return result


def random_moore(rng: random.Random, n: int, letters, outputs) -> Coalgebra:
    letters = tuple(letters)
    outputs = tuple(outputs)
    states = state_names(n)
    spec = {
        x: (rng.choice(outputs), {a: rng.choice(states) for a in letters})
        for x in states
    }
    return moore_coalgebra(outputs, letters, spec)


def random_transition_system(rng: random.Random, n: int, edge_prob=0.4) -> Coalgebra:
    states = state_names(n)
    return transition_system(
        {x: [y for y in states if rng.random() < edge_prob] for x in states}
    )


def random_labelled_system(rng: random.Random, n: int, letters, edge_prob=0.3) -> Coalgebra:
    letters = tuple(letters)
    states = state_names(n)
    return labelled_system(
        letters,
        {
            x: [(a, y) for a in letters for y in states if rng.random() < edge_prob]
            for x in states
        },
    )


def sample_satisfying(rng, make, accept, count, max_tries=100000):
    """Rejection-sample ``count`` instances with ``accept(instance)`` true."""
    found = []
    for _ in range(max_tries):
        candidate = make(rng)
        if accept(candidate):
            found.append(candidate)
            if len(found) == count:
                return found
    raise RuntimeError(f"only found {len(found)} of {count} instances")


def set_partitions(items):
    """All partitions of a finite sequence, as lists of blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        for i in range(len(partition)):
            yield partition[:i] + [[first] + partition[i]] + partition[i + 1:]
        yield [[first]] + partition


def subsets(items):
    items = list(items)
    for mask in range(2 ** len(items)):
        yield [items[i] for i in range(len(items)) if mask >> i & 1]
