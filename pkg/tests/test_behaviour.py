import random

import pytest

from copath.behaviour import (
    FinalMoore,
    Presentation,
    TerminalNet,
    behaviour_at_depth,
    behaviour_into,
    connect_value,
    count_homomorphisms,
    finality_witness,
    minimize,
    monoid_from_presentation,
    moore_output,
    output_language,
    relative_final_moore,
    terminal_sequence,
)
from copath.coalgebra import coproduct, is_homomorphism, moore_coalgebra
from copath.constraints import ConstraintSystem, builtin, satisfies, satisfies_system, word_equation
from copath.errors import (
    NonSingularConstraint,
    NotClosedWithinBound,
    NotSatisfying,
)
from copath.functors import moore_functor, ts_functor
from copath.generate import all_moore, random_moore

MOORE_AB = moore_functor(["0", "1"], ["a", "b"])
MOORE_A = moore_functor(["0", "1"], ["a"])


# --- partition refinement ------------------------------------------------------

def test_distinguishable_states_stay_apart():
    C = moore_coalgebra(
        ["0", "1"],
        ["a", "b"],
        {"x": ("0", {"a": "y", "b": "x"}), "y": ("1", {"a": "x", "b": "y"})},
    )
    res = minimize(C)
    assert res.partition.is_discrete
    assert len(res.quotient.carrier) == 2


def test_twin_copies_merge_pairwise():
    C = moore_coalgebra(
        ["0", "1"],
        ["a", "b"],
        {"x": ("0", {"a": "y", "b": "x"}), "y": ("1", {"a": "y", "b": "x"})},
    )
    total, _ = coproduct([C, C])
    res = minimize(total)
    assert sorted(res.partition.blocks) == [("0.x", "1.x"), ("0.y", "1.y")]
    assert is_homomorphism(res.projection, total, res.quotient)


def language_equivalence_classes(C):
    depth = len(C.carrier) - 1
    tables = {x: tuple(sorted(output_language(C, x, depth).items())) for x in C.carrier}
    classes = {}
    for x in C.carrier:
        classes.setdefault(tables[x], []).append(x)
    return sorted(sorted(block) for block in classes.values())


def test_minimize_agrees_with_the_word_language_oracle():
    # exhaustive on all two-letter automata up to 3 states and one-letter up
    # to 4 states; the full two-letter 4-state space is around a million
    # instances, so it is covered by a seeded sample instead
    instances = []
    for n in (1, 2, 3):
        instances.extend(all_moore(n, ["a", "b"], ["0", "1"]))
    instances.extend(all_moore(4, ["a"], ["0", "1"]))
    rng = random.Random(7)
    instances.extend(random_moore(rng, 4, ["a", "b"], ["0", "1"]) for _ in range(300))
    for C in instances:
        refined = sorted(sorted(b) for b in minimize(C).partition.blocks)
        assert refined == language_equivalence_classes(C)


# --- terminal sequence ---------------------------------------------------------

def test_level_sizes_for_the_two_by_one_letter_signature():
    ts = terminal_sequence(MOORE_A, 6)
    assert [len(level) for level in ts.levels] == [2**k for k in range(7)]


def test_depth_zero_behaviour_is_trivial():
    C = moore_coalgebra(["0", "1"], ["a"], {"u": ("0", {"a": "u"})})
    assert behaviour_at_depth(C, 0) == {"u": ("id", "*")}


def test_behaviour_cones_commute():
    rng = random.Random(3)
    for _ in range(25):
        C = random_moore(rng, 3, ["a", "b"], ["0", "1"])
        tables = {k: behaviour_at_depth(C, k) for k in range(5)}
        for k in range(4):
            for x in C.carrier:
                assert connect_value(C.functor, k, tables[k + 1][x]) == tables[k][x]


def test_depth_k_agreement_matches_short_word_outputs():
    rng = random.Random(11)
    for _ in range(40):
        C = random_moore(rng, 4, ["a", "b"], ["0", "1"])
        for k in (1, 2, 3):
            table = behaviour_at_depth(C, k)
            for x in C.carrier:
                for y in C.carrier:
                    words_agree = output_language(C, x, k - 1) == output_language(C, y, k - 1)
                    assert (table[x] == table[y]) == words_agree


def test_minimize_matches_carrier_depth_behaviour():
    for C in all_moore(3, ["a"], ["0", "1"]):
        table = behaviour_at_depth(C, len(C.carrier))
        res = minimize(C)
        for x in C.carrier:
            for y in C.carrier:
                same_block = res.projection[x] == res.projection[y]
                assert same_block == (table[x] == table[y])


# --- terminal net ----------------------------------------------------------------

def commutativity_net():
    return TerminalNet(ConstraintSystem([builtin("commutativity", ["a", "b"], MOORE_AB)]))


def test_empty_word_object_is_the_singleton():
    net = commutativity_net()
    assert net.object(()).carrier.elements == ("*",)


def test_net_object_sizes_match_closed_form_counts():
    net = commutativity_net()
    # |F1| = 2*1^2, |FF1| = 2*(2)^2, and over the singleton every pair of
    # length-two paths commutes, so the constraint level keeps all of FF1
    assert len(net.object(("F",))) == 2
    assert len(net.object(("F", "F"))) == 8
    assert len(net.object((0,))) == 8
    # |F E 1| = 2 * 8^2
    assert len(net.object(("F", 0))) == 128
    # in E(E1) the output and the a-branch are free (2 * 128) while the
    # b-branch must match the a-branch's b-successor on its a-slot (16)
    assert len(net.object((0, 0))) == 2 * 128 * 16


def test_constraint_inclusion_commutes_with_the_terminal_arrows():
    net = commutativity_net()
    incl = net.inclusion((0,))
    bang_e = net.bang((0,))
    bang_ff = net.bang(("F", "F"))
    for name in net.object((0,)).carrier:
        assert bang_ff[incl[name]] == bang_e[name]


def test_lifted_arrows_respect_constraint_objects():
    net = commutativity_net()
    # F(!) : F F 1 -> F 1 arises by lifting the bang of ("F",)
    bang_f = net.bang(("F",))
    lifted = net.lift("F", bang_f, ("F",), ())
    assert set(lifted) == set(net.object(("F", "F")).carrier)
    assert set(lifted.values()) <= set(net.object(("F",)).carrier.elements)
    # E(!) : E F 1 -> E 1 stays inside the filtered subsets
    lifted_e = net.lift(0, bang_f, ("F",), ())
    assert set(lifted_e) == set(net.object((0, "F")).carrier)
    assert set(lifted_e.values()) <= set(net.object((0,)).carrier.elements)


def test_nets_reject_constraints_of_mixed_shape():
    uneven = word_equation(MOORE_AB, "aa", "")
    with pytest.raises(NonSingularConstraint):
        TerminalNet(ConstraintSystem([uneven])).object((0,))
    transitivity = builtin("transitivity", [], ts_functor())
    with pytest.raises(NonSingularConstraint):
        TerminalNet(ConstraintSystem([transitivity])).object((0,))


# --- monoid presentations --------------------------------------------------------

def test_cyclic_group_of_order_three():
    m = monoid_from_presentation(Presentation(["a"], [("aaa", "")], 6))
    assert m.elements == ("", "a", "aa")
    assert m.mul("aa", "a") == ""
    assert m.word_class("aaaa") == "a"


def test_klein_group_presentation():
    m = monoid_from_presentation(
        Presentation(["a", "b"], [("ab", "ba"), ("aa", ""), ("bb", "")], 6)
    )
    assert len(m) == 4
    assert m.mul(m.generators["a"], m.generators["a"]) == m.unit


def test_integers_are_reported_unclosed_at_every_bound():
    for bound in range(2, 9):
        with pytest.raises(NotClosedWithinBound):
            monoid_from_presentation(
                Presentation(["a", "b"], [("ab", ""), ("ba", "")], bound)
            )


def test_commuting_free_generators_are_reported_unclosed():
    for bound in range(2, 9):
        with pytest.raises(NotClosedWithinBound):
            monoid_from_presentation(Presentation(["a", "b"], [("ab", "ba")], bound))


# --- relatively final automata ----------------------------------------------------

def trivial_final():
    m = monoid_from_presentation(Presentation(["a", "b"], [("a", ""), ("b", "")], 3))
    return relative_final_moore(["0", "1"], m)


def test_trivial_monoid_gives_the_two_state_output_automaton():
    Z = trivial_final()
    assert len(Z.coalgebra.carrier) == 2
    for x in Z.coalgebra.carrier:
        for a in ("a", "b"):
            from copath.behaviour import moore_step

            assert moore_step(Z.coalgebra, x, a) == x


def z3_final():
    m = monoid_from_presentation(Presentation(["a"], [("aaa", "")], 6))
    return relative_final_moore(["0", "1"], m)


def test_cyclic_final_automaton_satisfies_its_equations_and_is_simple():
    Z = z3_final()
    assert len(Z.coalgebra.carrier) == 8
    assert satisfies_system(Z.coalgebra, Z.system())
    assert minimize(Z.coalgebra).partition.is_discrete


def test_klein_final_automaton_is_commutative():
    m = monoid_from_presentation(
        Presentation(["a", "b"], [("ab", "ba"), ("aa", ""), ("bb", "")], 6)
    )
    Z = relative_final_moore(["0", "1"], m)
    assert len(Z.coalgebra.carrier) == 16
    assert satisfies(Z.coalgebra, builtin("commutativity", ["a", "b"], MOORE_AB))
    assert minimize(Z.coalgebra).partition.is_discrete


def test_behaviour_into_oneself_is_the_identity():
    Z = z3_final()
    h = behaviour_into(Z.coalgebra, Z)
    assert all(h[x] == x for x in Z.coalgebra.carrier)


def test_behaviour_of_a_coproduct_agrees_on_both_copies():
    Z = z3_final()
    total, (i, j) = coproduct([Z.coalgebra, Z.coalgebra])
    h = behaviour_into(total, Z)
    assert all(h[i[x]] == h[j[x]] == x for x in Z.coalgebra.carrier)


def test_behaviour_map_from_an_output_cycle_matches_the_word_table():
    Z = z3_final()
    C = moore_coalgebra(
        ["0", "1"],
        ["a"],
        {"u": ("0", {"a": "v"}), "v": ("1", {"a": "w"}), "w": ("1", {"a": "u"})},
    )
    h = behaviour_into(C, Z)
    assert Z.assignments[h["u"]] == {"": "0", "a": "1", "aa": "1"}
    assert Z.assignments[h["v"]] == {"": "1", "a": "1", "aa": "0"}


def test_behaviour_map_refuses_violating_sources():
    Z = z3_final()
    period2 = moore_coalgebra(
        ["0", "1"], ["a"], {"u": ("0", {"a": "v"}), "v": ("1", {"a": "u"})}
    )
    with pytest.raises(NotSatisfying):
        behaviour_into(period2, Z)


# --- finality witnesses -------------------------------------------------------------

def test_witness_report_passes_on_all_satisfying_one_state_automata():
    Z = z3_final()
    tests = [C for C in all_moore(1, ["a"], ["0", "1"])]
    report = finality_witness(Z, tests)
    assert report.simple
    assert report.all_ok
    assert not report.skipped


def test_witness_report_flags_duplicated_states():
    Z = z3_final()
    doubled, _ = coproduct([Z.coalgebra, Z.coalgebra])
    fake = FinalMoore(doubled, Z.monoid, Z.outputs, {})
    report = finality_witness(fake, [])
    assert not report.simple and not report.all_ok


def test_witness_report_skips_violating_tests():
    Z = z3_final()
    period2 = moore_coalgebra(
        ["0", "1"], ["a"], {"u": ("0", {"a": "v"}), "v": ("1", {"a": "u"})}
    )
    report = finality_witness(Z, [period2])
    assert report.skipped == (0,)
    assert report.all_ok  # the skipped entry does not poison the rest


def test_homomorphism_counting_is_exhaustive():
    C = moore_coalgebra(["0", "1"], ["a"], {"u": ("0", {"a": "u"})})
    Z = z3_final()
    assert count_homomorphisms(C, Z.coalgebra) == 1
