import itertools

import numpy as np

import pytest
from pydantic import ValidationError
from sympy.combinatorics import Permutation, PermutationGroup

from minram.errors import MinramError, PresentationError, TorsionClashError
from minram.group_core import (
    abelian_pc_group,
    bound_report,
    bound_table,
    boston_bound,
    center_order,
    central_tower_plan,
    check_consistency,
    collect,
    collector,
    direct_product,
    inverse,
    load_group,
    multiply,
    nilpotent_from_abelian,
    nilpotent_invariants,
    order_of,
    ramification_bound,
    power,
    series_report,
    sgl3_family,
)
from minram.models import BoundKind, NilpotentGroup, PcGroup, StepKind
from minram.quadfield import field_data


def m27() -> PcGroup:
    """Nonabelian group of order 27 and exponent 9."""
    return PcGroup(prime=3, gens=3, powers=[[(3, 1)], [], []], commutators=[(2, 1, [(3, 1)])])


def h27() -> PcGroup:
    return PcGroup(prime=3, gens=3, commutators=[(2, 1, [(3, 1)])])


def wreath81() -> PcGroup:
    return PcGroup(prime=3, gens=4, commutators=[(2, 1, [(3, 1)]), (3, 1, [(4, 1)])])


CORPUS = {
    "Z27": abelian_pc_group(3, [27]),
    "Z9xZ3": abelian_pc_group(3, [9, 3]),
    "Z3^3": abelian_pc_group(3, [3, 3, 3]),
    "H27": h27(),
    "M27": m27(),
    "wreath81": wreath81(),
    "H27xZ3": direct_product(h27(), abelian_pc_group(3, [3])),
    "M27xZ9": direct_product(m27(), abelian_pc_group(3, [9])),
    "Z5^2": abelian_pc_group(5, [5, 5]),
}


def regular_representation(group: PcGroup) -> PermutationGroup:
    c = collector(group)
    elements = list(c.elements())
    index = {v: n for n, v in enumerate(elements)}
    perms = [
        Permutation([index[c.multiply(v, c.unit(i))] for v in elements]) for i in range(c.m)
    ]
    return PermutationGroup(perms)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_series_matches_permutation_oracle(name):
    group = CORPUS[name]
    report = series_report(group)
    oracle = regular_representation(group)

    assert oracle.order() == group.order == report.order
    assert report.lcs_orders == [H.order() for H in oracle.lower_central_series()]
    assert report.exponent == max(g.order() for g in oracle.elements)
    frattini = oracle.derived_subgroup()
    if oracle.order() > 1:
        # d(G) = log_l |G / Phi(G)| with Phi(G) = G' G^l
        gens = list(frattini.generators) + [g**group.prime for g in oracle.generators]
        phi = PermutationGroup(gens)
        index = oracle.order() // phi.order()
        assert group.prime**report.d == index


def test_h27_series(h27):
    report = series_report(h27)
    assert report.lcs_orders == [27, 3, 1]
    assert report.d == 2
    assert report.exponent == 3
    assert report.nilpotency_class == 2
    assert report.quotient_invariants == [[3, 3], [3]]


def test_abelian_series():
    report = series_report(abelian_pc_group(3, [9, 3]))
    assert report.lcs_orders == [27, 1]
    assert report.quotient_invariants == [[9, 3]]
    assert report.exponent == 9


def test_collection_in_h27(h27):
    x, y = (1, 0, 0), (0, 1, 0)
    assert multiply(h27, y, x) == (1, 1, 1)
    assert multiply(h27, x, y) == (1, 1, 0)
    assert collect(h27, [(2, 1), (1, 1)]) == (1, 1, 1)
    assert collect(h27, [(1, 3)]) == (0, 0, 0)
    assert collector(h27).commutator(y, x) == (0, 0, 1)


def test_normal_form_arithmetic():
    group = m27()
    elements = list(itertools.product(range(3), repeat=3))
    for a in elements[::4]:
        assert multiply(group, a, inverse(group, a)) == (0, 0, 0)
        assert power(group, a, -1) == inverse(group, a)
        assert power(group, a, order_of(group, a)) == (0, 0, 0)
        for b in elements[::5]:
            for c in elements[::7]:
                left = multiply(group, multiply(group, a, b), c)
                assert left == multiply(group, a, multiply(group, b, c))
    assert order_of(group, (1, 0, 0)) == 9
    assert order_of(group, (0, 1, 0)) == 3


def test_collect_rejects_unknown_generator(h27):
    with pytest.raises(PresentationError):
        collect(h27, [(4, 1)])


def test_inconsistent_presentation_is_detected():
    # g1^3 = g2 must commute with g1, but [g2, g1] = g3
    bad = PcGroup(prime=3, gens=3, powers=[[(2, 1)], [], []], commutators=[(2, 1, [(3, 1)])])
    with pytest.raises(PresentationError):
        check_consistency(bad)
    with pytest.raises(PresentationError):
        series_report(bad)


def test_consistency_of_corpus():
    for group in CORPUS.values():
        check_consistency(group)


def test_malformed_presentations():
    with pytest.raises(ValidationError):
        PcGroup(prime=2, gens=1)
    with pytest.raises(ValidationError):
        PcGroup(prime=3, gens=2, commutators=[(1, 2, [])])
    with pytest.raises(ValidationError):
        PcGroup(prime=3, gens=2, powers=[[(1, 1)], []])
    with pytest.raises(PresentationError):
        load_group({"prime": 4, "gens": 1})
    with pytest.raises(PresentationError):
        load_group('{"sylows": [{"prime": 3, "gens": 1}, {"prime": 3, "gens": 2}]}')


def test_load_group_forms(example_group):
    h27_group = load_group(example_group("h27").read_text())
    assert h27_group.primes == [3]
    assert h27_group.order == 27
    mixed = load_group(example_group("h27xz5").read_text())
    assert mixed.primes == [3, 5]
    assert mixed.order == 135
    abelian = load_group({"abelian": [9, 3, 5]})
    assert abelian.order == 135
    assert abelian.sylows[3].gens == 3


def test_tower_plan_h27(h27):
    plan = central_tower_plan(h27)
    assert [step.kind for step in plan.steps] == [StepKind.SPLIT, StepKind.FRATTINI]
    assert plan.steps[0].kernel_cyclic_orders == [3, 3]
    assert plan.steps[1].kernel_cyclic_orders == [3]
    assert not any(step.costs_extra_prime for step in plan.steps)
    assert plan.predicted_prime_count == 2


def test_tower_plan_class_three(wreath81):
    plan = central_tower_plan(wreath81)
    assert [step.costs_extra_prime for step in plan.steps] == [False, True, False]
    assert plan.predicted_prime_count == 3


def test_center_order(h27):
    assert center_order(h27) == 3
    assert center_order(abelian_pc_group(3, [9, 3])) == 27


def test_abelian_pc_group_validation():
    with pytest.raises(PresentationError):
        abelian_pc_group(3, [6])
    with pytest.raises(PresentationError):
        nilpotent_from_abelian([2, 3])
    with pytest.raises(PresentationError):
        direct_product(h27(), abelian_pc_group(5, [5]))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sgl3_family(n):
    record = sgl3_family(n, 3)
    assert record.expected_ram == n
    assert record.group.gens == n + n * (n - 1) // 2
    assert record.center_order == 3 ** (n * (n - 1) // 2)
    report = series_report(record.group)
    assert report.d == n
    assert report.exponent == 3
    if n > 1:
        assert report.nilpotency_class == 2
        assert center_order(record.group) == record.center_order


def test_sgl3_family_arguments():
    with pytest.raises(MinramError):
        sgl3_family(0, 3)
    with pytest.raises(MinramError):
        sgl3_family(2, 2)
    with pytest.raises(MinramError):
        sgl3_family(2, 9)


def test_bounds_over_q(h27_group, rational):
    assert ramification_bound(h27_group, rational) == 2
    assert boston_bound(h27_group) == 2
    wreath = NilpotentGroup.from_sylows(wreath81())
    assert ramification_bound(wreath, rational) == 3
    assert bound_report(wreath, rational).lcs_tail == 1


def test_bound_over_imaginary_quadratic(h27_group, quad23):
    report = bound_report(h27_group, quad23)
    assert report.kind == BoundKind.RAMIFICATION
    assert (report.d, report.r, report.s) == (2, 1, 0)
    assert report.bound == 3


def test_torsion_clash(h27_group):
    with pytest.raises(TorsionClashError):
        ramification_bound(h27_group, field_data(-3))
    # abelian groups only need d(G)
    assert ramification_bound(nilpotent_from_abelian([3, 3]), field_data(-3)) == 2


def test_fallback_bound_with_square_classes(h27_group):
    field = field_data({"custom": {"label": "K", "s": 1, "r": {"3": 1}, "l_square": [3]}})
    report = bound_report(h27_group, field)
    assert report.kind == BoundKind.FALLBACK
    assert report.bound == 3 + 1 + 1


def test_trivial_group(rational):
    trivial = nilpotent_from_abelian([])
    assert boston_bound(trivial) == 1
    assert ramification_bound(trivial, rational) == 0


@pytest.mark.parametrize("group", [h27(), wreath81(), m27(), abelian_pc_group(3, [9, 3])])
def test_bound_table_ordering(group, rational, quad23):
    for field in (rational, quad23):
        table = bound_table(NilpotentGroup.from_sylows(group), field)
        assert table.ramification_bound <= table.lcs_sum <= table.geyer_jarden
        assert table.serre == group.gens


def test_bound_table_h27(h27_group, rational):
    table = bound_table(h27_group, rational)
    assert table.t == 0
    assert table.class_two == 2
    assert table.boston == 2
    assert table.lcs_sum == 3


def test_nilpotent_invariants(h27):
    group = NilpotentGroup.from_sylows(h27, abelian_pc_group(5, [5]))
    assert nilpotent_invariants(group) == {"d": 2, "c": 2, "exponent": 15, "a": 15, "N": 1}


def cayley_table(group: PcGroup):
    c = collector(group)
    elements = list(c.elements())
    index = {v: n for n, v in enumerate(elements)}
    table = np.array([[index[c.multiply(a, b)] for b in elements] for a in elements])
    return table, index[c.identity]


def generated(table, identity, gens):
    reached = np.zeros(len(table), dtype=bool)
    reached[identity] = True
    frontier = np.array([identity])
    while frontier.size:
        step = np.unique(table[np.ix_(frontier, gens)])
        frontier = step[~reached[step]]
        reached[frontier] = True
    return reached


def minimum_generators(table, identity) -> int:
    """Size of a smallest generating set, searched over cyclic subgroup representatives."""
    reps, seen = [], set()
    for x in range(len(table)):
        cyclic = frozenset(np.flatnonzero(generated(table, identity, [x])))
        if x != identity and cyclic not in seen:
            seen.add(cyclic)
            reps.append(x)
    for k in range(1, len(reps) + 1):
        for gens in itertools.combinations(reps, k):
            if generated(table, identity, list(gens)).all():
                return k
    return 0


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_d_is_the_minimum_generating_set_size(name):
    group = CORPUS[name]
    table, identity = cayley_table(group)
    assert minimum_generators(table, identity) == series_report(group).d


def test_d_of_a_coprime_product_is_the_larger_rank():
    a, b = h27(), abelian_pc_group(5, [5, 5])
    table_a, id_a = cayley_table(a)
    table_b, id_b = cayley_table(b)
    nb = len(table_b)
    n = len(table_a) * nb
    table = (table_a[:, None, :, None] * nb + table_b[None, :, None, :]).reshape(n, n)
    d = minimum_generators(table, id_a * nb + id_b)
    assert d == max(series_report(a).d, series_report(b).d) == 2
    group = NilpotentGroup.from_sylows(a, b)
    assert nilpotent_invariants(group)["d"] == d


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_tower_plan_spends_the_bound_over_q(name):
    group = NilpotentGroup.from_sylows(CORPUS[name])
    plan = central_tower_plan(CORPUS[name])
    bound = ramification_bound(group, field_data("Q"))
    assert plan.predicted_prime_count == bound
    assert boston_bound(group) <= bound


@pytest.mark.parametrize("name", sorted(n for n in CORPUS if CORPUS[n].prime == 3))
def test_tower_plan_leaves_room_for_class_rank(name):
    field = field_data(-23)
    group = NilpotentGroup.from_sylows(CORPUS[name])
    plan = central_tower_plan(CORPUS[name])
    bound = ramification_bound(group, field)
    if series_report(CORPUS[name]).nilpotency_class > 1:
        assert plan.predicted_prime_count + field.class_rank(3) == bound
    else:
        assert plan.predicted_prime_count == bound
