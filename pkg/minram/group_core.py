"""Finite l-group engine: collection in pc-presentations, series, tower plans and bounds."""

import itertools
import json
import logging
from functools import lru_cache
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np
from pydantic import ValidationError
from sympy import factorint

from .arith import is_prime
from .errors import MinramError, PresentationError, TorsionClashError
from .models import (
    BoundKind,
    BoundReport,
    BoundTable,
    CentralTowerPlan,
    FieldData,
    NilpotentGroup,
    PcGroup,
    SeriesReport,
    Sgl3Record,
    StepKind,
    TowerStep,
    Word,
)

logger = logging.getLogger(__name__)

Vector = Tuple[int, ...]

# Presentations up to this order are checked by building the regular permutation action.
ENUMERATION_LIMIT = 3**8


class Collector:
    """Normal-form arithmetic in a pc-presented l-group (collection from the left)."""

    def __init__(self, group: PcGroup):
        self.group = group
        self.l = group.prime
        self.m = group.gens
        self.identity: Vector = (0,) * self.m

        commutators = {(j - 1, i - 1): word for j, i, word in group.commutators}
        self._power_letters: List[List[int]] = [[] for _ in range(self.m)]
        self._conj_letters: Dict[Tuple[int, int], List[int]] = {}
        self._inverses: List[Optional[Vector]] = [None] * self.m

        # Relations of g_i only involve g_{i+1}.., so build everything from the top down.
        for i in reversed(range(self.m)):
            self._power_letters[i] = self._letters(group.powers[i])
            for j in range(i + 1, self.m):
                self._conj_letters[(j, i)] = [j] + self._letters(commutators.get((j, i), []))
            # g_i^-1 = g_i^(l-1) (g_i^l)^-1
            power_inverse = self.inverse(self._collect_letters(self._power_letters[i]))
            self._inverses[i] = self.multiply(
                self._collect_letters([i] * (self.l - 1)), power_inverse
            )

    def unit(self, i: int) -> Vector:
        return tuple(1 if k == i else 0 for k in range(self.m))

    def elements(self) -> Iterator[Vector]:
        return itertools.product(range(self.l), repeat=self.m)

    def _letters(self, word: Word) -> List[int]:
        letters: List[int] = []
        for gen, exp in word:
            if exp >= 0:
                letters.extend([gen - 1] * exp)
            else:
                letters.extend(self._vector_letters(self._inverses[gen - 1]) * (-exp))
        return letters

    @staticmethod
    def _vector_letters(vector: Sequence[int]) -> List[int]:
        return [k for k, e in enumerate(vector) for _ in range(e)]

    def _push(self, exps: List[int], letters: List[int]) -> None:
        stack = list(reversed(letters))
        while stack:
            i = stack.pop()
            tail = [(j, exps[j]) for j in range(i + 1, self.m) if exps[j]]
            for j, _ in tail:
                exps[j] = 0
            exps[i] += 1
            pending: List[int] = []
            if exps[i] == self.l:
                exps[i] = 0
                pending.extend(self._power_letters[i])
            # S g_i = g_i S^(g_i), and g_j^(g_i) = g_j [g_j, g_i]
            for j, e in tail:
                pending.extend(self._conj_letters[(j, i)] * e)
            stack.extend(reversed(pending))

    def _collect_letters(self, letters: List[int]) -> Vector:
        exps = list(self.identity)
        self._push(exps, letters)
        return tuple(exps)

    def collect(self, word: Word) -> Vector:
        for gen, _ in word:
            if not 1 <= gen <= self.m:
                raise PresentationError(f"Word uses g{gen}; the group has {self.m} generators")
        return self._collect_letters(self._letters(word))

    def multiply(self, x: Vector, y: Vector) -> Vector:
        exps = list(x)
        self._push(exps, self._vector_letters(y))
        return tuple(exps)

    def inverse(self, x: Vector) -> Vector:
        result = self.identity
        for k in reversed(range(self.m)):
            for _ in range(x[k]):
                result = self.multiply(result, self._inverses[k])
        return result

    def power(self, x: Vector, k: int) -> Vector:
        if k < 0:
            return self.power(self.inverse(x), -k)
        result, base = self.identity, x
        while k:
            if k & 1:
                result = self.multiply(result, base)
            base = self.multiply(base, base)
            k >>= 1
        return result

    def commutator(self, a: Vector, b: Vector) -> Vector:
        return self.multiply(self.multiply(self.inverse(a), self.inverse(b)), self.multiply(a, b))

    def conjugate(self, a: Vector, g: Vector) -> Vector:
        return self.multiply(self.multiply(self.inverse(g), a), g)

    def element_order(self, x: Vector) -> int:
        order = 1
        for _ in range(self.m + 1):
            if x == self.identity:
                return order
            x = self.power(x, self.l)
            order *= self.l
        raise PresentationError(f"Element {x} has order above {self.l}^{self.m}")


@lru_cache(maxsize=64)
def _collector_for(key: str) -> Collector:
    return Collector(PcGroup.model_validate_json(key))


def collector(group: PcGroup) -> Collector:
    return _collector_for(group.model_dump_json())


def collect(group: PcGroup, word: Word) -> Vector:
    """Normal form g_1^e_1 ... g_m^e_m (0 <= e_i < l) of a word."""
    return collector(group).collect(word)


def multiply(group: PcGroup, x: Vector, y: Vector) -> Vector:
    return collector(group).multiply(tuple(x), tuple(y))


def inverse(group: PcGroup, x: Vector) -> Vector:
    return collector(group).inverse(tuple(x))


def power(group: PcGroup, x: Vector, k: int) -> Vector:
    return collector(group).power(tuple(x), k)


def order_of(group: PcGroup, x: Vector) -> int:
    return collector(group).element_order(tuple(x))


def check_consistency(group: PcGroup, limit: int = ENUMERATION_LIMIT) -> None:
    """Verify that the presentation defines a group of order exactly l^m.

    The right-multiplication maps computed by collection must be bijections of the l^m
    normal forms, must satisfy every defining relation, and must act transitively; the
    presented group then acts regularly, so its order is l^m.
    """
    if group.order > limit:
        logger.debug(f"Group of order {group.order} above {limit}: presentation trusted")
        return
    _check_regular_action(group)


@lru_cache(maxsize=64)
def _checked(key: str) -> bool:
    group = PcGroup.model_validate_json(key)
    c = collector(group)
    elements = list(c.elements())
    index = {v: n for n, v in enumerate(elements)}
    size = len(elements)

    perms = [
        np.array([index[c.multiply(v, c.unit(i))] for v in elements], dtype=np.int64)
        for i in range(c.m)
    ]
    for i, perm in enumerate(perms):
        if len(np.unique(perm)) != size:
            raise PresentationError(f"Right multiplication by g{i + 1} is not a bijection")
    inverses = [np.argsort(perm) for perm in perms]

    def act(word: Word) -> np.ndarray:
        state = np.arange(size)
        for gen, exp in word:
            perm = perms[gen - 1] if exp > 0 else inverses[gen - 1]
            for _ in range(abs(exp)):
                state = perm[state]
        return state

    for i, word in enumerate(group.powers, start=1):
        if not np.array_equal(act([(i, group.prime)]), act(word)):
            raise PresentationError(f"Power relation of g{i} fails in the regular action")
    relations = {(j, i): word for j, i, word in group.commutators}
    for i in range(1, c.m + 1):
        for j in range(i + 1, c.m + 1):
            lhs = act([(j, -1), (i, -1), (j, 1), (i, 1)])
            if not np.array_equal(lhs, act(relations.get((j, i), []))):
                raise PresentationError(f"Commutator relation [g{j}, g{i}] fails")

    reached = np.zeros(size, dtype=bool)
    reached[0] = True
    frontier = np.array([0])
    while frontier.size and perms:
        step = np.unique(np.concatenate([perm[frontier] for perm in perms]))
        frontier = step[~reached[step]]
        reached[frontier] = True
    if not reached.all():
        raise PresentationError(
            f"Only {int(reached.sum())} of {size} normal forms are reachable; presentation "
            "is inconsistent"
        )
    return True


def _check_regular_action(group: PcGroup) -> None:
    _checked(group.model_dump_json())


class _Subgroup(NamedTuple):
    gens: List[Vector]
    elements: Set[Vector]


def _closure(c: Collector, gens: Sequence[Vector]) -> Set[Vector]:
    gens = [g for g in gens if g != c.identity]
    elements = {c.identity}
    frontier = [c.identity]
    while frontier:
        fresh = []
        for x in frontier:
            for g in gens:
                y = c.multiply(x, g)
                if y not in elements:
                    elements.add(y)
                    fresh.append(y)
        frontier = fresh
    return elements


def _normal_closure(c: Collector, gens: Sequence[Vector], ambient: Sequence[Vector]) -> _Subgroup:
    gens = [g for g in dict.fromkeys(gens) if g != c.identity]
    elements = _closure(c, gens)
    changed = True
    while changed:
        changed = False
        for h in list(gens):
            for g in ambient:
                conj = c.conjugate(h, g)
                if conj not in elements:
                    gens.append(conj)
                    elements = _closure(c, gens)
                    changed = True
    return _Subgroup(gens, elements)


def _log(n: int, l: int) -> int:
    k = 0
    while n > 1:
        n //= l
        k += 1
    return k


def _quotient_invariants(c: Collector, upper: _Subgroup, lower: _Subgroup) -> List[int]:
    """Invariant factors of the abelian section upper/lower (lower normal, upper/lower central)."""
    size = _log(len(upper.elements) // len(lower.elements), c.l)
    at_least: List[int] = []  # at_least[k-1] = number of cyclic factors of order >= l^k
    k = 0
    while size > 0:
        k += 1
        powers = [c.power(a, c.l**k) for a in upper.gens]
        image = _closure(c, list(lower.gens) + powers)
        smaller = _log(len(image) // len(lower.elements), c.l)
        at_least.append(size - smaller)
        size = smaller
    invariants: List[int] = []
    for k in range(len(at_least), 0, -1):
        above = at_least[k] if k < len(at_least) else 0
        invariants.extend([c.l**k] * (at_least[k - 1] - above))
    return invariants


@lru_cache(maxsize=64)
def _series_for(key: str) -> SeriesReport:
    group = PcGroup.model_validate_json(key)
    check_consistency(group)
    c = collector(group)
    generators = [c.unit(i) for i in range(c.m)]

    current = _Subgroup(generators, set(c.elements()))
    orders = [len(current.elements)]
    invariants: List[List[int]] = []
    while len(current.elements) > 1:
        commutators = [c.commutator(a, g) for a in current.gens for g in generators]
        lower = _normal_closure(c, commutators, generators)
        invariants.append(_quotient_invariants(c, current, lower))
        orders.append(len(lower.elements))
        current = lower

    exponent = max((c.element_order(x) for x in c.elements()), default=1)
    ranks = [len(layer) for layer in invariants]
    report = SeriesReport(
        prime=group.prime,
        order=group.order,
        lcs_orders=orders,
        quotient_ranks=ranks,
        quotient_invariants=invariants,
        nilpotency_class=len(invariants),
        d=ranks[0] if ranks else 0,
        exponent=exponent,
    )
    logger.debug(f"Series of group of order {group.order}: {report.lcs_orders}")
    return report


def series_report(group: PcGroup) -> SeriesReport:
    """Lower central series orders, layer ranks and invariants, class, d(G) and exponent."""
    return _series_for(group.model_dump_json()).model_copy(deep=True)


def central_tower_plan(group: PcGroup) -> CentralTowerPlan:
    """Split layer 1 and Frattini layers 2..c, one cyclic embedding problem per factor."""
    series = series_report(group)
    return _plan_from_series(series)


def _plan_from_series(series: SeriesReport) -> CentralTowerPlan:
    c = series.nilpotency_class
    steps = []
    for i, layer in enumerate(series.quotient_invariants, start=1):
        steps.append(
            TowerStep(
                layer_index=i,
                kind=StepKind.SPLIT if i == 1 else StepKind.FRATTINI,
                kernel_cyclic_orders=layer,
                costs_extra_prime=2 <= i <= c - 1,
            )
        )
    extra = sum(rank for i, rank in enumerate(series.quotient_ranks, start=1) if 2 <= i <= c - 1)
    return CentralTowerPlan(
        prime=series.prime, steps=steps, predicted_prime_count=series.d + extra
    )


def center_order(group: PcGroup) -> int:
    c = collector(group)
    generators = [c.unit(i) for i in range(c.m)]
    return sum(
        1
        for x in c.elements()
        if all(c.multiply(x, g) == c.multiply(g, x) for g in generators)
    )


# -- building groups ---------------------------------------------------------------------


def abelian_pc_group(l: int, factors: Sequence[int]) -> PcGroup:
    """Pc-presentation of the abelian l-group with the given cyclic factor orders."""
    powers: List[Word] = []
    for order in factors:
        e = _log(order, l)
        if order < l or l**e != order:
            raise PresentationError(f"{order} is not a positive power of {l}")
        start = len(powers) + 1
        for k in range(e):
            powers.append([(start + k + 1, 1)] if k < e - 1 else [])
    try:
        return PcGroup(prime=l, gens=len(powers), powers=powers)
    except ValidationError as e:
        raise PresentationError(str(e)) from e


def direct_product(a: PcGroup, b: PcGroup) -> PcGroup:
    """Direct product of two l-groups for the same prime."""
    if a.prime != b.prime:
        raise PresentationError("direct_product joins groups of the same prime only")
    shift = a.gens

    def moved(word: Word) -> Word:
        return [(gen + shift, exp) for gen, exp in word]

    names = None
    if a.names and b.names:
        names = list(a.names) + list(b.names)
    return PcGroup(
        prime=a.prime,
        gens=a.gens + b.gens,
        powers=list(a.powers) + [moved(w) for w in b.powers],
        commutators=list(a.commutators)
        + [(j + shift, i + shift, moved(w)) for j, i, w in b.commutators],
        names=names,
    )


def nilpotent_from_abelian(factors: Sequence[int]) -> NilpotentGroup:
    by_prime: Dict[int, List[int]] = {}
    for n in factors:
        for p, e in factorint(n).items():
            by_prime.setdefault(p, []).append(p**e)
    if 2 in by_prime:
        raise PresentationError("2-groups are only supported by realize-abelian")
    sylows = {p: abelian_pc_group(p, sorted(e, reverse=True)) for p, e in by_prime.items()}
    return NilpotentGroup(sylows=sylows)


def load_group(data: Any) -> NilpotentGroup:
    """Parse group JSON: a pc-presentation, {"sylows": [...]} or {"abelian": [...]}."""
    if isinstance(data, str):
        data = json.loads(data)
    try:
        if isinstance(data, dict) and "abelian" in data:
            return nilpotent_from_abelian(data["abelian"])
        if isinstance(data, dict) and "sylows" in data:
            return NilpotentGroup.from_sylows(
                *[PcGroup.model_validate(item) for item in data["sylows"]]
            )
        pc = PcGroup.model_validate(data)
        return NilpotentGroup(sylows={pc.prime: pc})
    except (ValidationError, ValueError, TypeError) as e:
        raise PresentationError(f"Invalid group description: {e}") from e


def sgl3_family(n: int, l: int) -> Sgl3Record:
    """Relatively free class-2 group of exponent l on n generators, with its expected data."""
    if n < 1:
        raise MinramError(f"The family needs n >= 1, got {n}")
    if l == 2 or not is_prime(l):
        raise MinramError(f"The family needs an odd prime, got {l}")

    pairs = [(j, i) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    gens = n + len(pairs)
    group = PcGroup(
        prime=l,
        gens=gens,
        powers=[[] for _ in range(gens)],
        commutators=[(j, i, [(n + k + 1, 1)]) for k, (j, i) in enumerate(pairs)],
        names=[f"x{i}" for i in range(1, n + 1)] + [f"z{j}{i}" for j, i in pairs],
    )
    central_rank = n * (n - 1) // 2
    return Sgl3Record(
        n=n,
        l=l,
        expected_ram=n,
        center_order=l**central_rank,
        center_rank=central_rank,
        multiplicator_claim=(
            f"M(G/Z(G)) = Z(G) = (Z/{l})^{central_rank}; the central class field of the "
            f"abelian layer has degree {l}^{central_rank} (asserted, not re-derived)"
        ),
        group=group,
    )


# -- nilpotent groups and bounds ---------------------------------------------------------


def nilpotent_series(group: NilpotentGroup) -> Dict[int, SeriesReport]:
    return {l: series_report(pc) for l, pc in group.sylows.items()}


def nilpotent_invariants(group: NilpotentGroup) -> Dict[str, int]:
    """d(G), class c, exponent, a (product of primes dividing |G|) and N (exponent | a^N)."""
    series = nilpotent_series(group)
    exponent, a, big_n = 1, 1, 0
    for l, report in series.items():
        exponent *= report.exponent
        a *= l
        big_n = max(big_n, _log(report.exponent, l))
    return {
        "d": max((r.d for r in series.values()), default=0),
        "c": max((r.nilpotency_class for r in series.values()), default=0),
        "exponent": exponent,
        "a": a,
        "N": big_n,
    }


def layer_rank(series: Dict[int, SeriesReport], i: int) -> int:
    """d(G_i/G_{i+1}) of the nilpotent group, the largest rank over its Sylow layers."""
    return max(
        (r.quotient_ranks[i - 1] for r in series.values() if i <= r.nilpotency_class),
        default=0,
    )


def is_abelian(group: NilpotentGroup) -> bool:
    return all(r.nilpotency_class <= 1 for r in nilpotent_series(group).values())


def _field_t(group: NilpotentGroup, field: FieldData) -> Tuple[int, int]:
    r = max((field.class_rank(l) for l in group.primes), default=0)
    return r, field.unit_rank


def bound_report(group: NilpotentGroup, field: FieldData) -> BoundReport:
    """The ramification bound with the data that produced it."""
    series = nilpotent_series(group)
    d = max((r.d for r in series.values()), default=0)
    c = max((r.nilpotency_class for r in series.values()), default=0)
    if c <= 1:
        return BoundReport(bound=d, kind=BoundKind.ABELIAN, d=d, r=0, s=0, lcs_tail=0)

    for l in group.primes:
        if field.torsion % l == 0:
            raise TorsionClashError(l, field.label)
    r, s = _field_t(group, field)
    tail = sum(layer_rank(series, i) for i in range(2, c))

    clashing = [l for l in group.primes if l in field.l_square_primes]
    if clashing:
        n_max = max(pc.gens for pc in group.sylows.values())
        logger.warning(
            f"{field.label} has ideal classes of order l^2 for l in {clashing}; "
            "using the max n_l + t(K) bound"
        )
        return BoundReport(
            bound=n_max + r + s,
            kind=BoundKind.FALLBACK,
            d=d,
            r=r,
            s=s,
            lcs_tail=tail,
            notes=[f"ideal classes of order l^2 for l in {clashing}"],
        )
    return BoundReport(
        bound=d + r + s + tail, kind=BoundKind.RAMIFICATION, d=d, r=r, s=s, lcs_tail=tail
    )


def ramification_bound(group: NilpotentGroup, field: FieldData) -> int:
    """minram_K(G) <= d(G) + (r + s) + sum_{i=2}^{c-1} d(G_i/G_{i+1}); d(G) for abelian G."""
    return bound_report(group, field).bound


def boston_bound(group: NilpotentGroup) -> int:
    """max(1, d(G^ab)), the conjectured exact count over Q."""
    d = max((r.d for r in nilpotent_series(group).values()), default=0)
    return max(1, d)


def bound_table(group: NilpotentGroup, field: FieldData) -> BoundTable:
    series = nilpotent_series(group)
    d = max((r.d for r in series.values()), default=0)
    c = max((r.nilpotency_class for r in series.values()), default=0)
    r, s = _field_t(group, field)
    t = r + s
    n_max = max((pc.gens for pc in group.sylows.values()), default=0)
    return BoundTable(
        t=t,
        serre=n_max,
        geyer_jarden=n_max + t,
        lcs_sum=sum(layer_rank(series, i) for i in range(1, c + 1)) + t,
        ramification_bound=ramification_bound(group, field),
        class_two=d + t if c <= 2 else None,
        boston=boston_bound(group),
    )
