"""Cyclic fields of prime conductor: characters, Gaussian-period polynomials, realizations."""

import logging
from fractions import Fraction
from functools import partial
from math import gcd
from typing import Callable, Collection, List, Optional, Sequence

import numpy as np
from sympy import jacobi_symbol
from sympy.ntheory.residue_ntheory import discrete_log

from .arith import (
    invariant_factors,
    is_prime,
    lcm,
    power_residue,
    prime_divisors,
    prime_part,
    prime_power,
    primitive_root,
)
from .errors import ArithmeticDomainError
from .models import AbelianRealization, CyclicFieldSpec, DirichletCharacter, ScholzConstraints
from .search import least_prime

logger = logging.getLogger(__name__)


def gaussian_period_poly(q: int, b: int) -> List[int]:
    """Minimal polynomial of the period over the index-b subgroup of (Z/q)^x.

    Elements of Q(zeta_q) are integer vectors of length q over the powers of zeta_q, so
    multiplying by zeta_q^t is a rotation. Power sums of the periods come from the trace
    (Tr zeta^0 = q - 1, Tr zeta^u = -1) and the polynomial from Newton's identities.
    Coefficients are returned constant term first.
    """
    if not is_prime(q):
        raise ArithmeticDomainError(f"Conductor {q} is not prime")
    if b < 1 or (q - 1) % b:
        raise ArithmeticDomainError(f"{b} does not divide {q} - 1")
    f = (q - 1) // b
    g = primitive_root(q)
    subgroup = [pow(g, b * k, q) for k in range(f)]

    period = np.zeros(q, dtype=object)
    period[subgroup] = 1
    power = period.copy()
    power_sums: List[int] = []
    for j in range(1, b + 1):
        if j > 1:
            product = np.zeros(q, dtype=object)
            for t in subgroup:
                product += np.roll(power, t)
            power = product
        trace = q * power[0] - sum(power)
        if trace % f:
            raise ArithmeticDomainError(f"Power sum {j} of periods mod {q} is not integral")
        power_sums.append(int(trace) // f)

    elementary = [Fraction(1)]
    for k in range(1, b + 1):
        total = sum(
            (-1) ** (i - 1) * elementary[k - i] * power_sums[i - 1] for i in range(1, k + 1)
        )
        elementary.append(Fraction(total, k))
    coeffs = [0] * (b + 1)
    coeffs[b] = 1
    for k in range(1, b + 1):
        value = (-1) ** k * elementary[k]
        if value.denominator != 1:
            raise ArithmeticDomainError(f"Period polynomial ({q}, {b}) is not integral")
        coeffs[b - k] = int(value)
    return coeffs


def dirichlet_character(q: int, b: int) -> DirichletCharacter:
    if not is_prime(q) or b < 1 or (q - 1) % b:
        raise ArithmeticDomainError(f"No character of order {b} mod {q}")
    return DirichletCharacter(conductor=q, order=b, generator=primitive_root(q))


def cyclic_field_spec(q: int, b: int) -> CyclicFieldSpec:
    return CyclicFieldSpec(
        conductor=q,
        degree=b,
        character=dirichlet_character(q, b),
        defining_poly=gaussian_period_poly(q, b),
    )


def character_value(chi: DirichletCharacter, n: int) -> int:
    """k with chi(n) = zeta_b^k."""
    q = chi.conductor
    if n % q == 0:
        raise ArithmeticDomainError(f"{q} divides {n}")
    index = discrete_log(q, n % q, chi.generator)
    return int(index) % chi.order


def frobenius_degree(chi: DirichletCharacter, p: int) -> int:
    """Residue degree of an unramified p in the field cut out by chi."""
    return chi.order // gcd(chi.order, character_value(chi, p))


def find_conductor(
    b: int,
    avoid: Collection[int] = (),
    extra_congruence: Sequence[int] = (),
    *,
    limit: int,
    predicate: Optional[Callable[[int], bool]] = None,
    jobs: int = 1,
    conditions: Sequence[str] = (),
) -> int:
    """Least prime q outside `avoid` with q = 1 mod b and mod every extra modulus."""
    if b < 2:
        raise ArithmeticDomainError(f"A conductor search needs b >= 2, got {b}")
    modulus = lcm([b, *extra_congruence])
    return least_prime(
        modulus, predicate, limit=limit, avoid=avoid, jobs=jobs, conditions=conditions
    )


def is_inert(disc: int, q: int) -> bool:
    """True iff the odd prime q is inert in Q(sqrt(disc))."""
    return jacobi_symbol(disc % q, q) == -1


def scholz_modulus(b: int, constraints: ScholzConstraints) -> int:
    """Product of l^N over the primes l dividing b."""
    modulus = 1
    for l in constraints.primes:
        if b % l == 0:
            modulus *= prime_power(l, constraints.N).value
    return modulus


def check_scholz_degree(b: int, constraints: ScholzConstraints) -> None:
    """A Scholz layer needs odd degree over the constrained primes, with l-part at most l^N."""
    if b % 2 == 0:
        raise ArithmeticDomainError(f"Scholz conductors need odd degree, got {b}")
    stray = [p for p in prime_divisors(b) if p not in constraints.primes]
    if stray:
        raise ArithmeticDomainError(f"Degree {b} involves unconstrained primes {stray}")
    for l in constraints.primes:
        part, level = prime_part(b, l), prime_power(l, constraints.N)
        if part > level.value:
            raise ArithmeticDomainError(
                f"Degree {b} has {l}-part {part}, above the level {l}^{level.e}"
            )


def scholz_conductor_ok(
    q: int, b: int, constraints: ScholzConstraints, chosen: Sequence[CyclicFieldSpec]
) -> bool:
    """Local conditions on a new degree-b conductor q.

    Every prime of S_0, T and the already ramified set must split completely in the new
    field, the new and old conductors must split completely in each other's fields, and q
    must be inert in Q(sqrt(D)) when a discriminant is set.
    """
    if constraints.inert_disc is not None and not is_inert(constraints.inert_disc, q):
        return False
    fixed = set(constraints.s0) | set(constraints.t_primes) | set(constraints.ramified)
    for p in sorted(fixed):
        if p != q and not power_residue(p, b, q):
            logger.debug(f"Conductor {q} rejected: {p} is not a {b}-th power residue")
            return False
    for spec in chosen:
        if not power_residue(spec.conductor, b, q):
            return False
        if not power_residue(q, spec.degree, spec.conductor):
            return False
    return True


def realize_abelian(
    factors: Sequence[int],
    constraints: Optional[ScholzConstraints] = None,
    *,
    limit: int,
    jobs: int = 1,
    avoid: Collection[int] = (),
    inert_disc: Optional[int] = None,
) -> AbelianRealization:
    """One prime-conductor cyclic field per invariant factor, largest factor first.

    With `inert_disc` set (and no Scholz constraints) conductors are taken inert in
    Q(sqrt(inert_disc)), so each ramifies in exactly one prime of that field.
    """
    invariants = [b for b in invariant_factors(factors) if b > 1]
    if not invariants:
        raise ArithmeticDomainError("realize_abelian needs a nontrivial group")

    excluded = set(avoid)
    if constraints is not None:
        for b in invariants:
            check_scholz_degree(b, constraints)
        excluded |= set(constraints.s0) | set(constraints.t_primes) | set(constraints.ramified)
    specs: List[CyclicFieldSpec] = []
    for b in invariants:
        used = excluded | {spec.conductor for spec in specs}
        if constraints is None:
            inert = partial(is_inert, inert_disc) if inert_disc is not None else None
            q = find_conductor(b, used, limit=limit, jobs=jobs, predicate=inert)
        else:
            chosen = list(specs)
            q = find_conductor(
                b,
                used,
                [scholz_modulus(b, constraints)],
                limit=limit,
                jobs=jobs,
                predicate=lambda q, b=b, chosen=chosen: scholz_conductor_ok(
                    q, b, constraints, chosen
                ),
                conditions=[
                    f"q = 1 mod {scholz_modulus(b, constraints)}",
                    "S_0, T and chosen conductors split completely",
                ],
            )
        logger.info(f"Cyclic factor Z/{b} realized with conductor {q}")
        specs.append(cyclic_field_spec(q, b))
    return AbelianRealization(
        invariant_factors=invariants,
        specs=specs,
        ramified_primes=sorted(spec.conductor for spec in specs),
    )
