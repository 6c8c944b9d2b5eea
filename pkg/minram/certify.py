"""Independent checks on constructed fields: discriminants, ramification, Frobenius patterns."""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Poly, integer_nthroot, primerange, symbols
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_ddf_zassenhaus, gf_from_int_poly
from sympy.polys.numberfields.basis import round_two
from sympy.polys.subresultants_qq_zz import res_z

from .arith import prime_divisors
from .cyclotomic import frobenius_degree
from .errors import ArithmeticDomainError
from .models import (
    AbelianRealization,
    CyclicFieldSpec,
    FactorReport,
    FrobeniusReport,
    RamificationReport,
)

logger = logging.getLogger(__name__)

x = symbols("x")


def _poly(coeffs: Sequence[int]) -> Poly:
    """Polynomial from coefficients listed constant term first."""
    if not coeffs or coeffs[-1] != 1:
        raise ArithmeticDomainError(f"Expected a monic polynomial, got {list(coeffs)}")
    return Poly(list(reversed(coeffs)), x, domain=ZZ)


def poly_discriminant(coeffs: Sequence[int]) -> int:
    """disc(f) = (-1)^(n(n-1)/2) res(f, f') for monic f, via subresultant remainders."""
    f = _poly(coeffs)
    n = f.degree()
    if n < 1:
        raise ArithmeticDomainError("The discriminant needs a polynomial of degree >= 1")
    resultant = int(res_z(f.as_expr(), f.diff(x).as_expr(), x))
    disc = (-1) ** (n * (n - 1) // 2) * resultant
    if disc == 0:
        raise ArithmeticDomainError(f"{f.as_expr()} is not squarefree")
    return disc


def _lift(g: Poly) -> Poly:
    return Poly([int(c) for c in g.all_coeffs()], x, domain=ZZ)


def dedekind_maximal(coeffs: Sequence[int], p: int) -> bool:
    """Dedekind's criterion: is Z[x]/(f) maximal at p?

    With f = prod g_i^e_i mod p and F = (f - prod G_i^e_i) / p for integer lifts G_i, the
    order is p-maximal iff no g_i with e_i >= 2 divides F mod p.
    """
    f = _poly(coeffs)
    _, factors = Poly(f.as_expr(), x, modulus=p).factor_list()
    product = Poly(1, x, domain=ZZ)
    for g, e in factors:
        product *= _lift(g) ** e
    difference = f - product
    lowered = Poly([int(c) // p for c in difference.all_coeffs()], x, domain=ZZ)
    reduced = Poly(lowered.as_expr(), x, modulus=p)
    for g, e in factors:
        if e >= 2 and reduced.rem(g).is_zero:
            return False
    return True


def _field_disc(coeffs: Sequence[int]) -> Optional[int]:
    try:
        _, disc = round_two(_poly(coeffs))
        return int(disc)
    except (NotImplementedError, ValueError) as e:
        logger.warning(f"Integral basis computation failed: {e}")
        return None


def _plausible(poly_disc: int, field_disc: int) -> bool:
    """disc(f) = [O_K : Z[x]/(f)]^2 * d_K, so the quotient must be a nonzero square."""
    if field_disc == 0 or poly_disc % field_disc:
        return False
    _, exact = integer_nthroot(abs(poly_disc // field_disc), 2)
    return exact


def ramification(
    coeffs: Sequence[int], field_disc: Optional[int] = None
) -> Tuple[List[int], List[int]]:
    """Ramified primes of Q[x]/(f) and the primes left inconclusive.

    Every prime dividing disc(f) has a repeated factor mod p. Where Dedekind's criterion
    shows the order is p-maximal the prime ramifies; at index divisors the field
    discriminant decides. It is `field_disc` when the caller knows it (the
    conductor-discriminant value of a field built here), else the one of a round-two
    integral basis. A value that does not divide disc(f) with square quotient is rejected.
    """
    disc = poly_discriminant(coeffs)
    ramified: List[int] = []
    inconclusive: List[int] = []
    resolved = field_disc is not None
    for p in prime_divisors(disc):
        if dedekind_maximal(coeffs, p):
            ramified.append(p)
            continue
        if not resolved:
            field_disc, resolved = _field_disc(coeffs), True
        if field_disc is not None and not _plausible(disc, field_disc):
            logger.warning(f"Field discriminant {field_disc} does not fit disc(f) = {disc}")
            field_disc = None
        if field_disc is None:
            inconclusive.append(p)
        elif field_disc % p == 0:
            ramified.append(p)
        else:
            logger.debug(f"{p} divides the index of Z[x]/(f) but not the field discriminant")
    return ramified, inconclusive


def ramified_primes(coeffs: Sequence[int], field_disc: Optional[int] = None) -> List[int]:
    ramified, inconclusive = ramification(coeffs, field_disc)
    if inconclusive:
        logger.warning(f"Ramification at {inconclusive} is undecided")
    return ramified


def certify_polynomial(
    coeffs: Sequence[int], expected: Optional[Sequence[int]] = None
) -> RamificationReport:
    """Ramification report for an external polynomial; no conductor-discriminant claims."""
    ramified, inconclusive = ramification(coeffs)
    expected = sorted(expected) if expected is not None else ramified
    return RamificationReport(
        polynomials=[list(coeffs)],
        poly_disc=poly_discriminant(coeffs),
        ramified_primes=ramified,
        expected=expected,
        inconclusive=inconclusive,
        verdict=not inconclusive and ramified == expected,
    )


def verify_realization(realization: AbelianRealization) -> RamificationReport:
    """Each factor must ramify exactly at its conductor, and d conductors in total."""
    factors: List[FactorReport] = []
    union: set = set()
    inconclusive: List[int] = []
    poly_disc = 1
    consistent = True
    for spec in realization.specs:
        disc = poly_discriminant(spec.defining_poly)
        q, b = spec.conductor, spec.degree
        ramified, undecided = ramification(spec.defining_poly, field_disc=q ** (b - 1))
        factor = FactorReport(
            conductor=q,
            degree=b,
            poly_disc=disc,
            ramified_primes=ramified,
            disc_divisible=disc % q ** (b - 1) == 0,
        )
        consistent &= ramified == [q] and factor.disc_divisible
        factors.append(factor)
        union.update(ramified)
        inconclusive.extend(undecided)
        poly_disc *= disc

    found = sorted(union)
    expected = sorted(realization.ramified_primes)
    verdict = (
        consistent
        and not inconclusive
        and found == expected
        and len(found) == len(realization.specs)
    )
    logger.info(f"Realization ramified at {found}, expected {expected}: verdict {verdict}")
    return RamificationReport(
        polynomials=[spec.defining_poly for spec in realization.specs],
        poly_disc=poly_disc,
        field_disc=_compositum_disc(realization.specs),
        ramified_primes=found,
        expected=expected,
        inconclusive=sorted(set(inconclusive)),
        verdict=verdict,
        factors=factors,
    )


def _compositum_disc(specs: Sequence[CyclicFieldSpec]) -> int:
    """|disc| of the compositum by the conductor-discriminant formula (coprime conductors)."""
    degree = 1
    for spec in specs:
        degree *= spec.degree
    disc = 1
    for spec in specs:
        disc *= spec.conductor ** ((spec.degree - 1) * (degree // spec.degree))
    return disc


def _pattern(coeffs: Sequence[int], p: int) -> Dict[int, int]:
    """Degrees of the irreducible factors of f mod p, degree -> count."""
    f = gf_from_int_poly(list(reversed(coeffs)), p)
    pattern: Dict[int, int] = {}
    for g, d in gf_ddf_zassenhaus(f, p, ZZ):
        pattern[d] = pattern.get(d, 0) + (len(g) - 1) // d
    return pattern


def frobenius_statistics(spec: CyclicFieldSpec, bound: int) -> FrobeniusReport:
    """Compare factorization patterns mod p < bound with the order of chi(p)."""
    if bound < 100:
        raise ArithmeticDomainError(f"Frobenius statistics need bound >= 100, got {bound}")
    disc = poly_discriminant(spec.defining_poly)
    sample: Dict[str, int] = {}
    mismatches: List[int] = []
    tested = split = 0
    for p in primerange(2, bound):
        if disc % p == 0:
            continue
        tested += 1
        pattern = _pattern(spec.defining_poly, p)
        f = frobenius_degree(spec.character, p)
        key = ",".join(f"{d}^{n}" for d, n in sorted(pattern.items()))
        sample[key] = sample.get(key, 0) + 1
        if pattern != {f: spec.degree // f}:
            mismatches.append(p)
        if f == 1:
            split += 1
    if mismatches:
        logger.warning(f"Frobenius mismatches for conductor {spec.conductor}: {mismatches}")
    return FrobeniusReport(
        conductor=spec.conductor,
        degree=spec.degree,
        bound=bound,
        primes_tested=tested,
        sample=dict(sorted(sample.items())),
        mismatches=mismatches,
        split_fraction=split / tested if tested else 0.0,
        expected_fraction=1 / spec.degree,
    )
