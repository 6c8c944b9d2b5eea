"""Exact integer and modular arithmetic used by every search and certificate check."""

import logging
from functools import reduce
from math import gcd
from typing import Iterable, List, Sequence, Tuple

from sympy import factorint, isprime
from sympy.ntheory.modular import solve_congruence
from sympy.ntheory.residue_ntheory import is_primitive_root

from .errors import ArithmeticDomainError
from .models import PrimePower

logger = logging.getLogger(__name__)


def is_prime(n: int) -> bool:
    """Primality test.

    sympy runs trial division followed by a strong BPSW test, which has no known
    counterexample and is proven correct for every n < 2^64.
    """
    if n < 2:
        return False
    return bool(isprime(n))


def factorize(n: int) -> List[int]:
    """Prime factors of n with multiplicity, in increasing order."""
    if n < 1:
        raise ArithmeticDomainError(f"factorize needs n >= 1, got {n}")
    return [p for p, e in sorted(factorint(n).items()) for _ in range(e)]


def prime_divisors(n: int) -> List[int]:
    return sorted(set(factorize(abs(n)))) if n not in (0, 1, -1) else []


def prime_power(l: int, e: int) -> PrimePower:
    return PrimePower(l=l, e=e)


def power_residue(a: int, m: int, q: int) -> bool:
    """True iff a is an m-th power modulo the prime q (Euler's criterion)."""
    if not is_prime(q):
        raise ArithmeticDomainError(f"power_residue needs a prime modulus, got {q}")
    if m < 1 or (q - 1) % m:
        raise ArithmeticDomainError(f"{m} does not divide {q} - 1")
    if a % q == 0:
        raise ArithmeticDomainError(f"{q} divides {a}")
    return pow(a, (q - 1) // m, q) == 1


def primitive_root(q: int) -> int:
    """Least generator of (Z/q)^x."""
    if q == 2:
        return 1
    if not is_prime(q):
        raise ArithmeticDomainError(f"primitive_root needs a prime, got {q}")
    for root in range(2, q):
        if is_primitive_root(root, q):
            return root
    raise ArithmeticDomainError(f"No primitive root found mod {q}")


def multiplicative_order(a: int, q: int) -> int:
    """Order of a in (Z/q)^x for prime q."""
    if a % q == 0:
        raise ArithmeticDomainError(f"{q} divides {a}")
    order = q - 1
    for p in prime_divisors(q - 1):
        while order % p == 0 and pow(a, order // p, q) == 1:
            order //= p
    return order


def crt(residues: Sequence[Tuple[int, int]]) -> Tuple[int, int]:
    """Solve x = r_i mod m_i; returns (x, lcm of the moduli).

    Non-coprime moduli are accepted when the residues agree; otherwise the data is
    inconsistent and an ArithmeticDomainError is raised.
    """
    if not residues:
        return 0, 1
    for _, m in residues:
        if m < 1:
            raise ArithmeticDomainError(f"Modulus must be positive, got {m}")
    solution = solve_congruence(*[(r % m, m) for r, m in residues])
    if solution is None:
        raise ArithmeticDomainError(f"Inconsistent congruences: {list(residues)}")
    x, modulus = solution
    return int(x), int(modulus)


def lcm(values: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // gcd(a, b), values, 1)


def invariant_factors(factors: Iterable[int]) -> List[int]:
    """Invariant factors b_1, b_2, ... (b_{i+1} | b_i) of the product of Z/n over `factors`."""
    by_prime: dict = {}
    for n in factors:
        if n < 1:
            raise ArithmeticDomainError(f"Cyclic factor orders must be positive, got {n}")
        for p, e in factorint(n).items():
            by_prime.setdefault(p, []).append(p**e)
    width = max((len(powers) for powers in by_prime.values()), default=0)
    result = [1] * width
    for powers in by_prime.values():
        for i, value in enumerate(sorted(powers, reverse=True)):
            result[i] *= value
    return result


def prime_part(n: int, l: int) -> int:
    """Largest power of l dividing n."""
    part = 1
    while n % l == 0:
        n //= l
        part *= l
    return part
