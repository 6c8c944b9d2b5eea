"""Imaginary quadratic fields through reduced binary quadratic forms."""

import json
import logging
from math import gcd, isqrt
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

from pydantic import ValidationError
from sympy import factorint, jacobi_symbol
from sympy.ntheory.residue_ntheory import sqrt_mod

from .arith import invariant_factors, is_prime
from .errors import ArithmeticDomainError, ClassOrderError, FieldDataError
from .models import (
    FieldData,
    FieldKind,
    IdealPowerGenerator,
    QuadClassGroup,
    QuadField,
    ResidueClass,
)

logger = logging.getLogger(__name__)

MAX_ABS_DISC = 10**6


def _solve_linmod(a: int, b: int, m: int) -> Tuple[int, int]:
    """Solve a*x = b mod m; the solutions are u + v*n."""
    g = gcd(a, m)
    if b % g:
        raise ArithmeticDomainError(f"{a}*x = {b} mod {m} has no solution")
    v = m // g
    u = (b // g) * pow(a // g, -1, v) % v if v > 1 else 0
    return u, v


class BinaryForm(NamedTuple):
    """Positive definite form a x^2 + b xy + c y^2."""

    a: int
    b: int
    c: int

    @classmethod
    def principal(cls, disc: int) -> "BinaryForm":
        k = disc % 2
        return cls(1, k, (k * k - disc) // 4)

    @classmethod
    def from_ab(cls, a: int, b: int, disc: int) -> "BinaryForm":
        return cls(a, b, (b * b - disc) // (4 * a))

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def normalized(self) -> "BinaryForm":
        a, b, c = self
        if -a < b <= a:
            return self
        r = (a - b) // (2 * a)
        return BinaryForm(a, b + 2 * r * a, a * r * r + b * r + c)

    def reduced(self) -> "BinaryForm":
        a, b, c = self.normalized()
        while a > c or (a == c and b < 0):
            s = (c + b) // (c + c)
            a, b, c = c, -b + 2 * s * c, c * s * s - b * s + a
        return BinaryForm(a, b, c).normalized()

    def is_reduced(self) -> bool:
        a, b, c = self
        return -a < b <= a <= c and not (a == c and b < 0)

    def inverse(self) -> "BinaryForm":
        return BinaryForm(self.a, -self.b, self.c).reduced()

    def compose(self, other: "BinaryForm") -> "BinaryForm":
        """Gaussian composition, reduced."""
        a1, b1, c1 = self.reduced()
        a2, b2, c2 = other.reduced()
        g = (b2 + b1) // 2
        h = (b2 - b1) // 2
        w = gcd(a1, a2, g)
        s, t, u = a1 // w, a2 // w, g // w

        k_temp, step = _solve_linmod(t * u, h * u + s * c1, s * t)
        n, _ = _solve_linmod(t * step, h - t * k_temp, s)
        k = k_temp + step * n
        l = (t * k - h) // s
        m = (t * u * k - h * u - s * c1) // (s * t)
        return BinaryForm(s * t, w * u - (k * t + l * s), k * l - w * m).reduced()

    def power(self, n: int) -> "BinaryForm":
        if n < 0:
            return self.inverse().power(-n)
        result, base = BinaryForm.principal(self.discriminant), self.reduced()
        while n:
            if n & 1:
                result = result.compose(base)
            base = base.compose(base)
            n >>= 1
        return result

    def is_principal(self) -> bool:
        return self.reduced() == BinaryForm.principal(self.discriminant)

    def order(self) -> int:
        form, k = self.reduced(), 1
        while not form.is_principal():
            form = form.compose(self)
            k += 1
        return k


def is_fundamental(disc: int) -> bool:
    if disc in (0, 1):
        return False
    if disc % 4 == 1:
        return all(e == 1 for e in factorint(abs(disc)).values())
    if disc % 4 == 0:
        m = disc // 4
        return m % 4 in (2, 3) and all(e == 1 for e in factorint(abs(m)).values())
    return False


def quad_field(disc: int) -> QuadField:
    if disc >= 0 or not is_fundamental(disc):
        raise FieldDataError(f"{disc} is not a negative fundamental discriminant")
    torsion = {-3: 6, -4: 4}.get(disc, 2)
    return QuadField(disc=disc, delta=disc % 2, torsion=torsion)


def reduced_forms(disc: int) -> List[BinaryForm]:
    """All primitive reduced forms of discriminant disc < 0."""
    forms = []
    for a in range(1, isqrt(abs(disc) // 3) + 1):
        for b in range(-a + 1, a + 1):
            if (b * b - disc) % (4 * a):
                continue
            c = (b * b - disc) // (4 * a)
            if c < a or (a == c and b < 0) or gcd(a, b, c) != 1:
                continue
            forms.append(BinaryForm(a, b, c))
    return sorted(forms, key=lambda f: (f.a, abs(f.b), -f.b))


def _log(n: int, p: int) -> int:
    k = 0
    while n > 1:
        n //= p
        k += 1
    return k


def class_group(disc: int) -> QuadClassGroup:
    """Class group of Q(sqrt(disc)) with its invariant factors and l-ranks."""
    quad_field(disc)
    if abs(disc) > MAX_ABS_DISC:
        raise FieldDataError(f"|D| = {abs(disc)} is above {MAX_ABS_DISC}")
    forms = reduced_forms(disc)
    h = len(forms)

    elementary: List[int] = []
    ranks: Dict[int, int] = {}
    square_primes: List[int] = []
    for p, e in sorted(factorint(h).items()):
        # |Cl[p^k]| for k = 0..e determines the p-part
        torsion_logs = [0]
        for k in range(1, e + 1):
            count = sum(1 for f in forms if f.power(p**k).is_principal())
            torsion_logs.append(_log(count, p))
        at_least = [torsion_logs[k] - torsion_logs[k - 1] for k in range(1, e + 1)]
        for k in range(1, e + 1):
            above = at_least[k] if k < e else 0
            elementary.extend([p**k] * (at_least[k - 1] - above))
        ranks[p] = at_least[0]
        if e >= 2 and at_least[1] > 0:
            square_primes.append(p)

    invariants = invariant_factors(elementary)
    logger.debug(f"Cl({disc}): h = {h}, invariants {invariants}")
    return QuadClassGroup(
        disc=disc,
        forms=[tuple(f) for f in forms],
        class_number=h,
        invariants=invariants,
        l_ranks=ranks,
        l_square_primes=square_primes,
    )


def splits(disc: int, p: int) -> bool:
    if p == 2:
        return disc % 8 == 1
    return jacobi_symbol(disc % p, p) == 1


def _prime_forms(disc: int, p: int) -> List[BinaryForm]:
    if p == 2:
        return [BinaryForm.from_ab(2, 1, disc), BinaryForm.from_ab(2, -1, disc)]
    r = sqrt_mod(disc % p, p)
    if (r - disc) % 2:
        r = p - r
    return [BinaryForm.from_ab(p, r, disc), BinaryForm.from_ab(p, -r, disc)]


def prime_form_in_class(
    disc: int, form: Tuple[int, int, int], limit: int = 10**6
) -> Tuple[int, BinaryForm]:
    """Least split prime p with a prime ideal of norm p in the class of `form`."""
    target = BinaryForm(*form).reduced()
    p = 1
    while p < limit:
        p += 1
        if not is_prime(p) or disc % p == 0 or not splits(disc, p):
            continue
        for candidate in _prime_forms(disc, p):
            if candidate.reduced() == target:
                return p, candidate
    raise ArithmeticDomainError(f"No split prime below {limit} represents {tuple(target)}")


def norm(field: QuadField, x: int, y: int) -> int:
    """Norm of x + y*omega."""
    u = 2 * x + field.delta * y
    return (u * u - field.disc * y * y) // 4


def ideal_power_generator(disc: int, l: int, form: Tuple[int, int, int]) -> IdealPowerGenerator:
    """Generator x + y*omega of a^l for a prime ideal a in a class of order l.

    Among the generators (unique up to roots of unity) the one with the least y >= 0 and
    then the least x is returned.
    """
    field = quad_field(disc)
    target = BinaryForm(*form).reduced()
    if target.discriminant != disc:
        raise FieldDataError(f"Form {tuple(form)} does not have discriminant {disc}")
    order = target.order()
    if order != l:
        raise ClassOrderError(order, l)

    p, prime = prime_form_in_class(disc, tuple(target))
    big_norm = p**l
    half = (field.delta + prime.b) // 2
    half_conj = (field.delta - prime.b) // 2
    candidates = []
    for y in range(0, isqrt(4 * big_norm // abs(disc)) + 1):
        rest = 4 * big_norm - abs(disc) * y * y
        u = isqrt(rest)
        if u * u != rest:
            continue
        for signed in {u, -u}:
            if (signed - field.delta * y) % 2:
                continue
            x = (signed - field.delta * y) // 2
            in_ideal = (x + y * half) % p == 0
            in_conjugate = (x + y * half_conj) % p == 0
            if in_ideal and not in_conjugate:
                candidates.append((y, x))
    if not candidates:
        raise ArithmeticDomainError(f"No generator of norm {big_norm} found for {tuple(target)}")
    y, x = min(candidates)
    logger.debug(f"a^{l} = ({x} + {y}*omega) for the prime of norm {p} in class {tuple(target)}")
    return IdealPowerGenerator(
        disc=disc,
        l=l,
        class_form=tuple(target),
        prime_norm=p,
        prime_form=tuple(prime),
        x=x,
        y=y,
        norm=norm(field, x, y),
    )


def omega_roots(disc: int, q: int) -> List[int]:
    """Roots mod q of the minimal polynomial of omega, in increasing order."""
    delta = disc % 2
    constant = (delta - disc) // 4
    if q == 2:
        return [r for r in range(2) if (r * r - delta * r + constant) % 2 == 0]
    roots = sqrt_mod(disc % q, q, all_roots=True) or []
    half = pow(2, -1, q)
    return sorted({(delta + s) * half % q for s in roots})


def residue_class(
    disc: int, x: int, y: int, q: int, root: Optional[int] = None
) -> ResidueClass:
    """Image of x + y*omega in O_K / Q for a prime Q above q.

    For split or ramified q the root chooses Q; it defaults to the least root. For inert q
    the residue field has q^2 elements and the coordinates mod q are returned instead.
    """
    field = quad_field(disc)
    if not is_prime(q):
        raise ArithmeticDomainError(f"{q} is not prime")
    if norm(field, x, y) % q == 0:
        raise ArithmeticDomainError(f"{q} divides the norm of {x} + {y}*omega")
    roots = omega_roots(disc, q)
    if not roots:
        return ResidueClass(disc=disc, q=q, pair=(x % q, y % q), inert=True)
    if root is None:
        root = roots[0]
    elif root % q not in roots:
        raise ArithmeticDomainError(f"{root} is not a root of the minimal polynomial mod {q}")
    return ResidueClass(disc=disc, q=q, root=root % q, value=(x + y * root) % q)


def inert_power_residue(disc: int, x: int, y: int, m: int, q: int) -> bool:
    """True iff x + y*omega is an m-th power in O_K / (q) = F_{q^2} for an inert prime q."""
    field = quad_field(disc)
    if not is_prime(q) or omega_roots(disc, q):
        raise ArithmeticDomainError(f"{q} is not an inert prime of {field.label}")
    if m < 1 or (q * q - 1) % m:
        raise ArithmeticDomainError(f"{m} does not divide {q}^2 - 1")
    if norm(field, x, y) % q == 0:
        raise ArithmeticDomainError(f"{q} divides the norm of {x} + {y}*omega")

    # omega^2 = delta*omega - constant in F_q[omega]
    constant = (field.delta - disc) // 4

    def times(a: Tuple[int, int], b: Tuple[int, int]) -> Tuple[int, int]:
        return (
            (a[0] * b[0] - a[1] * b[1] * constant) % q,
            (a[0] * b[1] + a[1] * b[0] + a[1] * b[1] * field.delta) % q,
        )

    result, base, e = (1, 0), (x % q, y % q), (q * q - 1) // m
    while e:
        if e & 1:
            result = times(result, base)
        base = times(base, base)
        e >>= 1
    return result == (1, 0)


def field_data(spec: Any) -> FieldData:
    """Resolve "Q", a discriminant, {"quad_disc": D} or {"custom": {...}} into FieldData."""
    if isinstance(spec, FieldData):
        return spec
    if isinstance(spec, str):
        text = spec.strip()
        if text.upper() == "Q":
            spec = "Q"
        else:
            try:
                spec = json.loads(text)
            except json.JSONDecodeError as e:
                raise FieldDataError(f"Unrecognized field description {text!r}") from e
    if isinstance(spec, dict) and "field" in spec:
        spec = spec["field"]

    if spec == "Q":
        return FieldData(kind=FieldKind.RATIONAL, label="Q", disc=1)
    if isinstance(spec, int):
        spec = {"quad_disc": spec}
    if not isinstance(spec, dict):
        raise FieldDataError(f"Unrecognized field description {spec!r}")

    if "quad_disc" in spec:
        disc = int(spec["quad_disc"])
        if disc > 0:
            raise FieldDataError(
                f"Real quadratic fields need a custom description with s and r, got {disc}"
            )
        field = quad_field(disc)
        group = class_group(disc)
        return FieldData(
            kind=FieldKind.IMAGINARY_QUADRATIC,
            label=field.label,
            disc=disc,
            unit_rank=0,
            class_ranks=group.l_ranks,
            class_number=group.class_number,
            torsion=field.torsion,
            l_square_primes=group.l_square_primes,
        )
    if "custom" in spec:
        custom = spec["custom"]
        try:
            return FieldData(
                kind=FieldKind.CUSTOM,
                label=custom.get("label", "custom"),
                disc=custom.get("disc"),
                unit_rank=custom.get("s", 0),
                class_ranks={int(l): r for l, r in custom.get("r", {}).items()},
                class_number=custom.get("h", 1),
                torsion=custom.get("torsion", 2),
                l_square_primes=custom.get("l_square", []),
            )
        except (ValidationError, AttributeError, TypeError, ValueError) as e:
            raise FieldDataError(f"Invalid custom field: {e}") from e
    try:
        return FieldData.model_validate(spec)
    except ValidationError as e:
        raise FieldDataError(f"Invalid field description: {e}") from e
