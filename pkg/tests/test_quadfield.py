from math import gcd

import pytest

from minram.arith import is_prime, power_residue
from minram.errors import ArithmeticDomainError, ClassOrderError, FieldDataError
from minram.models import FieldKind
from minram.quadfield import (
    BinaryForm,
    class_group,
    field_data,
    ideal_power_generator,
    inert_power_residue,
    is_fundamental,
    norm,
    omega_roots,
    prime_form_in_class,
    quad_field,
    reduced_forms,
    residue_class,
    splits,
)


def brute_force_forms(disc):
    """Reduced primitive forms by exhaustive search over a <= c."""
    forms = set()
    bound = abs(disc)
    for a in range(1, bound + 1):
        for b in range(-a, a + 1):
            numerator = b * b - disc
            if numerator % (4 * a):
                continue
            c = numerator // (4 * a)
            if c < a or gcd(gcd(a, b), c) != 1:
                continue
            if b == -a or (a == c and b < 0):
                continue
            forms.add((a, b, c))
    return forms


FUNDAMENTAL = [d for d in range(-3, -400, -1) if is_fundamental(d)]


def test_reduced_forms_of_minus_23():
    assert {tuple(f) for f in reduced_forms(-23)} == {(1, 1, 6), (2, 1, 3), (2, -1, 3)}


@pytest.mark.parametrize("disc", FUNDAMENTAL[::7])
def test_class_number_matches_enumeration(disc):
    group = class_group(disc)
    assert {tuple(f) for f in group.forms} == brute_force_forms(disc)
    product = 1
    for n in group.invariants:
        product *= n
    assert product == group.class_number


def test_class_group_of_minus_23():
    group = class_group(-23)
    assert group.class_number == 3
    assert group.invariants == [3]
    assert group.l_ranks == {3: 1}
    assert group.l_square_primes == []


def test_noncyclic_three_part():
    group = class_group(-3299)
    assert group.class_number == 27
    assert group.l_ranks[3] == 2
    assert group.invariants == [9, 3]
    assert group.l_square_primes == [3]


def test_class_group_of_minus_56():
    group = class_group(-56)
    assert group.invariants == [4]
    assert group.l_ranks == {2: 1}
    assert group.l_square_primes == [2]


def test_is_fundamental():
    assert all(is_fundamental(d) for d in (-3, -4, -8, -23, -56, 5, 12))
    assert not any(is_fundamental(d) for d in (-12, -16, -27, 1, 0, 9))


def test_form_arithmetic():
    disc = -23
    f = BinaryForm(2, 1, 3)
    identity = BinaryForm.principal(disc)
    assert identity == BinaryForm(1, 1, 6)
    assert f.compose(identity) == f
    assert f.compose(f.inverse()).is_principal()
    assert f.compose(f) == BinaryForm(2, -1, 3)
    assert f.power(3).is_principal()
    assert f.order() == 3
    assert f.power(-1) == f.inverse()
    assert BinaryForm(6, 1, 1).reduced() == identity


def test_composition_is_associative_on_class_group():
    forms = reduced_forms(-3299)
    sample = forms[::5]
    for a in sample:
        for b in sample:
            assert a.compose(b) == b.compose(a)
            for c in sample[:3]:
                assert a.compose(b).compose(c) == a.compose(b.compose(c))


def test_quad_field():
    assert quad_field(-23).delta == 1
    assert quad_field(-4).torsion == 4
    assert quad_field(-3).torsion == 6
    assert quad_field(-8).delta == 0
    with pytest.raises(FieldDataError):
        quad_field(-12)
    with pytest.raises(FieldDataError):
        quad_field(5)


def test_splits():
    assert splits(-23, 2)
    assert splits(-23, 13)
    assert not splits(-23, 5)
    assert not splits(-4, 3)


def test_prime_form_in_class():
    p, form = prime_form_in_class(-23, (2, 1, 3))
    assert p == 2
    assert form.reduced() == BinaryForm(2, 1, 3)


def test_ideal_power_generator():
    generator = ideal_power_generator(-23, 3, (2, 1, 3))
    assert generator.prime_norm == 2
    assert (generator.x, generator.y) == (1, 1)
    assert generator.norm == 8
    assert norm(quad_field(-23), generator.x, generator.y) == 2**3


def test_ideal_power_generator_needs_order_l():
    with pytest.raises(ClassOrderError) as excinfo:
        ideal_power_generator(-23, 3, (1, 1, 6))
    assert excinfo.value.order == 1
    with pytest.raises(ClassOrderError):
        ideal_power_generator(-23, 5, (2, 1, 3))


def test_omega_roots_and_residue_class():
    assert omega_roots(-23, 59) == [27, 33]
    image = residue_class(-23, 1, 1, 59)
    assert image.root == 27
    assert image.value == 28
    other = residue_class(-23, 1, 1, 59, root=33)
    assert other.value == 34
    inert = residue_class(-23, 1, 1, 5)
    assert inert.inert
    assert inert.pair == (1, 1)


def test_residue_class_domain():
    with pytest.raises(ArithmeticDomainError):
        residue_class(-23, 1, 1, 57)
    with pytest.raises(ArithmeticDomainError):
        residue_class(-23, 1, 1, 2)
    with pytest.raises(ArithmeticDomainError):
        residue_class(-23, 1, 1, 59, root=5)


def test_field_data():
    rational = field_data("Q")
    assert rational.kind == FieldKind.RATIONAL
    assert rational.unit_rank == 0
    quad = field_data("-23")
    assert quad.kind == FieldKind.IMAGINARY_QUADRATIC
    assert quad.class_ranks == {3: 1}
    assert quad.class_number == 3
    assert field_data({"quad_disc": -4}).torsion == 4
    assert field_data({"field": "Q"}).label == "Q"
    custom = field_data('{"custom": {"label": "K", "s": 2, "r": {"3": 1}, "h": 3}}')
    assert custom.kind == FieldKind.CUSTOM
    assert custom.unit_rank == 2
    assert custom.class_rank(3) == 1


@pytest.mark.parametrize("spec", ["nonsense", {"quad_disc": 5}, {"quad_disc": -12}, [1, 2]])
def test_field_data_errors(spec):
    with pytest.raises(FieldDataError):
        field_data(spec)


def f49_cubes():
    """Cubes of F_49 = F_7[omega], omega^2 = omega - 6, by enumeration."""
    q = 7

    def times(a, b):
        return (
            (a[0] * b[0] - 6 * a[1] * b[1]) % q,
            (a[0] * b[1] + a[1] * b[0] + a[1] * b[1]) % q,
        )

    cubes = set()
    for x in range(q):
        for y in range(q):
            if (x, y) != (0, 0):
                cubes.add(times(times((x, y), (x, y)), (x, y)))
    return cubes


def test_inert_power_residue_matches_enumeration():
    cubes = f49_cubes()
    assert len(cubes) == 16
    for x in range(7):
        for y in range(7):
            if (x, y) != (0, 0):
                assert inert_power_residue(-23, x, y, 3, 7) == ((x, y) in cubes)


def test_inert_power_residue_follows_the_norm():
    field = quad_field(-23)
    inert = [q for q in range(5, 200) if q % 3 == 1 and is_prime(q) and not splits(-23, q)]
    assert inert
    for q in inert:
        for x, y in [(2, 1), (3, -1), (5, 2), (1, 4)]:
            n = norm(field, x, y)
            if n % q:
                assert inert_power_residue(-23, x, y, 3, q) == power_residue(n % q, 3, q)


def test_inert_power_residue_domain():
    with pytest.raises(ArithmeticDomainError, match="inert"):
        inert_power_residue(-23, 2, 1, 3, 13)
    with pytest.raises(ArithmeticDomainError, match="does not divide"):
        inert_power_residue(-23, 2, 1, 5, 7)
    with pytest.raises(ArithmeticDomainError, match="inert"):
        inert_power_residue(-23, 2, 1, 3, 49)


def test_residue_class_is_a_ring_map():
    disc, q = -23, 13
    field = quad_field(disc)
    delta, constant = field.delta, (disc - field.delta) // 4
    pairs = [(2, 1), (3, -1), (5, 2), (1, 4), (7, 3)]
    for a in pairs:
        for b in pairs:
            total = (a[0] + b[0], a[1] + b[1])
            # omega^2 = delta*omega + (D - delta)/4
            product = (
                a[0] * b[0] + a[1] * b[1] * constant,
                a[0] * b[1] + a[1] * b[0] + a[1] * b[1] * delta,
            )
            va = residue_class(disc, *a, q).value
            vb = residue_class(disc, *b, q).value
            if norm(field, *total) % q:
                assert residue_class(disc, *total, q).value == (va + vb) % q
            if norm(field, *product) % q:
                assert residue_class(disc, *product, q).value == va * vb % q
