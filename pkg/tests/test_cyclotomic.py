import pytest

from minram.arith import power_residue
from minram.cyclotomic import (
    character_value,
    check_scholz_degree,
    cyclic_field_spec,
    dirichlet_character,
    find_conductor,
    frobenius_degree,
    gaussian_period_poly,
    is_inert,
    realize_abelian,
    scholz_conductor_ok,
    scholz_modulus,
)
from minram.errors import ArithmeticDomainError, SearchLimitExceeded
from minram.models import ScholzConstraints


@pytest.mark.parametrize(
    "q, b, expected",
    [
        (7, 3, [-1, -2, 1, 1]),
        (3, 2, [1, 1, 1]),
        (5, 2, [-1, 1, 1]),
        (13, 2, [-3, 1, 1]),
        (7, 2, [2, 1, 1]),
        (13, 3, [1, -4, 1, 1]),
    ],
)
def test_gaussian_period_poly(q, b, expected):
    assert gaussian_period_poly(q, b) == expected


def test_gaussian_period_poly_degree_and_sum():
    coeffs = gaussian_period_poly(19, 9)
    assert len(coeffs) == 10
    # the periods sum to the sum of all primitive 19th roots of unity
    assert coeffs[-2] == 1


def test_gaussian_period_poly_domain():
    with pytest.raises(ArithmeticDomainError):
        gaussian_period_poly(15, 2)
    with pytest.raises(ArithmeticDomainError):
        gaussian_period_poly(7, 4)


def test_character_values():
    chi = dirichlet_character(7, 3)
    assert chi.generator == 3
    assert character_value(chi, 1) == 0
    assert character_value(chi, 3) == 1
    assert character_value(chi, 2) == 2
    assert character_value(chi, 6) == 0
    with pytest.raises(ArithmeticDomainError):
        character_value(chi, 14)


def test_frobenius_degree():
    chi = dirichlet_character(7, 3)
    assert frobenius_degree(chi, 2) == 3
    assert frobenius_degree(chi, 13) == 1
    assert frobenius_degree(chi, 29) == 1


def test_find_conductor():
    assert find_conductor(3, limit=1000) == 7
    assert find_conductor(9, limit=1000) == 19
    assert find_conductor(3, avoid={7}, limit=1000) == 13
    assert find_conductor(3, extra_congruence=[5], limit=1000) == 31
    with pytest.raises(ArithmeticDomainError):
        find_conductor(1, limit=1000)
    with pytest.raises(SearchLimitExceeded):
        find_conductor(9, limit=18)


def test_realize_abelian():
    realization = realize_abelian([3, 9], limit=1000)
    assert realization.invariant_factors == [9, 3]
    assert realization.conductors == [19, 7]
    assert realization.ramified_primes == [7, 19]
    assert realization.specs[1].defining_poly == [-1, -2, 1, 1]


def test_realize_quadratic():
    realization = realize_abelian([2], limit=1000)
    assert realization.conductors == [3]
    assert realization.specs[0].defining_poly == [1, 1, 1]


def test_realize_trivial_group():
    with pytest.raises(ArithmeticDomainError):
        realize_abelian([1, 1], limit=1000)


def test_realize_with_inert_conductors():
    realization = realize_abelian([3, 3], limit=10**4, inert_disc=-23)
    for q in realization.conductors:
        assert (q - 1) % 3 == 0
        assert is_inert(-23, q)
    assert realization.conductors == sorted(realization.conductors)


def test_is_inert():
    assert is_inert(-23, 5)
    assert not is_inert(-23, 13)


def test_scholz_realization_satisfies_local_conditions():
    constraints = ScholzConstraints(primes=[3], N=1, s0=[3])
    realization = realize_abelian([3, 3], constraints, limit=10**6)
    (q1, b1), (q2, b2) = [(s.conductor, s.degree) for s in realization.specs]
    assert q1 == 61
    assert power_residue(3, 3, q1) and power_residue(3, 3, q2)
    assert power_residue(q1, 3, q2) and power_residue(q2, 3, q1)
    assert scholz_conductor_ok(q2, b2, constraints, realization.specs[:1])


def test_scholz_modulus():
    constraints = ScholzConstraints(primes=[3, 5], N=2)
    assert scholz_modulus(15, constraints) == 225
    assert scholz_modulus(3, constraints) == 9


def test_scholz_rejects_even_and_unconstrained_degrees():
    constraints = ScholzConstraints(primes=[3], N=1, s0=[3])
    with pytest.raises(ArithmeticDomainError):
        realize_abelian([2, 3], constraints, limit=1000)
    with pytest.raises(ArithmeticDomainError):
        realize_abelian([5], constraints, limit=1000)


def test_cyclic_field_spec():
    spec = cyclic_field_spec(19, 9)
    assert spec.conductor == 19
    assert spec.degree == 9
    assert spec.character.order == 9


def test_scholz_degree_is_bounded_by_the_level():
    shallow = ScholzConstraints(primes=[3], N=1, s0=[3])
    with pytest.raises(ArithmeticDomainError, match="above the level"):
        realize_abelian([9], shallow, limit=1000)
    with pytest.raises(ArithmeticDomainError, match="above the level"):
        check_scholz_degree(9, shallow)
    check_scholz_degree(9, ScholzConstraints(primes=[3], N=2, s0=[3]))
    check_scholz_degree(3, shallow)


@pytest.mark.parametrize(
    "b, match",
    [(6, "odd degree"), (15, "unconstrained primes")],
)
def test_scholz_degree_domain(b, match):
    with pytest.raises(ArithmeticDomainError, match=match):
        check_scholz_degree(b, ScholzConstraints(primes=[3], N=2, s0=[3]))


def test_scholz_modulus_uses_the_level():
    assert scholz_modulus(3, ScholzConstraints(primes=[3], N=2, s0=[3])) == 9
