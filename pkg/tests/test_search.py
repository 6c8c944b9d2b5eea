import pytest

from minram.arith import is_prime
from minram.errors import SearchLimitExceeded
from minram.search import least_prime


def _brute_force(modulus, predicate, limit, after=1, avoid=()):
    for q in range(after + 1, limit + 1):
        if q % modulus == 1 % modulus and is_prime(q) and q not in avoid and predicate(q):
            return q
    return None


def test_least_prime_in_progression():
    assert least_prime(3, limit=100) == 7
    assert least_prime(3, limit=100, avoid={7}) == 13
    assert least_prime(3, limit=100, after=13) == 19
    assert least_prime(1, limit=100) == 2


def test_least_prime_with_predicate():
    def cubic(q):
        return pow(2, (q - 1) // 3, q) == 1

    assert least_prime(3, cubic, limit=10**4) == _brute_force(3, cubic, 10**4)


@pytest.mark.parametrize("jobs", [2, 4])
def test_worker_count_does_not_change_the_answer(jobs):
    def rare(q):
        return pow(3, (q - 1) // 9, q) == 1 and pow(5, (q - 1) // 3, q) == 1

    expected = least_prime(9, rare, limit=10**6)
    assert least_prime(9, rare, limit=10**6, jobs=jobs) == expected
    assert expected == _brute_force(9, rare, 10**6)


def test_limit_exceeded_reports_conditions():
    with pytest.raises(SearchLimitExceeded) as excinfo:
        least_prime(7, lambda q: False, limit=500, conditions=["never"])
    assert excinfo.value.bound == 500
    assert excinfo.value.conditions == ["q = 1 mod 7", "never"]


def test_bad_modulus():
    with pytest.raises(ValueError):
        least_prime(0, limit=10)


def test_workers_share_the_predicate_state():
    seen = []

    def recording(q):
        seen.append(q)
        return q > 50

    assert least_prime(3, recording, limit=1000, jobs=3) == 61
    # workers run in this process, so the closure sees every candidate of the chunk
    assert set(seen) >= {7, 13, 19, 31, 37, 43, 61}
