import numpy as np
import pytest

from netcoding import field
from netcoding.errors import FieldDomainError
from netcoding.rng import make_rng

ALL = range(field.FIELD_SIZE)


def test_add_is_self_inverse_with_zero_identity():
    for a in ALL:
        assert field.add(a, a) == 0
        assert field.add(a, 0) == a


def test_add_known_value():
    assert field.add(0x57, 0x83) == 0xD4


def test_mul_identities():
    for a in ALL:
        assert field.mul(a, 1) == a
        assert field.mul(a, 0) == 0
        assert field.mul(0, a) == 0


def test_mul_single_shift_reduces_by_polynomial():
    assert field.mul(0x02, 0x80) == 0x1B
    assert field.slow_mul(0x02, 0x80) == 0x1B


def test_mul_tables_match_shift_and_reduce_everywhere():
    for a in ALL:
        for b in ALL:
            assert field.mul(a, b) == field.slow_mul(a, b)


def test_mul_array_matches_scalar_mul():
    a = np.repeat(np.arange(256, dtype=np.uint8), 256)
    b = np.tile(np.arange(256, dtype=np.uint8), 256)
    expected = np.array([field.mul(int(x), int(y)) for x, y in zip(a, b)], dtype=np.uint8)
    assert np.array_equal(field.mul_array(a, b), expected)


def test_generator_has_full_order():
    powers = set(int(v) for v in field.EXP[:field.ORDER])
    assert len(powers) == 255
    assert 0 not in powers


def test_tables_are_read_only():
    with pytest.raises(ValueError):
        field.EXP[0] = 7


def test_inv_of_one_is_one():
    assert field.inv(1) == 1


def test_inv_of_zero_is_domain_error():
    with pytest.raises(FieldDomainError, match="no inverse of zero"):
        field.inv(0)


def test_inv_exhaustively_matches_search():
    for a in range(1, 256):
        partners = [b for b in range(1, 256) if field.mul(a, b) == 1]
        assert partners == [field.inv(a)]


def test_field_axioms_on_random_triples():
    rng = make_rng(5)
    for _ in range(10_000):
        a, b, c = (int(v) for v in rng.integers(0, 256, size=3))
        assert field.mul(a, b) == field.mul(b, a)
        assert field.add(a, b) == field.add(b, a)
        assert field.mul(field.mul(a, b), c) == field.mul(a, field.mul(b, c))
        assert field.add(field.add(a, b), c) == field.add(a, field.add(b, c))
        assert field.mul(a, field.add(b, c)) == field.add(field.mul(a, b), field.mul(a, c))
        assert field.add(a, field.add(a, b)) == b


def test_random_nonzero_range_and_uniformity():
    rng = make_rng(99)
    draws = np.array([field.random_nonzero(rng) for _ in range(100_000)])
    assert draws.min() >= 1 and draws.max() <= 255
    counts = np.bincount(draws, minlength=256)[1:]
    expected = 100_000 / 255
    sigma = np.sqrt(expected * (1 - 1 / 255))
    assert np.all(np.abs(counts - expected) < 5 * sigma)


def test_random_nonzero_is_reproducible():
    first, second = make_rng(3), make_rng(3)
    assert [field.random_nonzero(first) for _ in range(20)] == [field.random_nonzero(second) for _ in range(20)]


def test_combine_is_weighted_sum():
    rows = np.array([[1, 2, 3], [4, 5, 6]], dtype=np.uint8)
    coeffs = np.array([7, 9], dtype=np.uint8)
    expected = [field.add(field.mul(7, x), field.mul(9, y)) for x, y in zip(rows[0], rows[1])]
    assert field.combine(coeffs, rows).tolist() == expected
