import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zkdkg.algebra import (BABYJUBJUB, TEST_GROUP, TOY_GROUP, DecodeError, Polynomial,
                           lagrange_at_zero, poly_eval, poly_random)


# -- toy Schnorr group -------------------------------------------------------------


def test_toy_generator_order():
    assert pow(2, 11, 23) == 1
    assert TOY_GROUP.base_mul(11).is_identity
    assert all(not TOY_GROUP.base_mul(k).is_identity for k in range(1, 11))


def test_toy_desk_values():
    g = TOY_GROUP
    assert g.base_mul(3).raw == 8
    assert g.base_mul(5).raw == 9
    assert (g.base_mul(3) + g.base_mul(5)).raw == g.base_mul(8).raw == 3


def test_toy_group_laws_exhaustive():
    els = TOY_GROUP.elements()
    assert len({e.raw for e in els}) == 11
    ident = TOY_GROUP.identity
    for a, b in itertools.product(els, repeat=2):
        assert a + b == b + a
        assert (a + b) - b == a
    for a, b, c in itertools.product(els[:5], repeat=3):
        assert (a + b) + c == a + (b + c)
    for a in els:
        assert a + ident == a
        assert a + (-a) == ident


def test_scalar_mult_distributes():
    g = TEST_GROUP
    for a, b in [(3, 5), (65392, 2), (0, 9)]:
        assert g.base_mul(a) + g.base_mul(b) == g.base_mul(a + b)
        assert g.base_mul(a) * b == g.base_mul(a * b)


def test_schnorr_encoding_roundtrip_and_identity():
    g = TEST_GROUP
    assert g.encode_compressed(g.identity) == b"\x00\x00\x00"
    for k in (0, 1, 2, 12345, 65392):
        p = g.base_mul(k)
        assert g.decode_compressed(p.compress()) == p


@pytest.mark.parametrize("raw", [b"\x00\x01", b"\x00\x00\x01", (130787).to_bytes(3, "big"),
                                 (5).to_bytes(3, "big")])
def test_schnorr_decode_rejects(raw):
    # 5 is a non-residue mod 130787, so it lies outside the order-q subgroup
    with pytest.raises(DecodeError):
        TEST_GROUP.decode_compressed(raw)


def test_bad_generator_rejected():
    from zkdkg.algebra import SchnorrGroup
    with pytest.raises(ValueError):
        SchnorrGroup("bad", p=23, q=11, g=5, scalar_width=1, index_width=1)


# -- Baby Jubjub -------------------------------------------------------------------


def test_babyjubjub_generator_has_prime_order():
    g = BABYJUBJUB
    assert g.on_curve(*g.generator.raw)
    assert g.in_subgroup(*g.generator.raw)
    assert g.base_mul(g.order).is_identity
    assert not g.base_mul(g.order - 1).is_identity


def test_extended_mul_matches_affine_double_and_add():
    g = BABYJUBJUB
    rng = random.Random(4)
    for _ in range(5):
        k = rng.randrange(1, 2**40)
        acc, base = g.identity.raw, g.generator.raw
        kk = k
        while kk:
            if kk & 1:
                acc = g._affine_add(acc, base)
            base = g._affine_add(base, base)
            kk >>= 1
        assert g.base_mul(k).raw == acc


def test_babyjubjub_encoding_roundtrip():
    g = BABYJUBJUB
    rng = random.Random(1)
    for _ in range(8):
        p = g.base_mul(rng.randrange(g.order))
        assert len(p.compress()) == 33 and len(p.uncompressed()) == 64
        assert g.decode_compressed(p.compress()) == p
        assert g.decode_uncompressed(p.uncompressed()) == p
    assert g.decode_compressed(bytes(33)).is_identity
    assert g.decode_uncompressed(bytes(64)).is_identity


def test_babyjubjub_rejects_low_order_and_off_curve():
    g = BABYJUBJUB
    # (0, -1) has order 2: on the curve, outside the prime-order subgroup
    two_torsion = (0).to_bytes(32, "big") + (g.p - 1).to_bytes(32, "big")
    with pytest.raises(DecodeError):
        g.decode_uncompressed(two_torsion)
    x, y = g.generator.raw
    with pytest.raises(DecodeError):
        g.decode_uncompressed(x.to_bytes(32, "big") + ((y + 1) % g.p).to_bytes(32, "big"))
    with pytest.raises(DecodeError):
        g.decode_compressed(g.generator.compress()[:-1] + b"\x02")
    with pytest.raises(DecodeError):
        g.decode_uncompressed((0).to_bytes(32, "big") + (1).to_bytes(32, "big"))


# -- polynomials and interpolation ---------------------------------------------------


def test_lagrange_desk_example():
    # f(x) = 1 + 2x over F_11: f(1) = 3, f(2) = 5
    assert lagrange_at_zero([(1, 3), (2, 5)], 11) == 1
    assert lagrange_at_zero([(2, 5), (3, 7)], 11) == 1


def test_lagrange_rejects_bad_indices():
    with pytest.raises(ValueError):
        lagrange_at_zero([(0, 1), (1, 2)], 11)
    with pytest.raises(ValueError):
        lagrange_at_zero([(1, 1), (12, 2)], 11)


def test_poly_random_degree_and_secret():
    rng = random.Random(0)
    for d in range(6):
        p = poly_random(d, 11, rng, secret=7)
        assert p.degree == d and p.coeffs[0] == 7 and (d == 0 or p.coeffs[-1] != 0)
    with pytest.raises(ValueError):
        poly_random(-1, 11, rng)
    with pytest.raises(ValueError):
        Polynomial((), 11)


@given(st.lists(st.integers(0, 65392), min_size=1, max_size=8),
       st.randoms(use_true_random=False))
@settings(max_examples=200, deadline=None)
def test_interpolation_recovers_constant_term(coeffs, rnd):
    q = TEST_GROUP.order
    poly = Polynomial(tuple(coeffs), q)
    xs = rnd.sample(range(1, q), len(coeffs))
    assert lagrange_at_zero([(x, poly_eval(poly, x)) for x in xs], q) == coeffs[0]


@given(st.lists(st.integers(0, 10), min_size=1, max_size=5), st.integers(0, 30))
def test_horner_matches_naive_sum(coeffs, x):
    poly = Polynomial(tuple(coeffs), 11)
    assert poly(x) == sum(c * x**k for k, c in enumerate(coeffs)) % 11
