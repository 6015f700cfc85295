"""Scalars, prime-order groups, polynomials and canonical point encodings.

Scalars are plain ints reduced modulo the group order ``q``. Group elements
are :class:`Point` values bound to a :class:`Group`; two instantiations exist:

* :class:`SchnorrGroup` -- the order-``q`` subgroup of ``Z_p^*`` for a safe
  prime ``p = 2q + 1``. Small enough to enumerate.
* :class:`EdwardsGroup` -- the prime-order subgroup of a twisted Edwards
  curve whose base field is the SNARK scalar field (Baby Jubjub over BN254).

In every group the identity encodes as all-zero bytes, a value no other
point can take.
"""

from __future__ import annotations

import functools
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Iterable, Sequence


class DecodeError(ValueError):
    """Bytes do not encode a point of the prime-order subgroup."""


@dataclass(frozen=True, eq=False)
class Point:
    group: "Group"
    raw: Any

    def __add__(self, other: "Point") -> "Point":
        return self.group.add(self, other)

    def __neg__(self) -> "Point":
        return self.group.neg(self)

    def __sub__(self, other: "Point") -> "Point":
        return self.group.add(self, self.group.neg(other))

    def __mul__(self, k: int) -> "Point":
        return self.group.mul(self, k)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Point) and self.group is other.group and self.raw == other.raw

    def __hash__(self) -> int:
        return hash((self.group.name, self.raw))

    def __repr__(self) -> str:
        return f"Point({self.group.name}, {self.raw!r})"

    @property
    def is_identity(self) -> bool:
        return self == self.group.identity

    def compress(self) -> bytes:
        return self.group.encode_compressed(self)

    def uncompressed(self) -> bytes:
        return self.group.encode_uncompressed(self)


class Group(ABC):
    """A cyclic group of prime order with a fixed generator."""

    name: str
    order: int
    scalar_width: int
    index_width: int
    compressed_width: int
    uncompressed_width: int

    @property
    @abstractmethod
    def identity(self) -> Point: ...

    @property
    @abstractmethod
    def generator(self) -> Point: ...

    @abstractmethod
    def add(self, a: Point, b: Point) -> Point: ...

    @abstractmethod
    def neg(self, a: Point) -> Point: ...

    @abstractmethod
    def mul(self, a: Point, k: int) -> Point: ...

    @abstractmethod
    def encode_compressed(self, a: Point) -> bytes: ...

    @abstractmethod
    def encode_uncompressed(self, a: Point) -> bytes: ...

    @abstractmethod
    def decode_compressed(self, data: bytes) -> Point: ...

    @abstractmethod
    def decode_uncompressed(self, data: bytes) -> Point: ...

    def base_mul(self, k: int) -> Point:
        return self.mul(self.generator, k)

    def sum(self, points: Iterable[Point]) -> Point:
        acc = self.identity
        for p in points:
            acc = self.add(acc, p)
        return acc

    def encode_scalar(self, k: int) -> bytes:
        return (k % self.order).to_bytes(self.scalar_width, "big")

    def encode_index(self, i: int) -> bytes:
        return i.to_bytes(self.index_width, "big")

    def random_scalar(self, rng: random.Random, nonzero: bool = False) -> int:
        lo = 1 if nonzero else 0
        return rng.randrange(lo, self.order)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class SchnorrGroup(Group):
    """Order-``q`` subgroup of ``Z_p^*`` with ``p = 2q + 1``; points are residues."""

    def __init__(self, name: str, p: int, q: int, g: int, scalar_width: int, index_width: int):
        if (p - 1) % q or pow(g, q, p) != 1 or g == 1:
            raise ValueError("generator does not have order q")
        self.name = name
        self.p = p
        self.order = q
        self.scalar_width = scalar_width
        self.index_width = index_width
        self.compressed_width = self.uncompressed_width = (p.bit_length() + 7) // 8
        self._identity = Point(self, 1)
        self._generator = Point(self, g)

    @property
    def identity(self) -> Point:
        return self._identity

    @property
    def generator(self) -> Point:
        return self._generator

    def add(self, a: Point, b: Point) -> Point:
        return Point(self, a.raw * b.raw % self.p)

    def neg(self, a: Point) -> Point:
        return Point(self, pow(a.raw, -1, self.p))

    def mul(self, a: Point, k: int) -> Point:
        return Point(self, pow(a.raw, k % self.order, self.p))

    def encode_compressed(self, a: Point) -> bytes:
        value = 0 if a.raw == 1 else a.raw
        return value.to_bytes(self.compressed_width, "big")

    encode_uncompressed = encode_compressed

    def decode_compressed(self, data: bytes) -> Point:
        if len(data) != self.compressed_width:
            raise DecodeError(f"expected {self.compressed_width} bytes, got {len(data)}")
        v = int.from_bytes(data, "big")
        if v == 0:
            return self._identity
        if v == 1 or v >= self.p or pow(v, self.order, self.p) != 1:
            raise DecodeError("not a subgroup element")
        return Point(self, v)

    decode_uncompressed = decode_compressed

    def elements(self) -> list[Point]:
        """All ``q`` subgroup elements, ``g^0 .. g^(q-1)``; only sensible for tiny groups."""
        return [self.base_mul(k) for k in range(self.order)]


class EdwardsGroup(Group):
    """Prime-order subgroup of the twisted Edwards curve ``a x^2 + y^2 = 1 + d x^2 y^2``.

    Points are stored as affine ``(x, y)``; multiplication runs in extended
    coordinates with the unified (complete, since ``a`` is square and ``d``
    is not) addition law.

    Compressed layout: ``y`` as 32-byte big-endian, then one byte holding the
    parity of ``x``. Uncompressed: ``x || y``, 32 bytes each.
    """

    def __init__(self, name: str, p: int, a: int, d: int, order: int, gx: int, gy: int,
                 cofactor: int):
        self.name = name
        self.p = p
        self.a = a
        self.d = d
        self.order = order
        self.cofactor = cofactor
        self.field_width = (p.bit_length() + 7) // 8
        self.scalar_width = self.index_width = 32
        self.compressed_width = self.field_width + 1
        self.uncompressed_width = 2 * self.field_width
        self._identity = Point(self, (0, 1))
        if not self.on_curve(gx, gy):
            raise ValueError("generator not on curve")
        self._generator = Point(self, (gx, gy))
        # decoding is pure but costly (square root + subgroup check), and every
        # participant decodes the same event payloads, so memoize per group
        self._cached_compressed = functools.lru_cache(maxsize=8192)(self._decode_compressed)
        self._cached_uncompressed = functools.lru_cache(maxsize=8192)(self._decode_uncompressed)

    @property
    def identity(self) -> Point:
        return self._identity

    @property
    def generator(self) -> Point:
        return self._generator

    def on_curve(self, x: int, y: int) -> bool:
        p = self.p
        x2, y2 = x * x % p, y * y % p
        return (self.a * x2 + y2 - 1 - self.d * x2 * y2) % p == 0

    def _affine_add(self, P: tuple[int, int], Q: tuple[int, int]) -> tuple[int, int]:
        p = self.p
        (x1, y1), (x2, y2) = P, Q
        t = self.d * x1 * x2 * y1 * y2 % p
        x3 = (x1 * y2 + y1 * x2) * pow(1 + t, -1, p) % p
        y3 = (y1 * y2 - self.a * x1 * x2) * pow(1 - t, -1, p) % p
        return x3, y3

    def _ext_add(self, P, Q):
        p = self.p
        X1, Y1, Z1, T1 = P
        X2, Y2, Z2, T2 = Q
        A = X1 * X2 % p
        B = Y1 * Y2 % p
        C = self.d * T1 % p * T2 % p
        D = Z1 * Z2 % p
        E = ((X1 + Y1) * (X2 + Y2) - A - B) % p
        F = (D - C) % p
        G = (D + C) % p
        H = (B - self.a * A) % p
        return E * F % p, G * H % p, F * G % p, E * H % p

    def add(self, a: Point, b: Point) -> Point:
        return Point(self, self._affine_add(a.raw, b.raw))

    def neg(self, a: Point) -> Point:
        x, y = a.raw
        return Point(self, (-x % self.p, y))

    def mul(self, a: Point, k: int) -> Point:
        return Point(self, self._mul_raw(a.raw, k % self.order))

    def _mul_raw(self, P: tuple[int, int], k: int) -> tuple[int, int]:
        # k is used unreduced so the subgroup check can multiply by the order
        x, y = P
        base = (x, y, 1, x * y % self.p)
        acc = (0, 1, 1, 0)
        while k:
            if k & 1:
                acc = self._ext_add(acc, base)
            base = self._ext_add(base, base)
            k >>= 1
        X, Y, Z, _ = acc
        zi = pow(Z, -1, self.p)
        return X * zi % self.p, Y * zi % self.p

    def in_subgroup(self, x: int, y: int) -> bool:
        return self.on_curve(x, y) and self._mul_raw((x, y), self.order) == (0, 1)

    def encode_compressed(self, a: Point) -> bytes:
        if a.is_identity:
            return bytes(self.compressed_width)
        x, y = a.raw
        return y.to_bytes(self.field_width, "big") + bytes([x & 1])

    def encode_uncompressed(self, a: Point) -> bytes:
        if a.is_identity:
            return bytes(self.uncompressed_width)
        x, y = a.raw
        return x.to_bytes(self.field_width, "big") + y.to_bytes(self.field_width, "big")

    def decode_compressed(self, data: bytes) -> Point:
        return self._cached_compressed(bytes(data))

    def decode_uncompressed(self, data: bytes) -> Point:
        return self._cached_uncompressed(bytes(data))

    def _decode_compressed(self, data: bytes) -> Point:
        from sympy.ntheory import sqrt_mod

        if len(data) != self.compressed_width:
            raise DecodeError(f"expected {self.compressed_width} bytes, got {len(data)}")
        if not any(data):
            return self._identity
        y = int.from_bytes(data[:-1], "big")
        sign = data[-1]
        if sign > 1 or y >= self.p:
            raise DecodeError("non-canonical encoding")
        p = self.p
        y2 = y * y % p
        den = (self.a - self.d * y2) % p
        if den == 0:
            raise DecodeError("no x for this y")
        x2 = (1 - y2) * pow(den, -1, p) % p
        x = sqrt_mod(x2, p)
        if x is None:
            raise DecodeError("no x for this y")
        if x == 0 and sign:
            raise DecodeError("non-canonical sign for x = 0")
        if x & 1 != sign:
            x = p - x
        if (x, y) == (0, 1):
            raise DecodeError("identity must use the reserved zero encoding")
        if not self.in_subgroup(x, y):
            raise DecodeError("point outside the prime-order subgroup")
        return Point(self, (x, y))

    def _decode_uncompressed(self, data: bytes) -> Point:
        if len(data) != self.uncompressed_width:
            raise DecodeError(f"expected {self.uncompressed_width} bytes, got {len(data)}")
        if not any(data):
            return self._identity
        w = self.field_width
        x, y = int.from_bytes(data[:w], "big"), int.from_bytes(data[w:], "big")
        if x >= self.p or y >= self.p:
            raise DecodeError("non-canonical coordinate")
        if (x, y) == (0, 1):
            raise DecodeError("identity must use the reserved zero encoding")
        if not self.in_subgroup(x, y):
            raise DecodeError("point outside the prime-order subgroup")
        return Point(self, (x, y))


TOY_GROUP = SchnorrGroup("toy", p=23, q=11, g=2, scalar_width=2, index_width=2)
TEST_GROUP = SchnorrGroup("test", p=130787, q=65393, g=4, scalar_width=2, index_width=2)

# Baby Jubjub (EIP-2494): base field is the BN254 scalar field.
BABYJUBJUB = EdwardsGroup(
    "babyjubjub",
    p=21888242871839275222246405745257275088548364400416034343698204186575808495617,
    a=168700,
    d=168696,
    order=2736030358979909402780800718157159386076813972158567259200215660948447373041,
    gx=5299619240641551281634865583518297030282874472190772894086521144482721001553,
    gy=16950150798460657717958625567821834550301663161624707787222815936182638968203,
    cofactor=8,
)


@dataclass(frozen=True)
class Polynomial:
    """Coefficients over ``F_q``, constant term first."""

    coeffs: tuple[int, ...]
    modulus: int

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("polynomial needs at least one coefficient")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: int) -> int:
        return poly_eval(self, x)


def poly_random(degree: int, modulus: int, rng: random.Random,
                secret: int | None = None) -> Polynomial:
    """Random polynomial of exactly ``degree``; nonzero leading coefficient by resampling."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    c0 = rng.randrange(modulus) if secret is None else secret % modulus
    coeffs = [c0]
    for k in range(1, degree + 1):
        c = rng.randrange(modulus)
        if k == degree:
            while c == 0:
                c = rng.randrange(modulus)
        coeffs.append(c)
    return Polynomial(tuple(coeffs), modulus)


def poly_eval(poly: Polynomial, x: int) -> int:
    q = poly.modulus
    acc = 0
    for c in reversed(poly.coeffs):
        acc = (acc * x + c) % q
    return acc


def lagrange_at_zero(points: Sequence[tuple[int, int]], modulus: int) -> int:
    """Interpolate ``f(0)`` from ``(index, value)`` pairs over ``F_modulus``."""
    xs = [x % modulus for x, _ in points]
    if any(x == 0 for x in xs):
        raise ValueError("interpolation index must be nonzero")
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation indices must be distinct")
    total = 0
    for j, (xj, yj) in enumerate(zip(xs, (y for _, y in points))):
        num, den = 1, 1
        for m, xm in enumerate(xs):
            if m != j:
                num = num * xm % modulus
                den = den * (xm - xj) % modulus
        total = (total + yj * num * pow(den, -1, modulus)) % modulus
    return total
