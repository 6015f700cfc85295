"""Feldman VSS: commit to a polynomial, deal shares, verify shares."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .algebra import Group, Point, Polynomial

Commitments = tuple[Point, ...]


@dataclass(frozen=True)
class ShareTable:
    """Plaintext shares of one dealer. ``outbound`` omits the dealer itself."""

    dealer: int
    outbound: dict[int, int]
    own: int


def commit(poly: Polynomial, group: Group) -> Commitments:
    return tuple(group.base_mul(c) for c in poly.coeffs)


def deal(poly: Polynomial, group: Group, n: int, self_index: int) -> tuple[Commitments, ShareTable]:
    if not 1 <= self_index <= n:
        raise ValueError(f"self_index {self_index} outside 1..{n}")
    shares = {j: poly(j) for j in range(1, n + 1) if j != self_index}
    return commit(poly, group), ShareTable(self_index, shares, poly(self_index))


def eval_public_poly(commitments: Sequence[Point], index: int) -> Point:
    """``F(index) = sum_k C[k] * index^k`` by Horner over group points."""
    if not commitments:
        raise ValueError("empty commitment list")
    acc = commitments[0].group.identity
    for c in reversed(commitments):
        acc = acc * index + c
    return acc


def verify_share(share: int, index: int, commitments: Sequence[Point]) -> bool:
    group = commitments[0].group
    return group.base_mul(share) == eval_public_poly(commitments, index)
