"""The two verifiable computations: share justification and key derivation.

Both take a single public input, a digest ``h`` over everything else, and
open with an assertion that the witness hashes to it. A failed assertion
means no proof can exist (:class:`Unsatisfiable`); that is different from
the justification returning ``False``, which is a provable output the
ledger simply refuses.

Hash layouts (items are canonical encodings, see ``docs/formats.md``)::

    commitments digest  H(compress(C[0]) .. compress(C[t-1]))
    shares digest       H(scalar(S[0]) .. scalar(S[n-2]))
    justify digest      H(commitments digest, compress(pk), compress(pk_d),
                          index(i), scalar(s_enc))
    derive digest       H(compress(c0[1]) .. compress(c0[n]))
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .algebra import Point
from .envelope import decrypt_share, derive_pad
from .profiles import Profile
from .vss import eval_public_poly


class Unsatisfiable(Exception):
    """An assertion inside a statement failed; no valid proof exists."""


@dataclass(frozen=True)
class JustifyWitness:
    commitments: tuple[Point, ...]
    sk: int
    pk: Point
    pk_d: Point
    index: int
    s_enc: int


@dataclass(frozen=True)
class DeriveWitness:
    coefficients: tuple[Point, ...]


def hash_commitments(profile: Profile, commitments: Sequence[Point]) -> bytes:
    return profile.hash([c.compress() for c in commitments])


def hash_shares(profile: Profile, ciphertexts: Sequence[int]) -> bytes:
    return profile.hash([profile.group.encode_scalar(s) for s in ciphertexts])


def justify_digest(profile: Profile, commitments_digest: bytes, pk: Point, pk_d: Point,
                   index: int, s_enc: int) -> bytes:
    """Outer justify digest from an already computed commitments digest (what the ledger stores)."""
    g = profile.group
    return profile.hash([commitments_digest, pk.compress(), pk_d.compress(),
                         g.encode_index(index), g.encode_scalar(s_enc)])


def hash_justify_inputs(profile: Profile, commitments: Sequence[Point], pk: Point, pk_d: Point,
                        index: int, s_enc: int) -> bytes:
    return justify_digest(profile, hash_commitments(profile, commitments), pk, pk_d, index, s_enc)


def hash_derive_inputs(profile: Profile, first_coeffs: Sequence[Point]) -> bytes:
    return profile.hash([c.compress() for c in first_coeffs])


def statement_justify(profile: Profile, h: bytes, w: JustifyWitness) -> bool:
    g = profile.group
    if not w.commitments or w.index < 1:
        raise Unsatisfiable("malformed witness")
    if g.base_mul(w.sk) != w.pk:
        raise Unsatisfiable("secret key does not match pk")
    if hash_justify_inputs(profile, w.commitments, w.pk, w.pk_d, w.index, w.s_enc) != h:
        raise Unsatisfiable("public input digest mismatch")
    try:
        pad = derive_pad(profile, w.sk, w.pk_d, w.commitments[0])
    except ValueError as exc:
        raise Unsatisfiable(str(exc)) from None
    s_dec = decrypt_share(w.s_enc, pad, g.order)
    return g.base_mul(s_dec) == eval_public_poly(w.commitments, w.index)


def statement_derive(profile: Profile, h: bytes, w: DeriveWitness) -> Point:
    if hash_derive_inputs(profile, w.coefficients) != h:
        raise Unsatisfiable("public input digest mismatch")
    return profile.group.sum(w.coefficients)
