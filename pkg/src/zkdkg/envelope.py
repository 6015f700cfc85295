"""Share encryption over the public channel.

The pad is ``H(compress(sk * peer_pk) || compress(c0G)) mod q``; including the
dealer's first commitment makes each pad unique per dealer and round, which
a one-time pad needs. Encryption adds the pad in ``F_q``, decryption
subtracts it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .algebra import Group, Point
from .profiles import Profile


@dataclass(frozen=True)
class KeyPair:
    sk: int
    pk: Point

    @classmethod
    def generate(cls, group: Group, rng: random.Random) -> "KeyPair":
        sk = group.random_scalar(rng, nonzero=True)
        return cls(sk, group.base_mul(sk))


@dataclass(frozen=True)
class EncryptedShare:
    recipient: int
    ciphertext: int


def derive_pad(profile: Profile, own_sk: int, peer_pk: Point, dealer_c0: Point) -> int:
    if peer_pk.is_identity:
        raise ValueError("degenerate Diffie-Hellman: peer key is the identity")
    shared = peer_pk * own_sk
    digest = profile.hash([shared.compress(), dealer_c0.compress()])
    return profile.digest_to_scalar(digest)


def encrypt_share(s: int, pad: int, q: int) -> int:
    return (s + pad) % q


def decrypt_share(s_enc: int, pad: int, q: int) -> int:
    return (s_enc - pad) % q
