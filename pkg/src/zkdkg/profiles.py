"""Group/hash profiles shared by ledger, statements and participants.

A profile fixes the group and the protocol hash ``H``. Every hash in the
system takes a sequence of canonical encodings (one item per point, scalar,
index or nested digest):

* ``keccak`` -- Keccak-256 over the concatenated items; 32-byte digest.
* ``sum`` -- each item read as a big-endian integer, summed mod ``q``;
  digest is the sum at scalar width. Deliberately weak, so every statement
  has a hand-checkable oracle over tiny groups.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from Crypto.Hash import keccak

from .algebra import BABYJUBJUB, TEST_GROUP, TOY_GROUP, Group


def keccak256(data: bytes) -> bytes:
    return keccak.new(data=data, digest_bits=256).digest()


@dataclass(frozen=True)
class Profile:
    name: str
    group: Group
    hash_name: str

    def hash(self, items: Sequence[bytes]) -> bytes:
        if self.hash_name == "keccak":
            return keccak256(b"".join(items))
        q = self.group.order
        total = sum(int.from_bytes(item, "big") for item in items) % q
        return total.to_bytes(self.group.scalar_width, "big")

    def digest_to_scalar(self, digest: bytes) -> int:
        return int.from_bytes(digest, "big") % self.group.order

    @property
    def digest_width(self) -> int:
        return 32 if self.hash_name == "keccak" else self.group.scalar_width


PROFILES = {
    "toy": Profile("toy", TOY_GROUP, "sum"),
    "test": Profile("test", TEST_GROUP, "sum"),
    "production": Profile("production", BABYJUBJUB, "keccak"),
}


def get_profile(name: str) -> Profile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None
