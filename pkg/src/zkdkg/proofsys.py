"""Proof-system interface (setup / prove / verify) and the transparent backend.

The transparent backend's proof is the canonical witness encoding plus the
claimed output; verification decodes it and re-executes the statement. It
gives the ledger exactly the acceptance behaviour a succinct proof would,
without the zero-knowledge property.

Serialized blobs (keys and proofs) share one framing::

    u16 len(tag) | tag (ascii backend id) | u32 len(body) | body
"""

from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass
from typing import Union

from .algebra import DecodeError, Point
from .profiles import Profile, get_profile
from .statements import (DeriveWitness, JustifyWitness, Unsatisfiable, statement_derive,
                         statement_justify)


class StatementId(enum.IntEnum):
    JUSTIFY = 1
    DERIVE = 2


class ProofGenerationError(Exception):
    """The instance is unsatisfiable for the claimed public inputs."""


Witness = Union[JustifyWitness, DeriveWitness]


def frame(tag: str, body: bytes) -> bytes:
    t = tag.encode("ascii")
    return struct.pack(">H", len(t)) + t + struct.pack(">I", len(body)) + body


def unframe(blob: bytes) -> tuple[str, bytes]:
    if len(blob) < 2:
        raise ValueError("truncated blob")
    (tlen,) = struct.unpack_from(">H", blob, 0)
    if len(blob) < 2 + tlen + 4:
        raise ValueError("truncated blob")
    tag = blob[2:2 + tlen].decode("ascii")
    (blen,) = struct.unpack_from(">I", blob, 2 + tlen)
    body = blob[6 + tlen:]
    if len(body) != blen:
        raise ValueError("body length mismatch")
    return tag, body


@dataclass(frozen=True)
class KeyMaterial:
    backend: str
    statement: StatementId
    profile: str
    proving_key: bytes
    verification_key: bytes

    def to_bytes(self) -> bytes:
        prof = self.profile.encode("ascii")
        body = (bytes([self.statement]) + struct.pack(">H", len(prof)) + prof
                + struct.pack(">I", len(self.proving_key)) + self.proving_key
                + self.verification_key)
        return frame(self.backend, body)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "KeyMaterial":
        backend, body = unframe(blob)
        stmt = StatementId(body[0])
        (plen,) = struct.unpack_from(">H", body, 1)
        prof = body[3:3 + plen].decode("ascii")
        off = 3 + plen
        (pk_len,) = struct.unpack_from(">I", body, off)
        off += 4
        return cls(backend, stmt, prof, body[off:off + pk_len], body[off + pk_len:])


@dataclass(frozen=True)
class Proof:
    backend: str
    data: bytes

    def to_bytes(self) -> bytes:
        return frame(self.backend, self.data)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Proof":
        tag, body = unframe(blob)
        return cls(tag, body)


@dataclass(frozen=True)
class PublicInputs:
    """The digest ``h`` plus the statement output (``True`` for justify, ``pk`` for derive)."""

    digest: bytes
    output: Union[bool, Point]


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ValueError("truncated proof")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def done(self) -> None:
        if self.pos != len(self.data):
            raise ValueError("trailing bytes in proof")


class TransparentBackend:
    name = "transparent"

    def setup(self, statement: StatementId, profile: Profile) -> KeyMaterial:
        g = profile.group
        descriptor = hashlib.sha256(
            f"{self.name}|{statement.name}|{profile.name}|{g.name}|{g.order}|{profile.hash_name}"
            .encode()).digest()
        return KeyMaterial(self.name, statement, profile.name, descriptor, descriptor)

    # encoding ---------------------------------------------------------------

    def encode(self, keys: KeyMaterial, witness: Witness, output: Union[bool, Point]) -> Proof:
        """Serialize a witness and claimed output without checking anything."""
        g = get_profile(keys.profile).group
        parts = [bytes([keys.statement]), keys.proving_key]
        if keys.statement is StatementId.JUSTIFY:
            w = witness
            parts.append(struct.pack(">H", len(w.commitments)))
            parts += [c.uncompressed() for c in w.commitments]
            parts += [g.encode_scalar(w.sk), w.pk.uncompressed(), w.pk_d.uncompressed(),
                      g.encode_index(w.index), g.encode_scalar(w.s_enc), bytes([bool(output)])]
        else:
            parts.append(struct.pack(">H", len(witness.coefficients)))
            parts += [c.uncompressed() for c in witness.coefficients]
            parts.append(output.uncompressed())
        return Proof(self.name, b"".join(parts))

    def _decode(self, keys: KeyMaterial, proof: Proof):
        g = get_profile(keys.profile).group
        r = _Reader(proof.data)
        if r.take(1)[0] != keys.statement or r.take(len(keys.proving_key)) != keys.proving_key:
            raise ValueError("proof made under different keys")
        pt = lambda: g.decode_uncompressed(r.take(g.uncompressed_width))
        scalar = lambda: int.from_bytes(r.take(g.scalar_width), "big")
        if keys.statement is StatementId.JUSTIFY:
            t = r.u16()
            cs = tuple(pt() for _ in range(t))
            sk = scalar()
            pk, pk_d = pt(), pt()
            index = int.from_bytes(r.take(g.index_width), "big")
            s_enc = scalar()
            flag = r.take(1)[0]
            if flag > 1 or sk >= g.order or s_enc >= g.order:
                raise ValueError("non-canonical scalar")
            witness, output = JustifyWitness(cs, sk, pk, pk_d, index, s_enc), bool(flag)
        else:
            n = r.u16()
            witness = DeriveWitness(tuple(pt() for _ in range(n)))
            output = pt()
        r.done()
        return witness, output

    # interface --------------------------------------------------------------

    def _execute(self, keys: KeyMaterial, digest: bytes, witness: Witness):
        profile = get_profile(keys.profile)
        if keys.statement is StatementId.JUSTIFY:
            return statement_justify(profile, digest, witness)
        return statement_derive(profile, digest, witness)

    def prove(self, keys: KeyMaterial, public: PublicInputs, witness: Witness) -> Proof:
        try:
            output = self._execute(keys, public.digest, witness)
        except Unsatisfiable as exc:
            raise ProofGenerationError(str(exc)) from None
        if output != public.output:
            raise ProofGenerationError(f"statement output {output!r} differs from claim")
        return self.encode(keys, witness, output)

    def verify(self, keys: KeyMaterial, public: PublicInputs, proof: Proof) -> bool:
        if proof.backend != self.name or keys.backend != self.name:
            return False
        try:
            witness, claimed = self._decode(keys, proof)
            output = self._execute(keys, public.digest, witness)
        except (ValueError, DecodeError, Unsatisfiable):
            return False
        return output == claimed == public.output


BACKENDS = {"transparent": TransparentBackend}


def get_backend(name: str) -> TransparentBackend:
    if name == "snark":
        raise NotImplementedError("no succinct backend is installed; use 'transparent'")
    try:
        return BACKENDS[name]()
    except KeyError:
        raise ValueError(f"unknown proof backend {name!r}") from None
