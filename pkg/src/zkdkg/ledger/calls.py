"""JSON encoding of ledger calls, used for transcripts and replay.

Points travel as hex of their uncompressed encoding, proofs as hex of the
framed proof blob, scalars and indices as decimal integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..algebra import Group
from ..proofsys import Proof
from .contract import Receipt, ZkDkgContract

_POINT_ARGS = {"pk"}
_POINT_LIST_ARGS = {"commitments"}
_PROOF_ARGS = {"proof"}
METHODS = ("register", "distribute", "dispute", "justify", "derive", "withdraw", "reset")


@dataclass(frozen=True)
class Call:
    sender: str
    method: str
    args: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown ledger method {self.method!r}")

    def apply(self, contract: ZkDkgContract) -> Receipt:
        return getattr(contract, self.method)(self.sender, **self.args)

    def to_dict(self) -> dict:
        args = {}
        for k, v in self.args.items():
            if k in _POINT_ARGS:
                v = v.uncompressed().hex()
            elif k in _POINT_LIST_ARGS:
                v = None if v is None else [p.uncompressed().hex() for p in v]
            elif k in _PROOF_ARGS:
                v = v.to_bytes().hex()
            elif isinstance(v, (list, tuple)):
                v = list(v)
            args[k] = v
        return {"sender": self.sender, "method": self.method, "args": args}

    @classmethod
    def from_dict(cls, d: dict, group: Group) -> "Call":
        args = {}
        for k, v in d.get("args", {}).items():
            if k in _POINT_ARGS:
                v = group.decode_uncompressed(bytes.fromhex(v))
            elif k in _POINT_LIST_ARGS:
                v = None if v is None else [group.decode_uncompressed(bytes.fromhex(p)) for p in v]
            elif k in _PROOF_ARGS:
                v = Proof.from_bytes(bytes.fromhex(v))
            args[k] = v
        return cls(d["sender"], d["method"], args)
