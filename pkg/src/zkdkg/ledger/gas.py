"""Deterministic gas accounting for the contract state machine.

Unit prices loosely follow Ethereum's schedule but are calibration knobs,
not claims about real costs. Word counts are per encoded element
(``ceil(width / 32)`` each), so every call's cost is an exact affine
function of how many points, scalars and digests it touches.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields


def words(width: int) -> int:
    return -(-width // 32)


@dataclass(frozen=True)
class GasModel:
    tx_base: int = 21000
    calldata_word: int = 512
    storage_write: int = 20000
    storage_read: int = 2100
    hash_base: int = 30
    hash_word: int = 6
    event_base: int = 375
    event_word: int = 256
    verify_justify: int = 200000
    verify_derive: int = 200000
    # constant calldata of a succinct proof: three curve points, eight words
    proof_words: int = 8
    dispute_scan: int = 800
    transfer: int = 9000

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"gas constant {f.name} must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GasModel":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown gas constants: {sorted(unknown)}")
        return cls(**d)


class GasMeter:
    """Accumulates the cost of a single call."""

    def __init__(self, model: GasModel):
        self.model = model
        self.used = model.tx_base

    def calldata(self, n_words: int) -> None:
        self.used += self.model.calldata_word * n_words

    def proof(self) -> None:
        self.calldata(self.model.proof_words)

    def sstore(self, n_words: int) -> None:
        self.used += self.model.storage_write * n_words

    def sload(self, n_words: int) -> None:
        self.used += self.model.storage_read * n_words

    def hash(self, n_words: int) -> None:
        self.used += self.model.hash_base + self.model.hash_word * n_words

    def event(self, n_words: int) -> None:
        self.used += self.model.event_base + self.model.event_word * n_words

    def verify(self, statement: str) -> None:
        self.used += self.model.verify_justify if statement == "justify" else self.model.verify_derive

    def scan(self, n_entries: int) -> None:
        self.used += self.model.dispute_scan * n_entries

    def transfer(self) -> None:
        self.used += self.model.transfer
