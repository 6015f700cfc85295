"""Event-driven protocol participants, honest or running one adversary strategy.

A participant never talks to peers directly. It reads ledger events in log
order and answers with ledger calls, which the harness executes.
"""

from __future__ import annotations

import enum
import random
import re
import time
from dataclasses import dataclass, field
from typing import Optional

from .algebra import Point, Polynomial, poly_random
from .envelope import KeyPair, decrypt_share, derive_pad, encrypt_share
from .ledger.calls import Call
from .ledger.contract import LedgerEvent
from .profiles import Profile
from .proofsys import (KeyMaterial, ProofGenerationError, PublicInputs, StatementId,
                       TransparentBackend)
from .statements import (DeriveWitness, JustifyWitness, hash_derive_inputs,
                         hash_justify_inputs)
from .vss import Commitments, ShareTable, deal, verify_share


class HarnessError(RuntimeError):
    """An honest participant hit a state that only an implementation bug can cause."""


class StrategyKind(str, enum.Enum):
    HONEST = "Honest"
    INVALID_SHARE_TO = "InvalidShareTo"
    SILENT_DEALER = "SilentDealer"
    FALSE_DISPUTE = "FalseDispute"
    INVALID_PROOF_ON_JUSTIFY = "InvalidProofOnJustify"
    WRONG_PUBLIC_KEY_ON_DERIVE = "WrongPublicKeyOnDerive"


_TARGETED = {StrategyKind.INVALID_SHARE_TO, StrategyKind.FALSE_DISPUTE,
             StrategyKind.INVALID_PROOF_ON_JUSTIFY}


@dataclass(frozen=True)
class AdversaryStrategy:
    """One participant's behaviour.

    ``InvalidShareTo(j)`` sends participant ``j`` a share offset by ``delta``.
    ``InvalidProofOnJustify(j)`` does the same, then answers the dispute with
    a forged proof instead of giving up. ``FalseDispute(i)`` disputes dealer
    ``i`` whatever it receives.
    """

    kind: StrategyKind = StrategyKind.HONEST
    target: Optional[int] = None
    delta: int = 1

    def __post_init__(self):
        if self.kind in _TARGETED and self.target is None:
            raise ValueError(f"{self.kind.value} needs a target index")

    @classmethod
    def parse(cls, text: str) -> "AdversaryStrategy":
        m = re.fullmatch(r"\s*(\w+)\s*(?:\(\s*(\d+)\s*(?:,\s*(\d+)\s*)?\))?\s*", text)
        if not m:
            raise ValueError(f"cannot parse strategy {text!r}")
        kind = StrategyKind(m.group(1))
        target = int(m.group(2)) if m.group(2) else None
        delta = int(m.group(3)) if m.group(3) else 1
        return cls(kind, target, delta)

    def __str__(self) -> str:
        if self.target is None:
            return self.kind.value
        if self.delta != 1:
            return f"{self.kind.value}({self.target},{self.delta})"
        return f"{self.kind.value}({self.target})"


HONEST = AdversaryStrategy()


def compute_private_share(received: dict[int, int], own: Optional[int], qualified: set[int],
                          self_index: int, q: int) -> int:
    """Sum of shares from qualified dealers, including the self-dealt one when qualified."""
    if not qualified:
        raise ValueError("empty qualified set")
    total = 0
    for i in sorted(qualified):
        if i == self_index:
            if own is None:
                raise ValueError("self qualified but own share unknown")
            total += own
        elif i in received:
            total += received[i]
        else:
            raise ValueError(f"no valid share from qualified dealer {i}")
    return total % q


@dataclass
class _DealerView:
    commitments: Commitments
    ciphertexts: list[int]


@dataclass
class Participant:
    address: str
    profile: Profile
    backend: TransparentBackend
    keys: dict[StatementId, KeyMaterial]
    seed: str
    strategy: AdversaryStrategy = HONEST
    collateral: int = 1000
    resubmit_commitments: bool = False

    index: Optional[int] = None
    n: Optional[int] = None
    threshold: Optional[int] = None
    pks: dict[int, Point] = field(default_factory=dict)
    poly: Optional[Polynomial] = None
    table: Optional[ShareTable] = None
    commitments: Optional[Commitments] = None
    dealers: dict[int, _DealerView] = field(default_factory=dict)
    received: dict[int, int] = field(default_factory=dict)
    pending_disputes: list[int] = field(default_factory=list)
    open_disputes: dict[int, int] = field(default_factory=dict)
    unjustified_disputers: set[int] = field(default_factory=set)
    qualified: Optional[set[int]] = None
    private_share: Optional[int] = None
    finalize_error: Optional[str] = None
    public_key: Optional[Point] = None
    justify_failed: bool = False
    withdrawn: bool = False
    proof_times: list[tuple[str, float]] = field(default_factory=list)

    def __post_init__(self):
        self.rng = random.Random(f"{self.seed}/{self.address}")
        self.keypair = KeyPair.generate(self.profile.group, self.rng)

    @property
    def group(self):
        return self.profile.group

    @property
    def honest(self) -> bool:
        return self.strategy.kind is StrategyKind.HONEST

    def registration_call(self) -> Call:
        return Call(self.address, "register", {"pk": self.keypair.pk, "deposit": self.collateral})

    # -- event dispatch -------------------------------------------------------

    def step(self, event: LedgerEvent) -> list[Call]:
        handler = getattr(self, f"_on_{event.kind}", None)
        return handler(event.payload) if handler else []

    def _on_Registered(self, ev: dict) -> list[Call]:
        self.pks[ev["index"]] = self.group.decode_compressed(bytes.fromhex(ev["pk"]))
        if ev["address"] == self.address:
            self.index = ev["index"]
        return []

    def _on_PhaseChanged(self, ev: dict) -> list[Call]:
        phase = ev["phase"]
        if self.index is None:
            return []
        if phase == "ShareDistribution":
            self.n, self.threshold = ev["n"], ev["threshold"]
            return self._distribute()
        if phase == "Dispute":
            calls = [self._dispute_call(i) for i in self.pending_disputes]
            self.pending_disputes = []
            return calls
        if phase == "KeyDerivation":
            return self._derive()
        if phase in ("Completed", "Aborted") and not self.withdrawn:
            self.withdrawn = True
            return [Call(self.address, "withdraw", {})]
        return []

    def _on_SharesDistributed(self, ev: dict) -> list[Call]:
        dealer = ev["dealer"]
        cs = tuple(self.group.decode_compressed(bytes.fromhex(c)) for c in ev["commitments"])
        self.dealers[dealer] = _DealerView(cs, list(ev["shares"]))
        if dealer == self.index or self.index is None:
            return []
        pos = self.index - 1 if self.index < dealer else self.index - 2
        pad = derive_pad(self.profile, self.keypair.sk, self.pks[dealer], cs[0])
        share = decrypt_share(ev["shares"][pos], pad, self.group.order)
        valid = verify_share(share, self.index, cs)
        if valid:
            self.received[dealer] = share
        falsely = (self.strategy.kind is StrategyKind.FALSE_DISPUTE and self.strategy.target == dealer)
        if (not valid or falsely) and self.strategy.kind is not StrategyKind.SILENT_DEALER:
            self.pending_disputes.append(dealer)
        return []

    def _on_DisputeOpened(self, ev: dict) -> list[Call]:
        dealer, disputer = ev["dealer"], ev["disputer"]
        self.open_disputes[dealer] = disputer
        if dealer != self.index:
            return []
        return self._justify(disputer, ev["shares"])

    def _on_DisputeResolved(self, ev: dict) -> list[Call]:
        self.open_disputes.pop(ev["dealer"], None)
        self.unjustified_disputers.add(ev["disputer"])
        return []

    def _on_KeyDerived(self, ev: dict) -> list[Call]:
        self.public_key = self.group.decode_compressed(bytes.fromhex(ev["pk"]))
        return []

    # -- phase actions ------------------------------------------------------------

    def _distribute(self) -> list[Call]:
        g = self.group
        self.poly = poly_random(self.threshold - 1, g.order, self.rng)
        self.commitments, self.table = deal(self.poly, g, self.n, self.index)
        if self.strategy.kind is StrategyKind.SILENT_DEALER:
            return []
        ciphertexts = []
        for j, s in sorted(self.table.outbound.items()):
            if self.strategy.kind in (StrategyKind.INVALID_SHARE_TO,
                                      StrategyKind.INVALID_PROOF_ON_JUSTIFY) \
                    and j == self.strategy.target:
                s = (s + self.strategy.delta) % g.order
            pad = derive_pad(self.profile, self.keypair.sk, self.pks[j], self.commitments[0])
            ciphertexts.append(encrypt_share(s, pad, g.order))
        return [Call(self.address, "distribute",
                     {"commitments": list(self.commitments), "shares": ciphertexts})]

    def _dispute_call(self, dealer: int) -> Call:
        return Call(self.address, "dispute",
                    {"dealer": dealer, "shares": list(self.dealers[dealer].ciphertexts)})

    def _timed_prove(self, stmt: StatementId, public: PublicInputs, witness):
        t0 = time.perf_counter()
        try:
            return self.backend.prove(self.keys[stmt], public, witness)
        finally:
            self.proof_times.append((stmt.name.lower(), time.perf_counter() - t0))

    def _justify(self, disputer: int, ciphertexts: list[int]) -> list[Call]:
        g = self.group
        pos = disputer - 1 if disputer < self.index else disputer - 2
        s_enc = ciphertexts[pos]
        pk_d = self.pks[disputer]
        witness = JustifyWitness(self.commitments, self.keypair.sk, self.keypair.pk, pk_d,
                                 disputer, s_enc)
        h = hash_justify_inputs(self.profile, self.commitments, self.keypair.pk, pk_d,
                                disputer, s_enc)
        if self.strategy.kind is StrategyKind.INVALID_PROOF_ON_JUSTIFY:
            # claim the ciphertext an honest share would have produced
            pad = derive_pad(self.profile, self.keypair.sk, pk_d, self.commitments[0])
            honest_ct = encrypt_share(self.table.outbound[disputer], pad, g.order)
            forged = JustifyWitness(self.commitments, self.keypair.sk, self.keypair.pk, pk_d,
                                    disputer, honest_ct)
            proof = self.backend.encode(self.keys[StatementId.JUSTIFY], forged, True)
        else:
            try:
                proof = self._timed_prove(StatementId.JUSTIFY, PublicInputs(h, True), witness)
            except ProofGenerationError as exc:
                if self.honest or self.strategy.kind is StrategyKind.FALSE_DISPUTE:
                    raise HarnessError(f"participant {self.index} cannot justify an honest "
                                       f"share: {exc}") from exc
                self.justify_failed = True
                return []
        args = {"dealer": self.index, "proof": proof}
        if self.resubmit_commitments:
            args["commitments"] = list(self.commitments)
        return [Call(self.address, "justify", args)]

    def local_qualified(self) -> set[int]:
        """Dealers that distributed, minus unresolved disputes, minus unjustified disputers."""
        return (set(self.dealers) - set(self.open_disputes)) - self.unjustified_disputers

    def _derive(self) -> list[Call]:
        g = self.group
        self.qualified = self.local_qualified()
        own = self.table.own if self.table is not None else None
        try:
            self.private_share = compute_private_share(self.received, own, self.qualified,
                                                       self.index, g.order)
        except ValueError as exc:
            self.finalize_error = str(exc)
        if self.strategy.kind is StrategyKind.SILENT_DEALER:
            return []
        coeffs = tuple(self.dealers[i].commitments[0] if i in self.qualified else g.identity
                       for i in range(1, self.n + 1))
        h = hash_derive_inputs(self.profile, coeffs)
        pk = g.sum(coeffs)
        witness = DeriveWitness(coeffs)
        if self.strategy.kind is StrategyKind.WRONG_PUBLIC_KEY_ON_DERIVE:
            wrong = pk + g.generator
            proof = self.backend.encode(self.keys[StatementId.DERIVE], witness, wrong)
            return [Call(self.address, "derive", {"pk": wrong, "proof": proof})]
        try:
            proof = self._timed_prove(StatementId.DERIVE, PublicInputs(h, pk), witness)
        except ProofGenerationError as exc:
            raise HarnessError(f"participant {self.index} cannot prove key derivation: {exc}") from exc
        return [Call(self.address, "derive", {"pk": pk, "proof": proof})]
