"""The DKG coordination contract as a deterministic state machine.

Time is a logical block height advanced only by :meth:`ZkDkgContract.tick`.
Every mutating entry point is a transaction: it returns a :class:`Receipt`,
and a failed check reverts with a :class:`Err` code, leaving state untouched
while still charging the base fee.

The contract stores only each dealer's first commitment and the digests of
its commitments and encrypted shares; commitments and shares themselves live
in calldata and the event log.
"""

from __future__ import annotations

import enum
import functools
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from ..algebra import Point
from ..profiles import Profile, get_profile
from ..proofsys import KeyMaterial, Proof, PublicInputs, StatementId, get_backend
from ..statements import hash_commitments, hash_derive_inputs, hash_shares, justify_digest
from .gas import GasMeter, GasModel, words


class Phase(str, enum.Enum):
    REGISTRATION = "Registration"
    SHARE_DISTRIBUTION = "ShareDistribution"
    DISPUTE = "Dispute"
    KEY_DERIVATION = "KeyDerivation"
    COMPLETED = "Completed"
    ABORTED = "Aborted"

    @property
    def terminal(self) -> bool:
        return self in (Phase.COMPLETED, Phase.ABORTED)


class Status(str, enum.Enum):
    ACTIVE = "active"
    EXCLUDED = "excluded"
    SLASHED = "slashed"


class Err(str, enum.Enum):
    WRONG_PHASE = "WRONG_PHASE"
    NOT_REGISTERED = "NOT_REGISTERED"
    ALREADY_REGISTERED = "ALREADY_REGISTERED"
    BARRED = "BARRED"
    WRONG_DEPOSIT = "WRONG_DEPOSIT"
    FULL = "FULL"
    INVALID_KEY = "INVALID_KEY"
    ALREADY_DISTRIBUTED = "ALREADY_DISTRIBUTED"
    WRONG_SHARE_COUNT = "WRONG_SHARE_COUNT"
    WRONG_COMMITMENT_COUNT = "WRONG_COMMITMENT_COUNT"
    INVALID_POINT = "INVALID_POINT"
    INVALID_SCALAR = "INVALID_SCALAR"
    UNKNOWN_DEALER = "UNKNOWN_DEALER"
    SELF_DISPUTE = "SELF_DISPUTE"
    NOT_ACTIVE = "NOT_ACTIVE"
    NOT_DISTRIBUTED = "NOT_DISTRIBUTED"
    ALREADY_DISPUTED = "ALREADY_DISPUTED"
    DISPUTE_WINDOW_CLOSED = "DISPUTE_WINDOW_CLOSED"
    HASH_MISMATCH = "HASH_MISMATCH"
    NO_DISPUTE = "NO_DISPUTE"
    DEADLINE_PASSED = "DEADLINE_PASSED"
    INVALID_PROOF = "INVALID_PROOF"
    SLASHED = "SLASHED"
    ALREADY_WITHDRAWN = "ALREADY_WITHDRAWN"
    NOT_OWNER = "NOT_OWNER"
    UNSETTLED = "UNSETTLED"


class Revert(Exception):
    def __init__(self, code: Err, detail: str = ""):
        super().__init__(f"{code.value}: {detail}" if detail else code.value)
        self.code = code


def threshold_for(n: int) -> int:
    """``ceil((n + 1) / 2)``: shares needed to use the key."""
    return (n + 2) // 2


def abort_bound_for(n: int) -> int:
    """``ceil((2n + 1) / 3)``: dealers that must share successfully."""
    return (2 * n + 3) // 3


@dataclass(frozen=True)
class ContractParams:
    n_max: int
    collateral: int = 1000
    share_timeout: int = 10
    dispute_timeout: int = 10
    justify_window: int = 5
    derive_timeout: int = 10
    profile: str = "test"
    backend: str = "transparent"
    carry_balances: bool = False
    gas: GasModel = field(default_factory=GasModel)

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError("n_max must be >= 2")
        for name in ("share_timeout", "dispute_timeout", "justify_window", "derive_timeout"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1 block")
        if self.collateral < 0:
            raise ValueError("collateral must be >= 0")
        get_profile(self.profile)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "gas"}
        d["gas"] = self.gas.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ContractParams":
        d = dict(d)
        gas = GasModel.from_dict(d.pop("gas", {}))
        return cls(gas=gas, **d)


@dataclass
class ParticipantRecord:
    index: int
    address: str
    pk: Point
    deposit: int
    status: Status = Status.ACTIVE
    withdrawn: bool = False
    distributed: bool = False
    c0: Optional[Point] = None
    commitments_digest: Optional[bytes] = None
    shares_digest: Optional[bytes] = None

    def to_dict(self) -> dict:
        return {
            "index": self.index, "address": self.address, "pk": self.pk.compress().hex(),
            "deposit": self.deposit, "status": self.status.value, "withdrawn": self.withdrawn,
            "distributed": self.distributed,
            "c0": None if self.c0 is None else self.c0.compress().hex(),
            "commitments_digest": None if self.commitments_digest is None else self.commitments_digest.hex(),
            "shares_digest": None if self.shares_digest is None else self.shares_digest.hex(),
        }


@dataclass
class DisputeRecord:
    dealer: int
    disputer: int
    s_enc: int
    deadline: int
    expired: bool = False


@dataclass(frozen=True)
class LedgerEvent:
    kind: str
    payload: dict
    block: int
    gas: int

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": self.payload, "block": self.block, "gas": self.gas}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Receipt:
    method: str
    sender: str
    ok: bool
    error: Optional[Err]
    gas: int
    result: Any = None


def _transaction(fn):
    name = fn.__name__

    @functools.wraps(fn)
    def wrapper(self: "ZkDkgContract", sender: str, *args, **kwargs) -> Receipt:
        meter = GasMeter(self.params.gas)
        self._pending = []
        try:
            result = fn(self, meter, sender, *args, **kwargs)
        except Revert as exc:
            self._pending = []
            receipt = Receipt(name, sender, False, exc.code, self.params.gas.tx_base)
        else:
            receipt = Receipt(name, sender, True, None, meter.used, result)
            for kind, payload in self._pending:
                self.events.append(LedgerEvent(kind, payload, self.block, meter.used))
            self._pending = []
        self.receipts.append(receipt)
        return receipt

    return wrapper


class ZkDkgContract:
    def __init__(self, params: ContractParams, owner: str = "owner",
                 keys: Optional[dict[StatementId, KeyMaterial]] = None):
        self.params = params
        self.owner = owner
        self.profile: Profile = get_profile(params.profile)
        self.backend = get_backend(params.backend)
        self.keys = keys or {s: self.backend.setup(s, self.profile) for s in StatementId}
        self.block = 0
        self.round = 0
        self.events: list[LedgerEvent] = []
        self.receipts: list[Receipt] = []
        self.barred: set[str] = set()
        self.credits: dict[str, int] = {}
        self.total_deposited = 0
        self.total_refunded = 0
        self.total_slashed = 0
        self._pending: list[tuple[str, dict]] = []
        self._clear_round()

    def _clear_round(self) -> None:
        self.phase = Phase.REGISTRATION
        self.phase_start = self.block
        self.participants: list[ParticipantRecord] = []
        self.by_address: dict[str, ParticipantRecord] = {}
        self.threshold: Optional[int] = None
        self.abort_bound: Optional[int] = None
        self.disputes: dict[int, DisputeRecord] = {}
        self.resolved: set[int] = set()
        self.public_key: Optional[Point] = None

    # -- helpers ---------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.participants)

    @property
    def group(self):
        return self.profile.group

    def _w(self):
        g = self.group
        return (words(g.uncompressed_width), words(g.compressed_width), words(g.scalar_width),
                words(self.profile.digest_width), words(g.index_width))

    def _emit(self, kind: str, **payload) -> None:
        self._pending.append((kind, payload))

    def _set_phase(self, phase: Phase, **info) -> None:
        self.phase = phase
        self.phase_start = self.block
        self._emit("PhaseChanged", phase=phase.value, round=self.round, **info)

    def _sender(self, sender: str) -> ParticipantRecord:
        rec = self.by_address.get(sender)
        if rec is None:
            raise Revert(Err.NOT_REGISTERED, sender)
        return rec

    def _require_phase(self, *phases: Phase) -> None:
        if self.phase not in phases:
            raise Revert(Err.WRONG_PHASE, f"in {self.phase.value}")

    def _check_point(self, p: Point) -> None:
        if not isinstance(p, Point) or p.group is not self.group:
            raise Revert(Err.INVALID_POINT)

    def _check_scalar(self, s: int) -> None:
        if not isinstance(s, int) or not 0 <= s < self.group.order:
            raise Revert(Err.INVALID_SCALAR)

    @property
    def dispute_window_end(self) -> int:
        return self.phase_start + self.params.dispute_timeout

    def stored_first_coefficients(self) -> list[Point]:
        ident = self.group.identity
        return [r.c0 if (r.c0 is not None and r.status is Status.ACTIVE) else ident
                for r in self.participants]

    def active_indices(self) -> list[int]:
        return [r.index for r in self.participants if r.status is Status.ACTIVE]

    def held_balance(self) -> int:
        held = sum(r.deposit for r in self.participants
                   if r.status is not Status.SLASHED and not r.withdrawn)
        return held + sum(self.credits.values())

    def _slash(self, rec: ParticipantRecord, meter: GasMeter, reason: str) -> None:
        uw = self._w()[0]
        rec.status = Status.SLASHED
        rec.c0 = self.group.identity if rec.c0 is not None else None
        self.total_slashed += rec.deposit
        meter.sstore(1 + uw)
        meter.event(2)
        meter.event(2)
        self._emit("Excluded", index=rec.index, reason=reason)
        self._emit("Slashed", index=rec.index, amount=rec.deposit)

    # -- transactions ------------------------------------------------------------

    @_transaction
    def register(self, meter: GasMeter, sender: str, pk: Point, deposit: int) -> int:
        self._require_phase(Phase.REGISTRATION)
        if sender in self.barred:
            raise Revert(Err.BARRED, sender)
        if sender in self.by_address:
            raise Revert(Err.ALREADY_REGISTERED, sender)
        if deposit != self.params.collateral:
            raise Revert(Err.WRONG_DEPOSIT, f"{deposit} != {self.params.collateral}")
        if self.n >= self.params.n_max:
            raise Revert(Err.FULL)
        self._check_point(pk)
        if pk.is_identity:
            raise Revert(Err.INVALID_KEY)
        uw = self._w()[0]
        meter.calldata(uw + 1)
        meter.sstore(uw + 2)
        meter.event(2 + uw)

        rec = ParticipantRecord(self.n + 1, sender, pk, deposit)
        self.participants.append(rec)
        self.by_address[sender] = rec
        self.total_deposited += deposit
        self._emit("Registered", index=rec.index, address=sender, pk=pk.compress().hex())
        if self.n == self.params.n_max:
            self.threshold = threshold_for(self.n)
            self.abort_bound = abort_bound_for(self.n)
            meter.sstore(3)
            self._set_phase(Phase.SHARE_DISTRIBUTION, n=self.n, threshold=self.threshold,
                            abort_bound=self.abort_bound,
                            deadline=self.block + self.params.share_timeout)
        return rec.index

    @_transaction
    def distribute(self, meter: GasMeter, sender: str, commitments: Sequence[Point],
                   shares: Sequence[int]) -> None:
        self._require_phase(Phase.SHARE_DISTRIBUTION)
        rec = self._sender(sender)
        if rec.distributed:
            raise Revert(Err.ALREADY_DISTRIBUTED)
        if len(shares) != self.n - 1:
            raise Revert(Err.WRONG_SHARE_COUNT, f"{len(shares)} != {self.n - 1}")
        if len(commitments) != self.threshold:
            raise Revert(Err.WRONG_COMMITMENT_COUNT, f"{len(commitments)} != {self.threshold}")
        for c in commitments:
            self._check_point(c)
        for s in shares:
            self._check_scalar(s)
        uw, cw, sw, dw, _ = self._w()
        t, m = len(commitments), len(shares)
        meter.calldata(t * uw + m * sw)
        meter.hash(t * cw)
        meter.hash(m * sw)
        meter.sstore(uw + 2 * dw + 1)
        meter.event(1 + t * cw + m * sw)

        rec.distributed = True
        rec.c0 = commitments[0]
        rec.commitments_digest = hash_commitments(self.profile, commitments)
        rec.shares_digest = hash_shares(self.profile, shares)
        self._emit("SharesDistributed", dealer=rec.index,
                   commitments=[c.compress().hex() for c in commitments], shares=list(shares))
        if all(r.distributed for r in self.participants):
            meter.sstore(1)
            self._set_phase(Phase.DISPUTE, silent=[],
                            window_end=self.block + self.params.dispute_timeout)

    @_transaction
    def dispute(self, meter: GasMeter, sender: str, dealer: int, shares: Sequence[int]) -> None:
        self._require_phase(Phase.DISPUTE)
        if self.block >= self.dispute_window_end:
            raise Revert(Err.DISPUTE_WINDOW_CLOSED)
        disputer = self._sender(sender)
        if not 1 <= dealer <= self.n:
            raise Revert(Err.UNKNOWN_DEALER, str(dealer))
        target = self.participants[dealer - 1]
        if target is disputer:
            raise Revert(Err.SELF_DISPUTE)
        if disputer.status is not Status.ACTIVE or target.status is not Status.ACTIVE:
            raise Revert(Err.NOT_ACTIVE)
        if not target.distributed:
            raise Revert(Err.NOT_DISTRIBUTED)
        if dealer in self.disputes or dealer in self.resolved:
            raise Revert(Err.ALREADY_DISPUTED)
        if hash_shares(self.profile, shares) != target.shares_digest:
            raise Revert(Err.HASH_MISMATCH, "shares")
        _, _, sw, dw, _ = self._w()
        m = len(shares)
        meter.calldata(1 + m * sw)
        meter.sload(dw + 2)
        meter.hash(m * sw)
        meter.sstore(3)
        meter.event(3 + m * sw)

        pos = disputer.index - 1 if disputer.index < dealer else disputer.index - 2
        deadline = self.block + self.params.justify_window
        self.disputes[dealer] = DisputeRecord(dealer, disputer.index, shares[pos], deadline)
        self._emit("DisputeOpened", dealer=dealer, disputer=disputer.index, shares=list(shares),
                   deadline=deadline)

    @_transaction
    def justify(self, meter: GasMeter, sender: str, dealer: int, proof: Proof,
                commitments: Optional[Sequence[Point]] = None) -> None:
        """Resolve the dispute against ``dealer``.

        ``commitments`` is optional: the stored commitments digest already
        fixes the proof's public input. When given, it must hash to that
        digest and is charged as calldata.
        """
        self._require_phase(Phase.DISPUTE)
        self._sender(sender)
        d = self.disputes.get(dealer)
        if d is None:
            raise Revert(Err.NO_DISPUTE, str(dealer))
        if self.block > d.deadline:
            raise Revert(Err.DEADLINE_PASSED)
        uw, cw, sw, dw, iw = self._w()
        target = self.participants[dealer - 1]
        disputer = self.participants[d.disputer - 1]
        if commitments is not None:
            for c in commitments:
                self._check_point(c)
            if hash_commitments(self.profile, commitments) != target.commitments_digest:
                raise Revert(Err.HASH_MISMATCH, "commitments")
            meter.calldata(len(commitments) * uw)
            meter.hash(len(commitments) * cw)
        h = justify_digest(self.profile, target.commitments_digest, target.pk, disputer.pk,
                           disputer.index, d.s_enc)
        if not self.backend.verify(self.keys[StatementId.JUSTIFY], PublicInputs(h, True), proof):
            raise Revert(Err.INVALID_PROOF)
        meter.calldata(iw)
        meter.proof()
        meter.scan(len(self.disputes))
        meter.sload(3 + dw + 2 * uw)
        meter.hash(dw + 2 * cw + iw + sw)
        meter.verify("justify")
        meter.sstore(1)
        meter.event(2)

        del self.disputes[dealer]
        self.resolved.add(dealer)
        self._emit("DisputeResolved", dealer=dealer, disputer=disputer.index)
        if disputer.status is Status.ACTIVE:
            self._slash(disputer, meter, "unjustified dispute")

    def _exclusion_plan(self) -> list[tuple[ParticipantRecord, str]]:
        plan = []
        for r in self.participants:
            if r.status is not Status.ACTIVE:
                continue
            if not r.distributed:
                plan.append((r, "did not distribute"))
            elif r.index in self.disputes:
                plan.append((r, "unresolved dispute"))
        return plan

    def _apply_exclusions(self, plan, meter: GasMeter) -> None:
        for rec, reason in plan:
            rec.status = Status.EXCLUDED
            self._slash(rec, meter, reason)
        self.disputes.clear()

    def _abort(self, meter: GasMeter, reason: str, qualified: int) -> None:
        meter.event(3)
        self._emit("Aborted", reason=reason, qualified=qualified, abort_bound=self.abort_bound)
        self._set_phase(Phase.ABORTED)

    @_transaction
    def derive(self, meter: GasMeter, sender: str, pk: Point, proof: Proof) -> str:
        self._require_phase(Phase.KEY_DERIVATION)
        self._sender(sender)
        self._check_point(pk)
        uw, cw, _, _, _ = self._w()
        plan = self._exclusion_plan()
        excluded = {r.index for r, _ in plan}
        qualified = len(self.active_indices()) - len(plan)
        meter.calldata(uw)
        meter.proof()
        meter.sload(self.n * (uw + 1))
        meter.scan(len(self.disputes))
        if qualified < self.abort_bound:
            self._apply_exclusions(plan, meter)
            self._abort(meter, "too few qualified dealers", qualified)
            return "aborted"
        ident = self.group.identity
        coeffs = [ident if r.index in excluded else c
                  for r, c in zip(self.participants, self.stored_first_coefficients())]
        h = hash_derive_inputs(self.profile, coeffs)
        if not self.backend.verify(self.keys[StatementId.DERIVE], PublicInputs(h, pk), proof):
            raise Revert(Err.INVALID_PROOF)
        meter.hash(self.n * cw)
        meter.verify("derive")
        meter.sstore(uw + 1)
        meter.event(1 + uw)
        self._apply_exclusions(plan, meter)
        self.public_key = pk
        submitter = self.by_address[sender].index
        self._emit("KeyDerived", pk=pk.compress().hex(), submitter=submitter, qualified=qualified)
        self._set_phase(Phase.COMPLETED)
        return "completed"

    @_transaction
    def withdraw(self, meter: GasMeter, sender: str) -> int:
        rec = self.by_address.get(sender)
        if rec is None and self.credits.get(sender):
            amount = self.credits.pop(sender)
            self.total_refunded += amount
            meter.sload(1)
            meter.sstore(1)
            meter.transfer()
            self._emit("Withdrawn", address=sender, amount=amount, credit=True)
            return amount
        self._require_phase(Phase.COMPLETED, Phase.ABORTED)
        rec = self._sender(sender)
        if rec.status is Status.SLASHED:
            raise Revert(Err.SLASHED)
        if rec.withdrawn:
            raise Revert(Err.ALREADY_WITHDRAWN)
        meter.sload(2)
        meter.sstore(1)
        meter.transfer()
        meter.event(2)
        rec.withdrawn = True
        self.total_refunded += rec.deposit
        self._emit("Withdrawn", index=rec.index, amount=rec.deposit)
        return rec.deposit

    @_transaction
    def reset(self, meter: GasMeter, sender: str) -> None:
        if sender != self.owner:
            raise Revert(Err.NOT_OWNER)
        self._require_phase(Phase.COMPLETED, Phase.ABORTED)
        outstanding = [r for r in self.participants
                       if r.status is not Status.SLASHED and not r.withdrawn]
        if outstanding and not self.params.carry_balances:
            raise Revert(Err.UNSETTLED, f"{len(outstanding)} refunds outstanding")
        meter.sstore(1 + len(outstanding))
        for r in outstanding:
            self.credits[r.address] = self.credits.get(r.address, 0) + r.deposit
        self.barred |= {r.address for r in self.participants if r.status is Status.SLASHED}
        self.round += 1
        self._clear_round()
        self._emit("PhaseChanged", phase=Phase.REGISTRATION.value, round=self.round)

    # -- time --------------------------------------------------------------------------

    def tick(self, blocks: int = 1) -> list[LedgerEvent]:
        if blocks < 1:
            raise ValueError("tick needs blocks >= 1")
        start = len(self.events)
        for _ in range(blocks):
            self.block += 1
            self._pending = []
            self._advance()
            for kind, payload in self._pending:
                self.events.append(LedgerEvent(kind, payload, self.block, 0))
            self._pending = []
        return self.events[start:]

    def _advance(self) -> None:
        p = self.params
        if self.phase is Phase.SHARE_DISTRIBUTION and self.block >= self.phase_start + p.share_timeout:
            silent = [r.index for r in self.participants if not r.distributed]
            self._set_phase(Phase.DISPUTE, silent=silent, window_end=self.block + p.dispute_timeout)
        elif self.phase is Phase.DISPUTE:
            for d in self.disputes.values():
                if self.block > d.deadline:
                    d.expired = True
            if self.block >= self.dispute_window_end and all(d.expired for d in self.disputes.values()):
                self._set_phase(Phase.KEY_DERIVATION, expired=sorted(self.disputes),
                                deadline=self.block + p.derive_timeout)
        elif self.phase is Phase.KEY_DERIVATION and self.block >= self.phase_start + p.derive_timeout:
            meter = GasMeter(p.gas)
            plan = self._exclusion_plan()
            qualified = len(self.active_indices()) - len(plan)
            self._apply_exclusions(plan, meter)
            self._abort(meter, "no key submitted before derive timeout", qualified)

    # -- inspection ----------------------------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "owner": self.owner,
            "block": self.block,
            "round": self.round,
            "phase": self.phase.value,
            "phase_start": self.phase_start,
            "threshold": self.threshold,
            "abort_bound": self.abort_bound,
            "participants": [r.to_dict() for r in self.participants],
            "disputes": {str(k): vars(v) for k, v in sorted(self.disputes.items())},
            "resolved": sorted(self.resolved),
            "public_key": None if self.public_key is None else self.public_key.compress().hex(),
            "barred": sorted(self.barred),
            "credits": dict(sorted(self.credits.items())),
            "totals": {"deposited": self.total_deposited, "refunded": self.total_refunded,
                       "slashed": self.total_slashed},
            "keys": {s.name: self.keys[s].to_bytes().hex() for s in StatementId},
            "events": [e.to_dict() for e in self.events],
            "receipts": [[r.method, r.sender, r.ok, r.error and r.error.value, r.gas]
                         for r in self.receipts],
        }

    def state_digest(self) -> str:
        blob = json.dumps(self.state_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def export_events(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.events)
