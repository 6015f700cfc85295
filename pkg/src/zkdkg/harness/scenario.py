"""Scenario runner: deterministic synchronous scheduling over one contract.

Each block runs in rounds. A round hands every undelivered ledger event to
every participant (index order), then executes the calls they produced,
again in participant-index order. Rounds repeat until no new events appear,
then the block advances. A run stops once the contract is terminal and
quiet.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Optional

import numpy as np

from ..algebra import lagrange_at_zero, poly_random
from ..envelope import KeyPair, derive_pad, encrypt_share
from ..ledger import Call, ContractParams, GasModel, Phase, Status, ZkDkgContract
from ..participant import HONEST, AdversaryStrategy, HarnessError, Participant
from ..profiles import get_profile
from ..proofsys import PublicInputs, StatementId
from ..statements import (DeriveWitness, JustifyWitness, hash_derive_inputs,
                          hash_justify_inputs)
from ..vss import deal


@dataclass(frozen=True)
class Timeouts:
    share: int = 10
    dispute: int = 10
    justify: int = 5
    derive: int = 10


@dataclass
class ScenarioConfig:
    n: int
    profile: str = "test"
    backend: str = "transparent"
    seed: int = 0
    collateral: int = 1000
    timeouts: Timeouts = field(default_factory=Timeouts)
    gas: GasModel = field(default_factory=GasModel)
    adversaries: dict[int, AdversaryStrategy] = field(default_factory=dict)
    block_budget: Optional[int] = None
    resubmit_commitments: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        q = get_profile(self.profile).group.order
        if self.n >= q:
            raise ValueError(f"n={self.n} needs distinct nonzero indices mod q={q}")
        for i, s in self.adversaries.items():
            if not 1 <= i <= self.n:
                raise ValueError(f"adversary index {i} outside 1..{self.n}")
            if s.target is not None and (not 1 <= s.target <= self.n or s.target == i):
                raise ValueError(f"adversary {i} has invalid target {s.target}")

    @property
    def budget(self) -> int:
        if self.block_budget is not None:
            return self.block_budget
        t = self.timeouts
        return t.share + t.dispute + t.justify + t.derive + 10

    def contract_params(self) -> ContractParams:
        t = self.timeouts
        return ContractParams(n_max=self.n, collateral=self.collateral, share_timeout=t.share,
                              dispute_timeout=t.dispute, justify_window=t.justify,
                              derive_timeout=t.derive, profile=self.profile,
                              backend=self.backend, gas=self.gas)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "profile": self.profile, "backend": self.backend, "seed": self.seed,
            "collateral": self.collateral, "timeouts": vars(self.timeouts),
            "gas": self.gas.to_dict(),
            "adversaries": {str(i): str(s) for i, s in sorted(self.adversaries.items())},
            "block_budget": self.block_budget,
            "resubmit_commitments": self.resubmit_commitments,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        timeouts = Timeouts(**d.pop("timeouts", {}))
        gas = GasModel.from_dict(d.pop("gas", {}))
        adv = {int(i): AdversaryStrategy.parse(s) for i, s in d.pop("adversaries", {}).items()}
        return cls(timeouts=timeouts, gas=gas, adversaries=adv, **d)


@dataclass
class HarnessSecrets:
    """White-box data the protocol never reveals; used only by the oracle."""

    polynomials: dict[int, list[int]]
    private_shares: dict[int, Optional[int]]

    def to_dict(self) -> dict:
        return {"polynomials": {str(k): v for k, v in self.polynomials.items()},
                "private_shares": {str(k): v for k, v in self.private_shares.items()}}

    @classmethod
    def from_dict(cls, d: dict) -> "HarnessSecrets":
        return cls({int(k): v for k, v in d["polynomials"].items()},
                   {int(k): v for k, v in d["private_shares"].items()})


@dataclass
class RunReport:
    config: ScenarioConfig
    final_phase: str
    public_key: Optional[str]
    threshold: Optional[int]
    abort_bound: Optional[int]
    gas: dict[str, list[int]]
    verdicts: dict[int, str]
    local_qualified: dict[int, list[int]]
    ledger_qualified: list[int]
    proof_times: dict[str, list[float]]
    withdrawn: dict[int, int]
    state_digest: str
    blocks: int
    balances: dict[str, int] = field(default_factory=dict)
    transcript: list[dict] = field(repr=False, default_factory=list)
    events: list[dict] = field(repr=False, default_factory=list)
    secrets: Optional[HarnessSecrets] = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(), "final_phase": self.final_phase,
            "public_key": self.public_key, "threshold": self.threshold,
            "abort_bound": self.abort_bound, "gas": self.gas,
            "verdicts": {str(k): v for k, v in self.verdicts.items()},
            "local_qualified": {str(k): v for k, v in self.local_qualified.items()},
            "ledger_qualified": self.ledger_qualified, "proof_times": self.proof_times,
            "withdrawn": {str(k): v for k, v in self.withdrawn.items()},
            "state_digest": self.state_digest, "blocks": self.blocks,
            "balances": self.balances,
        }

    def write(self, out: Path) -> None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(self.config.to_dict(), indent=2) + "\n")
        (out / "report.json").write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        (out / "transcript.jsonl").write_text(transcript_text(self.transcript))
        (out / "events.jsonl").write_text(
            "".join(json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n" for e in self.events))
        if self.secrets is not None:
            (out / "secrets.json").write_text(json.dumps(self.secrets.to_dict(), indent=2) + "\n")


def transcript_text(entries: list[dict]) -> str:
    return "".join(json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n" for e in entries)


def _record(transcript: list[dict], contract: ZkDkgContract, call: Call) -> None:
    block = contract.block
    r = call.apply(contract)
    transcript.append({"type": "call", "block": block, **call.to_dict(), "ok": r.ok,
                       "error": r.error and r.error.value, "gas": r.gas})


def run_scenario(config: ScenarioConfig) -> RunReport:
    params = config.contract_params()
    contract = ZkDkgContract(params)
    transcript: list[dict] = [{"type": "header", "params": params.to_dict(),
                               "owner": contract.owner}]
    participants = [
        Participant(f"p{i}", contract.profile, contract.backend, contract.keys,
                    seed=str(config.seed), strategy=config.adversaries.get(i, HONEST),
                    collateral=config.collateral,
                    resubmit_commitments=config.resubmit_commitments)
        for i in range(1, config.n + 1)
    ]
    for p in participants:
        _record(transcript, contract, p.registration_call())

    cursor = 0
    while True:
        while cursor < len(contract.events):
            batch = contract.events[cursor:]
            cursor = len(contract.events)
            for p in participants:
                calls = [c for ev in batch for c in p.step(ev)]
                for c in calls:
                    _record(transcript, contract, c)
        if contract.phase.terminal:
            break
        if contract.block >= config.budget:
            raise HarnessError(f"no terminal phase within {config.budget} blocks "
                               f"(stuck in {contract.phase.value})")
        contract.tick(1)
        transcript.append({"type": "tick", "blocks": 1})

    digest = contract.state_digest()
    transcript.append({"type": "end", "state_digest": digest})
    return _build_report(config, contract, participants, transcript, digest)


def _build_report(config, contract, participants, transcript, digest) -> RunReport:
    gas: dict[str, list[int]] = {}
    for r in contract.receipts:
        if r.ok:
            gas.setdefault(r.method, []).append(r.gas)
    verdicts = {}
    for rec in contract.participants:
        verdicts[rec.index] = "qualified" if rec.status is Status.ACTIVE else rec.status.value
    times: dict[str, list[float]] = {}
    for p in participants:
        for stmt, t in p.proof_times:
            times.setdefault(stmt, []).append(t)
    withdrawn = {}
    for r in contract.receipts:
        if r.method == "withdraw" and r.ok:
            withdrawn[contract.by_address[r.sender].index] = r.result
    secrets = HarnessSecrets(
        {p.index: list(p.poly.coeffs) for p in participants if p.poly is not None},
        {p.index: p.private_share for p in participants},
    )
    return RunReport(
        config=config, final_phase=contract.phase.value,
        public_key=None if contract.public_key is None else contract.public_key.compress().hex(),
        threshold=contract.threshold, abort_bound=contract.abort_bound, gas=gas,
        verdicts=verdicts,
        local_qualified={p.index: sorted(p.qualified) for p in participants
                         if p.qualified is not None},
        ledger_qualified=contract.active_indices(), proof_times=times, withdrawn=withdrawn,
        state_digest=digest, blocks=contract.block,
        balances={"deposited": contract.total_deposited, "refunded": contract.total_refunded,
                  "slashed": contract.total_slashed, "held": contract.held_balance()},
        transcript=transcript,
        events=[e.to_dict() for e in contract.events], secrets=secrets,
    )


def check_run(report: RunReport) -> dict[str, bool]:
    """Pass/fail verdicts for one run; the CLI exits nonzero if any is False."""
    honest = [i for i in report.verdicts if i not in report.config.adversaries]
    b = report.balances
    checks = {
        "terminated": report.final_phase in (Phase.COMPLETED.value, Phase.ABORTED.value),
        "honest_never_slashed": all(report.verdicts[i] != Status.SLASHED.value for i in honest),
        "exclusion_consistency": all(report.local_qualified.get(i) == report.ledger_qualified
                                     for i in honest if i in report.local_qualified),
        "collateral_conserved": b["refunded"] + b["slashed"] + b["held"] == b["deposited"],
        "replay": replay(report.transcript).ok,
    }
    if report.final_phase == Phase.COMPLETED.value and report.secrets is not None:
        checks["key_consistency"] = verify_key_consistency(report, report.secrets).ok
    return checks


# -- replay -------------------------------------------------------------------------------

@dataclass
class ReplayResult:
    contract: ZkDkgContract
    mismatches: list[str]
    expected_digest: Optional[str]

    @property
    def ok(self) -> bool:
        return not self.mismatches and self.expected_digest == self.contract.state_digest()


def replay(transcript: list[dict]) -> ReplayResult:
    header = transcript[0]
    if header.get("type") != "header":
        raise ValueError("transcript must start with a header entry")
    contract = ZkDkgContract(ContractParams.from_dict(header["params"]), owner=header["owner"])
    mismatches, expected = [], None
    for k, entry in enumerate(transcript[1:], start=1):
        kind = entry["type"]
        if kind == "tick":
            contract.tick(entry["blocks"])
        elif kind == "call":
            if entry["block"] != contract.block:
                mismatches.append(f"entry {k}: block {entry['block']} != {contract.block}")
            r = Call.from_dict(entry, contract.group).apply(contract)
            got = (r.ok, r.error and r.error.value, r.gas)
            want = (entry["ok"], entry["error"], entry["gas"])
            if got != want:
                mismatches.append(f"entry {k} ({entry['method']}): {got} != {want}")
        elif kind == "end":
            expected = entry["state_digest"]
    return ReplayResult(contract, mismatches, expected)


def load_transcript(path: Path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]


# -- oracle ---------------------------------------------------------------------------------

@dataclass
class ConsistencyResult:
    ok: bool
    problems: list[str]
    subsets_checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def verify_key_consistency(report: RunReport, secrets: HarnessSecrets, samples: int = 100,
                           exhaustive_limit: int = 200, seed: int = 0) -> ConsistencyResult:
    """Check the stored key against the dealt polynomials and t-subset reconstruction.

    Subsets are enumerated when there are at most ``exhaustive_limit`` of them,
    otherwise ``samples`` random ones are drawn.
    """
    problems: list[str] = []
    if report.final_phase != Phase.COMPLETED.value or report.public_key is None:
        return ConsistencyResult(False, [f"run ended {report.final_phase}, no key"])
    g = get_profile(report.config.profile).group
    q = g.order
    try:
        pk = g.decode_compressed(bytes.fromhex(report.public_key))
    except ValueError as exc:
        return ConsistencyResult(False, [f"stored key does not decode: {exc}"])
    qualified = report.ledger_qualified
    secret = sum(secrets.polynomials[i][0] for i in qualified) % q
    if g.base_mul(secret) != pk:
        problems.append("pk != (sum of qualified f_i(0)) * G")

    def f(i: int, x: int) -> int:
        acc = 0
        for c in reversed(secrets.polynomials[i]):
            acc = (acc * x + c) % q
        return acc

    for j in qualified:
        want = sum(f(i, j) for i in qualified) % q
        if secrets.private_shares.get(j) != want:
            problems.append(f"private share of {j} is not H({j})")
    t = report.threshold
    holders = [j for j in qualified if secrets.private_shares.get(j) is not None]
    if len(holders) < t:
        problems.append(f"only {len(holders)} usable shares for threshold {t}")
        return ConsistencyResult(False, problems)
    if comb(len(holders), t) <= exhaustive_limit:
        subsets = list(itertools.combinations(holders, t))
    else:
        rng = random.Random(seed)
        subsets = [tuple(rng.sample(holders, t)) for _ in range(samples)]
    bad = 0
    for sub in subsets:
        x = lagrange_at_zero([(j, secrets.private_shares[j]) for j in sub], q)
        if g.base_mul(x) != pk:
            bad += 1
    if bad:
        problems.append(f"{bad}/{len(subsets)} t-subsets fail to reconstruct pk")
    return ConsistencyResult(not problems, problems, len(subsets))


# -- gas probing and sweeps ------------------------------------------------------------

def gas_probe(n: int, profile: str = "test", gas: Optional[GasModel] = None,
              seed: int = 0) -> dict[str, int]:
    """Drive one contract through every function once and return the gas of each call.

    All dealers are honest; participant 2 files a false dispute against
    dealer 1, who justifies. Skips share verification so large ``n`` stays
    cheap.
    """
    params = ContractParams(n_max=n, profile=profile, gas=gas or GasModel())
    c = ZkDkgContract(params)
    prof, g = c.profile, c.group
    rng = random.Random(seed)
    kps = [KeyPair.generate(g, rng) for _ in range(n)]
    out: dict[str, int] = {}

    def ok(r):
        if not r.ok:
            raise HarnessError(f"probe call {r.method} reverted: {r.error}")
        out.setdefault(r.method, r.gas)
        return r

    for i, kp in enumerate(kps, start=1):
        ok(c.register(f"p{i}", kp.pk, params.collateral))
    t = c.threshold
    dealt = {}
    for i, kp in enumerate(kps, start=1):
        poly = poly_random(t - 1, g.order, rng)
        cs, table = deal(poly, g, n, i)
        cts = [encrypt_share(s, derive_pad(prof, kp.sk, kps[j - 1].pk, cs[0]), g.order)
               for j, s in sorted(table.outbound.items())]
        dealt[i] = (cs, cts)
        ok(c.distribute(f"p{i}", list(cs), cts))
    cs1, cts1 = dealt[1]
    ok(c.dispute("p2", 1, cts1))
    h = hash_justify_inputs(prof, cs1, kps[0].pk, kps[1].pk, 2, cts1[0])
    w = JustifyWitness(cs1, kps[0].sk, kps[0].pk, kps[1].pk, 2, cts1[0])
    proof = c.backend.prove(c.keys[StatementId.JUSTIFY], PublicInputs(h, True), w)
    ok(c.justify("p1", 1, proof))
    while c.phase is not Phase.KEY_DERIVATION:
        c.tick(1)
    coeffs = tuple(c.stored_first_coefficients())
    pk = g.sum(coeffs)
    dproof = c.backend.prove(c.keys[StatementId.DERIVE],
                             PublicInputs(hash_derive_inputs(prof, coeffs), pk),
                             DeriveWitness(coeffs))
    ok(c.derive("p1", pk, dproof))
    return out


@dataclass
class AffineFit:
    intercept: float
    slope: float
    max_residual: float


def fit_affine(ns, values) -> AffineFit:
    x = np.asarray(ns, dtype=float)
    y = np.asarray(values, dtype=float)
    A = np.column_stack([np.ones_like(x), x])
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    return AffineFit(float(a), float(b), float(np.max(np.abs(A @ [a, b] - y))))


@dataclass
class SweepResult:
    mean_gas: dict[tuple[str, int], float]
    fits: dict[str, AffineFit]
    proof_times: dict[tuple[str, int], list[float]]
    phases: dict[int, list[str]]

    def table(self) -> str:
        fns = sorted({f for f, _ in self.mean_gas})
        ns = sorted({n for _, n in self.mean_gas})
        lines = ["n".rjust(5) + "".join(f.rjust(14) for f in fns)]
        for n in ns:
            row = [f"{self.mean_gas.get((f, n), float('nan')):14.0f}" for f in fns]
            lines.append(str(n).rjust(5) + "".join(row))
        lines.append("")
        for f in fns:
            fit = self.fits.get(f)
            if fit:
                lines.append(f"{f:>10}: gas(n) = {fit.intercept:.1f} + {fit.slope:.3f} n"
                             f"  (max residual {fit.max_residual:.3g})")
        return "\n".join(lines)


def sweep(configs: list[ScenarioConfig]) -> SweepResult:
    samples: dict[tuple[str, int], list[int]] = {}
    times: dict[tuple[str, int], list[float]] = {}
    phases: dict[int, list[str]] = {}
    for cfg in configs:
        rep = run_scenario(cfg)
        phases.setdefault(cfg.n, []).append(rep.final_phase)
        for fn, charges in rep.gas.items():
            samples.setdefault((fn, cfg.n), []).extend(charges)
        for stmt, ts in rep.proof_times.items():
            times.setdefault((stmt, cfg.n), []).extend(ts)
    mean = {k: float(np.mean(v)) for k, v in samples.items()}
    fits = {}
    for fn in sorted({f for f, _ in mean}):
        pts = sorted((n, v) for (f, n), v in mean.items() if f == fn)
        if len(pts) >= 2:
            fits[fn] = fit_affine([n for n, _ in pts], [v for _, v in pts])
    return SweepResult(mean, fits, times, phases)
