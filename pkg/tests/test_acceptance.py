"""Acceptance suite: one test per criterion, tolerances pinned below.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import random
import time
from fractions import Fraction
from math import ceil, comb

import pytest

from zkdkg.algebra import TEST_GROUP, poly_random
from zkdkg.envelope import KeyPair, derive_pad, encrypt_share
from zkdkg.harness import (ScenarioConfig, check_run, gas_probe, replay, run_scenario,
                           verify_key_consistency)
from zkdkg.harness.scenario import fit_affine, transcript_text
from zkdkg.ledger import ContractParams, Err, ZkDkgContract
from zkdkg.participant import AdversaryStrategy
from zkdkg.profiles import get_profile
from zkdkg.proofsys import ProofGenerationError, PublicInputs, StatementId, TransparentBackend
from zkdkg.statements import (DeriveWitness, JustifyWitness, Unsatisfiable,
                              hash_justify_inputs, statement_derive, statement_justify)
from zkdkg.vss import deal

# pinned tolerances
HONEST_SEEDS = 10
HONEST_NS = (4, 8, 16)
HONEST_BUDGET_S = 10.0
RANDOM_SUBSETS = 100
SEEDED_RUNS = 10
GAS_NS = (4, 8, 16, 32, 64, 128, 256)
ORACLE_INSTANCES = 1000
MUTATIONS = 100
REPLAY_CONFIGS = 20


def S(text):
    return AdversaryStrategy.parse(text)


@pytest.fixture(scope="module")
def honest_runs():
    start = time.perf_counter()
    reports = [run_scenario(ScenarioConfig(n=n, profile="test", backend="transparent", seed=s))
               for n in HONEST_NS for s in range(HONEST_SEEDS)]
    return reports, time.perf_counter() - start


# -- 1 ---------------------------------------------------------------------------------------


def test_criterion_01_honest_end_to_end(honest_runs, record_property):
    reports, elapsed = honest_runs
    completed = sum(r.final_phase == "Completed" for r in reports)
    consistent = sum(verify_key_consistency(r, r.secrets).ok for r in reports)
    record_property("detail", f"{completed}/30 Completed, {consistent}/30 consistent, "
                              f"{elapsed:.2f}s")
    assert len(reports) == 30
    assert completed == 30 and consistent == 30
    assert elapsed < HONEST_BUDGET_S


# -- 2 ---------------------------------------------------------------------------------------


@pytest.mark.parametrize("n", [4, 8, 16, 32, 256])
def test_criterion_02_threshold_formulas(n, record_property):
    c = ZkDkgContract(ContractParams(n_max=n, profile="test"))
    rng = random.Random(n)
    for i in range(1, n + 1):
        assert c.register(f"p{i}", KeyPair.generate(c.group, rng).pk, 1000).ok
    t, b = ceil(Fraction(n + 1, 2)), ceil(Fraction(2 * n + 1, 3))
    record_property("detail", f"n={n}: t={c.threshold}, bound={c.abort_bound}")
    assert (c.threshold, c.abort_bound) == (t, b)
    if n == 256:
        assert c.threshold == 129


# -- 3 ---------------------------------------------------------------------------------------


def test_criterion_03_reconstruction(honest_runs, record_property):
    reports, _ = honest_runs
    checked = failures = 0
    for r in reports:
        assert r.final_phase == "Completed"
        # exhaustive only for n = 4 (4 subsets); 100 random subsets otherwise
        res = verify_key_consistency(r, r.secrets, samples=RANDOM_SUBSETS,
                                     exhaustive_limit=comb(4, 3), seed=r.config.seed)
        expected = comb(4, 3) if r.config.n == 4 else RANDOM_SUBSETS
        assert res.subsets_checked == expected
        checked += res.subsets_checked
        failures += not res.ok
    record_property("detail", f"{checked} subsets over 30 runs, {failures} failing runs")
    assert failures == 0


# -- 4 ---------------------------------------------------------------------------------------


def test_criterion_04_dispute_soundness(record_property):
    prof = get_profile("test")
    g, q = prof.group, prof.group.order
    backend = TransparentBackend()
    keys = backend.setup(StatementId.JUSTIFY, prof)
    rng = random.Random(4)
    n, dealer, target = 4, 1, 2
    kps = [KeyPair.generate(g, rng) for _ in range(n)]
    poly = poly_random((n + 2) // 2 - 1, q, rng)
    cs, table = deal(poly, g, n, dealer)
    pad = derive_pad(prof, kps[0].sk, kps[target - 1].pk, cs[0])
    accepted = 0
    for delta in range(1, q):
        s_enc = encrypt_share((table.outbound[target] + delta) % q, pad, q)
        h = hash_justify_inputs(prof, cs, kps[0].pk, kps[target - 1].pk, target, s_enc)
        w = JustifyWitness(cs, kps[0].sk, kps[0].pk, kps[target - 1].pk, target, s_enc)
        try:
            backend.prove(keys, PublicInputs(h, True), w)
            accepted += 1
        except ProofGenerationError:
            pass
        if backend.verify(keys, PublicInputs(h, True), backend.encode(keys, w, True)):
            accepted += 1

    runs_ok = 0
    for seed in range(SEEDED_RUNS):
        r = random.Random(seed)
        d, j = r.sample(range(1, n + 1), 2)
        rep = run_scenario(ScenarioConfig(n=n, seed=seed, adversaries={d: S(f"InvalidShareTo({j})")}))
        opened = any(e["kind"] == "DisputeOpened" and e["payload"]["dealer"] == d
                     for e in rep.events)
        justified = any(e["kind"] == "DisputeResolved" and e["payload"]["dealer"] == d
                        for e in rep.events)
        runs_ok += (opened and not justified and rep.verdicts[d] == "slashed"
                    and d not in rep.ledger_qualified)
    record_property("detail", f"{accepted} accepting tampers of {q - 1}; "
                              f"{runs_ok}/{SEEDED_RUNS} runs excluded+slashed")
    assert accepted == 0
    assert runs_ok == SEEDED_RUNS


# -- 5 ---------------------------------------------------------------------------------------


STRATEGIES = ("InvalidShareTo", "SilentDealer", "FalseDispute", "InvalidProofOnJustify",
              "WrongPublicKeyOnDerive")


def test_criterion_05_dispute_completeness(record_property):
    n = 4
    slashed_ok = 0
    for seed in range(SEEDED_RUNS):
        r = random.Random(100 + seed)
        liar, dealer = r.sample(range(1, n + 1), 2)
        rep = run_scenario(ScenarioConfig(n=n, seed=seed,
                                          adversaries={liar: S(f"FalseDispute({dealer})")}))
        justify_ok = [e for e in rep.transcript
                      if e.get("method") == "justify" and e["args"]["dealer"] == dealer and e["ok"]]
        slashed_ok += (bool(justify_ok) and rep.verdicts[liar] == "slashed"
                       and rep.verdicts[dealer] == "qualified")

    honest_slashed = 0
    unchecked = []
    for kind in STRATEGIES:
        for seed in range(SEEDED_RUNS):
            r = random.Random(f"{kind}-{seed}")
            bad, tgt = r.sample(range(1, n + 1), 2)
            strategy = S(f"{kind}({tgt})") if kind in ("InvalidShareTo", "FalseDispute",
                                                     "InvalidProofOnJustify") else S(kind)
            rep = run_scenario(ScenarioConfig(n=n, seed=seed, adversaries={bad: strategy}))
            honest_slashed += sum(v == "slashed" for i, v in rep.verdicts.items() if i != bad)
            checks = check_run(rep)
            if not all(checks.values()):
                unchecked.append((kind, seed, checks))
    record_property("detail", f"{slashed_ok}/{SEEDED_RUNS} false disputers slashed; "
                              f"{honest_slashed} honest slashings over 50 runs")
    assert slashed_ok == SEEDED_RUNS
    assert honest_slashed == 0 and not unchecked


# -- 6 ---------------------------------------------------------------------------------------


@pytest.mark.parametrize("n", [4, 8])
def test_criterion_06_abort_rule(n, record_property):
    bound = (2 * n + 3) // 3
    too_many = ceil(Fraction(n, 3)) + 1
    tolerable = n - bound
    phases = {"too_many": [], "tolerable": []}
    for label, count in (("too_many", too_many), ("tolerable", tolerable)):
        for seed in range(SEEDED_RUNS):
            silent = random.Random(seed * 31 + n).sample(range(1, n + 1), count)
            rep = run_scenario(ScenarioConfig(n=n, seed=seed,
                                              adversaries={i: S("SilentDealer") for i in silent}))
            phases[label].append(rep.final_phase)
    record_property("detail", f"n={n}: {too_many} silent -> {sorted(set(phases['too_many']))}, "
                              f"{tolerable} silent -> {sorted(set(phases['tolerable']))}")
    assert phases["too_many"] == ["Aborted"] * SEEDED_RUNS
    assert phases["tolerable"] == ["Completed"] * SEEDED_RUNS


# -- 7 ---------------------------------------------------------------------------------------


def _exactly_affine(ns, ys):
    b = Fraction(ys[1] - ys[0], ns[1] - ns[0])
    a = ys[0] - b * ns[0]
    return all(a + b * n == y for n, y in zip(ns, ys)), a, b


def test_criterion_07_gas_shape(record_property):
    probes = {n: gas_probe(n, profile="test") for n in GAS_NS}
    justify = {probes[n]["justify"] for n in GAS_NS}
    details = [f"justify={sorted(justify)}"]
    assert len(justify) == 1
    for fn in ("distribute", "dispute", "derive"):
        ys = [probes[n][fn] for n in GAS_NS]
        exact, a, b = _exactly_affine(GAS_NS, ys)
        fit = fit_affine(GAS_NS, ys)
        details.append(f"{fn}={float(a):.0f}+{float(b):.0f}n")
        assert exact, f"{fn} not affine: {ys}"
        assert b > 0
        assert fit.max_residual < 1e-6
    record_property("detail", "; ".join(details))


# -- 8 ---------------------------------------------------------------------------------------
#
# Independent oracle: plain modular arithmetic over the test group
# (p = 130787, q = 65393, g = 4), sum hash written out by hand.

P, Q, GEN = 130787, 65393, 4


def _enc(x):
    return 0 if x == 1 else x


def oracle_justify(h, cs, sk, pk, pk_d, i, s_enc):
    if not cs or i < 1:
        return "unsat"
    if pow(GEN, sk, P) != pk:
        return "unsat"
    inner = sum(_enc(c) for c in cs) % Q
    if (inner + _enc(pk) + _enc(pk_d) + i + s_enc) % Q != h:
        return "unsat"
    if pk_d == 1:
        return "unsat"
    pad = (_enc(pow(pk_d, sk, P)) + _enc(cs[0])) % Q
    s = (s_enc - pad) % Q
    rhs = 1
    for k, c in enumerate(cs):
        rhs = rhs * pow(c, pow(i, k, Q), P) % P
    return pow(GEN, s, P) == rhs


def oracle_derive(h, cs):
    if sum(_enc(c) for c in cs) % Q != h:
        return "unsat"
    out = 1
    for c in cs:
        out = out * c % P
    return out


def _pt(x):
    return TEST_GROUP.decode_compressed(_enc(x).to_bytes(3, "big"))


def _classify(fn, *args):
    try:
        return fn(*args)
    except Unsatisfiable:
        return "unsat"


def test_criterion_08_statement_oracle(record_property):
    prof = get_profile("test")
    rng = random.Random(8)
    kinds = ("true", "tamper", "wrong_sk", "wrong_h", "identity_peer", "bad_index",
             "no_commitments", "random")
    agree = 0
    classes = {"true": 0, "false": 0, "unsat": 0}
    for k in range(ORACLE_INSTANCES):
        kind = kinds[k % len(kinds)]
        t = rng.randint(1, 5)
        coeffs = [rng.randrange(Q) for _ in range(t)]
        cs = [pow(GEN, a, P) for a in coeffs]
        sk, skd = rng.randrange(1, Q), rng.randrange(1, Q)
        pk, pk_d = pow(GEN, sk, P), pow(GEN, skd, P)
        i = rng.randint(1, 64)
        share = sum(a * pow(i, e, Q) for e, a in enumerate(coeffs)) % Q
        if kind == "identity_peer":
            pk_d = 1
        pad = (_enc(pow(pk_d, sk, P)) + _enc(cs[0])) % Q
        s_enc = (share + pad) % Q
        if kind == "tamper":
            s_enc = (s_enc + rng.randrange(1, Q)) % Q
        elif kind == "random":
            s_enc = rng.randrange(Q)
            cs[rng.randrange(t)] = pow(GEN, rng.randrange(Q), P)
        if kind == "bad_index":
            i = 0
        if kind == "no_commitments":
            cs = []
        h = (sum(_enc(c) for c in cs) % Q + _enc(pk) + _enc(pk_d) + i + s_enc) % Q
        if kind == "wrong_h":
            h = (h + rng.randrange(1, Q)) % Q
        w_sk = (sk + 1) % Q if kind == "wrong_sk" else sk
        want = oracle_justify(h, cs, w_sk, pk, pk_d, i, s_enc)
        w = JustifyWitness(tuple(_pt(c) for c in cs), w_sk, _pt(pk), _pt(pk_d), i, s_enc)
        got = _classify(statement_justify, prof, h.to_bytes(2, "big"), w)
        agree += got == want
        classes["unsat" if want == "unsat" else str(want).lower()] += 1

        m = rng.randint(1, 16)
        dc = [1 if rng.random() < 0.25 else pow(GEN, rng.randrange(Q), P) for _ in range(m)]
        dh = sum(_enc(c) for c in dc) % Q
        if rng.random() < 0.3:
            dh = (dh + rng.randrange(1, Q)) % Q
        want_d = oracle_derive(dh, dc)
        got_d = _classify(statement_derive, prof, dh.to_bytes(2, "big"),
                          DeriveWitness(tuple(_pt(c) for c in dc)))
        agree += (got_d == "unsat") if want_d == "unsat" else (got_d != "unsat" and got_d.raw == want_d)
    record_property("detail", f"{agree}/{2 * ORACLE_INSTANCES} agree; justify classes {classes}")
    assert agree == 2 * ORACLE_INSTANCES
    assert all(classes.values())


# -- 9 ---------------------------------------------------------------------------------------


def _mutate_scalars(rng, xs, q):
    ys = list(xs)
    op = rng.randrange(5)
    if op == 0:
        ys[rng.randrange(len(ys))] = rng.randrange(q)
    elif op == 1:
        k = rng.randrange(len(ys))
        ys[k] = (ys[k] + rng.randrange(1, q)) % q
    elif op == 2 and len(ys) > 1:
        a, b = rng.sample(range(len(ys)), 2)
        ys[a], ys[b] = ys[b], ys[a]
    elif op == 3:
        ys.pop(rng.randrange(len(ys)))
    else:
        ys.insert(rng.randrange(len(ys) + 1), rng.randrange(q))
    return ys


def _mutate_points(rng, xs, g):
    ys = list(xs)
    op = rng.randrange(5)
    if op == 0:
        ys[rng.randrange(len(ys))] = g.base_mul(rng.randrange(g.order))
    elif op == 1:
        k = rng.randrange(len(ys))
        ys[k] = ys[k] + g.generator
    elif op == 2 and len(ys) > 1:
        a, b = rng.sample(range(len(ys)), 2)
        ys[a], ys[b] = ys[b], ys[a]
    elif op == 3:
        ys.pop(rng.randrange(len(ys)))
    else:
        ys.insert(rng.randrange(len(ys) + 1), g.base_mul(rng.randrange(g.order)))
    return ys


def test_criterion_09_hash_binding(record_property):
    n = 4
    c = ZkDkgContract(ContractParams(n_max=n, profile="production"))
    prof, g = c.profile, c.group
    rng = random.Random(9)
    kps = [KeyPair.generate(g, rng) for _ in range(n)]
    for i, kp in enumerate(kps, start=1):
        assert c.register(f"p{i}", kp.pk, 1000).ok
    dealt = {}
    for i, kp in enumerate(kps, start=1):
        cs, table = deal(poly_random(c.threshold - 1, g.order, rng), g, n, i)
        cts = [encrypt_share(s, derive_pad(prof, kp.sk, kps[j - 1].pk, cs[0]), g.order)
               for j, s in sorted(table.outbound.items())]
        dealt[i] = (list(cs), cts)
        assert c.distribute(f"p{i}", list(cs), cts).ok
    cs, cts = dealt[1]

    dispute_errors = []
    for _ in range(MUTATIONS):
        bad = cts
        while bad == cts:
            bad = _mutate_scalars(rng, cts, g.order)
        dispute_errors.append(c.dispute("p2", 1, bad).error)
    assert c.dispute("p2", 1, cts).ok

    h = hash_justify_inputs(prof, cs, kps[0].pk, kps[1].pk, 2, cts[0])
    proof = c.backend.prove(c.keys[StatementId.JUSTIFY], PublicInputs(h, True),
                            JustifyWitness(tuple(cs), kps[0].sk, kps[0].pk, kps[1].pk, 2, cts[0]))
    justify_errors = []
    for _ in range(MUTATIONS):
        bad = cs
        while bad == cs:
            bad = _mutate_points(rng, cs, g)
        justify_errors.append(c.justify("p1", 1, proof, bad).error)
    assert c.justify("p1", 1, proof, cs).ok

    ok_d = sum(e is Err.HASH_MISMATCH for e in dispute_errors)
    ok_j = sum(e is Err.HASH_MISMATCH for e in justify_errors)
    record_property("detail", f"dispute {ok_d}/{MUTATIONS}, justify {ok_j}/{MUTATIONS} "
                              "hash-mismatch reverts")
    assert ok_d == MUTATIONS and ok_j == MUTATIONS


# -- 10 ----------------------------------------------------------------------------------------


def _random_config(rng, k):
    profile = rng.choice(["toy", "test", "test", "production"] if k % 5 else ["production"])
    n = rng.randint(2, 10 if profile == "toy" else 12)
    adversaries = {}
    for i in rng.sample(range(1, n + 1), rng.randint(0, max(0, n // 3))):
        kind = rng.choice(STRATEGIES)
        if kind in ("InvalidShareTo", "FalseDispute", "InvalidProofOnJustify"):
            tgt = rng.choice([j for j in range(1, n + 1) if j != i])
            adversaries[i] = S(f"{kind}({tgt})")
        else:
            adversaries[i] = S(kind)
    return ScenarioConfig(n=n, profile=profile, seed=rng.randrange(2**32),
                          adversaries=adversaries,
                          resubmit_commitments=rng.random() < 0.3)


def test_criterion_10_replay_determinism(record_property):
    rng = random.Random(10)
    identical = 0
    for k in range(REPLAY_CONFIGS):
        cfg = _random_config(rng, k)
        rep = run_scenario(cfg)
        res = replay(rep.transcript)
        again = run_scenario(cfg)
        identical += (res.ok and res.contract.state_digest() == rep.state_digest
                      and transcript_text(again.transcript) == transcript_text(rep.transcript))
    record_property("detail", f"{identical}/{REPLAY_CONFIGS} configs replay byte-identically")
    assert identical == REPLAY_CONFIGS
