"""Command line: ``zkdkg run | sweep | verify``.

Exit status is 0 only when every verdict of every run passes.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from ..participant import HarnessError
from .scenario import (HarnessSecrets, RunReport, ScenarioConfig, check_run, load_transcript,
                       replay, run_scenario, sweep, verify_key_consistency)


def _overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    changes = {k: getattr(args, k) for k in ("backend", "profile", "seed")
               if getattr(args, k) is not None}
    return replace(cfg, **changes) if changes else cfg


def _print_checks(checks: dict[str, bool]) -> bool:
    for name, ok in checks.items():
        print(f"  [{'PASS' if ok else 'FAIL'}] {name}")
    return all(checks.values())


def cmd_run(args) -> int:
    cfg = _overrides(ScenarioConfig.from_dict(json.loads(Path(args.config).read_text())), args)
    report = run_scenario(cfg)
    report.write(Path(args.out))
    print(f"n={cfg.n} profile={cfg.profile} seed={cfg.seed}: {report.final_phase} "
          f"after {report.blocks} blocks")
    if report.public_key:
        print(f"  public key {report.public_key}")
    for fn, charges in sorted(report.gas.items()):
        print(f"  gas {fn:<10} {charges}")
    ok = _print_checks(check_run(report))
    print(f"wrote {args.out}")
    return 0 if ok else 1


def _grid_configs(grid: dict, args) -> list[ScenarioConfig]:
    base = dict(grid.get("base", {}))
    seeds = grid.get("seeds") or list(range(grid.get("runs", 1)))
    rosters = grid.get("rosters") or [base.pop("adversaries", {})]
    base.pop("adversaries", None)
    configs = []
    for n in grid["n"]:
        for roster in rosters:
            for seed in seeds:
                d = {**base, "n": n, "seed": seed, "adversaries": roster}
                configs.append(_overrides(ScenarioConfig.from_dict(d), args))
    return configs


def cmd_sweep(args) -> int:
    grid = json.loads(Path(args.grid).read_text())
    configs = _grid_configs(grid, args)
    result = sweep(configs)
    print(result.table())
    for n, phases in sorted(result.phases.items()):
        print(f"  n={n}: " + ", ".join(f"{p} x{phases.count(p)}" for p in sorted(set(phases))))
    if args.out:
        doc = {
            "mean_gas": [{"function": f, "n": n, "gas": g}
                         for (f, n), g in sorted(result.mean_gas.items())],
            "fits": {f: vars(fit) for f, fit in result.fits.items()},
            "proof_times": [{"statement": s, "n": n, "seconds": ts}
                            for (s, n), ts in sorted(result.proof_times.items())],
        }
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_verify(args) -> int:
    path = Path(args.transcript)
    result = replay(load_transcript(path))
    checks = {"replay_receipts": not result.mismatches,
              "state_digest": result.expected_digest == result.contract.state_digest()}
    for m in result.mismatches[:10]:
        print(f"  mismatch: {m}")
    report_path, secrets_path = path.parent / "report.json", path.parent / "secrets.json"
    if report_path.exists() and secrets_path.exists():
        doc = json.loads(report_path.read_text())
        if doc["final_phase"] == "Completed":
            report = _report_from_doc(doc)
            secrets = HarnessSecrets.from_dict(json.loads(secrets_path.read_text()))
            consistency = verify_key_consistency(report, secrets)
            checks["key_consistency"] = consistency.ok
            for p in consistency.problems:
                print(f"  oracle: {p}")
    print(f"replayed {path}")
    return 0 if _print_checks(checks) else 1


def _report_from_doc(doc: dict) -> RunReport:
    return RunReport(
        config=ScenarioConfig.from_dict(doc["config"]), final_phase=doc["final_phase"],
        public_key=doc["public_key"], threshold=doc["threshold"],
        abort_bound=doc["abort_bound"], gas=doc["gas"],
        verdicts={int(k): v for k, v in doc["verdicts"].items()},
        local_qualified={int(k): v for k, v in doc["local_qualified"].items()},
        ledger_qualified=doc["ledger_qualified"], proof_times=doc["proof_times"],
        withdrawn={int(k): v for k, v in doc["withdrawn"].items()},
        state_digest=doc["state_digest"], blocks=doc["blocks"], balances=doc["balances"],
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=["transparent", "snark"])
    common.add_argument("--profile", choices=["toy", "test", "production"])
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="zkdkg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run one scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("sweep", parents=[common], help="run an experiment grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("verify", parents=[common], help="replay a transcript and check it")
    p.add_argument("--transcript", required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HarnessError, NotImplementedError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
