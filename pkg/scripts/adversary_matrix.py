"""Run each adversary strategy against honest peers and tabulate outcomes.

Each cell is one strategy at one n over several seeds; the adversary's
index and target are drawn from the seed. Reports final phases, how often
the adversary was slashed, and whether any honest participant ever was.

    python scripts/adversary_matrix.py --n 4 8 --seeds 10
"""

import argparse
import random
from collections import Counter

from zkdkg.harness import ScenarioConfig, check_run, run_scenario
from zkdkg.participant import AdversaryStrategy, StrategyKind

TARGETED = {StrategyKind.INVALID_SHARE_TO, StrategyKind.FALSE_DISPUTE,
            StrategyKind.INVALID_PROOF_ON_JUSTIFY}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[4, 8])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--profile", default="test", choices=["toy", "test", "production"])
    args = ap.parse_args()

    print(f"{'strategy':<24}{'n':>4}  {'phases':<28}{'adv slashed':>12}{'honest slashed':>16}"
          f"{'checks':>8}")
    for kind in StrategyKind:
        if kind is StrategyKind.HONEST:
            continue
        for n in args.n:
            phases, adv_slashed, honest_slashed, clean = Counter(), 0, 0, 0
            for seed in range(args.seeds):
                rng = random.Random(f"{kind.value}-{n}-{seed}")
                bad, tgt = rng.sample(range(1, n + 1), 2)
                strategy = AdversaryStrategy(kind, tgt if kind in TARGETED else None)
                rep = run_scenario(ScenarioConfig(n=n, profile=args.profile, seed=seed,
                                                  adversaries={bad: strategy}))
                phases[rep.final_phase] += 1
                adv_slashed += rep.verdicts[bad] == "slashed"
                honest_slashed += sum(v == "slashed" for i, v in rep.verdicts.items() if i != bad)
                clean += all(check_run(rep).values())
            ph = ", ".join(f"{p} x{c}" for p, c in sorted(phases.items()))
            print(f"{kind.value:<24}{n:>4}  {ph:<28}{adv_slashed:>12}{honest_slashed:>16}"
                  f"{clean:>5}/{args.seeds}")


if __name__ == "__main__":
    main()
