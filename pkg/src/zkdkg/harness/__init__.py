from .scenario import (AffineFit, ConsistencyResult, HarnessSecrets, ReplayResult, RunReport,
                       ScenarioConfig, SweepResult, Timeouts, check_run, fit_affine, gas_probe,
                       load_transcript, replay, run_scenario, sweep, verify_key_consistency)

__all__ = [
    "AffineFit", "ConsistencyResult", "HarnessSecrets", "ReplayResult", "RunReport",
    "ScenarioConfig", "SweepResult", "Timeouts", "check_run", "fit_affine", "gas_probe", "load_transcript",
    "replay", "run_scenario", "sweep", "verify_key_consistency",
]
