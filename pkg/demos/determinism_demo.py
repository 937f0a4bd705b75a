#!/usr/bin/env python3
"""Reproducibility: a scenario is a pure function of (seed, config).

Usage:
    python3 demos/determinism_demo.py
"""

import dataclasses
import hashlib

from lcsim.harness import run_scenario
from lcsim.scenario import builtin_scenario_path, list_builtin_scenarios, load_scenario


def main() -> None:
    for name in list_builtin_scenarios():
        config = load_scenario(builtin_scenario_path(name))
        _, log_a = run_scenario(config)
        _, log_b = run_scenario(config)
        _, log_c = run_scenario(dataclasses.replace(config, seed=config.seed + 1))
        digest_a = hashlib.sha256(log_a.serialize()).hexdigest()[:16]
        digest_b = hashlib.sha256(log_b.serialize()).hexdigest()[:16]
        digest_c = hashlib.sha256(log_c.serialize()).hexdigest()[:16]
        print(
            f"{name:<12} seed {config.seed}: {digest_a}  replay: {digest_b}"
            f"  identical: {digest_a == digest_b}  seed+1 diverges: {digest_a != digest_c}"
        )


if __name__ == "__main__":
    main()
