#!/usr/bin/env python3
"""The economic light client, happy path and dispute path.

Runs two bundled scenarios and narrates the event flow: in the first every
provider is honest and the client simply waits out its challenge period;
in the second the highest-staked provider lies, a watcher slashes it
on-chain, and the client restarts onto the honest fallback.

Usage:
    python3 demos/economic_client_demo.py
"""

from lcsim.harness import run_scenario
from lcsim.scenario import builtin_scenario_path, load_scenario

INTERESTING = {
    "bootstrap": "client bootstraps (heavy check) and snapshots the provider set",
    "query": "client queries the selected providers",
    "verdict": "watcher audits a forwarded response",
    "alert": "watcher alerts the client with a slash inclusion proof",
    "accepted": "client accepts the target state",
    "tx-slash-ok": "contract slashes the offending provider",
}


def narrate(name: str) -> None:
    config = load_scenario(builtin_scenario_path(name))
    metrics, log = run_scenario(config)
    print("=" * 68)
    print(f"scenario: {name}   (T_cp = {config.clients[0].challenge_period} ticks,"
          f" delta = {config.delta_ticks}, T_fin = {config.t_fin})")
    print("=" * 68)
    for line in log.lines:
        tick, actor, event, _ = line.split("\t")
        if event in INTERESTING:
            print(f"  tick {int(tick):>3}  {actor:>8}  {INTERESTING[event]}")
    client = metrics.clients["c0"]
    record = metrics.acceptances[0]
    print(f"  -> accepted after {record.accepted_tick - record.last_response_tick} ticks"
          f" of listening, {client.target_signature_verifications} signature(s) verified,")
    print(f"     {client.heavy_checks} heavy check(s), {metrics.slash_count} slash(es),"
          f" {client.rejected} restart(s), data correct: {record.correct}")
    print()


def main() -> None:
    narrate("honest")
    narrate("wrong_hash")
    print("The client paid nothing in either run; its cost is pure latency.")


if __name__ == "__main__":
    main()
