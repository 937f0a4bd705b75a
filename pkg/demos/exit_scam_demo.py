#!/usr/bin/env python3
"""Why signing false data and rushing the exit does not work.

A provider answers a query with a fabricated block hash and submits a
withdrawal request in the same breath.  Withdrawals only release stake at
the end of the *following* update epoch, and the update epoch is sized so
that every challenge period plus finality plus message delays fits inside
it, so the watcher's slash always lands while the stake is still held.

Usage:
    python3 demos/exit_scam_demo.py
"""

from lcsim.harness import Simulation
from lcsim.scenario import builtin_scenario_path, load_scenario


def main() -> None:
    config = load_scenario(builtin_scenario_path("exit_scam"))
    sim = Simulation(config)
    metrics, log = sim.run()
    b_u = config.update_epoch_blocks
    print("=" * 68)
    print(f"update epoch: {b_u} blocks  >=  maxT_cp {config.max_challenge_period}"
          f" + T_fin {config.t_fin} + 2*delta {2 * config.delta_ticks}")
    print("=" * 68)
    for line in log.lines:
        tick, actor, event, _ = line.split("\t")
        if event in ("query", "tx-withdraw-ok", "tx-slash-ok", "alert", "accepted"):
            what = {
                "query": "client queries providers",
                "tx-withdraw-ok": "scammer's withdrawal request accepted (status: leaving)",
                "tx-slash-ok": "SLASH: stake seized while still in escrow",
                "alert": "watcher alert reaches the client",
                "accepted": "client accepts via the honest fallback",
            }[event]
            epoch = int(tick) // b_u
            print(f"  tick {int(tick):>3} (epoch {epoch})  {what}")
    scammer = sim.contract.provider(sim.providers[0].public_key)
    withdraw_epoch = scammer.withdraw_requested_epoch
    print()
    print(f"withdrawal requested in epoch {withdraw_epoch}; release would come at the")
    print(f"end of epoch {withdraw_epoch + 1} = tick {(withdraw_epoch + 2) * b_u - 1},"
          f" but the slash landed at tick {metrics.slash_ticks[0]}.")
    print(f"scammer final status: {scammer.status.value}, stake left: {scammer.stake}")


if __name__ == "__main__":
    main()
