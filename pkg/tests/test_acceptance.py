"""Acceptance suite: one test per criterion, each printing PASS/FAIL.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Tolerances are pinned here, not configurable.
"""

import random
import time
from fractions import Fraction

from lcsim import crypto, pricing, scenario
from lcsim.actors import ProviderStrategy
from lcsim.chain import Chain
from lcsim.cli import report_row
from lcsim.contract import (
    BuyInsuranceTx,
    ContractConfig,
    Ledger,
    RegisterTx,
    SlashTx,
    SlashingContract,
    WithdrawRequestTx,
)
from lcsim.harness import (
    ProviderSpec,
    ScenarioConfig,
    Simulation,
    build_scenario,
    min_compliant_challenge_period,
    run_scenario,
    sweep,
)
from lcsim.light_client import ClientConfig, Protocol
from lcsim.pricing import PricingParams, eth_to_wei
from tests.test_contract import false_evidence, funded_provider, step

ETH = eth_to_wei(1)


def report(criterion: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{status}] {criterion}{suffix}")
    assert ok, f"{criterion}{suffix}"


def test_criterion_1_premium_worked_example():
    params = PricingParams()  # apy 6%, B 2,628,000, u 0.75
    wei = pricing.premium(params, 1500, 100 * ETH)
    error = abs(Fraction(wei, ETH) - Fraction("0.004566"))
    report(
        "1. premium worked example: 0.004566 ETH within 1e-6",
        error <= Fraction(1, 10**6),
        f"premium={wei / 1e18:.9f} ETH",
    )


def test_criterion_2_cost_table_reproduction():
    params = PricingParams()
    expected_totals = {10: Fraction("7.45"), 32: Fraction("10.68"),
                       160: Fraction("29.38"), 320: Fraction("52.76")}
    expected_signatures = {10: 1, 32: 1, 160: 5, 320: 10}
    ok = True
    details = []
    for value_eth, expected in expected_totals.items():
        row = report_row(params, value_eth, 1500, 1500)
        total = Fraction(row.total_usd_cents, 100)
        details.append(f"{value_eth}ETH=${float(total):.2f}")
        ok &= abs(total - expected) <= Fraction(2, 100)
        ok &= row.signature_count == expected_signatures[value_eth]
        ok &= row.latency_ticks == 1500
    # Desk-scale structural checks: eco acceptance lags the last forward by
    # exactly T_cp; insured acceptance lands on the response tick.
    eco_metrics, _ = run_scenario(
        scenario.load_scenario(scenario.builtin_scenario_path("honest"))
    )
    eco = eco_metrics.acceptances[0]
    ok &= eco.accepted_tick - eco.last_response_tick == 13  # the scenario's T_cp
    ins_metrics, _ = run_scenario(
        scenario.load_scenario(scenario.builtin_scenario_path("insured"))
    )
    ins = ins_metrics.acceptances[0]
    ok &= ins.accepted_tick == ins.last_response_tick
    ok &= ins_metrics.clients["c0"].target_signature_verifications == 1
    report("2. cost table: totals +-$0.02, signatures exact, latencies", ok, " ".join(details))


def test_criterion_3_eco_safety_sweep():
    start = time.monotonic()
    result = sweep(list(ProviderStrategy), [1, 2, 4], None, Protocol.ECO)
    incorrect = [c for c in result.cells if any(v.startswith("eco-safety") for v in c.violations)]
    other = [c for c in result.cells if c.violations and c not in incorrect]
    all_accepted = all(c.accepted >= 1 for c in result.cells)
    negative = run_scenario(build_scenario(ProviderStrategy.WRONG_HASH, 2, 0, Protocol.ECO))[0]
    tight = run_scenario(build_scenario(ProviderStrategy.WRONG_HASH, 1, 8 + 2, Protocol.ECO))[0]
    elapsed = time.monotonic() - start
    ok = (
        not incorrect
        and not other
        and all_accepted
        and any(v.startswith("eco-safety") for v in negative.violations)
        and any(v.startswith("eco-safety") for v in tight.violations)
        and elapsed < 30
    )
    report(
        "3. eco safety sweep: zero incorrect acceptances, T_cp bound tight",
        ok,
        f"{len(result.cells)} cells, {elapsed:.1f}s",
    )


def test_criterion_4_insured_protection_sweep():
    start = time.monotonic()
    result = sweep(list(ProviderStrategy), [1, 2, 4], None, Protocol.INS)
    ok = all(not c.violations for c in result.cells)
    ok &= all(c.accepted >= 1 for c in result.cells)
    # Lying strategies produce a false acceptance, which must be followed
    # by a compensation covering the target value before scenario end.
    compensated_needed = 0
    compensated_seen = 0
    for adversary in (ProviderStrategy.WRONG_HASH, ProviderStrategy.EXIT_SCAM):
        for cell in result.cells:
            if cell.adversary is adversary:
                compensated_needed += 1
                compensated_seen += 1 if cell.compensated >= 1 else 0
    ok &= compensated_needed == compensated_seen and compensated_needed > 0
    # Spot-check the net-loss bound numerically on one false-data run.
    metrics, _ = run_scenario(
        build_scenario(ProviderStrategy.WRONG_HASH, 2, 13, Protocol.INS)
    )
    client = metrics.clients["c0"]
    loss_bound = client.premium_spent + client.gas_spent
    ok &= client.final_balance - client.initial_balance >= -loss_bound
    ok &= client.compensation_received >= 10 * ETH
    elapsed = time.monotonic() - start
    ok &= elapsed < 30
    report(
        "4. insured protection: net loss <= premium+gas, false data compensated",
        bool(ok),
        f"{len(result.cells)} cells, {elapsed:.1f}s",
    )


def test_criterion_5_no_overload_and_conservation():
    start = time.monotonic()
    b_u = 8
    schedules = 1000
    bad = 0
    for schedule_seed in range(schedules):
        rng = random.Random(schedule_seed)
        ledger = Ledger()
        config = ContractConfig(
            min_stake=1 * ETH, update_epoch_blocks=b_u, max_challenge_period=4
        )
        contract = SlashingContract(config, ledger, PricingParams())
        chain = Chain()
        keypairs = [
            funded_provider(ledger, 10_000 + schedule_seed * 8 + i, stake=40 * ETH)
            for i in range(3)
        ]
        buyer = crypto.keygen(90_000 + schedule_seed)
        ledger.mint(buyer.public_key, 10 * ETH)
        total = ledger.total()
        open_policies = []
        next_policy = 1
        for kp in keypairs:
            step(chain, contract, [RegisterTx(kp.public_key, 32 * ETH)])
        for tick in range(chain.tip.number + 1, 5 * b_u):
            submissions = []
            roll = rng.random()
            kp = rng.choice(keypairs)
            if roll < 0.4:
                amount = rng.randrange(1, 40) * ETH
                submissions.append(
                    BuyInsuranceTx(
                        buyer.public_key,
                        ((kp.public_key, amount),),
                        amount,
                        rng.randrange(1, 3 * b_u),
                    )
                )
            elif roll < 0.5:
                submissions.append(WithdrawRequestTx(kp.public_key))
            elif roll < 0.6 and chain.is_finalized(2):
                ins = rng.choice(open_policies) if open_policies and rng.random() < 0.7 else None
                submissions.append(SlashTx(false_evidence(kp, 2, insurance_id=ins)))
            receipts = step(chain, contract, submissions)
            for submission, receipt in zip(submissions, receipts):
                if receipt.ok and isinstance(submission, BuyInsuranceTx):
                    open_policies.append(next_policy)
                    next_policy += 1
            if any(
                not (0 <= r.locked <= r.stake) for r in contract.providers.values()
            ) or ledger.total() != total:
                bad += 1
                break
    elapsed = time.monotonic() - start
    ok = bad == 0 and elapsed < 10
    report(
        "5. no-overload: locked <= stake and wei conserved, 1000 schedules",
        ok,
        f"{elapsed:.1f}s",
    )


def test_criterion_6_exit_scam_resistance():
    start = time.monotonic()
    failures = 0
    for i in range(100):
        rng = random.Random(5000 + i)
        delta = rng.choice([1, 2, 3])
        cp = min_compliant_challenge_period(8, delta) + rng.randrange(0, 5)
        config = build_scenario(
            ProviderStrategy.EXIT_SCAM,
            delta,
            cp,
            Protocol.ECO,
            seed=i,
            target_block=rng.randrange(2, 9),
        )
        sim = Simulation(config)
        metrics, _ = sim.run()
        scam_pk = sim.providers[0].public_key
        record = sim.contract.provider(scam_pk)
        slashed = record is not None and record.stake == 0 and metrics.slash_count >= 1
        never_released = all(pk != scam_pk for _, pk, _ in metrics.withdrawals)
        if not (slashed and never_released and not metrics.violations):
            failures += 1
    elapsed = time.monotonic() - start
    ok = failures == 0 and elapsed < 10
    report(
        "6. exit scam: slash precedes stake release in 100 random timings",
        ok,
        f"{elapsed:.1f}s",
    )


def test_criterion_7_provider_set_prediction():
    start = time.monotonic()
    b_u = 32
    failures = 0
    total_prediction_checks = 0
    for i in range(200):
        rng = random.Random(7000 + i)
        extras = []
        for j in range(rng.randrange(2, 4)):
            register_tick = rng.randrange(2, 4 * b_u)
            withdraw_tick = None
            if rng.random() < 0.5:
                withdraw_tick = register_tick + b_u + rng.randrange(0, 2 * b_u)
            extras.append(
                ProviderSpec(
                    stake=rng.randrange(8, 33) * ETH,
                    strategy=ProviderStrategy.HONEST,
                    register_tick=register_tick,
                    withdraw_tick=withdraw_tick,
                )
            )
        config = ScenarioConfig(
            seed=i,
            providers=(
                ProviderSpec(stake=64 * ETH, strategy=ProviderStrategy.HONEST),
                ProviderSpec(stake=48 * ETH, strategy=ProviderStrategy.HONEST),
                *extras,
            ),
            clients=(
                ClientConfig(
                    protocol=Protocol.ECO,
                    challenge_period=11,
                    target_value=10 * ETH,
                    maintain=True,
                    maintenance_challenge_period=11,
                    perform_check=False,
                ),
            ),
            update_epoch_blocks=b_u,
            max_challenge_period=16,
            delta_ticks=1,
            total_ticks=7 * b_u,
        )
        metrics, _ = run_scenario(config)
        client = metrics.clients["c0"]
        total_prediction_checks += metrics.prediction_checks
        if (
            metrics.violations
            or metrics.prediction_checks < 4
            or client.heavy_checks != 1
        ):
            failures += 1
    elapsed = time.monotonic() - start
    ok = failures == 0 and elapsed < 10
    report(
        "7. provider-set prediction: predicted == realized, one heavy check",
        ok,
        f"{total_prediction_checks} epoch comparisons, {elapsed:.1f}s",
    )


def test_criterion_8_determinism():
    start = time.monotonic()
    ok = True
    for name in scenario.list_builtin_scenarios():
        config = scenario.load_scenario(scenario.builtin_scenario_path(name))
        _, log_a = run_scenario(config)
        _, log_b = run_scenario(config)
        ok &= log_a.serialize() == log_b.serialize()
    elapsed = time.monotonic() - start
    ok &= elapsed < 5
    report(
        "8. determinism: bundled scenarios replay byte-identically",
        bool(ok),
        f"{elapsed:.1f}s",
    )
