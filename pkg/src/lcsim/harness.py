"""Deterministic discrete-event simulator.

One block per tick; synchronous network with per-edge delays drawn once
from the seeded generator in [1, delta]; fixed intra-tick ordering
(deliveries, actor handlers, transaction pool, block append, contract
boundary) so that identical (seed, config) pairs produce byte-identical
event logs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import codec, crypto, pricing
from .actors import (
    DataProviderActor,
    ProviderStrategy,
    Query,
    SignedResponse,
    WatcherActor,
)
from .chain import Chain, Transaction
from .contract import (
    ContractConfig,
    Ledger,
    Receipt,
    SlashingContract,
    SlashTx,
    Submission,
)
from .light_client import (
    Check,
    CheckKind,
    ClientConfig,
    LightClientActor,
    Protocol,
)
from .pricing import CoverageInputs, PricingParams, eth_to_wei, min_coverage_duration


class ConfigInvalidError(ValueError):
    """Scenario configuration violates a named constraint."""


# ---------------------------------------------------------------------------
# Messages
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QueryMsg:
    query: Query


@dataclass(frozen=True)
class ResponseMsg:
    response: SignedResponse


@dataclass(frozen=True)
class ForwardMsg:
    response: SignedResponse


@dataclass(frozen=True)
class ReceiptMsg:
    token: int
    receipt: Receipt


@dataclass(frozen=True)
class CompensationMsg:
    insurance_id: int
    amount: int


@dataclass(frozen=True)
class EventListRequest:
    epoch: int


@dataclass(frozen=True)
class EventListMsg:
    epoch: int
    events: tuple[tuple[int, bytes], ...]


# ---------------------------------------------------------------------------
# Scenario configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProviderSpec:
    stake: int
    strategy: ProviderStrategy
    register_tick: int = 1
    withdraw_tick: int | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    providers: tuple[ProviderSpec, ...]
    clients: tuple[ClientConfig, ...]
    slots_per_epoch: int = 4
    finality_depth_epochs: int = 2
    update_epoch_blocks: int = 32
    max_challenge_period: int = 16
    delta_ticks: int = 2
    total_ticks: int = 300
    min_stake: int = eth_to_wei(1)
    watcher_count: int = 1
    max_coverage_duration: int = 100_000
    pricing: PricingParams = field(default_factory=PricingParams)

    @property
    def t_fin(self) -> int:
        return self.slots_per_epoch * self.finality_depth_epochs

    def contract_config(self) -> ContractConfig:
        return ContractConfig(
            min_stake=self.min_stake,
            update_epoch_blocks=self.update_epoch_blocks,
            max_challenge_period=self.max_challenge_period,
            max_coverage_duration=self.max_coverage_duration,
        )

    def validate(self) -> None:
        if self.delta_ticks < 1:
            raise ConfigInvalidError("delta_ticks must be at least 1")
        if self.total_ticks < 1:
            raise ConfigInvalidError("total_ticks must be positive")
        if self.watcher_count < 1:
            raise ConfigInvalidError("watcher_count must be at least 1")
        try:
            self.contract_config().validate(self.t_fin, self.delta_ticks)
        except ValueError as exc:
            raise ConfigInvalidError(str(exc)) from exc
        for i, client in enumerate(self.clients):
            if client.challenge_period > self.max_challenge_period:
                raise ConfigInvalidError(
                    f"client {i}: challenge_period exceeds max_challenge_period"
                )
            if client.target_block < 1:
                raise ConfigInvalidError(f"client {i}: target_block must be at least 1")
            if client.protocol is Protocol.INS:
                for cp in client.coverage_inputs.challenge_periods:
                    if cp > self.max_challenge_period:
                        raise ConfigInvalidError(
                            f"client {i}: insured challenge period exceeds "
                            "max_challenge_period"
                        )
        for i, spec in enumerate(self.providers):
            if spec.stake < self.min_stake:
                raise ConfigInvalidError(f"provider {i}: stake below min_stake")


# ---------------------------------------------------------------------------
# Metrics and event log
# ---------------------------------------------------------------------------


@dataclass
class ClientMetrics:
    initial_balance: int = 0
    final_balance: int = 0
    accepted: int = 0
    rejected: int = 0
    compensated: int = 0
    target_signature_verifications: int = 0
    signature_verifications_total: int = 0
    heavy_checks: int = 0
    premium_spent: int = 0
    gas_spent: int = 0
    compensation_received: int = 0
    ticks_to_acceptance: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(
            initial_balance=self.initial_balance,
            final_balance=self.final_balance,
            accepted=self.accepted,
            rejected=self.rejected,
            compensated=self.compensated,
            target_signature_verifications=self.target_signature_verifications,
            signature_verifications_total=self.signature_verifications_total,
            heavy_checks=self.heavy_checks,
            premium_spent=self.premium_spent,
            gas_spent=self.gas_spent,
            compensation_received=self.compensation_received,
            ticks_to_acceptance=list(self.ticks_to_acceptance),
        )


@dataclass
class AcceptanceRecord:
    client: str
    kind: CheckKind
    value: int
    protocol: Protocol
    accepted_tick: int
    query_tick: int
    first_response_tick: int | None
    last_response_tick: int | None
    insurance_id: int | None
    responses: list[tuple[bytes, int, bytes]]  # (provider_pk, n_B, signed h_B)
    correct: bool | None = None


@dataclass
class Metrics:
    clients: dict[str, ClientMetrics] = field(default_factory=dict)
    slash_ticks: list[int] = field(default_factory=list)
    withdrawals: list[tuple[int, bytes, int]] = field(default_factory=list)
    acceptances: list[AcceptanceRecord] = field(default_factory=list)
    utilization: list[Fraction] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)
    prediction_checks: int = 0
    conservation_total: int = 0

    def client(self, name: str) -> ClientMetrics:
        if name not in self.clients:
            self.clients[name] = ClientMetrics()
        return self.clients[name]

    @property
    def slash_count(self) -> int:
        return len(self.slash_ticks)

    def incorrect_acceptances(self) -> list[AcceptanceRecord]:
        return [r for r in self.acceptances if r.correct is False]

    def to_dict(self) -> dict:
        return dict(
            clients={name: m.to_dict() for name, m in self.clients.items()},
            slash_ticks=list(self.slash_ticks),
            slash_count=self.slash_count,
            withdrawals=[(t, pk.hex(), a) for t, pk, a in self.withdrawals],
            violations=list(self.violations),
            prediction_checks=self.prediction_checks,
            mean_utilization=(
                str(sum(self.utilization) / len(self.utilization))
                if self.utilization
                else None
            ),
            incorrect_acceptances=len(self.incorrect_acceptances()),
            acceptances=[
                dict(
                    client=r.client,
                    accepted_tick=r.accepted_tick,
                    query_tick=r.query_tick,
                    correct=r.correct,
                )
                for r in self.acceptances
            ],
        )


class EventLog:
    """Append-only, line-serializable record of everything observable."""

    def __init__(self) -> None:
        self.lines: list[str] = []

    def add(self, tick: int, actor: str, event_type: str, payload: bytes = b"") -> None:
        self.lines.append(
            f"{tick}\t{actor}\t{event_type}\t{crypto.digest(payload).hex()[:16]}"
        )

    def serialize(self) -> bytes:
        return ("\n".join(self.lines) + "\n").encode()


# ---------------------------------------------------------------------------
# Heavy-check oracle
# ---------------------------------------------------------------------------


class HeavyCheckOracle:
    """Trusted ground-truth reads with an invocation counter as the cost
    model; used only at bootstrap and in the dispute path."""

    def __init__(self, chain: Chain, contract: SlashingContract, metrics: Metrics) -> None:
        self._chain = chain
        self._contract = contract
        self._metrics = metrics

    def provider_set(self, client: str) -> tuple[int, list[tuple[bytes, int, int]]]:
        self._metrics.client(client).heavy_checks += 1
        epoch = self._contract.current_epoch
        return epoch, self._contract.active_set(epoch)

    def verify_slash(
        self, client: str, block_number: int, record_tx_id: bytes, proof
    ) -> bool:
        self._metrics.client(client).heavy_checks += 1
        if block_number > self._chain.tip.number:
            return False
        if not self._chain.is_finalized(block_number):
            return False
        block = self._chain.block_at(block_number)
        if not crypto.merkle_verify(block.transactions_root, record_tx_id, proof):
            return False
        for tx in block.transactions:
            if tx.id == record_tx_id:
                return codec.record_tag(tx.payload) == codec.TAG_SLASH_RECORD
        return False


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

CONTRACT_ENDPOINT = "contract"


class SimContext:
    """What actors see: messaging, the pool, ground truth, metrics."""

    def __init__(self, sim: "Simulation") -> None:
        self._sim = sim
        self.now = 0

    @property
    def chain(self) -> Chain:
        return self._sim.chain

    @property
    def contract(self) -> SlashingContract:
        return self._sim.contract

    @property
    def oracle(self) -> HeavyCheckOracle:
        return self._sim.oracle

    @property
    def metrics(self) -> Metrics:
        return self._sim.metrics

    @property
    def watcher_names(self) -> list[str]:
        return self._sim.watcher_names

    def send(self, src: str, dst: str, payload) -> None:
        self._sim.enqueue(src, dst, payload)

    def send_to_provider(self, src: str, pk: bytes, payload) -> None:
        self._sim.enqueue(src, self._sim.provider_names[pk], payload)

    def forward(self, src: str, watcher: str, response: SignedResponse) -> None:
        self._sim.enqueue(src, watcher, ForwardMsg(response=response))

    def submit_tx(self, src: str, submission: Submission) -> int:
        return self._sim.submit(src, submission)

    def log(self, actor: str, event_type: str, payload: bytes = b"") -> None:
        self._sim.log.add(self.now, actor, event_type, payload)

    def target_state_hash(self, client: str) -> bytes:
        return self._sim.target_tx_ids[client]

    def record_acceptance(self, client: str, check: Check) -> None:
        self._sim.record_acceptance(client, check)


def _derive_key_seed(seed: int, name: str) -> int:
    raw = crypto.digest(b"actor-key", seed.to_bytes(8, "big", signed=False), name.encode())
    return int.from_bytes(raw[:8], "big")


class Simulation:
    def __init__(self, config: ScenarioConfig) -> None:
        config.validate()
        self.config = config
        self.metrics = Metrics()
        self.log = EventLog()
        self.chain = Chain(
            slots_per_epoch=config.slots_per_epoch,
            finality_depth_epochs=config.finality_depth_epochs,
        )
        self.ledger = Ledger()
        self.contract = SlashingContract(config.contract_config(), self.ledger, config.pricing)
        self.oracle = HeavyCheckOracle(self.chain, self.contract, self.metrics)
        self.ctx = SimContext(self)

        rng = random.Random(config.seed)
        self.providers: list[DataProviderActor] = []
        self.provider_names: dict[bytes, str] = {}
        for i, spec in enumerate(config.providers):
            name = f"p{i}"
            keypair = crypto.keygen(_derive_key_seed(config.seed, name))
            actor = DataProviderActor(
                name=name,
                keypair=keypair,
                stake=spec.stake,
                strategy=spec.strategy,
                register_tick=spec.register_tick,
                withdraw_tick=spec.withdraw_tick,
            )
            self.providers.append(actor)
            self.provider_names[keypair.public_key] = name
            self.ledger.mint(keypair.public_key, spec.stake)

        self.watchers = [WatcherActor(f"w{i}") for i in range(config.watcher_count)]
        self.watcher_names = [w.name for w in self.watchers]

        self.clients: list[LightClientActor] = []
        self.client_by_pk: dict[bytes, str] = {}
        self.target_tx_ids: dict[str, bytes] = {}
        self._target_payloads: dict[int, list[Transaction]] = {}
        for i, client_config in enumerate(config.clients):
            name = f"c{i}"
            keypair = crypto.keygen(_derive_key_seed(config.seed, name))
            if client_config.start_tick is None:
                client_config = _with_start(client_config, 2 * config.update_epoch_blocks + 1)
            actor = LightClientActor(
                name=name,
                keypair=keypair,
                config=client_config,
                update_epoch_blocks=config.update_epoch_blocks,
                delta_ticks=config.delta_ticks,
                t_fin=config.t_fin,
            )
            self.clients.append(actor)
            self.client_by_pk[keypair.public_key] = name
            self.ledger.mint(keypair.public_key, client_config.initial_balance)
            self.metrics.client(name).initial_balance = client_config.initial_balance
            payload = b"target-state:" + name.encode() + config.seed.to_bytes(8, "big")
            tx = Transaction.create(payload, value=client_config.target_value)
            self.target_tx_ids[name] = tx.id
            self._target_payloads.setdefault(client_config.target_block, []).append(tx)

        self.actors = [*self.providers, *self.watchers, *self.clients]
        self._actor_by_name = {a.name: a for a in self.actors}

        names = sorted([a.name for a in self.actors] + [CONTRACT_ENDPOINT])
        self._delays = {
            (a, b): rng.randint(1, config.delta_ticks)
            for a in names
            for b in names
            if a != b
        }
        self._mailbox: dict[int, list[tuple[str, str, object]]] = {}
        self._pool: list[tuple[int, str, Submission]] = []
        self._next_token = 1
        self.metrics.conservation_total = self.ledger.total()
        self._conservation_broken = False

    # -- plumbing -----------------------------------------------------------

    def enqueue(self, src: str, dst: str, payload) -> None:
        delay = self._delays[(src, dst)]
        deliver_at = self.ctx.now + delay
        if delay > self.config.delta_ticks:
            self.metrics.violations.append(f"delivery-bound:{src}->{dst}")
        self._mailbox.setdefault(deliver_at, []).append((src, dst, payload))

    def submit(self, src: str, submission: Submission) -> int:
        token = self._next_token
        self._next_token += 1
        self._pool.append((token, src, submission))
        return token

    def record_acceptance(self, client: str, check: Check) -> None:
        actor = self._actor_by_name[client]
        self.metrics.acceptances.append(
            AcceptanceRecord(
                client=client,
                kind=check.kind,
                value=check.value,
                protocol=actor.config.protocol,
                accepted_tick=check.accepted_tick,
                query_tick=check.query_tick,
                first_response_tick=check.first_response_tick,
                last_response_tick=check.last_response_tick,
                insurance_id=check.insurance_id,
                responses=[
                    (pk, r.block_number, r.block_hash)
                    for pk, r in sorted(check.responses.items())
                ],
            )
        )

    def _wallet_key(self, actor_name: str) -> object:
        actor = self._actor_by_name[actor_name]
        if isinstance(actor, WatcherActor):
            return actor.name
        return actor.keypair.public_key

    # -- main loop ----------------------------------------------------------

    def run(self) -> tuple[Metrics, EventLog]:
        for tick in range(1, self.config.total_ticks + 1):
            self.ctx.now = tick
            for src, dst, payload in self._mailbox.pop(tick, []):
                self._actor_by_name[dst].handle_message(src, payload, self.ctx)
            for actor in self.actors:
                actor.on_tick(tick, self.ctx)
            block_txs = self._execute_pool(tick)
            block_txs.extend(self._target_payloads.pop(tick, []))
            block = self.chain.append_block(block_txs)
            self.log.add(tick, "chain", "block", block.hash)
            for effect in self.contract.process_block_boundary(block.number):
                self.log.add(tick, CONTRACT_ENDPOINT, effect[0], repr(effect).encode())
                if effect[0] == "withdrawn":
                    self.metrics.withdrawals.append((tick, effect[1], effect[2]))
            self._sample(tick)
        self._finalize()
        return self.metrics, self.log

    def _execute_pool(self, tick: int) -> list[Transaction]:
        pool, self._pool = self._pool, []
        block_txs: list[Transaction] = []
        for token, src, submission in pool:
            slash_before = len(self.contract.slash_events)
            records, receipt = self.contract.execute_transaction(
                submission, self.chain, tick, submitter=self._wallet_key(src)
            )
            for payload in records:
                block_txs.append(Transaction.create(payload))
            self.log.add(
                tick,
                CONTRACT_ENDPOINT,
                f"tx-{receipt.kind}-{'ok' if receipt.ok else receipt.reason}",
                records[0] if records else b"",
            )
            self.enqueue(CONTRACT_ENDPOINT, src, ReceiptMsg(token=token, receipt=receipt))
            if isinstance(submission, SlashTx) and receipt.ok:
                self.metrics.slash_ticks.append(tick)
                event = self.contract.slash_events[-1]
                assert len(self.contract.slash_events) == slash_before + 1
                if event.compensation > 0:
                    buyer = self.client_by_pk.get(
                        self.contract.policies[event.insurance_id].buyer_pk
                    )
                    if buyer is not None:
                        self.enqueue(
                            CONTRACT_ENDPOINT,
                            buyer,
                            CompensationMsg(
                                insurance_id=event.insurance_id,
                                amount=event.compensation,
                            ),
                        )
        return block_txs

    def _sample(self, tick: int) -> None:
        locked, stake = self.contract.utilization_sample()
        if stake > 0:
            self.metrics.utilization.append(Fraction(locked, stake))
        if self.ledger.total() != self.metrics.conservation_total and not self._conservation_broken:
            self._conservation_broken = True
            self.metrics.violations.append(f"conservation:tick{tick}")
        if tick % self.config.update_epoch_blocks == 0:
            self._check_predictions(tick // self.config.update_epoch_blocks)

    def _check_predictions(self, epoch: int) -> None:
        for client in self.clients:
            if not client.config.maintain or not client.bootstrapped:
                continue
            if client._offline_at(self.ctx.now):
                continue
            if not client.bootstrap_epochs or epoch <= min(client.bootstrap_epochs):
                continue
            if epoch in client.bootstrap_epochs:
                continue
            self.metrics.prediction_checks += 1
            expected = {
                (pk, stake) for pk, stake, _ in self.contract.active_set(epoch)
            }
            held = client.set_for_epoch(epoch)
            got = {(pk, stake) for pk, stake in held.items()} if held is not None else None
            if got != expected:
                self.metrics.violations.append(
                    f"prediction:{client.name}@epoch{epoch}"
                )

    def _finalize(self) -> None:
        for record in self.metrics.acceptances:
            record.correct = all(
                number <= self.chain.tip.number
                and self.chain.block_at(number).hash == block_hash
                for _, number, block_hash in record.responses
            )
            if record.correct:
                continue
            if record.protocol is Protocol.ECO:
                self.metrics.violations.append(f"eco-safety:{record.client}")
            else:
                compensated = self.metrics.client(record.client).compensation_received
                if compensated < record.value:
                    self.metrics.violations.append(f"ins-protection:{record.client}")
        for client in self.clients:
            m = self.metrics.client(client.name)
            m.final_balance = self.ledger.balance(client.public_key)
            if m.final_balance - m.initial_balance < -(m.premium_spent + m.gas_spent):
                self.metrics.violations.append(f"net-loss-bound:{client.name}")


def _with_start(config: ClientConfig, start_tick: int) -> ClientConfig:
    from dataclasses import replace

    return replace(config, start_tick=start_tick)


def run_scenario(config: ScenarioConfig) -> tuple[Metrics, EventLog]:
    """Run one scenario to completion; fully deterministic given the seed."""
    return Simulation(config).run()


# ---------------------------------------------------------------------------
# Scenario templates and the safety sweep
# ---------------------------------------------------------------------------


def min_compliant_challenge_period(t_fin: int, delta: int) -> int:
    """Smallest T_cp for which a watcher alert always beats acceptance."""
    return t_fin + 2 * delta + 1


def build_scenario(
    adversary: ProviderStrategy,
    delta: int,
    challenge_period: int,
    protocol: Protocol,
    seed: int = 7,
    value_eth: int = 10,
    adversary_stake_eth: int = 64,
    honest_stake_eth: int = 32,
    slots_per_epoch: int = 4,
    finality_depth_epochs: int = 2,
    target_block: int = 2,
) -> ScenarioConfig:
    """Two-provider template: the strategy under test holds the larger
    stake so greedy selection exercises it first; an honest provider backs
    liveness."""
    t_fin = slots_per_epoch * finality_depth_epochs
    max_cp = max(challenge_period, min_compliant_challenge_period(t_fin, delta))
    update_epoch_blocks = max_cp + t_fin + 2 * delta + 4
    params = PricingParams()
    value = eth_to_wei(value_eth)
    coverage = CoverageInputs(
        t_fin=t_fin,
        challenge_periods=(challenge_period, challenge_period),
        delta_comm=8 * delta + 4,
        delta_comp=2,
    )
    start_tick = 2 * update_epoch_blocks + 1
    if protocol is Protocol.ECO:
        client = ClientConfig(
            protocol=Protocol.ECO,
            challenge_period=challenge_period,
            target_value=value,
            target_block=target_block,
            start_tick=start_tick,
        )
        tail = 3 * (challenge_period + t_fin + 6 * delta + 6)
    else:
        t_cov = min_coverage_duration(coverage)
        cost = pricing.premium(params, t_cov, value) + params.gas_cost_wei
        client = ClientConfig(
            protocol=Protocol.INS,
            challenge_period=challenge_period,
            target_value=value,
            target_block=target_block,
            start_tick=start_tick,
            coverage_inputs=coverage,
            initial_balance=4 * cost + eth_to_wei(1),
        )
        tail = 3 * (2 * challenge_period + 2 * t_fin + 10 * delta + 10)
    return ScenarioConfig(
        seed=seed,
        providers=(
            ProviderSpec(stake=eth_to_wei(adversary_stake_eth), strategy=adversary),
            ProviderSpec(stake=eth_to_wei(honest_stake_eth), strategy=ProviderStrategy.HONEST),
        ),
        clients=(client,),
        slots_per_epoch=slots_per_epoch,
        finality_depth_epochs=finality_depth_epochs,
        update_epoch_blocks=update_epoch_blocks,
        max_challenge_period=max_cp,
        delta_ticks=delta,
        total_ticks=start_tick + tail,
        pricing=params,
    )


@dataclass(frozen=True)
class SweepCell:
    adversary: ProviderStrategy
    delta: int
    challenge_period: int
    compliant: bool
    violations: tuple[str, ...]
    slash_count: int
    accepted: int
    compensated: int


@dataclass
class SweepReport:
    cells: list[SweepCell] = field(default_factory=list)

    def violations(self) -> list[SweepCell]:
        return [cell for cell in self.cells if cell.violations]

    def compliant_violations(self) -> list[SweepCell]:
        return [cell for cell in self.cells if cell.compliant and cell.violations]


def sweep(
    strategies: list[ProviderStrategy],
    deltas: list[int],
    challenge_periods: dict[int, list[int]] | None,
    protocol: Protocol,
    seed: int = 7,
) -> SweepReport:
    """Exhaustive strategy x delta x T_cp execution.

    `challenge_periods` maps each delta to the T_cp values to run (the
    compliance threshold depends on delta); None means "the minimal
    compliant value and one above it".
    """
    report = SweepReport()
    t_fin = 8  # desk-scale chain: 4 slots/epoch, depth 2
    for adversary in strategies:
        for delta in deltas:
            cps = (
                challenge_periods[delta]
                if challenge_periods is not None
                else [
                    min_compliant_challenge_period(t_fin, delta),
                    min_compliant_challenge_period(t_fin, delta) + 5,
                ]
            )
            for cp in cps:
                config = build_scenario(adversary, delta, cp, protocol, seed=seed)
                metrics, _ = run_scenario(config)
                report.cells.append(
                    SweepCell(
                        adversary=adversary,
                        delta=delta,
                        challenge_period=cp,
                        compliant=cp >= min_compliant_challenge_period(t_fin, delta),
                        violations=tuple(metrics.violations),
                        slash_count=metrics.slash_count,
                        accepted=sum(m.accepted for m in metrics.clients.values()),
                        compensated=sum(m.compensated for m in metrics.clients.values()),
                    )
                )
    return report
