"""Light-client state machines: economic (wait-based) and insured modes.

The economic client queries providers whose cumulative stake backs the
target value, forwards the signed responses to watchers, and accepts only
after its challenge period passes alert-free.  The insured client first
buys stake-backed coverage, confirms the purchase transaction via the
economic path, then accepts target data the moment signatures verify,
keeping an ear open for compensation.

A client that stays online never repeats the bootstrap heavy check: it
predicts the epoch e+1 provider set by applying the verified register and
withdraw records of epoch e-1 to its epoch e set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import codec, crypto
from .actors import Alert, Query, SignedResponse
from .contract import BuyInsuranceTx
from .crypto import KeyPair
from .pricing import CoverageInputs, min_coverage_duration


class NoEligibleProvidersError(ValueError):
    """Available backing cannot cover the requested value."""


class Protocol(enum.Enum):
    ECO = "eco"
    INS = "ins"


class SelectionPolicy(enum.Enum):
    FEWEST_PROVIDERS = "fewest_providers"


class ClientPhase(enum.Enum):
    BOOTSTRAPPING = "bootstrapping"
    AWAITING_INSURANCE = "awaiting_insurance"
    QUERYING = "querying"
    LISTENING = "listening"
    ACCEPTED = "accepted"
    REJECTED_RESTARTING = "rejected_restarting"


def select_providers(
    providers: list[tuple[bytes, int]], required_backing: int
) -> list[tuple[bytes, int]]:
    """Greedy fewest-providers selection.

    Capacities descend (pk as tie-break), the last allocation is trimmed
    to the exact remainder.  Raises NoEligibleProvidersError when the
    total available backing is short.
    """
    if required_backing <= 0:
        raise ValueError("required_backing must be positive")
    ordered = sorted(providers, key=lambda item: (-item[1], item[0]))
    chosen: list[tuple[bytes, int]] = []
    remaining = required_backing
    for pk, capacity in ordered:
        if capacity <= 0:
            continue
        take = min(capacity, remaining)
        chosen.append((pk, take))
        remaining -= take
        if remaining == 0:
            return chosen
    raise NoEligibleProvidersError(
        f"available backing short by {remaining} wei of {required_backing}"
    )


def required_coverage(checks: list[tuple[int, int, int]]) -> int:
    """Coverage needed for checks given as (start, end, value) windows.

    Overlapping challenge windows must be covered by the sum of their
    values, independent ones only by the maximum, so the answer is the
    peak of the sum of active values over time.
    """
    deltas: dict[int, int] = {}
    for start, end, value in checks:
        if end < start:
            raise ValueError("check window ends before it starts")
        deltas[start] = deltas.get(start, 0) + value
        deltas[end + 1] = deltas.get(end + 1, 0) - value
    peak = 0
    running = 0
    for t in sorted(deltas):
        running += deltas[t]
        peak = max(peak, running)
    return peak


def apply_epoch_events(
    provider_set: dict[bytes, int], events: list[tuple[int, bytes]]
) -> dict[bytes, int]:
    """Fold verified register/withdraw records into a provider set."""
    out = dict(provider_set)
    for _, payload in sorted(events, key=lambda item: item[0]):
        tag = codec.record_tag(payload)
        if tag == codec.TAG_REGISTER:
            pk, stake = codec.decode_register_record(payload)
            out[pk] = stake
        elif tag == codec.TAG_WITHDRAW_REQUEST:
            out.pop(codec.decode_withdraw_record(payload), None)
    return out


@dataclass(frozen=True)
class ClientConfig:
    protocol: Protocol
    challenge_period: int
    target_value: int
    target_block: int = 2
    start_tick: int | None = None
    coverage_inputs: CoverageInputs | None = None
    selection: SelectionPolicy = SelectionPolicy.FEWEST_PROVIDERS
    initial_balance: int = 10**18
    maintain: bool = False
    maintenance_challenge_period: int | None = None
    offline: tuple[int, int] | None = None
    perform_check: bool = True

    def __post_init__(self) -> None:
        if self.protocol is Protocol.INS and self.coverage_inputs is None:
            raise ValueError("insured clients need coverage_inputs")

    @property
    def insurance_challenge_period(self) -> int:
        assert self.coverage_inputs is not None
        return self.coverage_inputs.challenge_periods[0]


class CheckKind(enum.Enum):
    TARGET = "target"
    INSURANCE_INCLUSION = "insurance_inclusion"
    EPOCH_EVENT = "epoch_event"


@dataclass
class Check:
    """One inclusion check: query, forward, listen, accept."""

    kind: CheckKind
    block_number: int
    state_hash: bytes
    challenge_period: int
    value: int
    insurance_id: int | None = None
    immediate_accept: bool = False
    event_payload: bytes | None = None
    selected: list[tuple[bytes, int]] = field(default_factory=list)
    responses: dict[bytes, SignedResponse] = field(default_factory=dict)
    query_tick: int | None = None
    last_forward_tick: int | None = None
    accepted_tick: int | None = None
    first_response_tick: int | None = None
    last_response_tick: int | None = None
    restarts: int = 0
    done: bool = False
    outcome: str | None = None


def verify_response(check: Check, response: SignedResponse) -> bool:
    """Everything a light client can check locally: echo fields, the
    provider signature, header consistency, and the inclusion proof."""
    if response.block_number != check.block_number:
        return False
    if response.state_hash != check.state_hash:
        return False
    if response.insurance_id != check.insurance_id:
        return False
    if not crypto.verify(response.provider_pk, response.payload(), response.signature):
        return False
    recomputed = crypto.digest(
        b"lcsim-block-v1",
        response.block_number.to_bytes(8, "big"),
        response.parent_hash,
        response.transactions_root,
    )
    if recomputed != response.block_hash:
        return False
    return crypto.merkle_verify(
        response.transactions_root, response.state_hash, response.inclusion_proof
    )


class LightClientActor:
    """Deterministic client state machine driven by simulation ticks."""

    def __init__(
        self,
        name: str,
        keypair: KeyPair,
        config: ClientConfig,
        update_epoch_blocks: int,
        delta_ticks: int,
        t_fin: int,
    ) -> None:
        self.name = name
        self.keypair = keypair
        self.config = config
        self.update_epoch_blocks = update_epoch_blocks
        self.delta = delta_ticks
        self.t_fin = t_fin
        self.phase = ClientPhase.BOOTSTRAPPING
        self.bootstrapped = False
        self.bootstrap_epochs: list[int] = []
        self.sets: dict[int, dict[bytes, int]] = {}
        self.attributable: dict[bytes, int] = {}
        self.current_epoch_held: int | None = None
        self.dropped: set[bytes] = set()
        self.checks: list[Check] = []
        self.alerts_seen: list[Alert] = []
        self.late_alerts: int = 0
        self.compensations: list[tuple[int, int]] = []
        self._pending_purchase: int | None = None
        self._purchase_attempts: int = 0
        self._policy: tuple[int, int, bytes] | None = None  # (ins_id, block, tx_id)
        self._policy_allocations: list[tuple[bytes, int]] = []
        self._last_allocations: list[tuple[bytes, int]] = []
        self._insurance_confirmed = False
        self._target_started = False
        self._maintenance: dict[int, dict] = {}
        self._rebootstrap_count = 0

    # -- helpers ------------------------------------------------------------

    @property
    def public_key(self) -> bytes:
        return self.keypair.public_key

    def epoch_of_tick(self, tick: int) -> int:
        # Epoch of the newest block a client can have observed at this
        # tick (block tick-1), which keeps its clock aligned with the
        # contract's at every instant.
        return max(0, tick - 1) // self.update_epoch_blocks

    def _offline_at(self, tick: int) -> bool:
        window = self.config.offline
        return window is not None and window[0] <= tick <= window[1]

    def current_set(self) -> dict[bytes, int]:
        if self.current_epoch_held is None:
            return {}
        return self.sets.get(self.current_epoch_held, {})

    def set_for_epoch(self, epoch: int) -> dict[bytes, int] | None:
        return self.sets.get(epoch)

    def candidates(self, use_attributable: bool) -> list[tuple[bytes, int]]:
        out = []
        for pk, stake in self.current_set().items():
            if pk in self.dropped:
                continue
            capacity = self.attributable.get(pk, stake) if use_attributable else stake
            out.append((pk, capacity))
        return out

    def persistent_state_bytes(self) -> bytes:
        """Canonical encoding of what survives between checks."""
        parts = []
        for pk in sorted(self.current_set()):
            stake = self.current_set()[pk]
            parts.append(
                codec.encode_bytes(pk)
                + codec.encode_u128(stake)
                + codec.encode_u128(self.attributable.get(pk, stake))
            )
        return b"".join(parts)

    # -- bootstrap ------------------------------------------------------------

    def bootstrap(self, ctx, now: int) -> None:
        epoch, snapshot = ctx.oracle.provider_set(self.name)
        held = {pk: stake for pk, stake, _ in snapshot}
        self.sets[epoch] = held
        self.attributable = {pk: attributable for pk, _, attributable in snapshot}
        self.current_epoch_held = epoch
        self.bootstrapped = True
        self.bootstrap_epochs.append(epoch)
        ctx.log(self.name, "bootstrap", codec.encode_u64(epoch))

    # -- tick driver ----------------------------------------------------------

    def on_tick(self, now: int, ctx) -> None:
        if self._offline_at(now):
            return
        start = self.config.start_tick
        if start is None or now < start:
            return
        if not self.bootstrapped:
            self.bootstrap(ctx, now)
            if self.config.maintain:
                self._schedule_maintenance(now)
        self._advance_epoch(now, ctx)
        if self.config.maintain:
            self._run_maintenance(now, ctx)
        self._drive_protocol(now, ctx)
        self._drive_checks(now, ctx)

    def _advance_epoch(self, now: int, ctx) -> None:
        epoch = self.epoch_of_tick(now)
        if self.current_epoch_held is None or epoch <= self.current_epoch_held:
            return
        if epoch in self.sets:
            self.current_epoch_held = epoch
        elif epoch > (self.current_epoch_held or 0) and self._went_dark(epoch):
            # Offline across at least one full update epoch: prediction
            # chain broken, fall back to a fresh heavy check.
            self.bootstrap(ctx, now)
            self._rebootstrap_count += 1
            if self.config.maintain:
                self._schedule_maintenance(now)

    def _went_dark(self, epoch: int) -> bool:
        return self.config.maintain and epoch not in self.sets

    # -- main protocol ----------------------------------------------------------

    def _drive_protocol(self, now: int, ctx) -> None:
        if not self.config.perform_check or self._target_started:
            return
        if self.config.protocol is Protocol.ECO:
            self._target_started = True
            self.phase = ClientPhase.QUERYING
            self._start_check(
                Check(
                    kind=CheckKind.TARGET,
                    block_number=self.config.target_block,
                    state_hash=ctx.target_state_hash(self.name),
                    challenge_period=self.config.challenge_period,
                    value=self.config.target_value,
                ),
                now,
                ctx,
            )
            return
        # Insured path: buy coverage first.
        if self._policy is None:
            stuck = self.phase is ClientPhase.REJECTED_RESTARTING
            if self._pending_purchase is None and not stuck:
                self.phase = ClientPhase.AWAITING_INSURANCE
                try:
                    self._submit_purchase(now, ctx)
                except NoEligibleProvidersError:
                    self.phase = ClientPhase.REJECTED_RESTARTING
                    ctx.metrics.client(self.name).rejected += 1
            return
        if not self._insurance_confirmed:
            return
        if any(pk in self.dropped for pk, _ in self._policy_allocations):
            self._rebuy_policy(now, ctx)
            return
        self._target_started = True
        self.phase = ClientPhase.QUERYING
        self._start_check(
            Check(
                kind=CheckKind.TARGET,
                block_number=self.config.target_block,
                state_hash=ctx.target_state_hash(self.name),
                challenge_period=self.config.challenge_period,
                value=self.config.target_value,
                insurance_id=self._policy[0],
                immediate_accept=True,
            ),
            now,
            ctx,
        )

    def _submit_purchase(self, now: int, ctx) -> None:
        assert self.config.coverage_inputs is not None
        duration = min_coverage_duration(self.config.coverage_inputs)
        try:
            allocations = select_providers(self.candidates(True), self.config.target_value)
        except NoEligibleProvidersError:
            if self._purchase_attempts == 0:
                raise
            # Stale attributable data; refresh it and retry once more.
            self.bootstrap(ctx, now)
            allocations = select_providers(self.candidates(True), self.config.target_value)
        self._purchase_attempts += 1
        self._last_allocations = allocations
        token = ctx.submit_tx(
            self.name,
            BuyInsuranceTx(
                buyer_pk=self.public_key,
                allocations=tuple(allocations),
                coverage_value=self.config.target_value,
                duration=duration,
            ),
        )
        self._pending_purchase = token
        ctx.log(self.name, "buy_insurance", codec.encode_u64(token))

    def _start_insurance_check(self, now: int, ctx) -> None:
        assert self._policy is not None
        _, record_block, record_tx_id = self._policy
        check = Check(
            kind=CheckKind.INSURANCE_INCLUSION,
            block_number=record_block,
            state_hash=record_tx_id,
            challenge_period=self.config.insurance_challenge_period,
            value=self.config.target_value,
        )
        check.query_tick = max(now, record_block + self.t_fin + 1)
        self.checks.append(check)

    # -- checks ------------------------------------------------------------------

    def _start_check(self, check: Check, now: int, ctx) -> None:
        check.query_tick = now
        self.checks.append(check)

    def _select_for_check(self, check: Check) -> list[tuple[bytes, int]]:
        if check.kind is CheckKind.TARGET and self.config.protocol is Protocol.INS:
            # The allocated providers back the policy; the insured query
            # goes exactly to them.
            assert self._policy is not None
            return [
                (pk, amount)
                for pk, amount in self._policy_allocations
                if pk not in self.dropped
            ]
        return select_providers(self.candidates(False), check.value)

    def _issue_queries(self, check: Check, now: int, ctx) -> None:
        check.selected = self._select_for_check(check)
        if not check.selected:
            raise NoEligibleProvidersError("no providers left for this check")
        check.responses.clear()
        check.last_forward_tick = None
        check.query_tick = now
        from .harness import QueryMsg

        for pk, _ in check.selected:
            ctx.send_to_provider(self.name, pk, QueryMsg(query=self._make_query(check)))
        ctx.log(self.name, "query", check.state_hash)

    def _make_query(self, check: Check) -> Query:
        if check.insurance_id is None:
            return Query(block_number=check.block_number, state_hash=check.state_hash)
        payload = codec.query_payload(
            check.block_number, check.state_hash, check.insurance_id
        )
        return Query(
            block_number=check.block_number,
            state_hash=check.state_hash,
            insurance_id=check.insurance_id,
            client_pk=self.public_key,
            client_signature=crypto.sign(self.keypair.secret_key, payload),
        )

    def _drive_checks(self, now: int, ctx) -> None:
        for check in self.checks:
            if check.done:
                continue
            if check.query_tick is not None and not check.selected and now >= check.query_tick:
                try:
                    self._issue_queries(check, now, ctx)
                except NoEligibleProvidersError:
                    check.done = True
                    check.outcome = "no_eligible_providers"
                    ctx.metrics.client(self.name).rejected += 1
                continue
            if not check.selected:
                continue
            pending = [pk for pk, _ in check.selected if pk not in check.responses]
            if pending and check.query_tick is not None:
                if now > check.query_tick + 2 * self.delta:
                    self._handle_timeout(check, pending, now, ctx)
                continue
            if check.immediate_accept:
                continue  # already accepted on receipt; listening only
            if (
                check.last_forward_tick is not None
                and now >= check.last_forward_tick + check.challenge_period
            ):
                self._finish_economic_check(check, now, ctx)

    def _handle_timeout(self, check: Check, pending: list[bytes], now: int, ctx) -> None:
        for pk in pending:
            self.dropped.add(pk)
        ctx.log(self.name, "timeout", b"".join(sorted(pending)))
        check.restarts += 1
        ctx.metrics.client(self.name).rejected += 1
        if self.config.protocol is Protocol.INS and self._policy_voided(pending):
            self._rebuy_policy(now, ctx)
            return
        if check.kind is CheckKind.TARGET and self.config.protocol is Protocol.INS:
            self._rebuy_policy(now, ctx)
            return
        try:
            self._issue_queries(check, now, ctx)
        except NoEligibleProvidersError:
            check.done = True
            check.outcome = "no_eligible_providers"

    def _policy_voided(self, dropped_now: list[bytes]) -> bool:
        """A provider backing the still-unconsumed policy went dark or was
        slashed: the coverage can no longer protect the target check."""
        if self._policy is None or self._target_accepted():
            return False
        allocated = {pk for pk, _ in self._policy_allocations}
        return any(pk in allocated for pk in dropped_now)

    def _rebuy_policy(self, now: int, ctx) -> None:
        """Allocated provider went dark or was slashed before acceptance:
        abandon the policy and start over with the remaining providers."""
        for check in self.checks:
            if not check.done and check.kind in (
                CheckKind.TARGET,
                CheckKind.INSURANCE_INCLUSION,
            ):
                check.done = True
                check.outcome = "abandoned"
        self._policy = None
        self._pending_purchase = None
        self._insurance_confirmed = False
        self._target_started = False
        self.phase = ClientPhase.AWAITING_INSURANCE

    def _finish_economic_check(self, check: Check, now: int, ctx) -> None:
        metrics = ctx.metrics.client(self.name)
        valid = all(
            verify_response(check, response) for response in check.responses.values()
        )
        metrics.signature_verifications_total += len(check.responses)
        if check.kind is CheckKind.TARGET:
            metrics.target_signature_verifications += len(check.responses)
        if not valid:
            # Signature or proof failed after the challenge period: discard
            # everything from this round and restart, never accept.
            for pk in list(check.responses):
                self.dropped.add(pk)
            check.restarts += 1
            metrics.rejected += 1
            self.phase = ClientPhase.REJECTED_RESTARTING
            try:
                self._issue_queries(check, now, ctx)
            except NoEligibleProvidersError:
                check.done = True
                check.outcome = "no_eligible_providers"
            return
        self._accept(check, now, ctx)

    def _accept(self, check: Check, now: int, ctx) -> None:
        check.done = True
        check.accepted_tick = now
        check.outcome = "accepted"
        metrics = ctx.metrics.client(self.name)
        if check.kind is CheckKind.TARGET:
            self.phase = ClientPhase.ACCEPTED
            metrics.accepted += 1
            metrics.ticks_to_acceptance.append(now - (check.query_tick or now))
            ctx.record_acceptance(self.name, check)
        elif check.kind is CheckKind.INSURANCE_INCLUSION:
            self._insurance_confirmed = True
        elif check.kind is CheckKind.EPOCH_EVENT:
            self._maintenance_event_done(check, ctx)
        ctx.log(self.name, "accepted", check.state_hash)

    # -- message handling ---------------------------------------------------------

    def handle_message(self, sender: str, payload, ctx) -> None:
        from .harness import CompensationMsg, EventListMsg, ReceiptMsg, ResponseMsg

        now = ctx.now
        if self._offline_at(now):
            return
        if isinstance(payload, ResponseMsg):
            self._handle_response(payload.response, now, ctx)
        elif isinstance(payload, ReceiptMsg):
            self._handle_receipt(payload.token, payload.receipt, now, ctx)
        elif isinstance(payload, Alert):
            self._handle_alert(payload, now, ctx)
        elif isinstance(payload, CompensationMsg):
            self.compensations.append((payload.insurance_id, payload.amount))
            ctx.metrics.client(self.name).compensated += 1
            ctx.metrics.client(self.name).compensation_received += payload.amount
            ctx.log(self.name, "compensated", codec.encode_u128(payload.amount))
        elif isinstance(payload, EventListMsg):
            self._handle_event_list(payload, now, ctx)

    def _handle_response(self, response: SignedResponse, now: int, ctx) -> None:
        for check in self.checks:
            if check.done or not check.selected:
                continue
            if response.provider_pk not in {pk for pk, _ in check.selected}:
                continue
            if (
                response.block_number != check.block_number
                or response.state_hash != check.state_hash
            ):
                continue
            if response.provider_pk in check.responses:
                return
            check.responses[response.provider_pk] = response
            if check.first_response_tick is None:
                check.first_response_tick = now
            check.last_response_tick = now
            # Forward to every watcher; the challenge clock runs from the
            # last forward.
            for watcher in ctx.watcher_names:
                ctx.forward(self.name, watcher, response)
            check.last_forward_tick = now
            if check.immediate_accept and len(check.responses) == len(check.selected):
                metrics = ctx.metrics.client(self.name)
                ok = all(verify_response(check, r) for r in check.responses.values())
                metrics.signature_verifications_total += len(check.responses)
                metrics.target_signature_verifications += len(check.responses)
                if ok:
                    self._accept(check, now, ctx)
                    self.phase = ClientPhase.LISTENING
                else:
                    for pk in list(check.responses):
                        self.dropped.add(pk)
                    check.restarts += 1
                    metrics.rejected += 1
                    self._rebuy_policy(now, ctx)
            return

    def _handle_receipt(self, token: int, receipt, now: int, ctx) -> None:
        if token != self._pending_purchase:
            return
        self._pending_purchase = None
        metrics = ctx.metrics.client(self.name)
        if receipt.ok:
            self._policy = (receipt.insurance_id, receipt.block_number, receipt.record_tx_id)
            self._policy_allocations = self._last_allocations
            metrics.premium_spent += receipt.premium_wei
            metrics.gas_spent += receipt.gas_wei
            self._start_insurance_check(now, ctx)
            ctx.log(self.name, "insurance_open", codec.encode_u64(receipt.insurance_id))
        else:
            ctx.log(self.name, "insurance_reverted", (receipt.reason or "").encode())
            # Reselect and retry; selection state refreshes via bootstrap
            # if the remaining candidates cannot back the value.
            self._retry_purchase(now, ctx)

    def _retry_purchase(self, now: int, ctx) -> None:
        if self._purchase_attempts >= len(self.current_set()) + 2:
            self.phase = ClientPhase.REJECTED_RESTARTING
            return
        self.bootstrap(ctx, now)
        self._submit_purchase(now, ctx)

    def _handle_alert(self, alert: Alert, now: int, ctx) -> None:
        self.alerts_seen.append(alert)
        active = [
            check
            for check in self.checks
            if not check.done and alert.offending_pk in {pk for pk, _ in check.selected}
        ]
        involved_accepted = any(
            check.done
            and check.outcome == "accepted"
            and alert.offending_pk in {pk for pk, _ in check.selected}
            for check in self.checks
        )
        policy_hit = (
            self.config.protocol is Protocol.INS
            and self._policy is not None
            and not self._target_accepted()
            and any(pk == alert.offending_pk for pk, _ in self._policy_allocations)
        )
        if not active and not involved_accepted and not policy_hit:
            # Not ours; still drop the provider from future selection.
            self.dropped.add(alert.offending_pk)
            return
        # Verify the slashing event actually happened: the dispute path's
        # heavy check.
        verified = ctx.oracle.verify_slash(
            self.name,
            alert.slash_event_block,
            alert.slash_record_tx_id,
            alert.slash_event_inclusion_proof,
        )
        ctx.log(self.name, "alert", alert.offending_pk)
        if not verified:
            return
        self.dropped.add(alert.offending_pk)
        if policy_hit:
            # The slashed provider backs our still-unconsumed policy, so the
            # coverage is void; start over with the remaining providers.
            ctx.metrics.client(self.name).rejected += 1
            self._rebuy_policy(now, ctx)
            return
        if not active:
            self.late_alerts += 1
            return
        for check in active:
            if check.immediate_accept:
                # Insured mode: acceptance already happened or will not;
                # compensation arrives through the claim, nothing to redo.
                continue
            check.restarts += 1
            ctx.metrics.client(self.name).rejected += 1
            self.phase = ClientPhase.REJECTED_RESTARTING
            try:
                self._issue_queries(check, now, ctx)
            except NoEligibleProvidersError:
                check.done = True
                check.outcome = "no_eligible_providers"

    def _target_accepted(self) -> bool:
        return any(
            check.kind is CheckKind.TARGET and check.outcome == "accepted"
            for check in self.checks
        )

    # -- provider-set maintenance --------------------------------------------------

    def _schedule_maintenance(self, now: int) -> None:
        self._maintenance = {}

    def _run_maintenance(self, now: int, ctx) -> None:
        epoch = self.epoch_of_tick(now)
        state = self._maintenance.get(epoch)
        fetch_tick = epoch * self.update_epoch_blocks + self.t_fin + 1
        if state is None and now >= fetch_tick and epoch >= 1:
            if self.set_for_epoch(epoch) is None:
                return
            state = {
                "requested_tick": now,
                "events": {},
                "checks": [],
                "collected": False,
            }
            self._maintenance[epoch] = state
            from .harness import EventListRequest

            for pk in self.current_set():
                ctx.send_to_provider(self.name, pk, EventListRequest(epoch=epoch - 1))
            return
        if state is None or state["collected"]:
            return
        if now <= state["requested_tick"] + 2 * self.delta:
            return
        state["collected"] = True
        events = sorted(state["events"].values(), key=lambda ev: (ev[0], ev[1]))
        if not events:
            self._finish_maintenance(epoch, [], ctx)
            return
        cp = self.config.maintenance_challenge_period or self.config.challenge_period
        for block_number, payload in events:
            check = Check(
                kind=CheckKind.EPOCH_EVENT,
                block_number=block_number,
                state_hash=crypto.digest(payload),
                challenge_period=cp,
                value=self.config.target_value,
                event_payload=payload,
            )
            check.query_tick = now
            state["checks"].append(check)
            self.checks.append(check)

    def _handle_event_list(self, msg, now: int, ctx) -> None:
        state = self._maintenance.get(msg.epoch + 1)
        if state is None or state["collected"]:
            return
        for block_number, payload in msg.events:
            state["events"][crypto.digest(payload)] = (block_number, payload)

    def _maintenance_event_done(self, check: Check, ctx) -> None:
        for epoch, state in self._maintenance.items():
            if check in state["checks"] and all(c.done for c in state["checks"]):
                events = [
                    (c.block_number, c.event_payload)
                    for c in state["checks"]
                    if c.outcome == "accepted"
                ]
                self._finish_maintenance(epoch, events, ctx)

    def _finish_maintenance(self, epoch: int, events: list, ctx) -> None:
        base = self.set_for_epoch(epoch)
        if base is None:
            return
        self.sets[epoch + 1] = apply_epoch_events(base, events)
        ctx.log(self.name, "predicted_set", codec.encode_u64(epoch + 1))
