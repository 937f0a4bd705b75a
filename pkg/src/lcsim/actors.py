"""Data-provider and watcher behaviors, including adversarial strategies.

Providers answer inclusion queries by signing (block hash, proof) pairs;
adversarial variants fabricate internally consistent fake blocks so that
signature and proof checks pass on the light client and only a watcher
comparing against the real chain can catch them.  Watchers audit
forwarded responses, submit slash evidence on-chain, and alert the client
once the slash record is finalized.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import codec, crypto
from .chain import Chain, TxNotInBlockError
from .contract import (
    ProviderStatus,
    RegisterTx,
    SlashEvidence,
    SlashingContract,
    SlashTx,
    WithdrawRequestTx,
)
from .crypto import KeyPair, MerkleProof


class ProviderStrategy(enum.Enum):
    HONEST = "honest"
    WRONG_HASH = "wrong_hash"
    UNFINALIZED_HASH = "unfinalized_hash"
    UNRESPONSIVE = "unresponsive"
    EXIT_SCAM = "exit_scam"


@dataclass(frozen=True)
class Query:
    block_number: int
    state_hash: bytes
    insurance_id: int | None = None
    client_pk: bytes | None = None
    client_signature: bytes | None = None

    def payload(self) -> bytes:
        return codec.query_payload(self.block_number, self.state_hash, self.insurance_id)


@dataclass(frozen=True)
class SignedResponse:
    block_number: int
    block_hash: bytes
    state_hash: bytes
    parent_hash: bytes
    transactions_root: bytes
    inclusion_proof: MerkleProof
    provider_pk: bytes
    signature: bytes
    insurance_id: int | None = None

    def payload(self) -> bytes:
        return codec.response_payload(
            self.block_number, self.block_hash, self.state_hash, self.insurance_id
        )

    def evidence(self) -> SlashEvidence:
        return SlashEvidence(
            provider_pk=self.provider_pk,
            block_number=self.block_number,
            signed_block_hash=self.block_hash,
            state_hash=self.state_hash,
            signature=self.signature,
            insurance_id=self.insurance_id,
        )


class AlertKind(enum.Enum):
    PROVIDER_SLASHED = "provider_slashed"
    PROVIDER_INACTIVE = "provider_inactive"


@dataclass(frozen=True)
class Alert:
    kind: AlertKind
    offending_pk: bytes
    slash_event_block: int
    slash_record_tx_id: bytes
    slash_event_inclusion_proof: MerkleProof


# ---------------------------------------------------------------------------
# Provider response logic
# ---------------------------------------------------------------------------


def _sign_response(
    keypair: KeyPair,
    block_number: int,
    block_hash: bytes,
    state_hash: bytes,
    parent_hash: bytes,
    transactions_root: bytes,
    proof: MerkleProof,
    insurance_id: int | None,
) -> SignedResponse:
    payload = codec.response_payload(block_number, block_hash, state_hash, insurance_id)
    return SignedResponse(
        block_number=block_number,
        block_hash=block_hash,
        state_hash=state_hash,
        parent_hash=parent_hash,
        transactions_root=transactions_root,
        inclusion_proof=proof,
        provider_pk=keypair.public_key,
        signature=crypto.sign(keypair.secret_key, payload),
        insurance_id=insurance_id,
    )


def _fabricated_response(keypair: KeyPair, query: Query) -> SignedResponse:
    """Internally consistent lie: a fake single-leaf block holding the target.

    The proof verifies against the fake transactions_root and the fake
    header hashes to the signed block hash, so the light client's local
    checks all pass; only the finalized chain contradicts it.
    """
    fake_root = crypto.merkle_root([query.state_hash])
    fake_parent = crypto.digest(b"forged-parent", keypair.public_key, query.state_hash)
    fake_hash = crypto.digest(
        b"lcsim-block-v1",
        query.block_number.to_bytes(8, "big"),
        fake_parent,
        fake_root,
    )
    proof = crypto.merkle_prove([query.state_hash], 0)
    return _sign_response(
        keypair,
        query.block_number,
        fake_hash,
        query.state_hash,
        fake_parent,
        fake_root,
        proof,
        query.insurance_id,
    )


def _true_response(keypair: KeyPair, query: Query, chain: Chain) -> SignedResponse | None:
    try:
        block = chain.block_at(query.block_number)
        proof = chain.inclusion_proof(query.block_number, query.state_hash)
    except (TxNotInBlockError, ValueError):
        return None
    return _sign_response(
        keypair,
        query.block_number,
        block.hash,
        query.state_hash,
        block.parent_hash,
        block.transactions_root,
        proof,
        query.insurance_id,
    )


_PROTOCOL_RECORD_TAGS = frozenset(
    {
        codec.TAG_REGISTER,
        codec.TAG_WITHDRAW_REQUEST,
        codec.TAG_INSURANCE,
        codec.TAG_SLASH_RECORD,
    }
)


def _is_protocol_record_query(query: Query, chain: Chain) -> bool:
    found = chain.find_transaction(query.state_hash)
    return found is not None and codec.record_tag(found[1].payload) in _PROTOCOL_RECORD_TAGS


def provider_respond(
    strategy: ProviderStrategy,
    query: Query,
    chain: Chain,
    keypair: KeyPair,
    status: ProviderStatus = ProviderStatus.ACTIVE,
) -> SignedResponse | None:
    """One provider's answer to a query; None is silence.

    Honest providers only speak about finalized blocks and refuse once
    leaving; adversaries never refuse.  Lying adversaries fabricate only
    for value-bearing target states: misreporting protocol bookkeeping
    records (insurance purchases, register/withdraw events) yields nothing
    and would burn their stake before any insured acceptance exists, so a
    rational attacker answers those honestly.
    """
    if strategy is ProviderStrategy.UNRESPONSIVE:
        return None
    if strategy is ProviderStrategy.HONEST:
        if status is not ProviderStatus.ACTIVE:
            return None
        if not chain.is_finalized(query.block_number):
            return None
        return _true_response(keypair, query, chain)
    if strategy is ProviderStrategy.UNFINALIZED_HASH:
        if query.block_number > chain.tip.number:
            return None
        return _true_response(keypair, query, chain)
    # WRONG_HASH and EXIT_SCAM.
    if _is_protocol_record_query(query, chain):
        if not chain.is_finalized(query.block_number):
            return None
        return _true_response(keypair, query, chain)
    return _fabricated_response(keypair, query)


# ---------------------------------------------------------------------------
# Watcher verdicts
# ---------------------------------------------------------------------------


class Verdict(enum.Enum):
    OK = "ok"
    DISPUTE = "dispute"
    PROVIDER_INACTIVE = "provider_inactive"
    #: Pending finality; the watcher re-checks until the chain resolves it.
    PENDING = "pending"


def watcher_check(
    response: SignedResponse, chain: Chain, contract: SlashingContract
) -> Verdict:
    """Full-node audit of a forwarded response."""
    record = contract.provider(response.provider_pk)
    if record is not None and record.status is ProviderStatus.SLASHED:
        return Verdict.PROVIDER_INACTIVE
    if response.block_number > chain.tip.number:
        return Verdict.PENDING
    finalized = chain.finalized_block_hash(response.block_number)
    if finalized is None:
        return Verdict.PENDING
    if finalized == response.block_hash and crypto.verify(
        response.provider_pk, response.payload(), response.signature
    ):
        return Verdict.OK
    return Verdict.DISPUTE


def find_slash_record(pk: bytes, chain: Chain) -> tuple[int, bytes] | None:
    """Most recent on-chain slash record for a provider, if any."""
    for block in reversed(chain.blocks):
        for tx in block.transactions:
            if codec.record_tag(tx.payload) == codec.TAG_SLASH_RECORD:
                if codec.decode_slash_record(tx.payload)[0] == pk:
                    return block.number, tx.id
    return None


# ---------------------------------------------------------------------------
# Simulation actors
# ---------------------------------------------------------------------------


@dataclass
class _PendingAlert:
    client: str
    kind: AlertKind
    offending_pk: bytes
    record_tx_id: bytes
    record_block: int


class WatcherActor:
    """Honest watcher: audits forwards, slashes, and alerts clients.

    Disputes rejected with BlockNotYetFinal are retried after finality;
    alerts are delivered only once the slash record's own block is
    finalized, so the inclusion proof the client heavy-checks is stable.
    """

    def __init__(self, name: str) -> None:
        self.name = name
        self._deferred: list[tuple[str, SignedResponse]] = []
        self._submitted: dict[int, tuple[str, SignedResponse]] = {}
        self._pending_alerts: list[_PendingAlert] = []

    def handle_message(self, sender: str, payload, ctx) -> None:
        from .harness import ForwardMsg, ReceiptMsg

        if isinstance(payload, ForwardMsg):
            self._audit(sender, payload.response, ctx)
        elif isinstance(payload, ReceiptMsg):
            self._handle_receipt(payload.token, payload.receipt, ctx)

    def _audit(self, client: str, response: SignedResponse, ctx) -> None:
        verdict = watcher_check(response, ctx.chain, ctx.contract)
        ctx.log(self.name, "verdict", verdict.value.encode() + b":" + response.provider_pk)
        if verdict is Verdict.PENDING:
            self._deferred.append((client, response))
        elif verdict is Verdict.DISPUTE:
            token = ctx.submit_tx(self.name, SlashTx(evidence=response.evidence()))
            self._submitted[token] = (client, response)
        elif verdict is Verdict.PROVIDER_INACTIVE:
            found = find_slash_record(response.provider_pk, ctx.chain)
            if found is not None:
                block_number, tx_id = found
                self._pending_alerts.append(
                    _PendingAlert(
                        client=client,
                        kind=AlertKind.PROVIDER_INACTIVE,
                        offending_pk=response.provider_pk,
                        record_tx_id=tx_id,
                        record_block=block_number,
                    )
                )

    def _handle_receipt(self, token: int, receipt, ctx) -> None:
        if token not in self._submitted:
            return
        client, response = self._submitted.pop(token)
        if receipt.ok:
            self._pending_alerts.append(
                _PendingAlert(
                    client=client,
                    kind=AlertKind.PROVIDER_SLASHED,
                    offending_pk=response.provider_pk,
                    record_tx_id=receipt.record_tx_id,
                    record_block=receipt.block_number,
                )
            )
        elif receipt.reason == "BlockNotYetFinal":
            self._deferred.append((client, response))
        elif receipt.reason == "AlreadySlashed":
            # Lost the race to another watcher; alert with the winner's record.
            self._audit(client, response, ctx)

    def on_tick(self, now: int, ctx) -> None:
        if self._deferred:
            deferred, self._deferred = self._deferred, []
            for client, response in deferred:
                verdict = watcher_check(response, ctx.chain, ctx.contract)
                if verdict is Verdict.PENDING:
                    self._deferred.append((client, response))
                elif verdict is not Verdict.OK:
                    self._audit(client, response, ctx)
        if self._pending_alerts:
            pending, self._pending_alerts = self._pending_alerts, []
            for item in pending:
                if ctx.chain.is_finalized(item.record_block):
                    proof = ctx.chain.inclusion_proof(item.record_block, item.record_tx_id)
                    alert = Alert(
                        kind=item.kind,
                        offending_pk=item.offending_pk,
                        slash_event_block=item.record_block,
                        slash_record_tx_id=item.record_tx_id,
                        slash_event_inclusion_proof=proof,
                    )
                    ctx.send(self.name, item.client, alert)
                    ctx.log(self.name, "alert", item.kind.value.encode())
                else:
                    self._pending_alerts.append(item)


class DataProviderActor:
    """A staked provider node following one fixed strategy."""

    def __init__(
        self,
        name: str,
        keypair: KeyPair,
        stake: int,
        strategy: ProviderStrategy,
        register_tick: int = 1,
        withdraw_tick: int | None = None,
    ) -> None:
        self.name = name
        self.keypair = keypair
        self.stake = stake
        self.strategy = strategy
        self.register_tick = register_tick
        self.withdraw_tick = withdraw_tick
        self._misbehaved = False
        self._withdraw_submitted = False

    @property
    def public_key(self) -> bytes:
        return self.keypair.public_key

    def on_tick(self, now: int, ctx) -> None:
        if now == self.register_tick:
            ctx.submit_tx(self.name, RegisterTx(self.public_key, self.stake))
        if (
            self.withdraw_tick is not None
            and now == self.withdraw_tick
            and not self._withdraw_submitted
        ):
            self._withdraw_submitted = True
            ctx.submit_tx(self.name, WithdrawRequestTx(self.public_key))

    def handle_message(self, sender: str, payload, ctx) -> None:
        from .harness import EventListMsg, EventListRequest, QueryMsg, ResponseMsg

        if isinstance(payload, QueryMsg):
            record = ctx.contract.provider(self.public_key)
            status = record.status if record is not None else ProviderStatus.ACTIVE
            response = provider_respond(
                self.strategy, payload.query, ctx.chain, self.keypair, status
            )
            if response is not None:
                ctx.send(self.name, sender, ResponseMsg(response=response))
                lied = (
                    response.block_number > ctx.chain.tip.number
                    or ctx.chain.block_at(response.block_number).hash != response.block_hash
                )
                if (
                    lied
                    and self.strategy is ProviderStrategy.EXIT_SCAM
                    and not self._misbehaved
                ):
                    # Sign false data, then rush the exit.
                    self._misbehaved = True
                    self._withdraw_submitted = True
                    ctx.submit_tx(self.name, WithdrawRequestTx(self.public_key))
        elif isinstance(payload, EventListRequest):
            if self.strategy in (ProviderStrategy.HONEST, ProviderStrategy.UNFINALIZED_HASH):
                events = self._scan_epoch_events(payload.epoch, ctx)
                ctx.send(
                    self.name,
                    sender,
                    EventListMsg(epoch=payload.epoch, events=tuple(events)),
                )
            # Adversarial providers stay silent; the client unions answers
            # from every provider it asks, so one honest list suffices.

    def _scan_epoch_events(self, epoch: int, ctx) -> list[tuple[int, bytes]]:
        first = epoch * ctx.contract.config.update_epoch_blocks
        last = (epoch + 1) * ctx.contract.config.update_epoch_blocks - 1
        events: list[tuple[int, bytes]] = []
        for number in range(first, min(last, ctx.chain.tip.number) + 1):
            for tx in ctx.chain.block_at(number).transactions:
                tag = codec.record_tag(tx.payload)
                if tag in (codec.TAG_REGISTER, codec.TAG_WITHDRAW_REQUEST):
                    events.append((number, tx.payload))
        return events
