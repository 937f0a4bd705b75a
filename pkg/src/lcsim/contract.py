"""On-chain registry / slashing / insurance contract as a state machine.

The contract executes submissions at block boundaries and emits canonical
record transactions for every successful state change; failed submissions
produce a receipt and leave no trace on chain.  All balances move through
a single `Ledger`, so conservation of wei is checkable at any block.

Timing conventions: block `n` belongs to update epoch `n // B_u`; a
withdraw requested in epoch `e` becomes releasable at the last block of
epoch `e + 1`, deferred further while any open policy allocates the
provider's stake.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import codec, crypto, pricing
from .chain import Chain
from .pricing import PricingParams

STAKE_VAULT = "contract:stake-vault"
REWARD_POOL = "contract:reward-pool"
BURN_SINK = "sink:burned"
GAS_SINK = "sink:gas"

#: Share of a slashed stake paid to the submitting watcher.
DEFAULT_BOUNTY_FRACTION = (5, 100)


class ContractError(Exception):
    """Base for all rule violations the contract reports."""


class BelowMinStakeError(ContractError):
    pass


class DuplicateProviderError(ContractError):
    pass


class NotActiveError(ContractError):
    pass


class EpochTooFarError(ContractError):
    pass


class RevertReason(str, enum.Enum):
    INSUFFICIENT_ATTRIBUTABLE_STAKE = "InsufficientAttributableStake"
    INACTIVE_PROVIDER = "InactiveProvider"
    COVERAGE_EXCEEDS_ALLOCATIONS = "CoverageExceedsAllocations"
    DURATION_EXCEEDS_MAX = "DurationExceedsMax"


class Reverted(ContractError):
    """buy_insurance failed input validation; nothing was charged."""

    def __init__(self, reason: RevertReason) -> None:
        super().__init__(reason.value)
        self.reason = reason


class RejectReason(str, enum.Enum):
    SIGNATURE_INVALID = "SignatureInvalid"
    BLOCK_NOT_YET_FINAL = "BlockNotYetFinal"
    HASH_MATCHES_FINALIZED = "HashMatchesFinalized"
    ALREADY_SLASHED = "AlreadySlashed"
    UNKNOWN_PROVIDER = "UnknownProvider"


class SlashRejected(ContractError):
    """Dispute evidence did not prove misbehavior."""

    def __init__(self, reason: RejectReason) -> None:
        super().__init__(reason.value)
        self.reason = reason


class ProviderStatus(enum.Enum):
    ACTIVE = "active"
    LEAVING = "leaving"
    EXITED = "exited"
    SLASHED = "slashed"


class PolicyState(enum.Enum):
    OPEN = "open"
    CLAIMED = "claimed"
    EXPIRED = "expired"


@dataclass
class ProviderRecord:
    public_key: bytes
    stake: int
    locked: int
    status: ProviderStatus
    joined_epoch: int
    withdraw_requested_epoch: int | None = None
    release_not_before_epoch: int | None = None

    @property
    def attributable(self) -> int:
        return self.stake - self.locked


@dataclass
class InsurancePolicy:
    id: int
    buyer_pk: bytes
    allocations: tuple[tuple[bytes, int], ...]
    coverage_value: int
    start_block: int
    duration: int
    state: PolicyState = PolicyState.OPEN

    @property
    def last_covered_block(self) -> int:
        return self.start_block + self.duration

    def allocates(self, pk: bytes) -> bool:
        return any(p == pk for p, _ in self.allocations)


@dataclass(frozen=True)
class SlashEvent:
    provider_pk: bytes
    offending_signature: bytes
    block_number: int
    slashed_amount: int
    insurance_id: int | None
    recorded_in_block: int
    compensation: int = 0
    bounty: int = 0
    burned: int = 0


@dataclass(frozen=True)
class SlashEvidence:
    """A disputed response: enough to replay the canonical signed payload."""

    provider_pk: bytes
    block_number: int
    signed_block_hash: bytes
    state_hash: bytes
    signature: bytes
    insurance_id: int | None = None

    def payload(self) -> bytes:
        return codec.response_payload(
            self.block_number, self.signed_block_hash, self.state_hash, self.insurance_id
        )


@dataclass(frozen=True)
class ContractConfig:
    min_stake: int
    update_epoch_blocks: int
    max_challenge_period: int
    gas_buy_insurance: int = 200_000
    max_coverage_duration: int = 10_000
    bounty_fraction: tuple[int, int] = DEFAULT_BOUNTY_FRACTION

    def validate(self, finality_depth_blocks: int, delta_ticks: int) -> None:
        """The safety bound behind "T_u much greater than maxT_cp"."""
        bound = self.max_challenge_period + finality_depth_blocks + 2 * delta_ticks
        if self.update_epoch_blocks < bound:
            raise ValueError(
                "update_epoch_blocks must satisfy "
                f"B_u >= maxT_cp + T_fin + 2*delta = {bound}, got {self.update_epoch_blocks}"
            )


class Ledger:
    """Flat wei accounts; every movement is a transfer, so Σ is invariant."""

    def __init__(self) -> None:
        self.balances: dict[object, int] = {
            STAKE_VAULT: 0,
            REWARD_POOL: 0,
            BURN_SINK: 0,
            GAS_SINK: 0,
        }

    def mint(self, account: object, amount: int) -> None:
        """Initial funding only; never called after a run starts."""
        self.balances[account] = self.balances.get(account, 0) + amount

    def balance(self, account: object) -> int:
        return self.balances.get(account, 0)

    def transfer(self, src: object, dst: object, amount: int) -> None:
        if amount < 0:
            raise ValueError("negative transfer")
        if self.balances.get(src, 0) < amount:
            raise ValueError(f"insufficient funds in {src!r}")
        self.balances[src] = self.balances.get(src, 0) - amount
        self.balances[dst] = self.balances.get(dst, 0) + amount

    def total(self) -> int:
        return sum(self.balances.values())


# Submissions actors place in the transaction pool.


@dataclass(frozen=True)
class RegisterTx:
    public_key: bytes
    stake: int


@dataclass(frozen=True)
class WithdrawRequestTx:
    public_key: bytes


@dataclass(frozen=True)
class BuyInsuranceTx:
    buyer_pk: bytes
    allocations: tuple[tuple[bytes, int], ...]
    coverage_value: int
    duration: int


@dataclass(frozen=True)
class SlashTx:
    evidence: SlashEvidence


Submission = RegisterTx | WithdrawRequestTx | BuyInsuranceTx | SlashTx


@dataclass(frozen=True)
class Receipt:
    """Execution outcome handed back to the submitter."""

    kind: str
    ok: bool
    reason: str | None = None
    block_number: int | None = None
    record_tx_id: bytes | None = None
    insurance_id: int | None = None
    premium_wei: int = 0
    gas_wei: int = 0


class SlashingContract:
    def __init__(self, config: ContractConfig, ledger: Ledger, params: PricingParams) -> None:
        self.config = config
        self.ledger = ledger
        self.params = params
        self.providers: dict[bytes, ProviderRecord] = {}
        self.retired: list[ProviderRecord] = []
        self.policies: dict[int, InsurancePolicy] = {}
        self.slash_events: list[SlashEvent] = []
        self.reward_pool: dict[bytes, int] = {}
        self._epoch_requests: dict[int, list[tuple]] = {}
        self._next_policy_id = 1
        self.current_block = 0

    # -- time ---------------------------------------------------------------

    def epoch_of(self, block_number: int) -> int:
        return block_number // self.config.update_epoch_blocks

    @property
    def current_epoch(self) -> int:
        return self.epoch_of(self.current_block)

    def is_epoch_end(self, block_number: int) -> bool:
        return (block_number + 1) % self.config.update_epoch_blocks == 0

    def epoch_end_block(self, epoch: int) -> int:
        return (epoch + 1) * self.config.update_epoch_blocks - 1

    # -- registry -----------------------------------------------------------

    def register(self, pk: bytes, stake: int, block_number: int) -> bytes:
        if stake < self.config.min_stake:
            raise BelowMinStakeError(f"stake {stake} below minimum {self.config.min_stake}")
        existing = self.providers.get(pk)
        if existing is not None:
            if existing.status in (ProviderStatus.ACTIVE, ProviderStatus.LEAVING):
                raise DuplicateProviderError("provider already registered")
            # A node that exited and rejoins is a fresh provider.
            self.retired.append(existing)
        self.ledger.transfer(pk, STAKE_VAULT, stake)
        epoch = self.epoch_of(block_number)
        self.providers[pk] = ProviderRecord(
            public_key=pk,
            stake=stake,
            locked=0,
            status=ProviderStatus.ACTIVE,
            joined_epoch=epoch,
        )
        self._epoch_requests.setdefault(epoch, []).append(("register", pk, stake))
        return codec.register_record(pk, stake)

    def request_withdraw(self, pk: bytes, block_number: int) -> bytes:
        record = self.providers.get(pk)
        if record is None or record.status is not ProviderStatus.ACTIVE:
            raise NotActiveError("withdraw requires an active provider")
        epoch = self.epoch_of(block_number)
        record.status = ProviderStatus.LEAVING
        record.withdraw_requested_epoch = epoch
        record.release_not_before_epoch = epoch + 1
        self._epoch_requests.setdefault(epoch, []).append(("withdraw", pk))
        return codec.withdraw_record(pk)

    # -- insurance ----------------------------------------------------------

    def buy_insurance(
        self,
        buyer_pk: bytes,
        allocations: list[tuple[bytes, int]],
        coverage_value: int,
        duration: int,
        block_number: int,
    ) -> tuple[InsurancePolicy, bytes]:
        if duration > self.config.max_coverage_duration:
            raise Reverted(RevertReason.DURATION_EXCEEDS_MAX)
        per_provider: dict[bytes, int] = {}
        for pk, amount in allocations:
            record = self.providers.get(pk)
            if record is None or record.status is not ProviderStatus.ACTIVE:
                raise Reverted(RevertReason.INACTIVE_PROVIDER)
            if amount <= 0:
                raise Reverted(RevertReason.INSUFFICIENT_ATTRIBUTABLE_STAKE)
            per_provider[pk] = per_provider.get(pk, 0) + amount
        for pk, total in per_provider.items():
            if total > self.providers[pk].attributable:
                raise Reverted(RevertReason.INSUFFICIENT_ATTRIBUTABLE_STAKE)
        if sum(a for _, a in allocations) < coverage_value:
            raise Reverted(RevertReason.COVERAGE_EXCEEDS_ALLOCATIONS)

        premium_wei = pricing.premium(self.params, duration, coverage_value)
        gas_wei = self.config.gas_buy_insurance * self.params.gas_price_wei
        self.ledger.transfer(buyer_pk, REWARD_POOL, premium_wei)
        self.ledger.transfer(buyer_pk, GAS_SINK, gas_wei)
        self._credit_reward_pools(allocations, premium_wei)

        for pk, amount in allocations:
            self.providers[pk].locked += amount
        policy = InsurancePolicy(
            id=self._next_policy_id,
            buyer_pk=buyer_pk,
            allocations=tuple(allocations),
            coverage_value=coverage_value,
            start_block=block_number,
            duration=duration,
        )
        self._next_policy_id += 1
        self.policies[policy.id] = policy
        payload = codec.insurance_record(
            policy.id, buyer_pk, coverage_value, block_number, duration, list(allocations)
        )
        return policy, payload

    def _credit_reward_pools(
        self, allocations: list[tuple[bytes, int]], premium_wei: int
    ) -> None:
        # Pro-rata by allocation, remainders dealt one wei at a time so the
        # split is exact.
        total = sum(a for _, a in allocations)
        shares = [(pk, premium_wei * a // total) for pk, a in allocations]
        remainder = premium_wei - sum(s for _, s in shares)
        out = []
        for i, (pk, s) in enumerate(shares):
            extra = 1 if i < remainder else 0
            out.append((pk, s + extra))
        for pk, s in out:
            self.reward_pool[pk] = self.reward_pool.get(pk, 0) + s

    # -- slashing -----------------------------------------------------------

    def slash(
        self,
        evidence: SlashEvidence,
        chain: Chain,
        block_number: int,
        submitter: object | None = None,
    ) -> tuple[SlashEvent, bytes]:
        if not crypto.verify(evidence.provider_pk, evidence.payload(), evidence.signature):
            raise SlashRejected(RejectReason.SIGNATURE_INVALID)
        record = self.providers.get(evidence.provider_pk)
        if record is None or record.status is ProviderStatus.EXITED:
            raise SlashRejected(RejectReason.UNKNOWN_PROVIDER)
        if record.status is ProviderStatus.SLASHED:
            raise SlashRejected(RejectReason.ALREADY_SLASHED)
        if evidence.block_number > chain.tip.number:
            raise SlashRejected(RejectReason.BLOCK_NOT_YET_FINAL)
        finalized = chain.finalized_block_hash(evidence.block_number)
        if finalized is None:
            raise SlashRejected(RejectReason.BLOCK_NOT_YET_FINAL)
        if finalized == evidence.signed_block_hash:
            raise SlashRejected(RejectReason.HASH_MATCHES_FINALIZED)

        slashed_amount = record.stake
        record.stake = 0
        record.locked = 0
        record.status = ProviderStatus.SLASHED

        compensation = 0
        claimed_id = None
        if evidence.insurance_id is not None:
            policy = self.policies.get(evidence.insurance_id)
            if (
                policy is not None
                and policy.state is PolicyState.OPEN
                and policy.allocates(evidence.provider_pk)
            ):
                policy.state = PolicyState.CLAIMED
                compensation = policy.coverage_value
                claimed_id = policy.id
                self.ledger.transfer(STAKE_VAULT, policy.buyer_pk, compensation)

        num, den = self.config.bounty_fraction
        bounty = min(slashed_amount * num // den, slashed_amount - compensation)
        if submitter is not None and bounty > 0:
            self.ledger.transfer(STAKE_VAULT, submitter, bounty)
        elif bounty > 0:
            self.ledger.transfer(STAKE_VAULT, BURN_SINK, bounty)
        burned = slashed_amount - compensation - bounty
        self.ledger.transfer(STAKE_VAULT, BURN_SINK, burned)

        event = SlashEvent(
            provider_pk=evidence.provider_pk,
            offending_signature=evidence.signature,
            block_number=evidence.block_number,
            slashed_amount=slashed_amount,
            insurance_id=claimed_id,
            recorded_in_block=block_number,
            compensation=compensation,
            bounty=bounty,
            burned=burned,
        )
        self.slash_events.append(event)
        payload = codec.slash_record(
            evidence.provider_pk,
            evidence.block_number,
            evidence.signed_block_hash,
            slashed_amount,
            claimed_id,
            evidence.signature,
        )
        return event, payload

    # -- block boundary -----------------------------------------------------

    def process_block_boundary(self, block_number: int) -> list[tuple]:
        """Run once after each appended block; expiries before withdrawals."""
        self.current_block = block_number
        effects: list[tuple] = []
        for policy in self.policies.values():
            if policy.state is PolicyState.OPEN and policy.last_covered_block < block_number:
                policy.state = PolicyState.EXPIRED
                for pk, amount in policy.allocations:
                    record = self.providers.get(pk)
                    if record is not None and record.status in (
                        ProviderStatus.ACTIVE,
                        ProviderStatus.LEAVING,
                    ):
                        record.locked -= amount
                effects.append(("policy_expired", policy.id))
        if self.is_epoch_end(block_number):
            epoch = self.epoch_of(block_number)
            for record in list(self.providers.values()):
                if record.status is not ProviderStatus.LEAVING:
                    continue
                if record.release_not_before_epoch > epoch:
                    continue
                if self._has_open_policy(record.public_key):
                    continue
                amount = record.stake
                record.stake = 0
                record.locked = 0
                record.status = ProviderStatus.EXITED
                self.ledger.transfer(STAKE_VAULT, record.public_key, amount)
                effects.append(("withdrawn", record.public_key, amount))
        return effects

    def _has_open_policy(self, pk: bytes) -> bool:
        return any(
            p.state is PolicyState.OPEN and p.allocates(pk) for p in self.policies.values()
        )

    # -- views --------------------------------------------------------------

    def active_set(self, epoch: int) -> list[tuple[bytes, int, int]]:
        """Epochal provider set: (pk, stake, attributable), pk-sorted.

        Membership applies register and withdraw requests with a two-epoch
        lag, which is exactly what an online light client can reconstruct
        from verified epoch i-1 events; the set is static within an epoch.
        Currently slashed providers are excluded.
        """
        if epoch > self.current_epoch + 1:
            raise EpochTooFarError(
                f"epoch {epoch} is beyond current epoch {self.current_epoch} + 1"
            )
        members: dict[bytes, int] = {}
        for e in sorted(self._epoch_requests):
            if e > epoch - 2:
                break
            for request in self._epoch_requests[e]:
                if request[0] == "register":
                    members[request[1]] = request[2]
                else:
                    members.pop(request[1], None)
        out = []
        for pk in sorted(members):
            record = self.providers.get(pk)
            if record is None or record.status is ProviderStatus.SLASHED:
                continue
            stake = members[pk]
            locked = record.locked if record.status is not ProviderStatus.EXITED else 0
            out.append((pk, stake, stake - locked))
        return out

    def provider(self, pk: bytes) -> ProviderRecord | None:
        return self.providers.get(pk)

    def utilization_sample(self) -> tuple[int, int]:
        """(total locked, total stake) over currently active providers."""
        locked = 0
        stake = 0
        for record in self.providers.values():
            if record.status is ProviderStatus.ACTIVE:
                locked += record.locked
                stake += record.stake
        return locked, stake

    # -- transaction execution ----------------------------------------------

    def execute_transaction(
        self,
        submission: Submission,
        chain: Chain,
        block_number: int,
        submitter: object | None = None,
    ) -> tuple[list[bytes], Receipt]:
        """Execute one pooled submission; returns on-chain record payloads
        (empty on failure) and the submitter's receipt."""
        try:
            if isinstance(submission, RegisterTx):
                payload = self.register(submission.public_key, submission.stake, block_number)
                return [payload], self._ok("register", payload, block_number)
            if isinstance(submission, WithdrawRequestTx):
                payload = self.request_withdraw(submission.public_key, block_number)
                return [payload], self._ok("withdraw", payload, block_number)
            if isinstance(submission, BuyInsuranceTx):
                policy, payload = self.buy_insurance(
                    submission.buyer_pk,
                    list(submission.allocations),
                    submission.coverage_value,
                    submission.duration,
                    block_number,
                )
                receipt = Receipt(
                    kind="buy_insurance",
                    ok=True,
                    block_number=block_number,
                    record_tx_id=crypto.digest(payload),
                    insurance_id=policy.id,
                    premium_wei=pricing.premium(
                        self.params, submission.duration, submission.coverage_value
                    ),
                    gas_wei=self.config.gas_buy_insurance * self.params.gas_price_wei,
                )
                return [payload], receipt
            if isinstance(submission, SlashTx):
                _, payload = self.slash(submission.evidence, chain, block_number, submitter)
                return [payload], self._ok("slash", payload, block_number)
        except ContractError as exc:
            return [], Receipt(kind=type(submission).__name__, ok=False, reason=str(exc))
        raise TypeError(f"unknown submission type: {submission!r}")

    @staticmethod
    def _ok(kind: str, payload: bytes, block_number: int) -> Receipt:
        return Receipt(
            kind=kind,
            ok=True,
            block_number=block_number,
            record_tx_id=crypto.digest(payload),
        )

    # -- determinism --------------------------------------------------------

    def state_digest(self) -> bytes:
        """Canonical digest of the full contract state."""
        parts: list[bytes] = [self.current_block.to_bytes(8, "big")]
        for pk in sorted(self.providers):
            r = self.providers[pk]
            parts.append(
                codec.encode_bytes(pk)
                + codec.encode_u128(r.stake)
                + codec.encode_u128(r.locked)
                + r.status.value.encode()
                + codec.encode_u64(r.joined_epoch)
                + codec.encode_u64(
                    r.withdraw_requested_epoch if r.withdraw_requested_epoch is not None else 0
                )
            )
        for pid in sorted(self.policies):
            p = self.policies[pid]
            parts.append(
                codec.encode_u64(p.id)
                + p.state.value.encode()
                + codec.insurance_record(
                    p.id, p.buyer_pk, p.coverage_value, p.start_block, p.duration,
                    list(p.allocations),
                )
            )
        for event in self.slash_events:
            parts.append(
                codec.slash_record(
                    event.provider_pk,
                    event.block_number,
                    b"\x00" * 32,
                    event.slashed_amount,
                    event.insurance_id,
                    event.offending_signature,
                )
            )
        return crypto.digest(*parts)
