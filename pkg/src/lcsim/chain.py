"""Simulated PoS blockchain: slots, epochs, deterministic finality.

The chain is a single finalizing sequence (no forks): adversarial "wrong
data" is modeled at the data-provider layer, not as reorgs.  Time is
measured in block ticks; one block is appended per simulation tick, and a
block at height n is finalized once the tip is at least
`finality_depth_epochs * slots_per_epoch` blocks above it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import crypto
from .crypto import MerkleProof

_BLOCK_TAG = b"lcsim-block-v1"
_EMPTY_TXS_TAG = b"lcsim-empty-txs-v1"

GENESIS_PARENT = bytes(32)

# Root recorded for a block with no transactions; merkle_root itself
# rejects empty leaf sets.
EMPTY_TRANSACTIONS_ROOT = crypto.digest(_EMPTY_TXS_TAG)


class UnknownHeightError(ValueError):
    """Queried height is above the chain tip."""


class TxNotInBlockError(ValueError):
    """The block exists but does not contain the requested transaction."""


@dataclass(frozen=True)
class Transaction:
    """A chain transaction; `id` is the hash of the payload."""

    id: bytes
    payload: bytes
    value: int = 0

    @classmethod
    def create(cls, payload: bytes, value: int = 0) -> "Transaction":
        if value < 0:
            raise ValueError("transaction value must be non-negative")
        return cls(id=crypto.digest(payload), payload=payload, value=value)


def _transactions_root(transactions: tuple[Transaction, ...]) -> bytes:
    if not transactions:
        return EMPTY_TRANSACTIONS_ROOT
    return crypto.merkle_root([tx.id for tx in transactions])


def _block_hash(number: int, parent_hash: bytes, transactions_root: bytes) -> bytes:
    return crypto.digest(
        _BLOCK_TAG, number.to_bytes(8, "big"), parent_hash, transactions_root
    )


@dataclass(frozen=True)
class Block:
    number: int
    parent_hash: bytes
    transactions: tuple[Transaction, ...]
    transactions_root: bytes
    hash: bytes


@dataclass
class Chain:
    """Append-only block sequence with a deterministic finality rule."""

    slots_per_epoch: int = 4
    finality_depth_epochs: int = 2
    blocks: list[Block] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.slots_per_epoch < 1 or self.finality_depth_epochs < 1:
            raise ValueError("slots_per_epoch and finality_depth_epochs must be positive")
        if not self.blocks:
            root = _transactions_root(())
            genesis = Block(
                number=0,
                parent_hash=GENESIS_PARENT,
                transactions=(),
                transactions_root=root,
                hash=_block_hash(0, GENESIS_PARENT, root),
            )
            self.blocks.append(genesis)

    @property
    def finality_depth_blocks(self) -> int:
        return self.finality_depth_epochs * self.slots_per_epoch

    @property
    def tip(self) -> Block:
        return self.blocks[-1]

    def block_at(self, number: int) -> Block:
        if number > self.tip.number or number < 0:
            raise UnknownHeightError(f"no block at height {number} (tip {self.tip.number})")
        return self.blocks[number]

    def append_block(self, transactions: list[Transaction]) -> Block:
        parent = self.tip
        txs = tuple(transactions)
        root = _transactions_root(txs)
        number = parent.number + 1
        block = Block(
            number=number,
            parent_hash=parent.hash,
            transactions=txs,
            transactions_root=root,
            hash=_block_hash(number, parent.hash, root),
        )
        self.blocks.append(block)
        return block

    def is_finalized(self, number: int) -> bool:
        return (
            0 <= number <= self.tip.number
            and self.tip.number - number >= self.finality_depth_blocks
        )

    def finalized_block_hash(self, number: int) -> bytes | None:
        """Hash of the finalized block at `number`, or None while the depth
        rule is unmet."""
        if number > self.tip.number:
            raise UnknownHeightError(f"no block at height {number} (tip {self.tip.number})")
        if not self.is_finalized(number):
            return None
        return self.blocks[number].hash

    def last_finalized_number(self) -> int | None:
        n = self.tip.number - self.finality_depth_blocks
        return n if n >= 0 else None

    def inclusion_proof(self, number: int, tx_id: bytes) -> MerkleProof:
        block = self.block_at(number)
        for index, tx in enumerate(block.transactions):
            if tx.id == tx_id:
                return crypto.merkle_prove([t.id for t in block.transactions], index)
        raise TxNotInBlockError(f"transaction not in block {number}")

    def find_transaction(self, tx_id: bytes) -> tuple[int, Transaction] | None:
        """Full-node scan for a transaction; used by providers and watchers."""
        for block in self.blocks:
            for tx in block.transactions:
                if tx.id == tx_id:
                    return block.number, tx
        return None
