"""Simulated chain: append, finality rule, inclusion proofs."""

import random

import pytest

from lcsim import crypto
from lcsim.chain import Chain, Transaction, TxNotInBlockError, UnknownHeightError


def make_txs(n, tag=b"t"):
    return [Transaction.create(tag + bytes([i])) for i in range(n)]


class TestAppend:
    def test_append_to_genesis_is_block_one(self):
        chain = Chain()
        block = chain.append_block([])
        assert block.number == 1
        assert block.parent_hash == chain.blocks[0].hash

    def test_same_transactions_different_parents_differ(self):
        chain = Chain()
        txs = make_txs(2)
        b1 = chain.append_block(txs)
        b2 = chain.append_block(txs)
        assert b1.hash != b2.hash

    def test_transactions_root_matches_merkle_root(self):
        chain = Chain()
        txs = make_txs(5)
        block = chain.append_block(txs)
        assert block.transactions_root == crypto.merkle_root([t.id for t in txs])

    def test_transaction_value_non_negative(self):
        with pytest.raises(ValueError):
            Transaction.create(b"x", value=-1)


class TestFinality:
    def test_genesis_finalizes_after_64_blocks_at_paper_scale(self):
        # Count appends until the predicate flips; must be exactly
        # finality_depth_epochs * slots_per_epoch = 64.
        chain = Chain(slots_per_epoch=32, finality_depth_epochs=2)
        appended = 0
        while chain.finalized_block_hash(0) is None:
            chain.append_block([])
            appended += 1
        assert appended == 64
        assert chain.finality_depth_blocks == 64

    def test_desk_scale_example(self):
        chain = Chain(slots_per_epoch=4, finality_depth_epochs=2)
        for _ in range(9):
            chain.append_block([])
        assert chain.tip.number == 9
        assert chain.finalized_block_hash(1) == chain.blocks[1].hash

    def test_tip_is_not_final(self):
        chain = Chain()
        chain.append_block([])
        assert chain.finalized_block_hash(chain.tip.number) is None

    def test_unknown_height(self):
        chain = Chain()
        with pytest.raises(UnknownHeightError):
            chain.finalized_block_hash(chain.tip.number + 5)

    def test_finality_monotonicity(self):
        rng = random.Random(42)
        chain = Chain(slots_per_epoch=4, finality_depth_epochs=2)
        first_seen: dict[int, bytes] = {}
        for _ in range(100):
            chain.append_block(make_txs(rng.randrange(3)))
            for n in range(chain.tip.number + 1):
                digest = chain.finalized_block_hash(n) if n <= chain.tip.number else None
                if digest is not None:
                    assert first_seen.setdefault(n, digest) == digest


class TestInclusionProofs:
    def test_single_transaction_zero_siblings(self):
        chain = Chain()
        tx = Transaction.create(b"only")
        block = chain.append_block([tx])
        proof = chain.inclusion_proof(block.number, tx.id)
        assert proof.siblings == ()
        assert crypto.merkle_verify(block.transactions_root, tx.id, proof)

    def test_cross_block_verification_fails(self):
        chain = Chain()
        txs = make_txs(8)
        block = chain.append_block(txs)
        other = chain.append_block(make_txs(8, tag=b"u"))
        proof = chain.inclusion_proof(block.number, txs[3].id)
        assert crypto.merkle_verify(block.transactions_root, txs[3].id, proof)
        assert not crypto.merkle_verify(other.transactions_root, txs[3].id, proof)

    def test_absent_transaction(self):
        chain = Chain()
        block = chain.append_block(make_txs(2))
        with pytest.raises(TxNotInBlockError):
            chain.inclusion_proof(block.number, b"\x00" * 32)

    def test_every_transaction_provable(self):
        # Exhaustive for blocks of every size up to 16.
        chain = Chain()
        for n in range(1, 17):
            txs = make_txs(n, tag=bytes([n]))
            block = chain.append_block(txs)
            for tx in txs:
                proof = chain.inclusion_proof(block.number, tx.id)
                assert crypto.merkle_verify(block.transactions_root, tx.id, proof)

    def test_find_transaction(self):
        chain = Chain()
        txs = make_txs(3)
        block = chain.append_block(txs)
        assert chain.find_transaction(txs[1].id) == (block.number, txs[1])
        assert chain.find_transaction(b"\x01" * 32) is None
