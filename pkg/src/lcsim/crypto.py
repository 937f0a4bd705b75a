"""Deterministic signatures, hashing, and Merkle trees.

Every protocol message must be verifiable and every simulation run
reproducible, so keygen derives an Ed25519 key deterministically from a
64-bit seed and all hashing is sha256 behind one domain-tagged helper.
The signature scheme sits behind a small interface so a different scheme
can be slotted in without touching callers.

Merkle trees domain-separate leaf hashes from interior hashes (one tag
byte) and commit to the leaf count, so a tree of four identical leaves
roots differently from a tree of two.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

DIGEST_LEN = 32

_LEAF_TAG = b"\x00"
_NODE_TAG = b"\x01"
_ROOT_TAG = b"\x02"
_KEYGEN_TAG = b"lcsim-keygen-v1"


class EmptyLeavesError(ValueError):
    """A Merkle tree needs at least one leaf."""


class IndexOutOfRangeError(IndexError):
    """Requested proof index is not a leaf of the tree."""


def digest(*parts: bytes) -> bytes:
    """sha256 over the concatenation of `parts`."""
    h = hashlib.sha256()
    for part in parts:
        h.update(part)
    return h.digest()


@dataclass(frozen=True)
class KeyPair:
    """A provider or client identity; `public_key` is the on-chain identity."""

    secret_key: bytes
    public_key: bytes


class Ed25519Scheme:
    """Default signature scheme: Ed25519 with seed-derived keys.

    Signing is deterministic (Ed25519 is, by construction), and the same
    seed always yields the same key pair.
    """

    def keygen(self, seed: int) -> KeyPair:
        seed_bytes = digest(_KEYGEN_TAG, seed.to_bytes(8, "big", signed=False))
        private = Ed25519PrivateKey.from_private_bytes(seed_bytes)
        return KeyPair(
            secret_key=seed_bytes,
            public_key=private.public_key().public_bytes_raw(),
        )

    def sign(self, secret_key: bytes, message: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(secret_key).sign(message)

    def verify(self, public_key: bytes, message: bytes, signature: bytes) -> bool:
        try:
            Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
            return True
        except (InvalidSignature, ValueError):
            return False


_scheme = Ed25519Scheme()


def keygen(seed: int) -> KeyPair:
    """Deterministic key pair from a 64-bit seed."""
    return _scheme.keygen(seed)


def sign(secret_key: bytes, message: bytes) -> bytes:
    return _scheme.sign(secret_key, message)


def verify(public_key: bytes, message: bytes, signature: bytes) -> bool:
    return _scheme.verify(public_key, message, signature)


# ---------------------------------------------------------------------------
# Merkle trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MerkleProof:
    """Sibling path for one leaf, bottom-up.

    `leaf_count` is part of the proof because the root commits to it;
    verification recomputes the same commitment.
    """

    leaf_index: int
    leaf_count: int
    siblings: tuple[bytes, ...]


def _leaf_hash(leaf: bytes) -> bytes:
    return digest(_LEAF_TAG, leaf)


def _node_hash(left: bytes, right: bytes) -> bytes:
    return digest(_NODE_TAG, left, right)


def _root_commit(leaf_count: int, top: bytes) -> bytes:
    return digest(_ROOT_TAG, leaf_count.to_bytes(8, "big"), top)


def _fold_levels(leaves: list[bytes]) -> bytes:
    level = leaves
    while len(level) > 1:
        if len(level) % 2 == 1:
            level = level + [level[-1]]
        level = [_node_hash(level[i], level[i + 1]) for i in range(0, len(level), 2)]
    return level[0]


def merkle_root(leaves: list[bytes]) -> bytes:
    if not leaves:
        raise EmptyLeavesError("merkle_root requires at least one leaf")
    return _root_commit(len(leaves), _fold_levels([_leaf_hash(x) for x in leaves]))


def merkle_prove(leaves: list[bytes], index: int) -> MerkleProof:
    if not leaves:
        raise EmptyLeavesError("merkle_prove requires at least one leaf")
    if not 0 <= index < len(leaves):
        raise IndexOutOfRangeError(f"leaf index {index} out of range for {len(leaves)} leaves")
    siblings: list[bytes] = []
    level = [_leaf_hash(x) for x in leaves]
    pos = index
    while len(level) > 1:
        if len(level) % 2 == 1:
            level = level + [level[-1]]
        siblings.append(level[pos ^ 1])
        level = [_node_hash(level[i], level[i + 1]) for i in range(0, len(level), 2)]
        pos //= 2
    return MerkleProof(leaf_index=index, leaf_count=len(leaves), siblings=tuple(siblings))


def merkle_verify(root: bytes, leaf: bytes, proof: MerkleProof) -> bool:
    if not 0 <= proof.leaf_index < proof.leaf_count:
        return False
    node = _leaf_hash(leaf)
    pos = proof.leaf_index
    for sibling in proof.siblings:
        if pos % 2 == 0:
            node = _node_hash(node, sibling)
        else:
            node = _node_hash(sibling, node)
        pos //= 2
    return _root_commit(proof.leaf_count, node) == root
