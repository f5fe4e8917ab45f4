"""Hashing and signature plumbing: the block commitment digest over column
commitments, and the storage-node receipt signatures, both with fixed
domain-separation tags.

Signatures are Ed25519 (deterministic, 64-byte signatures), so simulator
runs and CLI artifacts are bit-reproducible.
"""

from __future__ import annotations

import hashlib

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from . import bls12381 as bls

COMMIT_TAG = b"semi-avid-pr/v1/commit"
STORED_TAG = b"semi-avid-pr/v1/stored"

COMMITMENT_BYTES = 32
SIGNATURE_BYTES = 64
RECEIPT_BYTES = 2 + SIGNATURE_BYTES


def hash_commitments(comms) -> bytes:
    """The block commitment: SHA-256 over the tag and the concatenated
    compressed column commitments."""
    if not comms:
        raise ValueError("need at least one column commitment")
    h = hashlib.sha256(COMMIT_TAG)
    for c in comms:
        h.update(bls.g1_compress(c))
    return h.digest()


def keygen(seed: bytes) -> Ed25519PrivateKey:
    """Deterministic node keypair from a 32-byte-expandable seed."""
    raw = hashlib.shake_256(b"savid/node-key" + seed).digest(32)
    return Ed25519PrivateKey.from_private_bytes(raw)


def node_keys(n: int, seed: bytes) -> list[Ed25519PrivateKey]:
    """Independent keypairs for nodes 1..n, derived from one seed."""
    return [keygen(seed + b"/%d" % i) for i in range(1, n + 1)]


def public_key(sk: Ed25519PrivateKey) -> Ed25519PublicKey:
    return sk.public_key()


def pk_to_bytes(pk: Ed25519PublicKey) -> bytes:
    from cryptography.hazmat.primitives import serialization

    return pk.public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw
    )


def pk_from_bytes(data: bytes) -> Ed25519PublicKey:
    return Ed25519PublicKey.from_public_bytes(data)


def sk_to_bytes(sk: Ed25519PrivateKey) -> bytes:
    from cryptography.hazmat.primitives import serialization

    return sk.private_bytes(
        serialization.Encoding.Raw,
        serialization.PrivateFormat.Raw,
        serialization.NoEncryption(),
    )


def sk_from_bytes(data: bytes) -> Ed25519PrivateKey:
    return Ed25519PrivateKey.from_private_bytes(data)


class StorageReceipt:
    """A node's signed acknowledgement that it stores a verified chunk of
    the block with the given commitment."""

    __slots__ = ("node_index", "signature")

    def __init__(self, node_index: int, signature: bytes):
        if not 1 <= node_index <= 0xFFFF:
            raise ValueError("node index out of range")
        if len(signature) != SIGNATURE_BYTES:
            raise ValueError("signature must be %d bytes" % SIGNATURE_BYTES)
        self.node_index = node_index
        self.signature = bytes(signature)

    def serialize(self) -> bytes:
        return self.node_index.to_bytes(2, "big") + self.signature

    @classmethod
    def deserialize(cls, data: bytes) -> "StorageReceipt":
        if len(data) != RECEIPT_BYTES:
            raise ValueError("receipt must be %d bytes" % RECEIPT_BYTES)
        return cls(int.from_bytes(data[:2], "big"), data[2:])

    def __eq__(self, other):
        return (
            isinstance(other, StorageReceipt)
            and self.node_index == other.node_index
            and self.signature == other.signature
        )

    def __repr__(self) -> str:
        return f"StorageReceipt(node={self.node_index})"


def _stored_message(commitment: bytes) -> bytes:
    if len(commitment) != COMMITMENT_BYTES:
        raise ValueError("block commitment must be 32 bytes")
    return STORED_TAG + commitment


def sign_receipt(sk: Ed25519PrivateKey, node_index: int, commitment: bytes) -> StorageReceipt:
    return StorageReceipt(node_index, sk.sign(_stored_message(commitment)))


def verify_receipt(pk: Ed25519PublicKey, commitment: bytes, receipt: StorageReceipt) -> bool:
    try:
        pk.verify(receipt.signature, _stored_message(commitment))
        return True
    except (InvalidSignature, ValueError):
        return False
