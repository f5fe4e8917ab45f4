import random
import struct

import pytest

from savid import bls12381 as bls
from savid import crypto_prims as cp

# --- an independent SHA-256, used as the second-implementation oracle -------
# (straight from the FIPS 180-4 description; no shared code with hashlib)

_K = [
    0x428A2F98, 0x71374491, 0xB5C0FBCF, 0xE9B5DBA5, 0x3956C25B, 0x59F111F1,
    0x923F82A4, 0xAB1C5ED5, 0xD807AA98, 0x12835B01, 0x243185BE, 0x550C7DC3,
    0x72BE5D74, 0x80DEB1FE, 0x9BDC06A7, 0xC19BF174, 0xE49B69C1, 0xEFBE4786,
    0x0FC19DC6, 0x240CA1CC, 0x2DE92C6F, 0x4A7484AA, 0x5CB0A9DC, 0x76F988DA,
    0x983E5152, 0xA831C66D, 0xB00327C8, 0xBF597FC7, 0xC6E00BF3, 0xD5A79147,
    0x06CA6351, 0x14292967, 0x27B70A85, 0x2E1B2138, 0x4D2C6DFC, 0x53380D13,
    0x650A7354, 0x766A0ABB, 0x81C2C92E, 0x92722C85, 0xA2BFE8A1, 0xA81A664B,
    0xC24B8B70, 0xC76C51A3, 0xD192E819, 0xD6990624, 0xF40E3585, 0x106AA070,
    0x19A4C116, 0x1E376C08, 0x2748774C, 0x34B0BCB5, 0x391C0CB3, 0x4ED8AA4A,
    0x5B9CCA4F, 0x682E6FF3, 0x748F82EE, 0x78A5636F, 0x84C87814, 0x8CC70208,
    0x90BEFFFA, 0xA4506CEB, 0xBEF9A3F7, 0xC67178F2,
]


def _rotr(x, n):
    return ((x >> n) | (x << (32 - n))) & 0xFFFFFFFF


def sha256_oracle(msg: bytes) -> bytes:
    h = [
        0x6A09E667, 0xBB67AE85, 0x3C6EF372, 0xA54FF53A,
        0x510E527F, 0x9B05688C, 0x1F83D9AB, 0x5BE0CD19,
    ]
    length = len(msg) * 8
    msg = msg + b"\x80"
    msg += b"\x00" * ((56 - len(msg)) % 64)
    msg += struct.pack(">Q", length)
    for off in range(0, len(msg), 64):
        w = list(struct.unpack(">16I", msg[off : off + 64]))
        for i in range(16, 64):
            s0 = _rotr(w[i - 15], 7) ^ _rotr(w[i - 15], 18) ^ (w[i - 15] >> 3)
            s1 = _rotr(w[i - 2], 17) ^ _rotr(w[i - 2], 19) ^ (w[i - 2] >> 10)
            w.append((w[i - 16] + s0 + w[i - 7] + s1) & 0xFFFFFFFF)
        a, b, c, d, e, f, g, hh = h
        for i in range(64):
            s1 = _rotr(e, 6) ^ _rotr(e, 11) ^ _rotr(e, 25)
            ch = (e & f) ^ (~e & g)
            t1 = (hh + s1 + ch + _K[i] + w[i]) & 0xFFFFFFFF
            s0 = _rotr(a, 2) ^ _rotr(a, 13) ^ _rotr(a, 22)
            maj = (a & b) ^ (a & c) ^ (b & c)
            t2 = (s0 + maj) & 0xFFFFFFFF
            hh, g, f, e, d, c, b, a = g, f, e, (d + t1) & 0xFFFFFFFF, c, b, a, (t1 + t2) & 0xFFFFFFFF
        h = [(x + y) & 0xFFFFFFFF for x, y in zip(h, (a, b, c, d, e, f, g, hh))]
    return b"".join(struct.pack(">I", x) for x in h)


def test_sha256_oracle_self_check():
    # pin the oracle itself to the two standard published digests
    assert sha256_oracle(b"").hex() == (
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    )
    assert sha256_oracle(b"abc").hex() == (
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    )


def rnd_comms(rng, k):
    return [bls.g1_mul(bls.G1_GEN, rng.randrange(1, int(bls.R))) for _ in range(k)]


# --- hash_commitments --------------------------------------------------------


def test_hash_commitments_deterministic():
    rng = random.Random(0)
    comms = rnd_comms(rng, 3)
    assert cp.hash_commitments(comms) == cp.hash_commitments(comms)
    assert len(cp.hash_commitments(comms)) == 32


def test_hash_commitments_order_sensitive():
    rng = random.Random(1)
    comms = rnd_comms(rng, 3)
    swapped = [comms[1], comms[0], comms[2]]
    assert cp.hash_commitments(comms) != cp.hash_commitments(swapped)


def test_hash_commitments_matches_second_implementation():
    rng = random.Random(2)
    for _ in range(100):
        comms = rnd_comms(rng, rng.randrange(1, 4))
        msg = cp.COMMIT_TAG + b"".join(bls.g1_compress(c) for c in comms)
        assert cp.hash_commitments(comms) == sha256_oracle(msg)


def test_hash_commitments_rejects_empty():
    with pytest.raises(ValueError):
        cp.hash_commitments([])


# --- signatures --------------------------------------------------------------


def test_sign_verify_roundtrip():
    sk = cp.keygen(b"node-1")
    c = bytes(range(32))
    receipt = cp.sign_receipt(sk, 1, c)
    assert receipt.node_index == 1
    assert len(receipt.signature) == cp.SIGNATURE_BYTES
    assert cp.verify_receipt(sk.public_key(), c, receipt)


def test_verify_fails_for_other_commitment():
    sk = cp.keygen(b"node-1")
    c1, c2 = bytes(32), bytes([1] * 32)
    receipt = cp.sign_receipt(sk, 1, c1)
    assert not cp.verify_receipt(sk.public_key(), c2, receipt)


def test_verify_fails_under_other_key():
    sk1, sk2 = cp.keygen(b"node-1"), cp.keygen(b"node-2")
    c = bytes(32)
    receipt = cp.sign_receipt(sk1, 1, c)
    assert not cp.verify_receipt(sk2.public_key(), c, receipt)


def test_signatures_deterministic():
    sk = cp.keygen(b"node-9")
    c = bytes([7] * 32)
    assert cp.sign_receipt(sk, 9, c).signature == cp.sign_receipt(sk, 9, c).signature


def test_domain_separation_over_random_pairs():
    rng = random.Random(3)
    sk = cp.keygen(b"node-5")
    pk = sk.public_key()
    for _ in range(1000):
        c1 = rng.randbytes(32)
        c2 = rng.randbytes(32)
        if c1 == c2:
            continue
        receipt = cp.sign_receipt(sk, 5, c1)
        assert not cp.verify_receipt(pk, c2, receipt)


def test_malformed_signature_bytes_fail_closed():
    sk = cp.keygen(b"node-3")
    c = bytes(32)
    bad = cp.StorageReceipt(3, b"\x00" * 64)
    assert not cp.verify_receipt(sk.public_key(), c, bad)


def test_receipt_serialization():
    sk = cp.keygen(b"node-2")
    receipt = cp.sign_receipt(sk, 513, bytes(32))
    blob = receipt.serialize()
    assert len(blob) == cp.RECEIPT_BYTES
    assert cp.StorageReceipt.deserialize(blob) == receipt
    with pytest.raises(ValueError):
        cp.StorageReceipt.deserialize(blob[:-1])
    with pytest.raises(ValueError):
        cp.StorageReceipt(0, b"\x00" * 64)


def test_node_keys_distinct_and_deterministic():
    keys_a = cp.node_keys(4, b"seed")
    keys_b = cp.node_keys(4, b"seed")
    pks_a = [cp.pk_to_bytes(k.public_key()) for k in keys_a]
    pks_b = [cp.pk_to_bytes(k.public_key()) for k in keys_b]
    assert pks_a == pks_b
    assert len(set(pks_a)) == 4


def test_key_serialization_roundtrip():
    sk = cp.keygen(b"node-7")
    sk2 = cp.sk_from_bytes(cp.sk_to_bytes(sk))
    pk2 = cp.pk_from_bytes(cp.pk_to_bytes(sk.public_key()))
    c = bytes([9] * 32)
    r = cp.sign_receipt(sk2, 7, c)
    assert cp.verify_receipt(pk2, c, r)
