"""Linearly homomorphic vector commitments: a polynomial commitment used as
a vector commitment.

A length-m vector v maps to the unique degree-(m-1) polynomial U with
U(w^i) = v[i] on the first m points of the power-of-two roots-of-unity
domain shared with the erasure code; the commitment is g^{U(tau)} for the
trapdoor tau erased after setup. Commitments are group elements, so linear
combinations of vectors correspond to the same combinations of commitments
in the exponent: commit(a*v + b*w) = commit(v)^a * commit(w)^b. That is the
property the dispersal protocol leans on (coded columns can be checked
against encoded column commitments without seeing the other columns).

Entry openings are standard quotient-polynomial witnesses checked by one
product-of-pairings equation with both G2 arguments fixed, so their Miller
loops are precomputed once per parameter set.
"""

from __future__ import annotations

import hashlib

from . import bls12381 as bls
from . import field_code as fc
from .bls12381 import PointDecodeError  # re-exported for callers

__all__ = [
    "CommitParams",
    "PointDecodeError",
    "setup",
    "commit",
    "commit_lagrange",
    "combine",
    "encode_commitments",
    "open_entry",
    "verify_entry",
]

_TAU_TAG = b"savid/tau"
_MAGIC = b"SAVIDPP1"
_FLAG_DEV = 0x01


class CommitParams:
    """Public commitment parameters: monomial powers g^{tau^j} for
    j < max_len plus the two G2 elements needed to verify entry openings.

    The trapdoor tau never leaves setup(). Instances are immutable after
    construction apart from internal caches (prepared pairings, optional
    Lagrange-basis powers, optional small fixed-base tables), all of which
    are derived data.
    """

    def __init__(self, max_len: int, powers: list, g2, g2_tau, dev: bool = True):
        if max_len < 1:
            raise ValueError("max_len must be at least 1")
        if len(powers) != max_len:
            raise ValueError("need exactly max_len powers")
        if powers[0] != bls.G1_GEN:
            raise ValueError("powers[0] must be the group generator")
        self.max_len = max_len
        self.powers = powers
        self.g2 = g2
        self.g2_tau = g2_tau
        self.dev = dev
        self.domain_size = fc.next_pow2(max_len)
        self._prep_g2 = None
        self._prep_g2_tau = None
        self._lagrange = None
        self._gen_table = None
        self._small_tables: list = []

    # -- cached derived data -------------------------------------------------

    def prepared_g2(self):
        if self._prep_g2 is None:
            self._prep_g2 = bls.g2_prepare(self.g2)
        return self._prep_g2

    def prepared_g2_tau(self):
        if self._prep_g2_tau is None:
            self._prep_g2_tau = bls.g2_prepare(self.g2_tau)
        return self._prep_g2_tau

    def gen_table(self):
        if self._gen_table is None:
            self._gen_table = bls.g1_fixed_base_table(bls.G1_GEN)
        return self._gen_table

    def lagrange_powers(self) -> list:
        """Powers rebased to the Lagrange basis of the full evaluation
        domain (an inverse FFT carried out in the exponent). Only defined
        when max_len is itself a power of two, since the rebasing needs the
        monomial power for every domain position."""
        if self.max_len != self.domain_size:
            raise ValueError("Lagrange basis needs a power-of-two max_len")
        if self._lagrange is None:
            self._lagrange = _group_ifft(self.powers)
        return self._lagrange

    def build_small_tables(self, m: int) -> None:
        """Precompute fixed-base tables for the first m powers; commits of
        vectors no longer than m then use them. Worth the one-time cost when
        many short vectors will be committed (e.g. probing runs)."""
        while len(self._small_tables) < min(m, self.max_len):
            self._small_tables.append(
                bls.g1_fixed_base_table(self.powers[len(self._small_tables)])
            )

    def serialize(self) -> bytes:
        out = bytearray()
        out += _MAGIC
        out.append(_FLAG_DEV if self.dev else 0x00)
        out += self.max_len.to_bytes(8, "big")
        for p in self.powers:
            out += bls.g1_compress(p)
        out += bls.g2_compress(self.g2)
        out += bls.g2_compress(self.g2_tau)
        return bytes(out)

    @classmethod
    def deserialize(cls, data: bytes) -> "CommitParams":
        if len(data) < 17 or data[:8] != _MAGIC:
            raise ValueError("bad commitment parameter header")
        flag = data[8]
        max_len = int.from_bytes(data[9:17], "big")
        need = 17 + 48 * max_len + 96 * 2
        if len(data) != need:
            raise ValueError("commitment parameter file truncated")
        off = 17
        powers = []
        for _ in range(max_len):
            # curve membership is checked per point; the subgroup check is
            # batched below to keep loading large parameter sets fast
            powers.append(bls.g1_decompress(data[off : off + 48], subgroup_check=False))
            off += 48
        g2 = bls.g2_decompress(data[off : off + 96])
        g2_tau = bls.g2_decompress(data[off + 96 : off + 192])
        digest = hashlib.sha256(data).digest()
        ctr = [0]

        def source(nbytes: int) -> bytes:
            ctr[0] += 1
            return hashlib.shake_256(digest + ctr[0].to_bytes(4, "big")).digest(nbytes)

        if not bls.g1_batch_subgroup_check(powers, source):
            raise PointDecodeError("parameter powers fail the subgroup check")
        return cls(max_len, powers, g2, g2_tau, dev=bool(flag & _FLAG_DEV))

    def __repr__(self) -> str:
        return f"CommitParams(max_len={self.max_len}, dev={self.dev})"


def derive_trapdoor(seed: bytes) -> int:
    """Hash-to-field for the dev trapdoor: SHAKE-256 over a tagged seed."""
    ctr = 0
    while True:
        raw = hashlib.shake_256(_TAU_TAG + seed + ctr.to_bytes(4, "big")).digest(48)
        tau = int.from_bytes(raw, "big") % fc.MODULUS
        if tau:
            return tau
        ctr += 1


def setup(max_len: int, seed: bytes) -> CommitParams:
    """Dev-grade trusted setup: derives tau pseudorandomly from seed, emits
    the parameters and discards tau. The serialized header is flagged as
    insecure-dev; production deployments would load ceremony output instead.

    Before tau is dropped, the emitted powers are self-checked against the
    pairing relation e(powers[j+1], g2) = e(powers[j], g2^tau), batched via
    a random linear combination."""
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    if not isinstance(seed, (bytes, bytearray)):
        raise TypeError("seed must be bytes")
    tau = derive_trapdoor(bytes(seed))
    gen_table = bls.g1_fixed_base_table(bls.G1_GEN)
    powers = []
    t = 1
    for _ in range(max_len):
        powers.append(bls.g1_fixed_mul(gen_table, t))
        t = t * tau % fc.MODULUS
    g2_tau = bls.g2_mul(bls.G2_GEN, tau)
    params = CommitParams(max_len, powers, bls.G2_GEN, g2_tau, dev=True)
    params._gen_table = gen_table
    if max_len > 1:
        _check_power_chain(params)
    del tau
    return params


def _check_power_chain(params: CommitParams) -> None:
    # e(sum_j r_j powers[j+1], g2) == e(sum_j r_j powers[j], g2_tau)
    seed = hashlib.sha256(b"power-chain" + bls.g1_compress(params.powers[-1])).digest()
    coeffs = []
    for j in range(params.max_len - 1):
        coeffs.append(
            int.from_bytes(hashlib.shake_256(seed + j.to_bytes(4, "big")).digest(16), "big")
        )
    lhs = bls.g1_multiexp(params.powers[1:], coeffs)
    rhs = bls.g1_multiexp(params.powers[:-1], coeffs)
    ok = bls.pairing_product_is_one(
        [(lhs, params.prepared_g2()), (bls.g1_neg(rhs), params.prepared_g2_tau())]
    )
    if not ok:
        raise RuntimeError("generated powers fail the pairing consistency check")


# ---------------------------------------------------------------------------
# Committing
# ---------------------------------------------------------------------------


def commit(params: CommitParams, v) -> object:
    """Commit to a vector of 1..max_len field elements: g^{U(tau)} where U
    interpolates v on the leading domain points. The zero vector commits to
    the group identity."""
    m = len(v)
    if not 1 <= m <= params.max_len:
        raise ValueError("vector length out of range for these parameters")
    coeffs = fc.interpolate_prefix(list(v), params.domain_size)
    if len(params._small_tables) >= m:
        acc = None
        for j, c in enumerate(coeffs):
            if c:
                acc = bls.g1_add(acc, bls.g1_fixed_mul(params._small_tables[j], c))
        return acc
    return bls.g1_multiexp(params.powers[:m], coeffs)


def commit_lagrange(params: CommitParams, v) -> object:
    """Commitment computed in the Lagrange basis (no interpolation step);
    requires len(v) == max_len == a power of two. Must agree with commit()
    bit-exactly; kept as the independent second path."""
    lag = params.lagrange_powers()
    if len(v) != len(lag):
        raise ValueError("Lagrange path needs a full-domain-length vector")
    return bls.g1_multiexp(lag, list(v))


def combine(coeffs, comms) -> object:
    """Homomorphic combination prod_i comms[i]^{coeffs[i]}."""
    if len(coeffs) != len(comms):
        raise ValueError("coefficient/commitment length mismatch")
    if not comms:
        raise ValueError("nothing to combine")
    return bls.g1_multiexp(list(comms), [c % fc.MODULUS for c in coeffs])


def encode_commitments(code: fc.CodeParams, comms) -> list:
    """Erasure-encode commitments in the exponent: output[i] is the
    combination of comms by generator column i+1. With roots-of-unity
    evaluation points this is a group-element FFT; the result is identical
    to combining column by column."""
    if len(comms) != code.k:
        raise ValueError("need exactly k column commitments")
    comms = list(comms)
    if code.domain_size:
        return _group_fft(comms, code.domain_size)[: code.n]
    return [combine(code.generator_column(i), comms) for i in range(1, code.n + 1)]


def _group_fft(points, size: int) -> list:
    """Radix-2 FFT with group elements as coefficients: output[i] =
    sum_j points[j] * w^{ij}. Affine points (None = identity)."""
    if len(points) > size:
        raise ValueError("too many points for domain size")
    a = list(points) + [None] * (size - len(points))
    if size == 1:
        return a
    # bit-reversal permutation
    bits = size.bit_length() - 1
    for i in range(size):
        j = int(format(i, f"0{bits}b")[::-1], 2)
        if i < j:
            a[i], a[j] = a[j], a[i]
    root = fc.domain_root(size)
    length = 2
    while length <= size:
        w_step = pow(root, size // length, fc.MODULUS)
        half = length // 2
        for start in range(0, size, length):
            w = 1
            for j in range(start, start + half):
                t = bls.g1_mul(a[j + half], w)
                u = a[j]
                a[j] = bls.g1_add(u, t)
                a[j + half] = bls.g1_add(u, bls.g1_neg(t))
                w = w * w_step % fc.MODULUS
        length <<= 1
    return a


def _group_ifft(points) -> list:
    size = len(points)
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    out = _group_fft(points, size)
    # inverse transform = forward with inverted root, then scale by 1/size;
    # equivalently reverse the tail and scale
    out = [out[0]] + out[:0:-1]
    n_inv = fc.inv(size)
    return [bls.g1_mul(p, n_inv) for p in out]


# ---------------------------------------------------------------------------
# Entry openings
# ---------------------------------------------------------------------------


def open_entry(params: CommitParams, v, i: int):
    """Open position i (1-based) of v: returns (value, witness) where the
    witness commits to the quotient (U(X) - v[i]) / (X - w^{i-1})."""
    m = len(v)
    if not 1 <= i <= m:
        raise ValueError("index out of range")
    if m > params.max_len:
        raise ValueError("vector length out of range for these parameters")
    value = v[i - 1] % fc.MODULUS
    coeffs = fc.interpolate_prefix(list(v), params.domain_size)
    x = fc.domain_point(params.domain_size, i - 1)
    # synthetic division of (U - value) by (X - x)
    q = [0] * (m - 1)
    acc = 0
    for j in range(m - 1, 0, -1):
        acc = (coeffs[j] + acc * x) % fc.MODULUS
        q[j - 1] = acc
    if m == 1:
        witness = None
    else:
        witness = bls.g1_multiexp(params.powers[: m - 1], q)
    return value, witness


def verify_entry(params: CommitParams, comm, i: int, value: int, witness) -> bool:
    """Check an entry opening: the pairing relation
    e(comm * g^{-value} * witness^{x_i}, g2) * e(witness^{-1}, g2^tau) = 1
    with x_i the i-th domain point. Out-of-range indices simply fail."""
    if not 1 <= i <= params.max_len:
        return False
    value = value % fc.MODULUS
    x = fc.domain_point(params.domain_size, i - 1)
    s = bls.g1_add(comm, bls.g1_fixed_mul(params.gen_table(), (-value) % fc.MODULUS))
    s = bls.g1_add(s, bls.g1_mul(witness, x))
    return bls.pairing_product_is_one(
        [(s, params.prepared_g2()), (bls.g1_neg(witness), params.prepared_g2_tau())]
    )
