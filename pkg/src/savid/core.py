"""The dispersal scheme proper: block packing, client-side encoding and
commitment, per-node chunk verification, certificates of retrievability,
and retrieval.

The flow: a block B packs into an L x k field-element matrix U (column
major). The client commits to each column (h_1..h_k), erasure-codes U
row-wise into an L x n matrix, and sends node i the commitments plus coded
column c_i. Node i checks the single equation

    [Encode(h_1, ..., h_k)]_i == VC(c_i)

which holds exactly when c_i is consistent with the committed columns,
thanks to the commitment's linear homomorphism. Honest nodes sign a receipt
over the block commitment C = CRHF(h_1 || ... || h_k); q = n - t receipts
form a certificate. Retrieval needs any k = n - 2t chunks that pass the
same check, so t malicious certificate signers cannot block it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from . import commitments as cm
from . import crypto_prims as cp
from . import field_code as fc

# Wire-message type tags (1 byte each on serialized transports).
MSG_DISPERSE = 0x01
MSG_STORED = 0x02
MSG_RETRIEVE = 0x03
MSG_CHUNK_RESP = 0x04

CHUNK_MAGIC = b"SAVIDCH1"
CERT_MAGIC = b"SAVIDCR1"

_BYTES_PER_ELEMENT = 31  # payload bytes packed per field element (< 32 keeps
# every packed value canonical for the 255-bit modulus)


class DispersalError(Exception):
    """Dispersal could not assemble a quorum of valid receipts."""


class CertificateError(Exception):
    """Certificate fails verification for the claimed commitment."""


class RetrievalError(Exception):
    """Fewer than k chunks passed verification."""


class CommitmentMismatchError(Exception):
    """No response carried column commitments hashing to the target."""


class UnpackError(ValueError):
    """Decoded matrix does not carry a well-formed packed block."""


def choose_params(n: int, t: int) -> tuple[int, int]:
    """Receipt quorum and code dimension for n nodes tolerating t faults:
    q = n - t, k = n - 2t. Requires t < n/2 (the resilience bound)."""
    if n < 1:
        raise ValueError("need at least one node")
    if t < 0 or 2 * t >= n:
        raise ValueError("resilience bound requires t < n/2")
    return n - t, n - 2 * t


# ---------------------------------------------------------------------------
# Block packing
# ---------------------------------------------------------------------------


class DataMatrix:
    """L x k matrix of field elements, stored column-major (the unit of
    commitment is a column)."""

    __slots__ = ("rows", "cols", "columns")

    def __init__(self, columns: list[list[int]]):
        if not columns or not columns[0]:
            raise ValueError("matrix must be nonempty")
        L = len(columns[0])
        if any(len(c) != L for c in columns):
            raise ValueError("ragged columns")
        self.rows = L
        self.cols = len(columns)
        self.columns = columns

    def row(self, r: int) -> list[int]:
        return [c[r] for c in self.columns]

    def __eq__(self, other):
        return isinstance(other, DataMatrix) and self.columns == other.columns

    def __repr__(self) -> str:
        return f"DataMatrix({self.rows}x{self.cols})"


def packed_shape(block_len: int, k: int) -> tuple[int, int]:
    """(L, total_elements) for a block of block_len bytes at dimension k:
    one header element plus ceil(block_len/31) payload elements, rows
    L = ceil(total/k)."""
    total = 1 + (block_len + _BYTES_PER_ELEMENT - 1) // _BYTES_PER_ELEMENT
    return (total + k - 1) // k, total


def as_matrix(block: bytes, k: int) -> DataMatrix:
    """Pack bytes into an L x k matrix: element 0 is |B|, then 31 payload
    bytes per element (little-endian), zero-padded to fill L*k; elements
    fill column 1 top to bottom, then column 2, and so on."""
    if not block:
        raise ValueError("block must be nonempty")
    if k < 1:
        raise ValueError("k must be positive")
    L, total = packed_shape(len(block), k)
    elements = [len(block)]
    for off in range(0, len(block), _BYTES_PER_ELEMENT):
        elements.append(int.from_bytes(block[off : off + _BYTES_PER_ELEMENT], "little"))
    elements.extend([0] * (L * k - total))
    return DataMatrix([elements[j * L : (j + 1) * L] for j in range(k)])


def from_matrix(matrix: DataMatrix) -> bytes:
    """Invert as_matrix. Rejects matrices whose length header is
    inconsistent with the matrix shape, and payload elements that are not
    valid 31-byte packings."""
    elements = [x for col in matrix.columns for x in col]
    size = elements[0]
    if size < 1:
        raise UnpackError("length header must be positive")
    n_payload = (size + _BYTES_PER_ELEMENT - 1) // _BYTES_PER_ELEMENT
    expected_rows = (1 + n_payload + matrix.cols - 1) // matrix.cols
    if expected_rows != matrix.rows:
        raise UnpackError("length header inconsistent with matrix shape")
    out = bytearray()
    for e in elements[1 : 1 + n_payload]:
        if e >> (8 * _BYTES_PER_ELEMENT):
            raise UnpackError("payload element exceeds packing range")
        out += int(e).to_bytes(_BYTES_PER_ELEMENT, "little")
    tail = out[size:]
    if any(tail) or any(elements[1 + n_payload :]):
        raise UnpackError("nonzero padding beyond the declared length")
    return bytes(out[:size])


# ---------------------------------------------------------------------------
# Scheme parameters and chunks
# ---------------------------------------------------------------------------


class SchemeParams:
    """Everything public that clients and nodes share: the code, the
    commitment parameters, and each node's verification key."""

    def __init__(self, n: int, t: int, code: fc.CodeParams, commit_params, node_pks):
        q, k = choose_params(n, t)
        if code.n != n or code.k != k:
            raise ValueError("code dimensions do not match (n, k)")
        if len(node_pks) != n:
            raise ValueError("need one public key per node")
        if n > 0xFFFF:
            raise ValueError("node count exceeds the 2-byte index space")
        self.n = n
        self.t = t
        self.q = q
        self.k = k
        self.code = code
        self.commit_params = commit_params
        self.node_pks = list(node_pks)

    @property
    def max_len(self) -> int:
        return self.commit_params.max_len

    @classmethod
    def create(cls, n: int, t: int, max_len: int, seed: bytes):
        """Dev-grade local setup of all parties: commitment parameters and
        node keys from one seed. Returns (params, node_secret_keys)."""
        _, k = choose_params(n, t)
        code = fc.CodeParams.make(n, k)
        commit = cm.setup(max_len, seed + b"/commit")
        sks = cp.node_keys(n, seed + b"/keys")
        pks = [sk.public_key() for sk in sks]
        return cls(n, t, code, commit, pks), sks

    def __repr__(self) -> str:
        return f"SchemeParams(n={self.n}, t={self.t}, q={self.q}, k={self.k})"


class Chunk:
    """One coded column, tagged with its 1-based node index."""

    __slots__ = ("node_index", "column")

    def __init__(self, node_index: int, column: list[int]):
        if node_index < 1:
            raise ValueError("node index is 1-based")
        self.node_index = node_index
        self.column = column

    def __eq__(self, other):
        return (
            isinstance(other, Chunk)
            and self.node_index == other.node_index
            and self.column == other.column
        )

    def __repr__(self) -> str:
        return f"Chunk(node={self.node_index}, L={len(self.column)})"


def chunk_to_bytes(chunk: Chunk, comms) -> bytes:
    """Chunk file: magic, node index, L, k, the column commitments it was
    verified against, then the column elements."""
    from . import bls12381 as bls

    out = bytearray()
    out += CHUNK_MAGIC
    out += chunk.node_index.to_bytes(2, "big")
    out += len(chunk.column).to_bytes(8, "big")
    out += len(comms).to_bytes(2, "big")
    for c in comms:
        out += bls.g1_compress(c)
    for x in chunk.column:
        out += fc.fr_to_bytes(x)
    return bytes(out)


def chunk_from_bytes(data: bytes) -> tuple[Chunk, list]:
    from . import bls12381 as bls

    if len(data) < 20 or data[:8] != CHUNK_MAGIC:
        raise ValueError("bad chunk header")
    idx = int.from_bytes(data[8:10], "big")
    L = int.from_bytes(data[10:18], "big")
    k = int.from_bytes(data[18:20], "big")
    if len(data) != 20 + 48 * k + 32 * L:
        raise ValueError("chunk file length mismatch")
    off = 20
    comms = []
    for _ in range(k):
        comms.append(bls.g1_decompress(data[off : off + 48]))
        off += 48
    column = []
    for _ in range(L):
        column.append(fc.fr_from_bytes(data[off : off + 32]))
        off += 32
    return Chunk(idx, column), comms


class RetrievabilityCertificate:
    """At least q receipts for one block commitment, canonically ordered by
    ascending node index with no duplicates."""

    __slots__ = ("commitment", "receipts")

    def __init__(self, commitment: bytes, receipts):
        if len(commitment) != cp.COMMITMENT_BYTES:
            raise ValueError("commitment must be 32 bytes")
        # duplicates are representable (they arrive off the wire); they
        # simply never count twice in verify_certificate
        self.commitment = commitment
        self.receipts = sorted(receipts, key=lambda r: r.node_index)

    def node_indices(self) -> list[int]:
        return [r.node_index for r in self.receipts]

    def serialize(self) -> bytes:
        out = bytearray()
        out += CERT_MAGIC
        out += self.commitment
        out += len(self.receipts).to_bytes(2, "big")
        for r in self.receipts:
            out += r.serialize()
        return bytes(out)

    @classmethod
    def deserialize(cls, data: bytes) -> "RetrievabilityCertificate":
        if len(data) < 42 or data[:8] != CERT_MAGIC:
            raise ValueError("bad certificate header")
        commitment = data[8:40]
        count = int.from_bytes(data[40:42], "big")
        if len(data) != 42 + count * cp.RECEIPT_BYTES:
            raise ValueError("certificate length mismatch")
        receipts = []
        off = 42
        for _ in range(count):
            receipts.append(cp.StorageReceipt.deserialize(data[off : off + cp.RECEIPT_BYTES]))
            off += cp.RECEIPT_BYTES
        return cls(commitment, receipts)

    def __repr__(self) -> str:
        return f"RetrievabilityCertificate({len(self.receipts)} receipts)"


# ---------------------------------------------------------------------------
# Client-side operations
# ---------------------------------------------------------------------------


def _pmap(fn, items, threads: int):
    """Order-preserving map, optionally on a thread pool. Results are
    bit-identical regardless of thread count (fn must be pure)."""
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def commit_block(params: SchemeParams, block: bytes, threads: int = 1) -> bytes:
    """The block commitment C: hash of the per-column commitments of the
    packed matrix."""
    matrix = as_matrix(block, params.k)
    if matrix.rows > params.max_len:
        raise ValueError("block too large for the commitment parameters")
    comms = _pmap(lambda col: cm.commit(params.commit_params, col), matrix.columns, threads)
    return cp.hash_commitments(comms)


def client_encode(params: SchemeParams, block: bytes, threads: int = 1):
    """Commitments and coded chunks for dispersal: per-column commitments
    of U and the n columns of the row-wise encoding of U."""
    matrix = as_matrix(block, params.k)
    if matrix.rows > params.max_len:
        raise ValueError("block too large for the commitment parameters")
    comms = _pmap(lambda col: cm.commit(params.commit_params, col), matrix.columns, threads)
    coded_rows = _pmap(
        lambda r: fc.encode(params.code, matrix.row(r)), range(matrix.rows), threads
    )
    chunks = [
        Chunk(i, [coded_rows[r][i - 1] for r in range(matrix.rows)])
        for i in range(1, params.n + 1)
    ]
    return comms, chunks


def encode_matrix(params: SchemeParams, matrix: DataMatrix, threads: int = 1):
    """client_encode for an already-packed matrix (used by the blinding
    layer and the sampling API)."""
    if matrix.cols != params.k:
        raise ValueError("matrix width must equal k")
    if matrix.rows > params.max_len:
        raise ValueError("matrix too tall for the commitment parameters")
    comms = _pmap(lambda col: cm.commit(params.commit_params, col), matrix.columns, threads)
    coded_rows = _pmap(
        lambda r: fc.encode(params.code, matrix.row(r)), range(matrix.rows), threads
    )
    chunks = [
        Chunk(i, [coded_rows[r][i - 1] for r in range(matrix.rows)])
        for i in range(1, params.n + 1)
    ]
    return comms, chunks


# ---------------------------------------------------------------------------
# Node-side operations
# ---------------------------------------------------------------------------


class NodeState:
    """A storage node: its index, signing key, and verified-chunk store."""

    def __init__(self, node_index: int, sk):
        self.node_index = node_index
        self.sk = sk
        self.store: dict[bytes, tuple[list, Chunk]] = {}


def chunk_matches(params: SchemeParams, expected_comm, chunk: Chunk) -> bool:
    """The consistency check: does the chunk column commit to the encoded
    column commitment expected at its index?"""
    if not chunk.column or len(chunk.column) > params.max_len:
        return False
    if any(not 0 <= x < fc.MODULUS for x in chunk.column):
        return False
    return cm.commit(params.commit_params, chunk.column) == expected_comm


def node_verify_chunk(params: SchemeParams, state: NodeState, comms, chunk: Chunk):
    """Node side of dispersal: verify the received chunk against the encoded
    column commitments; store it and return a signed receipt on success,
    return None (abort, no state change) on mismatch."""
    if chunk.node_index != state.node_index:
        return None
    if len(comms) != params.k:
        return None
    expected = cm.combine(params.code.generator_column(chunk.node_index), comms)
    if not chunk_matches(params, expected, chunk):
        return None
    commitment = cp.hash_commitments(comms)
    state.store[commitment] = (list(comms), chunk)
    return cp.sign_receipt(state.sk, state.node_index, commitment)


def node_handle_disperse(params, state, comms, chunk):
    return node_verify_chunk(params, state, comms, chunk)


def node_handle_retrieve(params: SchemeParams, state: NodeState, commitment: bytes):
    """Node side of retrieval: return the stored (commitments, chunk) for the
    requested block commitment, or None if we hold nothing for it."""
    return state.store.get(commitment)


# ---------------------------------------------------------------------------
# Dispersal and retrieval over a transport
# ---------------------------------------------------------------------------


class LoopbackTransport:
    """All n nodes in-process; messages delivered synchronously in index
    order. The simulator has its own event-driven transport instead."""

    def __init__(self, params: SchemeParams, states: list[NodeState]):
        self.params = params
        self.states = {s.node_index: s for s in states}

    def send_disperse(self, node_index: int, comms, chunk: Chunk):
        return node_handle_disperse(self.params, self.states[node_index], comms, chunk)

    def request_chunk(self, node_index: int, commitment: bytes):
        return node_handle_retrieve(self.params, self.states[node_index], commitment)


def disperse(params: SchemeParams, block: bytes, transport, threads: int = 1):
    """Client side of dispersal: encode, push a chunk to every node, collect
    the first q valid receipts (arrival order; loopback arrival equals index
    order). Returns (commitment, certificate)."""
    comms, chunks = client_encode(params, block, threads)
    return disperse_encoded(params, comms, chunks, transport)


def disperse_matrix(params: SchemeParams, matrix: DataMatrix, transport, threads: int = 1):
    """disperse() for an already-packed matrix (the blinding layer augments
    the matrix before encoding, so it cannot go through bytes)."""
    comms, chunks = encode_matrix(params, matrix, threads)
    return disperse_encoded(params, comms, chunks, transport)


def disperse_encoded(params: SchemeParams, comms, chunks, transport):
    commitment = cp.hash_commitments(comms)
    receipts = []
    for i in range(1, params.n + 1):
        receipt = transport.send_disperse(i, comms, chunks[i - 1])
        if receipt is None or receipt.node_index != i:
            continue
        if not cp.verify_receipt(params.node_pks[i - 1], commitment, receipt):
            continue
        receipts.append(receipt)
        if len(receipts) == params.q:
            break
    if len(receipts) < params.q:
        raise DispersalError(
            f"only {len(receipts)} valid receipts, quorum is {params.q}"
        )
    return commitment, RetrievabilityCertificate(commitment, receipts)


def verify_certificate(params: SchemeParams, cert: RetrievabilityCertificate, commitment: bytes) -> bool:
    """The certificate must carry receipts from at least q distinct nodes,
    each verifying over (stored, commitment) under that node's key."""
    valid = set()
    for r in cert.receipts:
        if not 1 <= r.node_index <= params.n or r.node_index in valid:
            continue
        if cp.verify_receipt(params.node_pks[r.node_index - 1], commitment, r):
            valid.add(r.node_index)
    return len(valid) >= params.q


def retrieve_from_responses(params: SchemeParams, commitment: bytes, responses, unpack=None) -> bytes:
    """Retrieval core: responses are (node_index, comms, chunk) triples in
    arrival order. Picks the first commitment vector hashing to the target,
    encodes it in the exponent, keeps chunks that match at their index, and
    decodes from the k lowest-indexed valid chunks. `unpack` turns decoded
    info columns into the result (raising UnpackError to reject a candidate
    decode); the default unpacks a byte block."""
    if unpack is None:
        unpack = _unpack_decoded
    comms = None
    for _, resp_comms, _ in responses:
        if resp_comms is not None and len(resp_comms) == params.k:
            if cp.hash_commitments(resp_comms) == commitment:
                comms = resp_comms
                break
    if comms is None:
        raise CommitmentMismatchError("no response matches the block commitment")
    encoded = cm.encode_commitments(params.code, comms)
    valid: dict[int, Chunk] = {}
    for node_index, _, chunk in responses:
        if chunk is None or node_index in valid:
            continue
        if chunk.node_index != node_index or not 1 <= node_index <= params.n:
            continue
        if chunk_matches(params, encoded[node_index - 1], chunk):
            valid[node_index] = chunk
    # A commitment pins a polynomial, not a length: vectors of different
    # lengths evaluating the same polynomial verify equally, so valid chunks
    # can disagree on length. Honest chunks share the dispersed length and
    # at least k of them exist, so decoding some length group must succeed;
    # groups where an adversary padded extra evaluations fail the unpack
    # header check and are skipped.
    by_length: dict[int, list[int]] = {}
    for i, c in valid.items():
        by_length.setdefault(len(c.column), []).append(i)
    if not any(len(v) >= params.k for v in by_length.values()):
        raise RetrievalError(
            f"only {len(valid)} valid chunks, need {params.k} (availability violated)"
        )
    for length in sorted(by_length, key=lambda m: (-len(by_length[m]), m)):
        indices = sorted(by_length[length])
        if len(indices) < params.k:
            continue
        indices = indices[: params.k]
        columns = [valid[i].column for i in indices]
        info_columns = fc.decode_matrix(params.code, indices, columns)
        try:
            return unpack(info_columns)
        except UnpackError:
            continue
    raise RetrievalError("no group of k valid chunks unpacked to a block")


def _unpack_decoded(info_columns: list[list[int]]) -> bytes:
    matrix = DataMatrix(info_columns)
    try:
        return from_matrix(matrix)
    except UnpackError:
        # rows decode independently, so a group padded with extra valid
        # evaluations still carries the true block in its leading rows;
        # the header says how many
        size = info_columns[0][0]
        if size >= 1:
            implied, _ = packed_shape(size, matrix.cols)
            if 0 < implied < matrix.rows:
                return from_matrix(DataMatrix([c[:implied] for c in info_columns]))
        raise


def retrieve(params: SchemeParams, cert: RetrievabilityCertificate, commitment: bytes, transport, unpack=None) -> bytes:
    """Client side of retrieval over a transport: query the certificate's
    nodes and decode. The certificate is re-verified defensively."""
    if not verify_certificate(params, cert, commitment):
        raise CertificateError("certificate does not verify for this commitment")
    responses = []
    for i in cert.node_indices():
        stored = transport.request_chunk(i, commitment)
        if stored is None:
            continue
        resp_comms, chunk = stored
        responses.append((i, resp_comms, chunk))
    return retrieve_from_responses(params, commitment, responses, unpack)
