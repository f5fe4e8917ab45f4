"""Availability sampling: verifiable chunk and entry openings.

A light client that cannot download a whole block can still gain
confidence the block is available: query a few chunk indices at random
and accept only if every queried chunk arrives with a valid opening.
Chunk verification enforces consistency with the committed columns, so a
producer cannot hide data behind an invalid encoding; there is nothing
for an encoding fraud proof to prove. Entry openings complement this by
letting a full node exhibit one matrix entry to a light client (say, to
show that a committed block contains an invalid transaction) with a
constant-size witness.

Sampling verification only needs the code and the commitment parameters;
the dispersal resilience parameter t plays no role, so any (n, k) with
k <= n works here, including shapes no dispersal quorum would produce.
"""

from __future__ import annotations

import random

from . import bls12381 as bls
from . import commitments as cm
from . import core
from . import crypto_prims as cp
from . import field_code as fc

ENTRY_MAGIC = b"SAVIDEO1"


class SamplingParams:
    """The public context a sampler verifies against. Duck-compatible with
    core.SchemeParams (which also works anywhere this is accepted)."""

    __slots__ = ("code", "commit_params")

    def __init__(self, code: fc.CodeParams, commit_params):
        self.code = code
        self.commit_params = commit_params

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def k(self) -> int:
        return self.code.k

    @property
    def max_len(self) -> int:
        return self.commit_params.max_len

    @classmethod
    def make(cls, n: int, k: int, max_len: int, seed: bytes) -> "SamplingParams":
        return cls(fc.CodeParams.make(n, k), cm.setup(max_len, seed))

    @classmethod
    def from_scheme(cls, scheme: core.SchemeParams) -> "SamplingParams":
        return cls(scheme.code, scheme.commit_params)

    def __repr__(self) -> str:
        return f"SamplingParams(n={self.n}, k={self.k}, max_len={self.max_len})"


class ChunkOpening:
    """A chunk plus the column commitments: everything a sampler needs to
    check the chunk against a block commitment."""

    __slots__ = ("chunk", "commitments")

    def __init__(self, chunk: core.Chunk, commitments):
        self.chunk = chunk
        self.commitments = list(commitments)

    def serialize(self) -> bytes:
        return core.chunk_to_bytes(self.chunk, self.commitments)

    @classmethod
    def deserialize(cls, data: bytes) -> "ChunkOpening":
        chunk, comms = core.chunk_from_bytes(data)
        return cls(chunk, comms)

    def __eq__(self, other):
        return (
            isinstance(other, ChunkOpening)
            and self.chunk == other.chunk
            and self.commitments == other.commitments
        )

    def __repr__(self) -> str:
        return f"ChunkOpening(index={self.chunk.node_index})"


class EntryOpening:
    """One matrix entry with a constant-size witness: value, 1-based (row,
    column), the column commitments, and the commitment opening witness."""

    __slots__ = ("value", "row", "col", "commitments", "witness")

    def __init__(self, value: int, row: int, col: int, commitments, witness):
        self.value = value
        self.row = row
        self.col = col
        self.commitments = list(commitments)
        self.witness = witness

    def serialize(self) -> bytes:
        out = bytearray()
        out += ENTRY_MAGIC
        out += self.row.to_bytes(4, "big")
        out += self.col.to_bytes(2, "big")
        out += fc.fr_to_bytes(self.value)
        out += len(self.commitments).to_bytes(2, "big")
        for c in self.commitments:
            out += bls.g1_compress(c)
        out += bls.g1_compress(self.witness)
        return bytes(out)

    @classmethod
    def deserialize(cls, data: bytes) -> "EntryOpening":
        if len(data) < 48 or data[:8] != ENTRY_MAGIC:
            raise ValueError("bad entry opening header")
        row = int.from_bytes(data[8:12], "big")
        col = int.from_bytes(data[12:14], "big")
        value = fc.fr_from_bytes(data[14:46])
        k = int.from_bytes(data[46:48], "big")
        if len(data) != 48 + 48 * (k + 1):
            raise ValueError("entry opening length mismatch")
        off = 48
        comms = []
        for _ in range(k):
            comms.append(bls.g1_decompress(data[off : off + 48]))
            off += 48
        witness = bls.g1_decompress(data[off : off + 48])
        return cls(value, row, col, comms, witness)

    def __eq__(self, other):
        return (
            isinstance(other, EntryOpening)
            and self.value == other.value
            and self.row == other.row
            and self.col == other.col
            and self.commitments == other.commitments
            and self.witness == other.witness
        )

    def __repr__(self) -> str:
        return f"EntryOpening(row={self.row}, col={self.col})"


def _commit_columns(params, matrix: core.DataMatrix):
    if matrix.cols != params.k:
        raise ValueError("matrix width must equal k")
    if matrix.rows > params.max_len:
        raise ValueError("matrix too tall for the commitment parameters")
    return [cm.commit(params.commit_params, col) for col in matrix.columns]


def open_chunk(params, matrix: core.DataMatrix, i: int) -> ChunkOpening:
    """Honest opening of chunk i for the matrix: its coded column and the
    column commitments."""
    if not 1 <= i <= params.n:
        raise ValueError("chunk index out of range")
    comms = _commit_columns(params, matrix)
    g = params.code.generator_column(i)
    column = [
        sum(g[j] * matrix.columns[j][r] for j in range(matrix.cols)) % fc.MODULUS
        for r in range(matrix.rows)
    ]
    return ChunkOpening(core.Chunk(i, column), comms)


def verify_chunk(params, commitment: bytes, opening: ChunkOpening) -> bool:
    """The per-sample light-client check: the commitments hash to the block
    commitment, and the chunk column commits to the encoding of the column
    commitments at the chunk's index."""
    comms = opening.commitments
    if len(comms) != params.k:
        return False
    if cp.hash_commitments(comms) != commitment:
        return False
    i = opening.chunk.node_index
    if not 1 <= i <= params.n:
        return False
    expected = cm.combine(params.code.generator_column(i), comms)
    return core.chunk_matches(params, expected, opening.chunk)


def open_entry_das(params, matrix: core.DataMatrix, i: int, j: int) -> EntryOpening:
    """Witnessed opening of the matrix entry at row i, column j (1-based)."""
    if not 1 <= i <= matrix.rows:
        raise ValueError("row index out of range")
    if not 1 <= j <= matrix.cols:
        raise ValueError("column index out of range")
    comms = _commit_columns(params, matrix)
    column = matrix.columns[j - 1]
    value, witness = cm.open_entry(params.commit_params, column, i)
    return EntryOpening(value, i, j, comms, witness)


def verify_entry_das(params, commitment: bytes, opening: EntryOpening) -> bool:
    """Check an entry opening against the block commitment: the commitments
    hash to it and the witness proves the value against column j at row i."""
    comms = opening.commitments
    if len(comms) != params.k:
        return False
    if cp.hash_commitments(comms) != commitment:
        return False
    if not 1 <= opening.col <= len(comms):
        return False
    return cm.verify_entry(
        params.commit_params,
        comms[opening.col - 1],
        opening.row,
        opening.value,
        opening.witness,
    )


class SampleReport:
    """Outcome of one light client's sampling round."""

    __slots__ = ("accepted", "queried", "covered")

    def __init__(self, accepted: bool, queried: list[int], covered: list[int]):
        self.accepted = accepted
        self.queried = queried
        self.covered = covered

    def __repr__(self) -> str:
        return f"SampleReport(accepted={self.accepted}, covered={len(self.covered)}/{len(self.queried)})"


def light_sample(params, commitment: bytes, num_queries: int, responder, rng_seed) -> SampleReport:
    """One light client's availability check. Queries num_queries distinct
    indices drawn uniformly without replacement from [1, n]; accepts only if
    every query returns a verifying opening for the queried index. Silence
    counts as withheld data and rejects. The report lists the queried
    indices (query order) and the distinct indices whose openings verified.

    `responder` is a callable index -> ChunkOpening | None.
    """
    if num_queries < 1:
        raise ValueError("need at least one query")
    if num_queries > params.n:
        raise ValueError("cannot draw more distinct indices than there are nodes")
    rng = random.Random(rng_seed)
    queried = rng.sample(range(1, params.n + 1), num_queries)
    covered = []
    accepted = True
    for i in queried:
        opening = responder(i)
        if opening is None or opening.chunk.node_index != i:
            accepted = False
            continue
        if verify_chunk(params, commitment, opening):
            covered.append(i)
        else:
            accepted = False
    return SampleReport(accepted, queried, sorted(covered))
