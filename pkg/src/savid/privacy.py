"""Blinding: hide dispersed data from individual storage nodes.

A node holding one coded chunk of a plain block can read a linear mix of
the block's columns, which leaks. The fix is client-side only: augment the
packed matrix U with a uniformly random column b and row s,

    [ U  b ]
    [  s   ]

and disperse the augmented matrix through the unchanged pipeline. Every
coded column a node then receives includes a fresh multiple of the random
column, acting as a one-time pad, so a single chunk on its own carries no
information about U. This says nothing about colluding nodes; two nodes
can cancel the pad.

Randomness comes from a seeded SHAKE-256 stream so simulator runs are
reproducible. Production callers should pass fresh OS entropy as the seed
(os.urandom(32)); nothing here enforces that.
"""

from __future__ import annotations

import hashlib

from . import core
from . import field_code as fc

_BLIND_TAG = b"savid/blind"


def _field_elements(seed: bytes, label: bytes, count: int) -> list[int]:
    out = []
    for j in range(count):
        raw = hashlib.shake_256(
            _BLIND_TAG + label + seed + j.to_bytes(4, "big")
        ).digest(48)
        out.append(int.from_bytes(raw, "big") % fc.MODULUS)
    return out


def blind(matrix: core.DataMatrix, seed: bytes) -> core.DataMatrix:
    """Append a random column and a random row: (L-1) x (k-1) in,
    L x k out, original entries in the top-left block."""
    if matrix.rows < 1 or matrix.cols < 1:
        raise ValueError("nothing to blind")
    b = _field_elements(seed, b"/col", matrix.rows)
    s = _field_elements(seed, b"/row", matrix.cols + 1)
    columns = [list(c) + [s[j]] for j, c in enumerate(matrix.columns)]
    columns.append(b + [s[matrix.cols]])
    return core.DataMatrix(columns)


def unblind(matrix: core.DataMatrix) -> core.DataMatrix:
    """Drop the blinding column and row (the inverse of blind)."""
    if matrix.rows < 2 or matrix.cols < 2:
        raise ValueError("matrix too small to carry blinding")
    return core.DataMatrix([list(c[:-1]) for c in matrix.columns[:-1]])


def blind_block(params: core.SchemeParams, block: bytes, seed: bytes) -> core.DataMatrix:
    """Pack a block at width k-1 and blind it up to the scheme's k."""
    if params.k < 2:
        raise ValueError("blinding needs k >= 2 (one data column plus the pad)")
    inner = core.as_matrix(block, params.k - 1)
    blinded = blind(inner, seed)
    if blinded.rows > params.max_len:
        raise ValueError("block too large for the commitment parameters once blinded")
    return blinded


def unpack_blinded(info_columns: list[list[int]]) -> bytes:
    """Unpack step for retrieving a blinded block: strip the blinding, then
    unpack the inner matrix. Used as the `unpack` hook of core.retrieve."""
    matrix = core.DataMatrix(info_columns)
    if matrix.rows < 2 or matrix.cols < 2:
        raise core.UnpackError("decoded matrix too small to carry blinding")
    try:
        return core.from_matrix(unblind(matrix))
    except core.UnpackError:
        # same situation as the plain path: chunks padded with extra valid
        # evaluations decode to extra rows below the blinding row, and the
        # header pins how many rows the dispersed matrix really had
        size = info_columns[0][0]
        if size >= 1:
            implied = core.packed_shape(size, matrix.cols - 1)[0] + 1
            if 2 <= implied < matrix.rows:
                trimmed = core.DataMatrix([c[:implied] for c in info_columns])
                return core.from_matrix(unblind(trimmed))
        raise


def disperse_blinded(params: core.SchemeParams, block: bytes, transport, seed: bytes, threads: int = 1):
    """disperse() with blinding; same (commitment, certificate) contract."""
    return core.disperse_matrix(params, blind_block(params, block, seed), transport, threads)


def retrieve_blinded(params: core.SchemeParams, cert, commitment: bytes, transport) -> bytes:
    """retrieve() for a block dispersed via disperse_blinded."""
    return core.retrieve(params, cert, commitment, transport, unpack=unpack_blinded)
