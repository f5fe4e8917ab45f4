import random

import pytest

from savid import core, das
from savid import crypto_prims as cp
from savid import field_code as fc

P = fc.MODULUS

PARAMS = das.SamplingParams.make(8, 3, 8, b"das-test")


def random_matrix(rng, rows, cols):
    return core.DataMatrix(
        [[rng.randrange(P) for _ in range(rows)] for _ in range(cols)]
    )


def block_commitment(params, matrix):
    return cp.hash_commitments(das._commit_columns(params, matrix))


def test_chunk_opening_completeness():
    rng = random.Random(0)
    m = random_matrix(rng, 4, 3)
    c = block_commitment(PARAMS, m)
    for i in range(1, PARAMS.n + 1):
        opening = das.open_chunk(PARAMS, m, i)
        assert das.verify_chunk(PARAMS, c, opening)


def test_chunk_opening_matches_dispersal_encoding():
    # open_chunk and the dispersal encoder must agree on every column
    scheme, _ = core.SchemeParams.create(8, 2, 16, b"das-compat")
    block = random.Random(1).randbytes(200)
    comms, chunks = core.client_encode(scheme, block)
    c = cp.hash_commitments(comms)
    m = core.as_matrix(block, scheme.k)
    for i in (1, 4, 8):
        opening = das.open_chunk(scheme, m, i)
        assert opening.chunk == chunks[i - 1]
        assert opening.commitments == comms
        assert das.verify_chunk(scheme, c, opening)
        # two independently produced valid openings agree (consistency)
        assert das.verify_chunk(scheme, c, das.ChunkOpening(chunks[i - 1], comms))


def test_chunk_opening_k1_carries_single_commitment():
    params = das.SamplingParams.make(4, 1, 8, b"das-k1")
    m = random_matrix(random.Random(2), 3, 1)
    c = block_commitment(params, m)
    for i in range(1, 5):
        opening = das.open_chunk(params, m, i)
        assert len(opening.commitments) == 1
        assert das.verify_chunk(params, c, opening)


def test_chunk_opening_index_relabel_fails():
    rng = random.Random(3)
    m = random_matrix(rng, 4, 3)
    c = block_commitment(PARAMS, m)
    opening = das.open_chunk(PARAMS, m, 2)
    relabeled = das.ChunkOpening(core.Chunk(5, opening.chunk.column), opening.commitments)
    assert not das.verify_chunk(PARAMS, c, relabeled)
    out_of_range = das.ChunkOpening(core.Chunk(9, opening.chunk.column), opening.commitments)
    assert not das.verify_chunk(PARAMS, c, out_of_range)


def test_chunk_opening_flipped_element_fails():
    rng = random.Random(4)
    m = random_matrix(rng, 4, 3)
    c = block_commitment(PARAMS, m)
    opening = das.open_chunk(PARAMS, m, 6)
    bad = [list(opening.chunk.column)]
    bad[0][2] = (bad[0][2] + 1) % P
    assert not das.verify_chunk(PARAMS, c, das.ChunkOpening(core.Chunk(6, bad[0]), opening.commitments))


def test_chunk_opening_wrong_commitment_hash_fails():
    rng = random.Random(5)
    m = random_matrix(rng, 4, 3)
    opening = das.open_chunk(PARAMS, m, 1)
    assert not das.verify_chunk(PARAMS, bytes(32), opening)


def test_invalid_row_encoding_fails_everywhere():
    # producer commits to U but codes one row with a different polynomial;
    # every index then fails verification
    rng = random.Random(6)
    m = random_matrix(rng, 4, 3)
    c = block_commitment(PARAMS, m)
    comms = das._commit_columns(PARAMS, m)
    rows = [fc.encode(PARAMS.code, m.row(r)) for r in range(m.rows)]
    rows[0] = fc.encode(PARAMS.code, [rng.randrange(P) for _ in range(3)])
    for i in range(1, PARAMS.n + 1):
        column = [rows[r][i - 1] for r in range(m.rows)]
        opening = das.ChunkOpening(core.Chunk(i, column), comms)
        assert not das.verify_chunk(PARAMS, c, opening)


def test_open_chunk_validation():
    m = random_matrix(random.Random(7), 4, 3)
    with pytest.raises(ValueError):
        das.open_chunk(PARAMS, m, 0)
    with pytest.raises(ValueError):
        das.open_chunk(PARAMS, m, 9)
    with pytest.raises(ValueError):
        das.open_chunk(PARAMS, random_matrix(random.Random(8), 4, 2), 1)
    with pytest.raises(ValueError):
        das.open_chunk(PARAMS, random_matrix(random.Random(9), 9, 3), 1)


# --- entry openings ---------------------------------------------------------


def test_entry_opening_completeness():
    rng = random.Random(10)
    m = random_matrix(rng, 4, 3)
    c = block_commitment(PARAMS, m)
    for i, j in [(1, 1), (4, 3), (2, 2), (3, 1)]:
        opening = das.open_entry_das(PARAMS, m, i, j)
        assert opening.value == m.columns[j - 1][i - 1]
        assert das.verify_entry_das(PARAMS, c, opening)


def test_entry_opening_wrong_value_fails():
    rng = random.Random(11)
    m = random_matrix(rng, 4, 3)
    c = block_commitment(PARAMS, m)
    opening = das.open_entry_das(PARAMS, m, 2, 3)
    forged = das.EntryOpening(
        (opening.value + 1) % P, opening.row, opening.col, opening.commitments, opening.witness
    )
    assert not das.verify_entry_das(PARAMS, c, forged)


def test_entry_witness_transplant_fails():
    rng = random.Random(12)
    m = random_matrix(rng, 4, 3)
    c = block_commitment(PARAMS, m)
    opening = das.open_entry_das(PARAMS, m, 2, 1)
    moved = das.EntryOpening(opening.value, opening.row, 2, opening.commitments, opening.witness)
    assert not das.verify_entry_das(PARAMS, c, moved)
    # but when two columns are identical the transplant is genuinely valid
    col = [rng.randrange(P) for _ in range(4)]
    twin = core.DataMatrix([list(col), list(col), [rng.randrange(P) for _ in range(4)]])
    c2 = block_commitment(PARAMS, twin)
    op = das.open_entry_das(PARAMS, twin, 3, 1)
    dup = das.EntryOpening(op.value, op.row, 2, op.commitments, op.witness)
    assert das.verify_entry_das(PARAMS, c2, dup)


def test_entry_opening_range_checks():
    m = random_matrix(random.Random(13), 4, 3)
    c = block_commitment(PARAMS, m)
    with pytest.raises(ValueError):
        das.open_entry_das(PARAMS, m, 0, 1)
    with pytest.raises(ValueError):
        das.open_entry_das(PARAMS, m, 5, 1)
    with pytest.raises(ValueError):
        das.open_entry_das(PARAMS, m, 1, 4)
    opening = das.open_entry_das(PARAMS, m, 1, 1)
    bad_col = das.EntryOpening(opening.value, 1, 7, opening.commitments, opening.witness)
    assert not das.verify_entry_das(PARAMS, c, bad_col)
    bad_row = das.EntryOpening(opening.value, 99, 1, opening.commitments, opening.witness)
    assert not das.verify_entry_das(PARAMS, c, bad_row)


def test_entry_values_match_decoded_chunks():
    # a verified entry equals the corresponding entry of the matrix decoded
    # from any k verified chunk openings
    rng = random.Random(14)
    m = random_matrix(rng, 3, 3)
    c = block_commitment(PARAMS, m)
    indices = [2, 5, 7]
    openings = [das.open_chunk(PARAMS, m, i) for i in indices]
    assert all(das.verify_chunk(PARAMS, c, op) for op in openings)
    decoded = fc.decode_matrix(PARAMS.code, indices, [op.chunk.column for op in openings])
    for i, j in [(1, 1), (3, 2), (2, 3)]:
        entry = das.open_entry_das(PARAMS, m, i, j)
        assert das.verify_entry_das(PARAMS, c, entry)
        assert entry.value == decoded[j - 1][i - 1]


# --- light sampling ---------------------------------------------------------


def honest_responder(params, matrix):
    return lambda i: das.open_chunk(params, matrix, i)


def test_light_sample_honest_accepts():
    rng = random.Random(15)
    m = random_matrix(rng, 4, 3)
    c = block_commitment(PARAMS, m)
    report = das.light_sample(PARAMS, c, 5, honest_responder(PARAMS, m), 42)
    assert report.accepted
    assert len(report.queried) == 5 and len(set(report.queried)) == 5
    assert report.covered == sorted(report.queried)
    # deterministic per seed
    again = das.light_sample(PARAMS, c, 5, honest_responder(PARAMS, m), 42)
    assert again.queried == report.queried


def test_light_sample_draws_match_stdlib_oracle():
    m = random_matrix(random.Random(16), 4, 3)
    c = block_commitment(PARAMS, m)
    report = das.light_sample(PARAMS, c, 6, honest_responder(PARAMS, m), 7)
    assert report.queried == random.Random(7).sample(range(1, 9), 6)


def test_light_sample_withholding_rejects():
    rng = random.Random(17)
    m = random_matrix(rng, 4, 3)
    c = block_commitment(PARAMS, m)
    honest = honest_responder(PARAMS, m)
    queried = das.light_sample(PARAMS, c, 4, honest, 3).queried
    withheld = queried[1]

    def responder(i):
        return None if i == withheld else honest(i)

    report = das.light_sample(PARAMS, c, 4, responder, 3)
    assert not report.accepted
    assert withheld not in report.covered
    assert set(report.covered) == set(queried) - {withheld}


def test_light_sample_wrong_index_answer_rejects():
    rng = random.Random(18)
    m = random_matrix(rng, 4, 3)
    c = block_commitment(PARAMS, m)

    def responder(i):
        other = 1 if i != 1 else 2
        return das.open_chunk(PARAMS, m, other)

    report = das.light_sample(PARAMS, c, 3, responder, 9)
    assert not report.accepted and report.covered == []


def test_light_sample_bad_opening_rejects():
    rng = random.Random(19)
    m = random_matrix(rng, 4, 3)
    other = random_matrix(rng, 4, 3)
    c = block_commitment(PARAMS, m)
    report = das.light_sample(PARAMS, c, 3, honest_responder(PARAMS, other), 11)
    assert not report.accepted and report.covered == []


def test_light_sample_validation():
    m = random_matrix(random.Random(20), 4, 3)
    c = block_commitment(PARAMS, m)
    with pytest.raises(ValueError):
        das.light_sample(PARAMS, c, 0, honest_responder(PARAMS, m), 1)
    with pytest.raises(ValueError):
        das.light_sample(PARAMS, c, 9, honest_responder(PARAMS, m), 1)


def test_union_coverage_small_montecarlo():
    # scaled-down coverage experiment; the acceptance suite runs the full one
    params = das.SamplingParams.make(16, 6, 8, b"das-cover")
    m = random_matrix(random.Random(21), 4, 6)
    c = block_commitment(params, m)
    responder = honest_responder(params, m)
    hits = 0
    for trial in range(10):
        union = set()
        for client in range(8):
            report = das.light_sample(params, c, 3, responder, trial * 100 + client)
            assert report.accepted
            union.update(report.covered)
        if len(union) >= params.k:
            hits += 1
    assert hits == 10


# --- serialization ----------------------------------------------------------


def test_chunk_opening_serialization_roundtrip():
    m = random_matrix(random.Random(22), 4, 3)
    opening = das.open_chunk(PARAMS, m, 3)
    blob = opening.serialize()
    assert das.ChunkOpening.deserialize(blob) == opening
    with pytest.raises(ValueError):
        das.ChunkOpening.deserialize(blob[:-1])


def test_entry_opening_serialization_roundtrip():
    m = random_matrix(random.Random(23), 4, 3)
    c = block_commitment(PARAMS, m)
    opening = das.open_entry_das(PARAMS, m, 2, 2)
    blob = opening.serialize()
    back = das.EntryOpening.deserialize(blob)
    assert back == opening
    assert das.verify_entry_das(PARAMS, c, back)
    with pytest.raises(ValueError):
        das.EntryOpening.deserialize(blob[:-1])
    with pytest.raises(ValueError):
        das.EntryOpening.deserialize(b"WRONGMAG" + blob[8:])
    # corrupted witness point must not decompress or verify
    corrupt = bytearray(blob)
    corrupt[-1] ^= 0xFF
    try:
        bad = das.EntryOpening.deserialize(bytes(corrupt))
    except Exception:
        return
    assert not das.verify_entry_das(PARAMS, c, bad)


def test_entry_opening_identity_witness_roundtrip():
    # constant columns yield the identity witness, which serializes as the
    # point at infinity
    params = das.SamplingParams.make(4, 2, 8, b"das-const")
    m = core.DataMatrix([[5], [9]])
    c = block_commitment(params, m)
    opening = das.open_entry_das(params, m, 1, 1)
    assert opening.witness is None
    blob = opening.serialize()
    back = das.EntryOpening.deserialize(blob)
    assert back == opening
    assert das.verify_entry_das(params, c, back)
