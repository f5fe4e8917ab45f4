"""Command-line front end. Everything runs in one process: "nodes" are
state machines behind the loopback transport, so disperse/retrieve work on
local files without any networking.

Exit codes are stable so scripts can branch on them:

    3  params file unreadable, corrupt, or inconsistent
    4  certificate invalid for the given commitment
    5  not enough valid chunks to decode (or none decode to a block)
    6  no chunk file matches the block commitment

Everything else that goes wrong exits 1 with a one-line message on stderr.
"""

from __future__ import annotations

import hashlib
import os
import random
import sys
import time

import click

from . import commitments as cm
from . import core
from . import costmodel as costs
from . import crypto_prims as cp
from . import das
from . import field_code as fc
from . import netsim
from . import privacy

PARAMS_MAGIC = b"SAVIDPM1"
_FLAG_DEV = 0x01

EXIT_BAD_PARAMS = 3
EXIT_BAD_CERT = 4
EXIT_TOO_FEW_CHUNKS = 5
EXIT_COMMIT_MISMATCH = 6

CERT_FILE = "certificate.savid"
COMMITMENT_FILE = "commitment.txt"


class ParamsFileError(Exception):
    pass


# ---------------------------------------------------------------------------
# Params file
# ---------------------------------------------------------------------------


def write_params_file(path: str, params: core.SchemeParams) -> None:
    """Self-describing public parameters: scheme sizes, commitment powers,
    node verification keys, and a checksum trailer."""
    commit_blob = params.commit_params.serialize()
    out = bytearray()
    out += PARAMS_MAGIC
    out += params.n.to_bytes(2, "big")
    out += params.t.to_bytes(2, "big")
    out += params.q.to_bytes(2, "big")
    out += params.k.to_bytes(2, "big")
    out += params.max_len.to_bytes(8, "big")
    out.append(_FLAG_DEV if params.commit_params.dev else 0x00)
    out += len(commit_blob).to_bytes(8, "big")
    out += commit_blob
    for pk in params.node_pks:
        out += cp.pk_to_bytes(pk)
    out += hashlib.sha256(bytes(out)).digest()
    with open(path, "wb") as fh:
        fh.write(bytes(out))


def read_params_file(path: str) -> core.SchemeParams:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ParamsFileError(str(exc))
    if len(data) < 8 + 2 * 4 + 8 + 1 + 8 + 32:
        raise ParamsFileError("file too short")
    if data[:8] != PARAMS_MAGIC:
        raise ParamsFileError("bad magic")
    if hashlib.sha256(data[:-32]).digest() != data[-32:]:
        raise ParamsFileError("checksum mismatch")
    n = int.from_bytes(data[8:10], "big")
    t = int.from_bytes(data[10:12], "big")
    q = int.from_bytes(data[12:14], "big")
    k = int.from_bytes(data[14:16], "big")
    max_len = int.from_bytes(data[16:24], "big")
    flags = data[24]
    off = 25
    clen = int.from_bytes(data[off : off + 8], "big")
    off += 8
    if off + clen + 32 * n + 32 != len(data):
        raise ParamsFileError("length fields inconsistent with file size")
    try:
        commit = cm.CommitParams.deserialize(data[off : off + clen])
    except ValueError as exc:
        raise ParamsFileError(f"commit parameters: {exc}")
    off += clen
    try:
        pks = [
            cp.pk_from_bytes(data[off + 32 * i : off + 32 * (i + 1)]) for i in range(n)
        ]
    except ValueError as exc:
        raise ParamsFileError(f"node keys: {exc}")
    try:
        params = core.SchemeParams(n, t, fc.CodeParams.make(n, k), commit, pks)
    except ValueError as exc:
        raise ParamsFileError(str(exc))
    if (params.q, params.k) != (q, k):
        raise ParamsFileError("stored q/k disagree with n and t")
    if commit.max_len != max_len:
        raise ParamsFileError("stored max_len disagrees with commit parameters")
    if bool(flags & _FLAG_DEV) != commit.dev:
        raise ParamsFileError("dev flag disagrees with commit parameters")
    return params


def _load_params(path: str) -> core.SchemeParams:
    try:
        return read_params_file(path)
    except ParamsFileError as exc:
        click.echo(f"error: params: {exc}", err=True)
        sys.exit(EXIT_BAD_PARAMS)


def _key_path(keys_dir: str, i: int) -> str:
    return os.path.join(keys_dir, f"node_{i:04d}.key")


def _load_keys(keys_dir: str, n: int):
    sks = []
    for i in range(1, n + 1):
        try:
            with open(_key_path(keys_dir, i), "rb") as fh:
                sks.append(cp.sk_from_bytes(fh.read()))
        except (OSError, ValueError) as exc:
            click.echo(f"error: node key {i}: {exc}", err=True)
            sys.exit(EXIT_BAD_PARAMS)
    return sks


def _read_file(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _parse_commitment(text: str) -> bytes:
    try:
        raw = bytes.fromhex(text)
    except ValueError:
        raise click.BadParameter("commitment must be hex")
    if len(raw) != cp.COMMITMENT_BYTES:
        raise click.BadParameter(f"commitment must be {cp.COMMITMENT_BYTES} bytes")
    return raw


def _chunk_path(out_dir: str, i: int) -> str:
    return os.path.join(out_dir, f"chunk_{i:04d}.bin")


_threads_option = click.option(
    "--threads",
    type=int,
    default=1,
    envvar="SAVID_THREADS",
    show_default=True,
    help="worker threads for encode/commit (outputs are identical)",
)


@click.group()
def main():
    """Verifiable information dispersal over local files."""


# ---------------------------------------------------------------------------
# setup / commit / disperse / retrieve / verify-cert
# ---------------------------------------------------------------------------


@main.command()
@click.option("-n", "nodes", type=int, required=True, help="number of storage nodes")
@click.option("-t", "faults", type=int, required=True, help="tolerated faulty nodes")
@click.option("--max-len", type=int, default=1024, show_default=True, help="max matrix rows")
@click.option("--seed", default="", help="hex seed; empty draws a random one")
@click.option("-o", "--out", default="params.savid", show_default=True)
@click.option("--keys-dir", default="keys", show_default=True)
def setup(nodes, faults, max_len, seed, out, keys_dir):
    """Generate public params and per-node secret keys (LOCAL DEV SETUP:
    one machine plays the trusted party and every node)."""
    try:
        seed_bytes = bytes.fromhex(seed) if seed else os.urandom(32)
    except ValueError:
        raise click.BadParameter("seed must be hex")
    try:
        params, sks = core.SchemeParams.create(nodes, faults, max_len, seed_bytes)
    except ValueError as exc:
        click.echo(f"error: setup: {exc}", err=True)
        sys.exit(EXIT_BAD_PARAMS)
    write_params_file(out, params)
    os.makedirs(keys_dir, exist_ok=True)
    for i, sk in enumerate(sks, 1):
        with open(_key_path(keys_dir, i), "wb") as fh:
            fh.write(cp.sk_to_bytes(sk))
    click.echo(
        f"params: n={params.n} t={params.t} q={params.q} k={params.k} "
        f"max_len={params.max_len}"
    )
    click.echo(f"wrote {out} and {params.n} keys under {keys_dir}")


@main.command()
@click.option("-p", "--params", "params_path", required=True, type=click.Path())
@_threads_option
@click.argument("infile", type=click.Path())
def commit(params_path, threads, infile):
    """Print the block commitment of a file (lowercase hex)."""
    params = _load_params(params_path)
    block = _read_file(infile)
    try:
        c = core.commit_block(params, block, threads=threads)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(c.hex())


@main.command()
@click.option("-p", "--params", "params_path", required=True, type=click.Path())
@click.option("--keys-dir", default="keys", show_default=True)
@click.option("-o", "--out-dir", default="dispersal", show_default=True)
@click.option("--blind", is_flag=True, help="hide the data from single nodes")
@click.option("--blind-seed", default="", help="hex; empty draws a random one")
@_threads_option
@click.argument("infile", type=click.Path())
def disperse(params_path, keys_dir, out_dir, blind, blind_seed, threads, infile):
    """Encode a file, run all n nodes in-process, and write one chunk file
    per node plus the retrievability certificate."""
    params = _load_params(params_path)
    sks = _load_keys(keys_dir, params.n)
    block = _read_file(infile)
    try:
        if blind:
            try:
                seed = bytes.fromhex(blind_seed) if blind_seed else os.urandom(32)
            except ValueError:
                raise click.BadParameter("blind seed must be hex")
            matrix = privacy.blind_block(params, block, seed)
            comms, chunks = core.encode_matrix(params, matrix, threads)
        else:
            comms, chunks = core.client_encode(params, block, threads)
    except ValueError as exc:
        click.echo(f"error: encode: {exc}", err=True)
        sys.exit(1)
    states = [core.NodeState(i, sk) for i, sk in enumerate(sks, 1)]
    transport = core.LoopbackTransport(params, states)
    try:
        commitment, cert = core.disperse_encoded(params, comms, chunks, transport)
    except core.DispersalError as exc:
        click.echo(f"error: disperse: {exc}", err=True)
        sys.exit(1)
    os.makedirs(out_dir, exist_ok=True)
    for chunk in chunks:
        with open(_chunk_path(out_dir, chunk.node_index), "wb") as fh:
            fh.write(core.chunk_to_bytes(chunk, comms))
    with open(os.path.join(out_dir, CERT_FILE), "wb") as fh:
        fh.write(cert.serialize())
    with open(os.path.join(out_dir, COMMITMENT_FILE), "w") as fh:
        fh.write(commitment.hex() + "\n")
    click.echo(commitment.hex())
    click.echo(
        f"wrote {params.n} chunks, {CERT_FILE} ({len(cert.receipts)} receipts) "
        f"to {out_dir}"
    )


def _load_chunk_files(params, commitment, chunk_dir):
    """Parse every chunk file in the directory, warn about and drop the
    unusable ones, and hand back (node_index, comms, chunk) responses."""
    try:
        names = sorted(os.listdir(chunk_dir))
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    responses = []
    for name in names:
        if not (name.startswith("chunk_") and name.endswith(".bin")):
            continue
        path = os.path.join(chunk_dir, name)
        try:
            with open(path, "rb") as fh:
                chunk, comms = core.chunk_from_bytes(fh.read())
        except (OSError, ValueError) as exc:
            click.echo(f"warning: discarding {name}: {exc}", err=True)
            continue
        if cp.hash_commitments(comms) != commitment:
            click.echo(
                f"warning: discarding {name}: commitments do not hash to the target",
                err=True,
            )
            continue
        if not core.chunk_matches(
            params, cm.encode_commitments(params.code, comms)[chunk.node_index - 1], chunk
        ):
            click.echo(
                f"warning: discarding {name}: chunk fails its commitment check",
                err=True,
            )
            continue
        responses.append((chunk.node_index, comms, chunk))
    return responses


@main.command()
@click.option("-p", "--params", "params_path", required=True, type=click.Path())
@click.option("--cert", "cert_path", required=True, type=click.Path())
@click.option("--commitment", "commitment_hex", required=True)
@click.option("--blind", is_flag=True, help="strip the blinding row and column")
@click.option("-o", "--out", required=True, type=click.Path())
@click.argument("chunk_dir", type=click.Path())
def retrieve(params_path, cert_path, commitment_hex, blind, out, chunk_dir):
    """Rebuild a file from any k valid chunk files, tolerating missing and
    corrupt ones."""
    params = _load_params(params_path)
    commitment = _parse_commitment(commitment_hex)
    try:
        cert = core.RetrievabilityCertificate.deserialize(_read_file(cert_path))
    except ValueError as exc:
        click.echo(f"error: certificate: {exc}", err=True)
        sys.exit(EXIT_BAD_CERT)
    if not core.verify_certificate(params, cert, commitment):
        click.echo("error: certificate does not verify for this commitment", err=True)
        sys.exit(EXIT_BAD_CERT)
    responses = _load_chunk_files(params, commitment, chunk_dir)
    unpack = privacy.unpack_blinded if blind else None
    try:
        block = core.retrieve_from_responses(params, commitment, responses, unpack=unpack)
    except core.CommitmentMismatchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_COMMIT_MISMATCH)
    except core.RetrievalError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_TOO_FEW_CHUNKS)
    with open(out, "wb") as fh:
        fh.write(block)
    click.echo(f"wrote {len(block)} bytes to {out}")


@main.command("verify-cert")
@click.option("-p", "--params", "params_path", required=True, type=click.Path())
@click.option("--commitment", "commitment_hex", required=True)
@click.argument("certfile", type=click.Path())
def verify_cert(params_path, commitment_hex, certfile):
    """Check a certificate against a commitment; exit 0 iff it verifies."""
    params = _load_params(params_path)
    commitment = _parse_commitment(commitment_hex)
    try:
        cert = core.RetrievabilityCertificate.deserialize(_read_file(certfile))
    except ValueError as exc:
        click.echo(f"error: certificate: {exc}", err=True)
        sys.exit(EXIT_BAD_CERT)
    if not core.verify_certificate(params, cert, commitment):
        click.echo("certificate invalid")
        sys.exit(EXIT_BAD_CERT)
    click.echo(f"certificate ok: {len(set(cert.node_indices()))} signers, quorum {params.q}")


# ---------------------------------------------------------------------------
# das
# ---------------------------------------------------------------------------


@main.group("das")
def das_group():
    """Data-availability sampling: openings and light-client checks."""


@das_group.command("open-chunk")
@click.option("-p", "--params", "params_path", required=True, type=click.Path())
@click.option("-i", "index", type=int, required=True, help="coded index, 1-based")
@click.option("-o", "--out", required=True, type=click.Path())
@click.argument("infile", type=click.Path())
def das_open_chunk(params_path, index, out, infile):
    """Produce the chunk opening at a coded index from the original file."""
    params = _load_params(params_path)
    matrix = core.as_matrix(_read_file(infile), params.k)
    try:
        opening = das.open_chunk(params, matrix, index)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    with open(out, "wb") as fh:
        fh.write(opening.serialize())
    click.echo(f"wrote chunk opening for index {index} to {out}")


@das_group.command("verify-chunk")
@click.option("-p", "--params", "params_path", required=True, type=click.Path())
@click.option("--commitment", "commitment_hex", required=True)
@click.argument("openingfile", type=click.Path())
def das_verify_chunk(params_path, commitment_hex, openingfile):
    """Verify a chunk opening against a commitment; exit 0 iff valid."""
    params = _load_params(params_path)
    commitment = _parse_commitment(commitment_hex)
    try:
        opening = das.ChunkOpening.deserialize(_read_file(openingfile))
    except ValueError as exc:
        click.echo(f"error: opening: {exc}", err=True)
        sys.exit(1)
    if not das.verify_chunk(params, commitment, opening):
        click.echo("chunk opening invalid")
        sys.exit(1)
    click.echo(f"chunk opening ok: index {opening.chunk.node_index}")


@das_group.command("open-entry")
@click.option("-p", "--params", "params_path", required=True, type=click.Path())
@click.option("-i", "row", type=int, required=True, help="matrix row, 1-based")
@click.option("-j", "col", type=int, required=True, help="matrix column, 1-based (1..k)")
@click.option("-o", "--out", required=True, type=click.Path())
@click.argument("infile", type=click.Path())
def das_open_entry(params_path, row, col, out, infile):
    """Produce a single-entry opening (one field element of one chunk)."""
    params = _load_params(params_path)
    matrix = core.as_matrix(_read_file(infile), params.k)
    try:
        opening = das.open_entry_das(params, matrix, row, col)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    with open(out, "wb") as fh:
        fh.write(opening.serialize())
    click.echo(f"wrote entry opening ({row},{col}) to {out}")


@das_group.command("verify-entry")
@click.option("-p", "--params", "params_path", required=True, type=click.Path())
@click.option("--commitment", "commitment_hex", required=True)
@click.argument("openingfile", type=click.Path())
def das_verify_entry(params_path, commitment_hex, openingfile):
    """Verify an entry opening against a commitment; exit 0 iff valid."""
    params = _load_params(params_path)
    commitment = _parse_commitment(commitment_hex)
    try:
        opening = das.EntryOpening.deserialize(_read_file(openingfile))
    except ValueError as exc:
        click.echo(f"error: opening: {exc}", err=True)
        sys.exit(1)
    if not das.verify_entry_das(params, commitment, opening):
        click.echo("entry opening invalid")
        sys.exit(1)
    click.echo(f"entry opening ok: ({opening.row},{opening.col})")


@das_group.command("sample")
@click.option("-p", "--params", "params_path", required=True, type=click.Path())
@click.option("--commitment", "commitment_hex", required=True)
@click.option("--queries", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.argument("chunk_dir", type=click.Path())
def das_sample(params_path, commitment_hex, queries, seed, chunk_dir):
    """Act as a light client: query random chunks from a dispersal
    directory and accept only if every answer verifies."""
    params = _load_params(params_path)
    commitment = _parse_commitment(commitment_hex)

    def responder(i):
        path = _chunk_path(chunk_dir, i)
        try:
            with open(path, "rb") as fh:
                chunk, comms = core.chunk_from_bytes(fh.read())
        except (OSError, ValueError):
            return None
        return das.ChunkOpening(chunk, comms)

    try:
        report = das.light_sample(params, commitment, queries, responder, seed)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"queried: {' '.join(str(i) for i in report.queried)}")
    click.echo(f"covered: {' '.join(str(i) for i in report.covered)}")
    click.echo(f"accepted: {'yes' if report.accepted else 'no'}")
    if not report.accepted:
        sys.exit(1)


# ---------------------------------------------------------------------------
# simulate / costmodel / bench
# ---------------------------------------------------------------------------


@main.command()
@click.option("--trace", "show_trace", is_flag=True, help="print the delivery trace")
@click.argument("scenario", type=click.Path())
def simulate(show_trace, scenario):
    """Run a scenario file through the adversarial network simulator."""
    text = _read_file(scenario).decode()
    try:
        config, block = netsim.parse_scenario(text)
    except ValueError as exc:
        click.echo(f"error: scenario: {exc}", err=True)
        sys.exit(2)
    cert, got, trace = netsim.run_full_scenario(config, block)
    if show_trace:
        for line in trace.lines():
            click.echo(line)
    click.echo(
        f"scenario: n={config.n} t={config.t} f={config.f} seed={config.seed} "
        f"block={len(block)}B"
    )
    if cert is None:
        click.echo("dispersal: failed (quorum unreachable)")
        return
    click.echo(f"dispersal: certificate from nodes {sorted(set(cert.node_indices()))}")
    if got is None:
        click.echo("retrieval: failed (availability violated, f > t)")
    else:
        click.echo(f"retrieval: ok, {len(got)} bytes, commitment matches")


@main.command("costmodel")
@click.option("--all", "show_all", is_flag=True, help="the eight reference rows")
@click.option("--scheme", type=click.Choice(list(costs.SCHEMES)))
@click.option("--block-size", type=float, default=22e6, show_default=True)
@click.option("-n", "nodes", type=int, default=1024, show_default=True)
@click.option("-t", "faults", type=int, default=338, show_default=True)
def costmodel_cmd(show_all, scheme, block_size, nodes, faults):
    """Communication and storage costs of the compared dispersal schemes."""
    width = max(len(v) for v in costs.DISPLAY_NAMES.values()) + 2
    header = f"{'scheme':<{width}}{'t':>5}  {'communication':>14}  {'storage':>10}"
    if show_all:
        click.echo("|B| = 22 MB, n = 1024")
        click.echo(header)
        for row in costs.reference_table():
            click.echo(
                f"{row['scheme']:<{width}}{row['t']:>5}  "
                f"{row['communication_si']:>14}  {row['storage_si']:>10}"
            )
        return
    if scheme is None:
        raise click.UsageError("pass --all or --scheme")
    try:
        inputs = costs.CostInputs(block_size, nodes, faults)
        c, s = costs.cost(scheme, inputs)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(header)
    click.echo(
        f"{costs.DISPLAY_NAMES[scheme]:<{width}}{faults:>5}  "
        f"{costs.format_si(c):>14}  {costs.format_si(s):>10}"
    )


@main.command()
@click.option("-n", "nodes", type=int, default=16, show_default=True)
@click.option("-t", "faults", type=int, default=7, show_default=True)
@click.option(
    "--block-size", "block_sizes", type=int, multiple=True, default=(65536,),
    show_default=True, help="repeatable for a size sweep",
)
@click.option("--seed", default="bench", show_default=True)
@_threads_option
def bench(nodes, faults, block_sizes, seed, threads):
    """Time the pipeline phases (encode, commit, verify, invert, decode)
    and report a machine-readable table. Timings are informational."""
    try:
        _, k = core.choose_params(nodes, faults)
        max_len = max(core.packed_shape(b, k)[0] for b in block_sizes)
        params, _ = core.SchemeParams.create(nodes, faults, max_len, seed.encode())
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_BAD_PARAMS)
    rng = random.Random(seed)
    indices = sorted(rng.sample(range(1, params.n + 1), params.k))
    click.echo(f"n={params.n} t={params.t} k={params.k} threads={threads}")
    click.echo("block_bytes\trows\tphase\tseconds")
    for size in block_sizes:
        block = rng.randbytes(size)
        wall0 = time.perf_counter()
        timings = []

        def phase(name, fn):
            t0 = time.perf_counter()
            result = fn()
            timings.append((name, time.perf_counter() - t0))
            return result

        matrix = core.as_matrix(block, params.k)
        comms = phase(
            "commit",
            lambda: core._pmap(
                lambda col: cm.commit(params.commit_params, col), matrix.columns, threads
            ),
        )
        coded_rows = phase(
            "encode",
            lambda: core._pmap(
                lambda r: fc.encode(params.code, matrix.row(r)), range(matrix.rows), threads
            ),
        )
        chunks = [
            core.Chunk(i, [coded_rows[r][i - 1] for r in range(matrix.rows)])
            for i in range(1, params.n + 1)
        ]

        def verify_all():
            encoded = cm.encode_commitments(params.code, comms)
            return all(
                core.chunk_matches(params, encoded[c.node_index - 1], c) for c in chunks
            )

        ok = phase("verify", verify_all)
        phase("invert", lambda: fc.invert_submatrix(params.code, indices))
        info = phase(
            "decode",
            lambda: fc.decode_matrix(
                params.code, indices, [chunks[i - 1].column for i in indices]
            ),
        )
        wall = time.perf_counter() - wall0
        if not ok or core.from_matrix(core.DataMatrix(info)) != block:
            click.echo("error: roundtrip check failed", err=True)
            sys.exit(1)
        for name, secs in timings:
            click.echo(f"{size}\t{matrix.rows}\t{name}\t{secs:.4f}")
        total = sum(secs for _, secs in timings)
        click.echo(f"{size}\t{matrix.rows}\ttotal\t{total:.4f}")
        click.echo(f"{size}\t{matrix.rows}\twall\t{wall:.4f}")
        click.echo(f"{size}\t{matrix.rows}\tMB_per_s\t{size / wall / 1e6:.3f}")


if __name__ == "__main__":
    main()
