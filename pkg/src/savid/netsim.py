"""Deterministic adversarial simulator for the dispersal protocol.

One Simulation hosts n storage-node state machines plus a client, all
driven by a single-threaded event loop. The adversary picks the delivery
order (a seeded permutation per round; every message is delivered before
the loop drains, so delivery is eventual) and controls up to f nodes
through a fixed strategy menu:

    honest             follow the protocol
    withhold-receipt   verify and store, but never acknowledge
    withhold-chunk     acknowledge, but serve nothing at retrieval
    corrupt-chunk      acknowledge, serve a perturbed column
    wrong-commitments  serve the true column under fabricated commitments
    equivocate         serve a self-consistent chunk of a different block

Misbehaving nodes also sign receipts for chunks an honest node would
reject, which is the strongest thing a signature-holding adversary can do
here. A malicious *client* is modeled separately (bad_chunk_to), since the
interesting misbehavior there is sending some node an inconsistent chunk.

Everything is reproducible: the same config and block produce bit-equal
traces. Scenario descriptions can also be loaded from a small text format
(see parse_scenario).
"""

from __future__ import annotations

import enum
import hashlib
import random

from . import core
from . import crypto_prims as cp
from . import field_code as fc


class Strategy(enum.Enum):
    HONEST = "honest"
    WITHHOLD_RECEIPT = "withhold-receipt"
    WITHHOLD_CHUNK = "withhold-chunk"
    CORRUPT_CHUNK = "corrupt-chunk"
    WRONG_COMMITMENTS = "wrong-commitments"
    EQUIVOCATE = "equivocate"


_STRATEGY_BY_VALUE = {s.value: s for s in Strategy}


class SimConfig:
    """Scenario description: scheme size, seed, and who misbehaves how.

    strategies maps node index -> Strategy (missing nodes are honest);
    corruptions is a list of (step, node, Strategy) applied mid-run;
    bad_chunk_to lists nodes to which the dispersing client sends an
    inconsistent chunk. f counts the distinct misbehaving nodes, for the
    f <= t bookkeeping of the protocol's guarantees.
    """

    def __init__(self, n, t, seed, strategies=None, corruptions=None,
                 bad_chunk_to=None, max_len=64, params_seed=b"netsim"):
        core.choose_params(n, t)  # validates the resilience bound
        self.n = n
        self.t = t
        self.seed = seed
        self.strategies = dict(strategies or {})
        self.corruptions = sorted(corruptions or [], key=lambda c: c[0])
        self.bad_chunk_to = sorted(set(bad_chunk_to or []))
        self.max_len = max_len
        self.params_seed = params_seed
        for i, s in self.strategies.items():
            if not 1 <= i <= n:
                raise ValueError(f"strategy for out-of-range node {i}")
            if not isinstance(s, Strategy):
                raise ValueError(f"not a strategy: {s!r}")
        for step, i, s in self.corruptions:
            if step < 0 or not 1 <= i <= n or not isinstance(s, Strategy):
                raise ValueError(f"bad corruption event ({step}, {i}, {s!r})")
        for i in self.bad_chunk_to:
            if not 1 <= i <= n:
                raise ValueError(f"bad_chunk_to names out-of-range node {i}")

    @property
    def f(self) -> int:
        bad = {i for i, s in self.strategies.items() if s is not Strategy.HONEST}
        bad.update(i for _, i, s in self.corruptions if s is not Strategy.HONEST)
        return len(bad)

    def __repr__(self) -> str:
        return f"SimConfig(n={self.n}, t={self.t}, seed={self.seed}, f={self.f})"


class SimTrace:
    """Ordered event log: (step, sender, receiver, payload digest, action).
    Replaying the same scenario reproduces the log bit-exactly."""

    def __init__(self):
        self.events: list[tuple[int, str, str, str, str]] = []

    def add(self, step, sender, receiver, payload: bytes, action: str):
        digest = hashlib.sha256(payload).hexdigest()[:8]
        self.events.append((step, sender, receiver, digest, action))

    def lines(self) -> list[str]:
        return [
            f"{step:5d}  {sender:>8s} -> {receiver:<8s}  {digest}  {action}"
            for step, sender, receiver, digest, action in self.events
        ]

    def __repr__(self) -> str:
        return f"SimTrace({len(self.events)} events)"


_SCHEMES: dict = {}


def _scheme_for(config: SimConfig):
    key = (config.n, config.t, config.max_len, config.params_seed)
    if key not in _SCHEMES:
        _SCHEMES[key] = core.SchemeParams.create(
            config.n, config.t, config.max_len, config.params_seed
        )
    return _SCHEMES[key]


class Simulation:
    """One world: scheme parameters, node states, a trace, and a seeded
    scheduler. disperse() and retrieve() run on the same world, so node
    stores persist between the phases."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.params, sks = _scheme_for(config)
        self.states = {
            i: core.NodeState(i, sk) for i, sk in enumerate(sks, start=1)
        }
        self.strategies = {
            i: config.strategies.get(i, Strategy.HONEST)
            for i in range(1, config.n + 1)
        }
        self.pending_corruptions = list(config.corruptions)
        self.rng = random.Random(config.seed)
        self.trace = SimTrace()
        self.step = 0

    # -- event loop ---------------------------------------------------------

    def _run_rounds(self, messages, handler):
        """Deliver message rounds until drained. Each round is permuted by
        the scheduler rng; handlers may enqueue messages for the next
        round by returning a list."""
        while messages:
            batch = list(messages)
            self.rng.shuffle(batch)
            messages = []
            for msg in batch:
                self.step += 1
                self._apply_corruptions()
                messages.extend(handler(msg) or [])
        return None

    def _apply_corruptions(self):
        while self.pending_corruptions and self.pending_corruptions[0][0] <= self.step:
            _, node, strategy = self.pending_corruptions.pop(0)
            self.strategies[node] = strategy
            self.trace.add(self.step, "adversary", f"node{node}", strategy.value.encode(),
                           f"corrupted to {strategy.value}")

    # -- dispersal ----------------------------------------------------------

    def disperse(self, block: bytes):
        """Run dispersal under the configured adversary. Returns the
        certificate; raises core.DispersalError if no quorum forms (the
        expected outcome when more than t nodes block)."""
        comms, chunks = core.client_encode(self.params, block)
        commitment = cp.hash_commitments(comms)
        receipts = []

        sends = []
        for i in range(1, self.params.n + 1):
            chunk = chunks[i - 1]
            if i in self.config.bad_chunk_to:
                chunk = core.Chunk(i, [(x + 1) % fc.MODULUS for x in chunk.column])
            sends.append(("disperse", i, comms, chunk))

        def handle(msg):
            if msg[0] == "disperse":
                _, i, mcomms, chunk = msg
                return self._node_disperse(i, mcomms, chunk)
            _, i, receipt = msg  # ("receipt", i, receipt)
            payload = receipt.serialize()
            if len(receipts) >= self.params.q:
                self.trace.add(self.step, f"node{i}", "client", payload, "receipt-ignored-late")
                return None
            if receipt.node_index == i and cp.verify_receipt(
                self.params.node_pks[i - 1], commitment, receipt
            ):
                receipts.append(receipt)
                self.trace.add(self.step, f"node{i}", "client", payload, "receipt-accepted")
            else:
                self.trace.add(self.step, f"node{i}", "client", payload, "receipt-invalid")
            return None

        self._run_rounds(sends, handle)

        if len(receipts) < self.params.q:
            reason = f"quorum-unreachable: {len(receipts)} receipts, need {self.params.q}"
            self.trace.add(self.step, "client", "client", b"", f"dispersal-failed {reason}")
            raise core.DispersalError(reason)
        cert = core.RetrievabilityCertificate(commitment, receipts)
        self.trace.add(self.step, "client", "client", cert.serialize(), "dispersal-complete")
        return cert

    def _node_disperse(self, i, comms, chunk):
        state = self.states[i]
        strategy = self.strategies[i]
        payload = core.chunk_to_bytes(chunk, comms)
        if strategy is Strategy.HONEST:
            receipt = core.node_verify_chunk(self.params, state, comms, chunk)
            if receipt is None:
                self.trace.add(self.step, "client", f"node{i}", payload, "rejected-chunk")
                return None
            self.trace.add(self.step, "client", f"node{i}", payload, "stored")
            return [("receipt", i, receipt)]
        if strategy is Strategy.WITHHOLD_RECEIPT:
            receipt = core.node_verify_chunk(self.params, state, comms, chunk)
            action = "stored-receipt-withheld" if receipt else "rejected-chunk"
            self.trace.add(self.step, "client", f"node{i}", payload, action)
            return None
        # remaining strategies acknowledge anything and keep what they got
        commitment = cp.hash_commitments(comms)
        state.store[commitment] = (list(comms), chunk)
        receipt = cp.sign_receipt(state.sk, i, commitment)
        self.trace.add(self.step, "client", f"node{i}", payload, f"stored-{strategy.value}")
        return [("receipt", i, receipt)]

    # -- retrieval ----------------------------------------------------------

    def seed_stores(self, block: bytes):
        """Populate every node's store by an honest dispersal round outside
        the event loop (for retrieval-only scenarios)."""
        comms, chunks = core.client_encode(self.params, block)
        commitment = cp.hash_commitments(comms)
        for i, state in self.states.items():
            state.store[commitment] = (list(comms), chunks[i - 1])
        return commitment

    def retrieve(self, cert, commitment: bytes):
        """Run retrieval under the configured adversary. Returns the block,
        or raises the core retrieval errors when no block is recoverable."""
        if not core.verify_certificate(self.params, cert, commitment):
            raise core.CertificateError("certificate does not verify for this commitment")
        responses = []

        def handle(msg):
            if msg[0] == "request":
                _, i = msg
                self.trace.add(self.step, "client", f"node{i}", commitment, "chunk-requested")
                reply = self._node_retrieve(i, commitment)
                if reply is None:
                    return None
                return [("response", i, *reply)]
            _, i, rcomms, rchunk = msg
            responses.append((i, rcomms, rchunk))
            self.trace.add(self.step, f"node{i}", "client",
                           core.chunk_to_bytes(rchunk, rcomms), "response-collected")
            return None

        self._run_rounds([("request", i) for i in cert.node_indices()], handle)
        block = core.retrieve_from_responses(self.params, commitment, responses)
        self.trace.add(self.step, "client", "client",
                       hashlib.sha256(block).digest(), "retrieval-complete")
        return block

    def _node_retrieve(self, i, commitment):
        state = self.states[i]
        strategy = self.strategies[i]
        stored = state.store.get(commitment)
        if stored is None:
            self.trace.add(self.step, f"node{i}", "client", b"", "nothing-stored")
            return None
        comms, chunk = stored
        if strategy in (Strategy.HONEST, Strategy.WITHHOLD_RECEIPT):
            return comms, chunk
        if strategy is Strategy.WITHHOLD_CHUNK:
            self.trace.add(self.step, f"node{i}", "client", b"", "chunk-withheld")
            return None
        if strategy is Strategy.CORRUPT_CHUNK:
            delta = self.rng.randrange(1, fc.MODULUS)
            bad = core.Chunk(i, [(x + delta) % fc.MODULUS for x in chunk.column])
            return comms, bad
        fake = self.rng.randbytes(32)
        fake_comms, fake_chunks = core.client_encode(self.params, fake)
        if strategy is Strategy.WRONG_COMMITMENTS:
            return fake_comms, chunk
        return fake_comms, fake_chunks[i - 1]  # Strategy.EQUIVOCATE


# ---------------------------------------------------------------------------
# Scenario runners: the property-checking entry points
# ---------------------------------------------------------------------------


def run_disperse_scenario(config: SimConfig, block: bytes):
    """Dispersal under the configured adversary. Returns (certificate or
    None, trace). When f <= t and the client is honest, a failed dispersal
    is a correctness violation and raises AssertionError."""
    sim = Simulation(config)
    try:
        cert = sim.disperse(block)
    except core.DispersalError:
        if config.f <= config.t and not config.bad_chunk_to:
            raise AssertionError(
                f"correctness violated: dispersal failed with f={config.f} <= t={config.t}"
            )
        return None, sim.trace
    return cert, sim.trace


def run_retrieve_scenario(config: SimConfig, cert, commitment: bytes, block: bytes):
    """Retrieval under the configured adversary, from a world seeded by an
    honest dispersal of `block`. Returns (block or None, trace); any
    outcome inconsistent with the commitment while f <= t raises
    AssertionError (the availability property)."""
    sim = Simulation(config)
    sim.seed_stores(block)
    return _checked_retrieve(sim, cert, commitment)


def run_full_scenario(config: SimConfig, block: bytes):
    """Dispersal then retrieval in one world under one adversary. Returns
    (cert or None, block or None, trace)."""
    sim = Simulation(config)
    try:
        cert = sim.disperse(block)
    except core.DispersalError:
        if config.f <= config.t and not config.bad_chunk_to:
            raise AssertionError(
                f"correctness violated: dispersal failed with f={config.f} <= t={config.t}"
            )
        return None, None, sim.trace
    got, _ = _checked_retrieve(sim, cert, cert.commitment)
    return cert, got, sim.trace


def _checked_retrieve(sim: Simulation, cert, commitment: bytes):
    config = sim.config
    try:
        block = sim.retrieve(cert, commitment)
    except (core.RetrievalError, core.CommitmentMismatchError) as e:
        if config.f <= config.t:
            raise AssertionError(
                f"availability violated with f={config.f} <= t={config.t}: {e}"
            )
        sim.trace.add(sim.step, "client", "client", b"", f"retrieval-failed {e}")
        return None, sim.trace
    if core.commit_block(sim.params, block) != commitment:
        raise AssertionError("retrieved block does not match the commitment")
    return block, sim.trace


# ---------------------------------------------------------------------------
# Binding probe
# ---------------------------------------------------------------------------


class BindingReport:
    __slots__ = ("trials", "perturbations", "collisions")

    def __init__(self, trials, perturbations, collisions):
        self.trials = trials
        self.perturbations = perturbations
        self.collisions = collisions

    def __repr__(self) -> str:
        return (
            f"BindingReport(trials={self.trials}, "
            f"perturbations={self.perturbations}, collisions={self.collisions})"
        )


def run_binding_probe(seed, trials: int, perturbations: int = 0, params=None) -> BindingReport:
    """Search for commitment collisions the cheap way: random distinct block
    pairs, plus one-bit perturbations of a fixed block. Any collision found
    is a hard failure (it would break binding); the report carries counts."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if params is None:
        params, _ = core.SchemeParams.create(4, 1, 8, b"binding-probe")
    params.commit_params.build_small_tables(params.max_len)
    rng = random.Random(seed)
    collisions = 0
    for _ in range(trials):
        a = rng.randbytes(rng.randrange(1, 48))
        b = rng.randbytes(rng.randrange(1, 48))
        ca = core.commit_block(params, a)
        if a == b:
            continue
        if ca == core.commit_block(params, b):
            collisions += 1
        # sanity arm: identical input, identical commitment
        if ca != core.commit_block(params, a):
            raise AssertionError("commitment is not deterministic")
    base = rng.randbytes(40)
    c_base = core.commit_block(params, base)
    for p in range(perturbations):
        bit = p % (len(base) * 8)
        flipped = bytearray(base)
        flipped[bit // 8] ^= 1 << (bit % 8)
        if core.commit_block(params, bytes(flipped)) == c_base:
            collisions += 1
    if collisions:
        raise AssertionError(f"binding probe found {collisions} collision(s)")
    return BindingReport(trials, perturbations, collisions)


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------


def parse_scenario(text: str):
    """Parse the textual scenario format into (SimConfig, block).

    Lines (''#'' comments allowed):
        n = 16
        t = 7
        seed = 42
        block = 300                  # bytes; content drawn from seed
        max_len = 64
        node 3 = corrupt-chunk
        bad-chunk-to = 3 5
        corrupt = 10 6 equivocate    # at step 10, node 6 switches
    """
    n = t = seed = None
    block_len = 256
    max_len = 64
    strategies = {}
    corruptions = []
    bad_chunk_to = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"unparseable scenario line: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key == "n":
            n = int(value)
        elif key == "t":
            t = int(value)
        elif key == "seed":
            seed = int(value)
        elif key == "block":
            block_len = int(value)
        elif key == "max_len":
            max_len = int(value)
        elif key.startswith("node"):
            idx = int(key[4:].strip())
            if value not in _STRATEGY_BY_VALUE:
                raise ValueError(f"unknown strategy {value!r}")
            strategies[idx] = _STRATEGY_BY_VALUE[value]
        elif key == "bad-chunk-to":
            bad_chunk_to = [int(x) for x in value.split()]
        elif key == "corrupt":
            parts = value.split()
            if len(parts) != 3 or parts[2] not in _STRATEGY_BY_VALUE:
                raise ValueError(f"bad corruption spec {value!r}")
            corruptions.append((int(parts[0]), int(parts[1]), _STRATEGY_BY_VALUE[parts[2]]))
        else:
            raise ValueError(f"unknown scenario key {key!r}")
    if n is None or t is None or seed is None:
        raise ValueError("scenario must set n, t, and seed")
    if block_len < 1:
        raise ValueError("block must be at least 1 byte")
    config = SimConfig(n, t, seed, strategies, corruptions, bad_chunk_to, max_len)
    block = random.Random(seed).randbytes(block_len)
    return config, block
