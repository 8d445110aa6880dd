"""A toy storage cluster that stores byte payloads and meters repair traffic.

Bytes become base-q digits (three digits per byte at q=7), digits are cut
into messages of k*t symbols, and node r keeps row r of every stripe.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import BinaryIO, Mapping

import numpy as np

from .errors import ParameterError
from .linalg import GfVector
from .piggyback import Message, PiggybackCode, decode_from_k_nodes, encode
from .repair import RepairScheme, answer_queries, reconstruct, repair_decoder, verify_scheme

READ_CHUNK = 1 << 16


class NoSchemeError(LookupError):
    def __init__(self, node: int):
        super().__init__(f"no-scheme-for-node: {node}")
        self.node = node


class ConcurrentFailureError(RuntimeError):
    """A second node failed while another one is still down."""


class PayloadReadError(OSError):
    def __init__(self, offset: int, cause: OSError):
        super().__init__(f"read failed at byte offset {offset}: {cause}")
        self.offset = offset


def digits_per_byte(q: int) -> int:
    """Base-q digits needed to hold one byte."""
    d = 1
    while q ** d < 256:
        d += 1
    return d


def bytes_to_symbols(payload: bytes, q: int) -> np.ndarray:
    d = digits_per_byte(q)
    vals = np.frombuffer(payload, dtype=np.uint8).astype(np.int64)
    out = np.empty((vals.size, d), dtype=np.int64)
    for pos in range(d - 1, -1, -1):
        out[:, pos] = vals % q
        vals = vals // q
    return out.reshape(-1)


def symbols_to_bytes(symbols: np.ndarray, q: int) -> bytes:
    d = digits_per_byte(q)
    if symbols.size % d:
        raise ValueError(f"{symbols.size} symbols do not form whole bytes ({d} per byte)")
    vals = np.zeros(symbols.size // d, dtype=np.int64)
    for digit in symbols.reshape(-1, d).T:
        vals = vals * q + digit
    if vals.size and vals.max() > 255:
        raise ValueError("symbol digits encode a value above 255")
    return vals.astype(np.uint8).tobytes()


@dataclass
class Segment:
    """One ingested payload: its stripes and the zero symbols padding the last one."""

    first_stripe: int
    stripes: int
    pad_symbols: int


@dataclass
class ClusterState:
    code: PiggybackCode
    store: list[list[GfVector] | None] = field(default_factory=list)
    alive: list[bool] = field(default_factory=list)
    meters: list[int] = field(default_factory=list)
    segments: list[Segment] = field(default_factory=list)
    stripes: int = 0

    def __post_init__(self) -> None:
        n = self.code.n
        if not self.store:
            self.store = [[] for _ in range(n)]
            self.alive = [True] * n
            self.meters = [0] * n

    def down(self) -> list[int]:
        return [i for i, ok in enumerate(self.alive) if not ok]

    def node_contents(self, node: int) -> list[GfVector]:
        data = self.store[node]
        if data is None:
            raise ParameterError(f"node {node} is down")
        return list(data)


def ingest_symbols(cluster: ClusterState, symbols: np.ndarray) -> int:
    code = cluster.code
    if cluster.down():
        raise ConcurrentFailureError(f"cannot ingest while nodes {cluster.down()} are down")
    kt = code.k * code.t
    count = math.ceil(symbols.size / kt)
    pad = count * kt - symbols.size
    padded = np.concatenate([symbols, np.zeros(pad, dtype=np.int64)])
    for s in range(count):
        msg = Message.from_symbols(code.field, padded[s * kt:(s + 1) * kt].tolist(), code.k, code.t)
        cw = encode(code, msg)
        for r in range(code.n):
            cluster.store[r].append(cw.row(r))
    cluster.segments.append(Segment(cluster.stripes, count, pad))
    cluster.stripes += count
    return count


def ingest(cluster: ClusterState, payload: bytes | BinaryIO) -> int:
    """Encode and store a payload; returns the number of stripes written."""
    if isinstance(payload, (bytes, bytearray, memoryview)):
        data = bytes(payload)
    else:
        parts, offset = [], 0
        while True:
            try:
                chunk = payload.read(READ_CHUNK)
            except OSError as exc:
                raise PayloadReadError(offset, exc) from exc
            if not chunk:
                break
            parts.append(chunk)
            offset += len(chunk)
        data = b"".join(parts)
    return ingest_symbols(cluster, bytes_to_symbols(data, cluster.code.q))


def read_back(cluster: ClusterState) -> bytes:
    """Decode every stripe from the first k live nodes and strip the padding."""
    code = cluster.code
    nodes = [i for i in range(code.n) if cluster.alive[i]][: code.k]
    out = []
    for seg in cluster.segments:
        syms = []
        for s in range(seg.first_stripe, seg.first_stripe + seg.stripes):
            msg = decode_from_k_nodes(code, nodes, [cluster.store[r][s] for r in nodes])
            syms.extend(msg.symbols())
        arr = np.asarray(syms, dtype=np.int64)
        if seg.pad_symbols:
            arr = arr[: arr.size - seg.pad_symbols]
        out.append(symbols_to_bytes(arr, code.q))
    return b"".join(out)


@dataclass(frozen=True)
class RepairReport:
    failed: int
    per_stripe: tuple[int, ...]
    baseline: int
    restored_exact: bool
    helpers: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.per_stripe)

    @property
    def savings(self) -> Fraction:
        if not self.baseline:
            return Fraction(0)
        return 1 - Fraction(self.total, self.baseline)

    def as_dict(self) -> dict:
        return {
            "failed": self.failed,
            "stripes": len(self.per_stripe),
            "per_stripe": list(self.per_stripe),
            "total": self.total,
            "baseline": self.baseline,
            "savings": str(self.savings),
            "helpers": list(self.helpers),
            "restored_exact": self.restored_exact,
        }

    def to_text(self) -> str:
        d = self.as_dict()
        d["per_stripe"] = ",".join(str(v) for v in d["per_stripe"])
        d["helpers"] = ",".join(str(v) for v in d["helpers"])
        d["restored_exact"] = str(d["restored_exact"]).lower()
        return "".join(f"{key}={val}\n" for key, val in d.items())

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def fail_node(cluster: ClusterState, node: int) -> None:
    if not 0 <= node < cluster.code.n:
        raise ParameterError(f"node {node} out of range")
    down = cluster.down()
    if down:
        raise ConcurrentFailureError(f"node {down[0]} is already down; only single failures are supported")
    cluster.alive[node] = False
    cluster.store[node] = None


def repair_node(cluster: ClusterState, scheme: RepairScheme) -> list[int]:
    """Rebuild the failed node stripe by stripe; returns the symbols downloaded per stripe."""
    node = scheme.failed
    if cluster.alive[node]:
        raise ParameterError(f"node {node} is not down")
    plan = verify_scheme(scheme)
    decoder = repair_decoder(scheme, plan)
    rebuilt, per_stripe = [], []
    for s in range(cluster.stripes):
        contents = {i: cluster.store[i][s] for i in plan.helpers()}
        responses = answer_queries(plan, contents)
        sent = 0
        for i, r in responses.items():
            cluster.meters[i] += len(r)
            sent += len(r)
        per_stripe.append(sent)
        rebuilt.append(reconstruct(scheme, plan, responses, decoder))
    cluster.store[node] = rebuilt
    cluster.alive[node] = True
    return per_stripe


def fail_and_repair(cluster: ClusterState, node: int, schemes: Mapping[int, RepairScheme]) -> RepairReport:
    """Fail ``node``, rebuild it with its scheme, and compare against naive k*t repair."""
    if node not in schemes:
        raise NoSchemeError(node)
    scheme = schemes[node]
    if scheme.code != cluster.code:
        raise ParameterError(f"scheme for node {node} belongs to a different code")
    verify_scheme(scheme)
    before = cluster.node_contents(node)
    fail_node(cluster, node)
    per_stripe = repair_node(cluster, scheme)
    code = cluster.code
    exact = before == cluster.store[node]
    helpers = tuple(verify_scheme(scheme).helpers())
    return RepairReport(node, tuple(per_stripe), code.k * code.t * cluster.stripes, exact, helpers)
