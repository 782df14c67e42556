"""Traffic matrices, sparsity-class membership checks, and the generator
suite used for worst-case constructions and randomized experiments."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from io import StringIO
from typing import Callable

import numpy as np

from toruslb.torus import (
    Automorphism,
    Node,
    TorusSpec,
    apply_automorphism,
    invert_automorphism,
    node_add,
    weighted_distance,
)


class TrafficError(ValueError):
    pass


class OddSizeUnsupported(TrafficError):
    """The worst-case generators are defined for even torus extents only."""


class NotSquare(TrafficError):
    pass


class DoesNotFit(TrafficError):
    pass


@dataclass(frozen=True)
class TrafficMatrix:
    """Sparse nonnegative demand map (source, dest) -> units."""

    spec: TorusSpec
    entries: dict[tuple[Node, Node], float]

    def __post_init__(self) -> None:
        for (s, t), demand in self.entries.items():
            if s == t:
                raise TrafficError(f"self-demand at {s}")
            if demand <= 0:
                raise TrafficError(f"nonpositive demand {demand} for {s}->{t}")

    def total(self) -> float:
        return sum(self.entries.values())

    def sources(self) -> set[Node]:
        return {s for s, _ in self.entries}

    def sinks(self) -> set[Node]:
        return {t for _, t in self.entries}

    def source_rate(self, s: Node) -> float:
        return sum(d for (a, _), d in self.entries.items() if a == s)

    def sink_rate(self, t: Node) -> float:
        return sum(d for (_, b), d in self.entries.items() if b == t)


@dataclass
class TrafficClassReport:
    is_hose: bool
    is_k_limited: bool
    is_k_sparse: bool
    total: float
    num_sources: int
    num_sinks: int
    violations: list[str] = field(default_factory=list)


_RATE_TOL = 1e-9


def classify(d: TrafficMatrix, k: int) -> TrafficClassReport:
    """Check hose, k-limited, and k-sparse membership, reporting every
    violation found rather than stopping at the first."""
    violations: list[str] = []
    out_rate: dict[Node, float] = {}
    in_rate: dict[Node, float] = {}
    for (s, t), demand in d.entries.items():
        out_rate[s] = out_rate.get(s, 0.0) + demand
        in_rate[t] = in_rate.get(t, 0.0) + demand

    is_hose = True
    for s, rate in sorted(out_rate.items()):
        if rate > 1.0 + _RATE_TOL:
            is_hose = False
            violations.append(f"source {s} rate {rate:.6g} exceeds 1")
    for t, rate in sorted(in_rate.items()):
        if rate > 1.0 + _RATE_TOL:
            is_hose = False
            violations.append(f"sink {t} rate {rate:.6g} exceeds 1")

    total = d.total()
    is_k_limited = is_hose
    if total > k + _RATE_TOL:
        is_k_limited = False
        violations.append(f"total demand {total:.6g} exceeds k={k}")

    is_k_sparse = is_hose
    num_sources, num_sinks = len(out_rate), len(in_rate)
    if num_sources > k:
        is_k_sparse = False
        violations.append(f"{num_sources} sources exceed k={k}")
    if num_sinks > k:
        is_k_sparse = False
        violations.append(f"{num_sinks} sinks exceed k={k}")

    return TrafficClassReport(
        is_hose=is_hose,
        is_k_limited=is_k_limited,
        is_k_sparse=is_k_sparse,
        total=total,
        num_sources=num_sources,
        num_sinks=num_sinks,
        violations=violations,
    )


def gen_split_diamond(spec: TorusSpec, r: int) -> TrafficMatrix:
    """Two diamond-shaped source clusters, one hugging the origin and one
    hugging the antipode, every source sending one unit to the node half the
    torus away in both axes.  Total demand is exactly 2*r**2."""
    if not spec.is_square_symmetric():
        raise NotSquare("split-diamond requires a square symmetric torus")
    n = spec.rows
    if n % 2 != 0:
        raise OddSizeUnsupported("split-diamond requires an even torus extent")
    if r < 1 or 2 * r * r > n * n // 2:
        raise TrafficError(f"need 1 <= 2*r^2 <= N^2/2, got r={r}")
    t_star = Node(n // 2, n // 2)
    origin = Node(0, 0)
    half = n // 2 - 1

    def hop(u: Node, v: Node) -> int:
        from toruslb.torus import hop_distance

        return hop_distance(spec, u, v)

    sources = [
        j
        for j in spec.nodes()
        if j.y <= half and (hop(j, origin) < r or hop(j, t_star) <= r)
    ]
    entries = {(s, node_add(spec, s, t_star)): 1.0 for s in sources}
    return TrafficMatrix(spec=spec, entries=entries)


def gen_hotspot(spec: TorusSpec, k: int, origin: Node = Node(0, 0)) -> TrafficMatrix:
    """Two adjacent square-ish blocks: k sources filling a floor(sqrt(k))-wide
    block row-major from ``origin``, k sinks in the horizontally adjacent
    block, source i paired with sink i."""
    if k < 1 or k > spec.num_nodes // 2:
        raise TrafficError(f"need 1 <= k <= {spec.num_nodes // 2}")
    width = max(1, int(np.sqrt(k)))
    height = -(-k // width)
    if 2 * width > spec.cols or height > spec.rows:
        raise DoesNotFit(f"two {width}x{height} blocks do not fit on {spec.cols}x{spec.rows}")
    entries: dict[tuple[Node, Node], float] = {}
    for i in range(k):
        dx, dy = i % width, i // width
        src = spec.wrap(origin.x + dx, origin.y + dy)
        dst = spec.wrap(origin.x + width + dx, origin.y + dy)
        entries[(src, dst)] = 1.0
    return TrafficMatrix(spec=spec, entries=entries)


def gen_random_sparse(spec: TorusSpec, k: int, seed: int) -> TrafficMatrix:
    """k distinct sources and k distinct sinks drawn uniformly without
    replacement, paired by a uniform random permutation.  A permutation that
    pairs a node with itself is redrawn, so the result is always a valid
    traffic matrix.  Deterministic given the seed."""
    if k < 1 or k > spec.num_nodes:
        raise TrafficError(f"need 1 <= k <= {spec.num_nodes}")
    rng = np.random.default_rng(seed)
    all_nodes = list(spec.nodes())
    src_idx = rng.choice(len(all_nodes), size=k, replace=False)
    dst_idx = rng.choice(len(all_nodes), size=k, replace=False)
    sources = [all_nodes[i] for i in src_idx]
    sinks = [all_nodes[i] for i in dst_idx]
    while True:
        perm = rng.permutation(k)
        if all(sources[i] != sinks[perm[i]] for i in range(k)):
            break
    entries = {(sources[i], sinks[perm[i]]): 1.0 for i in range(k)}
    return TrafficMatrix(spec=spec, entries=entries)


def gen_generalized_split(
    spec: TorusSpec, lambda_v: float, lambda_h: float, r: float
) -> tuple[TrafficMatrix, TrafficMatrix]:
    """Weighted-distance analogue of the split-diamond pair for N x M tori.

    Both matrices send one unit per source toward the displacement that is
    half the torus in each axis; the first restricts sources to the lower
    half-plane in y, the second to the left half-plane in x.  Source sets are
    the open weighted ball around the origin and the closed weighted ball
    around the far node, matching the square construction, so each total is
    at most 2*r^2/(lambda_v*lambda_h)."""
    if spec.rows % 2 != 0 or spec.cols % 2 != 0:
        raise OddSizeUnsupported("generalized split requires even extents")
    if lambda_v <= 0 or lambda_h <= 0:
        raise TrafficError("weights must be positive")
    t_star = Node(spec.cols // 2, spec.rows // 2)
    origin = Node(0, 0)

    def wd(a: Node, b: Node) -> float:
        return weighted_distance(spec, a, b, lambda_v, lambda_h)

    def build(half_plane: Callable[[Node], bool]) -> TrafficMatrix:
        sources = [
            j
            for j in spec.nodes()
            if half_plane(j) and (wd(j, origin) < r or wd(j, t_star) <= r)
        ]
        return TrafficMatrix(
            spec=spec, entries={(s, node_add(spec, s, t_star)): 1.0 for s in sources}
        )

    d1 = build(lambda j: j.y <= spec.rows // 2 - 1)
    d2 = build(lambda j: j.x <= spec.cols // 2 - 1)
    return d1, d2


def transform_traffic(d: TrafficMatrix, phi: Automorphism) -> TrafficMatrix:
    """Pull the demand map back through an automorphism:
    d'_{s,t} = d_{phi(s), phi(t)}."""
    inv = invert_automorphism(d.spec, phi)
    entries = {
        (apply_automorphism(d.spec, inv, s), apply_automorphism(d.spec, inv, t)): v
        for (s, t), v in d.entries.items()
    }
    return TrafficMatrix(spec=d.spec, entries=entries)


CSV_HEADER = ["src_x", "src_y", "dst_x", "dst_y", "demand"]


def traffic_to_csv(d: TrafficMatrix) -> str:
    buf = StringIO()
    writer = csv.writer(buf)
    writer.writerow(CSV_HEADER)
    for (s, t), v in sorted(d.entries.items()):
        writer.writerow([s.x, s.y, t.x, t.y, repr(v)])
    return buf.getvalue()


def traffic_from_csv(spec: TorusSpec, text: str) -> TrafficMatrix:
    reader = csv.reader(StringIO(text))
    header = next(reader)
    if header != CSV_HEADER:
        raise TrafficError(f"unexpected header {header}")
    entries: dict[tuple[Node, Node], float] = {}
    for row in reader:
        if not row:
            continue
        sx, sy, tx, ty, v = row
        entries[(Node(int(sx), int(sy)), Node(int(tx), int(ty)))] = float(v)
    return TrafficMatrix(spec=spec, entries=entries)
