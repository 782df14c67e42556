"""Stems, edge-disjoint path discovery between stems, and max-flow/min-cut
utilities.

A stem is the 4-legged cross of nodes within a per-axis radius of a center
(center excluded).  The local load-balancing schemes spread traffic over the
source stem, cross between stems on pairwise edge-disjoint paths, and
aggregate at the destination stem; the path search here provides that
crossing with two paths per stem node on each side.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from toruslb.torus import DirectedEdge, Direction, Node, TorusSpec


class PathError(ValueError):
    pass


class RadiusTooLarge(PathError):
    pass


class StemsOverlap(PathError):
    pass


class CutTooSmall(PathError):
    """Min cut between the stems cannot support two paths per stem node."""


EdgePath = list[DirectedEdge]


@dataclass(frozen=True)
class Stem:
    center: Node
    members: tuple[Node, ...]
    r1: int
    r2: int

    def __len__(self) -> int:
        return len(self.members)


def stem(spec: TorusSpec, center: Node, r1: int, r2: int) -> Stem:
    """Nodes differing from ``center`` in exactly one coordinate, within r1
    hops vertically or r2 hops horizontally.  Leg order: +v, -v, +h, -h, each
    by increasing hop."""
    if r1 < 0 or r2 < 0:
        raise RadiusTooLarge("radii must be nonnegative")
    if 2 * r1 > spec.rows or 2 * r2 > spec.cols:
        raise RadiusTooLarge(
            f"legs overrun: need 2*r1 <= rows and 2*r2 <= cols, got r1={r1}, r2={r2}"
        )
    members: list[Node] = []
    seen: set[Node] = set()
    for direction, radius in (
        (Direction.POS_VERT, r1),
        (Direction.NEG_VERT, r1),
        (Direction.POS_HOR, r2),
        (Direction.NEG_HOR, r2),
    ):
        node = center
        for _ in range(radius):
            node = spec.step(node, direction)
            # opposite legs meet at the antipode when 2*r equals the extent
            if node not in seen:
                seen.add(node)
                members.append(node)
    return Stem(center=center, members=tuple(members), r1=r1, r2=r2)


def stem_slot_edges(spec: TorusSpec, center: Node, r1: int, r2: int, outward: bool) -> set[DirectedEdge]:
    """Directed leg edges of the stem at ``center``: pointing away from the
    center when ``outward`` (distribution edges), toward it otherwise
    (aggregation edges)."""
    edges: set[DirectedEdge] = set()
    for direction, radius in (
        (Direction.POS_VERT, r1),
        (Direction.NEG_VERT, r1),
        (Direction.POS_HOR, r2),
        (Direction.NEG_HOR, r2),
    ):
        node = center
        for _ in range(radius):
            nxt = spec.step(node, direction)
            if outward:
                edges.add(DirectedEdge(node, direction))
            else:
                edges.add(DirectedEdge(nxt, direction.opposite))
            node = nxt
    return edges


class _Dinic:
    """Max flow on integer capacities with a reachable-set min cut."""

    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_edge(self, u: int, v: int, cap: int) -> int:
        idx = len(self.to)
        self.head[u].append(idx)
        self.to.append(v)
        self.cap.append(cap)
        self.head[v].append(idx + 1)
        self.to.append(u)
        self.cap.append(0)
        return idx

    def _bfs_levels(self, s: int, t: int) -> list[int] | None:
        level = [-1] * self.n
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for idx in self.head[u]:
                v = self.to[idx]
                if self.cap[idx] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level if level[t] >= 0 else None

    def _dfs(self, u: int, t: int, pushed: int, level: list[int], it: list[int]) -> int:
        if u == t:
            return pushed
        while it[u] < len(self.head[u]):
            idx = self.head[u][it[u]]
            v = self.to[idx]
            if self.cap[idx] > 0 and level[v] == level[u] + 1:
                d = self._dfs(v, t, min(pushed, self.cap[idx]), level, it)
                if d > 0:
                    self.cap[idx] -= d
                    self.cap[idx ^ 1] += d
                    return d
            it[u] += 1
        return 0

    def max_flow(self, s: int, t: int) -> int:
        flow = 0
        while True:
            level = self._bfs_levels(s, t)
            if level is None:
                return flow
            it = [0] * self.n
            while True:
                pushed = self._dfs(s, t, 1 << 62, level, it)
                if pushed == 0:
                    break
                flow += pushed

    def reachable(self, s: int) -> set[int]:
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for idx in self.head[u]:
                v = self.to[idx]
                if self.cap[idx] > 0 and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen


def max_flow(
    spec: TorusSpec,
    removed: set[DirectedEdge],
    sources: set[Node],
    sinks: set[Node],
    capacities: dict[DirectedEdge, float] | None = None,
) -> tuple[float, set[DirectedEdge]]:
    """Exact max flow from a node set to a node set over the torus edges,
    returning the value and a witnessing min cut.

    Capacities default to the spec's per-direction values; rational values
    are scaled to integers so the value and cut agree exactly.
    """
    if sources & sinks:
        raise PathError("sources and sinks must be disjoint")
    caps: dict[DirectedEdge, Fraction] = {}
    for edge in spec.edges():
        if edge in removed:
            continue
        if capacities is not None:
            c = capacities.get(edge, spec.capacity(edge.dir))
        else:
            c = spec.capacity(edge.dir)
        caps[edge] = Fraction(c).limit_denominator(10**6)
    scale = lcm(*(f.denominator for f in caps.values())) if caps else 1

    index = {node: i for i, node in enumerate(spec.nodes())}
    n = len(index)
    source_id, sink_id = n, n + 1
    dinic = _Dinic(n + 2)
    edge_ids: dict[int, DirectedEdge] = {}
    big = (sum(int(f * scale) for f in caps.values()) or 1) + 1
    for edge, frac in sorted(caps.items()):
        idx = dinic.add_edge(
            index[edge.tail], index[spec.edge_head(edge)], int(frac * scale)
        )
        edge_ids[idx] = edge
    for node in sorted(sources):
        dinic.add_edge(source_id, index[node], big)
    for node in sorted(sinks):
        dinic.add_edge(index[node], sink_id, big)

    value = dinic.max_flow(source_id, sink_id)
    reach = dinic.reachable(source_id)
    cut = {
        edge
        for idx, edge in edge_ids.items()
        if index[edge.tail] in reach and index[spec.edge_head(edge)] not in reach
    }
    cut_value = sum(caps[e] for e in cut) * scale
    assert cut_value == value, "max-flow/min-cut duality violated"
    return value / scale, cut


def min_cut_between_stems(
    spec: TorusSpec, src: Node, dst: Node, r1: int, r2: int
) -> float:
    """Capacity-weighted min cut separating the two stems, by max flow from a
    super-source attached to the source stem."""
    s_stem = stem(spec, src, r1, r2)
    t_stem = stem(spec, dst, r1, r2)
    if (set(s_stem.members) | {src}) & (set(t_stem.members) | {dst}):
        raise StemsOverlap(f"stems of {src} and {dst} intersect")
    value, _ = max_flow(spec, set(), set(s_stem.members), set(t_stem.members))
    return value


def route_disjoint_quanta(
    spec: TorusSpec,
    suppliers: list[tuple[Node, int]],
    demanders: list[tuple[Node, int]],
    forbidden: set[DirectedEdge],
    capacities: dict[DirectedEdge, int] | None = None,
    default_capacity: int = 1,
) -> list[EdgePath]:
    """Paths carrying one quantum each from suppliers to demanders, with the
    given per-node path counts and per-edge quantum capacities (default 1,
    i.e. pairwise edge-disjoint paths; ``forbidden`` edges carry nothing).

    Each quantum is routed by a shortest breadth-first search over the
    residual graph, seeded with every supplier that still has quota in the
    given order, so a search may undo an earlier path's edge instead of
    dead-ending.  Whenever the quotas admit a solution at all this finds one,
    deterministically.
    """
    supply: dict[Node, int] = {}
    supply_order: list[Node] = []
    for node, quota in suppliers:
        if node not in supply:
            supply_order.append(node)
        supply[node] = supply.get(node, 0) + quota
    remaining: dict[Node, int] = {}
    for node, quota in demanders:
        remaining[node] = remaining.get(node, 0) + quota
    if set(supply) & set(remaining):
        raise PathError("suppliers and demanders must be disjoint")
    consumed: dict[Node, int] = {node: 0 for node in remaining}
    flow: dict[DirectedEdge, int] = {}

    def cap(edge: DirectedEdge) -> int:
        if edge in forbidden:
            return 0
        if capacities is not None:
            return capacities.get(edge, default_capacity)
        return default_capacity

    for _ in range(sum(supply.values())):
        path = _bfs_residual(spec, supply_order, supply, remaining, flow, cap)
        if path is None:
            raise PathError(
                f"no augmenting path; {sum(remaining.values())} quanta unrouted"
            )
        for edge in path:
            back = DirectedEdge(spec.edge_head(edge), edge.dir.opposite)
            if flow.get(back, 0) > 0:
                flow[back] -= 1
            else:
                flow[edge] = flow.get(edge, 0) + 1
        supply[path[0].tail] -= 1
        end = spec.edge_head(path[-1])
        remaining[end] -= 1
        consumed[end] += 1
    return _decompose_flow(spec, suppliers, consumed, flow)


def _bfs_residual(
    spec: TorusSpec,
    supply_order: list[Node],
    supply: dict[Node, int],
    remaining: dict[Node, int],
    flow: dict[DirectedEdge, int],
    cap,
) -> EdgePath | None:
    """Shortest residual path from any supplier with quota to any node with
    remaining demand.  An edge is traversable if its flow is below capacity,
    or if its reverse currently carries flow (cancellation)."""
    parent: dict[Node, DirectedEdge] = {}
    seeds = [node for node in supply_order if supply[node] > 0]
    seen = set(seeds)
    queue = deque(seeds)
    while queue:
        u = queue.popleft()
        if remaining.get(u, 0) > 0:
            path: EdgePath = []
            node = u
            while node in parent:
                edge = parent[node]
                path.append(edge)
                node = edge.tail
            path.reverse()
            return path
        for d in Direction:
            edge = DirectedEdge(u, d)
            v = spec.edge_head(edge)
            if v in seen:
                continue
            back = DirectedEdge(v, d.opposite)
            if flow.get(edge, 0) < cap(edge) or flow.get(back, 0) > 0:
                seen.add(v)
                parent[v] = edge
                queue.append(v)
    return None


def _decompose_flow(
    spec: TorusSpec,
    suppliers: list[tuple[Node, int]],
    consumed: dict[Node, int],
    flow: dict[DirectedEdge, int],
) -> list[EdgePath]:
    """Split an integer edge flow into one path per supplied quantum."""
    flow_out: dict[Node, list[DirectedEdge]] = {}
    total_units = 0
    for edge in sorted(flow):
        for _ in range(flow[edge]):
            flow_out.setdefault(edge.tail, []).append(edge)
            total_units += 1
    terminal = dict(consumed)
    paths: list[EdgePath] = []
    limit = total_units + 1
    for node, quota in suppliers:
        for _ in range(quota):
            path: EdgePath = []
            u = node
            for _step in range(limit):
                if path and terminal.get(u, 0) > 0:
                    terminal[u] -= 1
                    break
                edge = flow_out[u].pop(0)
                path.append(edge)
                u = spec.edge_head(edge)
            else:
                raise PathError("flow decomposition failed to terminate")
            paths.append(_trim_cycles(path, spec))
    assert all(v == 0 for v in terminal.values()), "terminals left unserved"
    return paths


def _trim_cycles(path: EdgePath, spec: TorusSpec) -> EdgePath:
    """Loop-erase a walk so the result visits each node at most once."""
    if not path:
        return []
    nodes = [path[0].tail]
    index = {path[0].tail: 0}
    out: EdgePath = []
    for edge in path:
        head = spec.edge_head(edge)
        if head in index:
            k = index[head]
            for dropped in nodes[k + 1 :]:
                del index[dropped]
            del nodes[k + 1 :]
            del out[k:]
        else:
            out.append(edge)
            nodes.append(head)
            index[head] = len(nodes) - 1
    return out


def find_disjoint_stem_paths(
    spec: TorusSpec, src: Node, dst: Node, r1: int, r2: int
) -> list[EdgePath]:
    """2*(2r1+2r2) pairwise edge-disjoint paths between the stems of ``src``
    and ``dst``: two leaving each source-stem node, two arriving at each
    destination-stem node, found by deterministic sequential BFS.

    The search never rides the stems' own distribution or aggregation edges,
    so the paths compose with the local load-balancing phases without
    overloading leg edges.
    """
    s_stem = stem(spec, src, r1, r2)
    t_stem = stem(spec, dst, r1, r2)
    if (set(s_stem.members) | {src}) & (set(t_stem.members) | {dst}):
        raise StemsOverlap(f"stems of {src} and {dst} intersect")
    forbidden = stem_slot_edges(spec, src, r1, r2, outward=True) | stem_slot_edges(
        spec, dst, r1, r2, outward=False
    )
    # The cut around either stem-plus-center has only 4 spare edges beyond the
    # 8r path endpoints, so no valid solution transits a stem: forbid re-entry
    # on the source side and exit on the destination side up front, which also
    # forces each path to leave perpendicular to its leg.
    src_plus = set(s_stem.members) | {src}
    dst_plus = set(t_stem.members) | {dst}
    for edge in spec.edges():
        if spec.edge_head(edge) in src_plus or edge.tail in dst_plus:
            forbidden.add(edge)
    suppliers = [(node, 2) for node in s_stem.members]
    demanders = [(node, 2) for node in t_stem.members]
    try:
        return route_disjoint_quanta(spec, suppliers, demanders, forbidden)
    except PathError as exc:
        needed = 2 * len(s_stem.members)
        value, _ = max_flow(
            spec,
            forbidden,
            set(s_stem.members),
            set(t_stem.members),
            capacities={e: 1.0 for e in spec.edges()},
        )
        if value < needed:
            raise CutTooSmall(
                f"min cut {value} between stems supports fewer than {needed} paths"
            ) from exc
        raise PathError(f"greedy BFS failed despite sufficient cut: {exc}") from exc
