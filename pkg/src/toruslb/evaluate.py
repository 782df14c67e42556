"""Exact load evaluation and worst-case analysis over k-limited traffic.

The worst case over the k-limited polytope is computed combinatorially: for a
fixed edge the load is linear in the demand, the polytope's vertices are 0/1
matrices with per-source and per-sink multiplicity one and at most k entries,
so maximizing load on that edge is a maximum-weight bipartite matching with a
cardinality cap.  That matching is solved exactly by successive shortest
paths, which also yields the hose-model dual multipliers used by the LP
export's feasibility checks.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np

from toruslb.policy import FullPolicy, OriginPolicy, Policy, check_reflection_invariance
from toruslb.torus import DirectedEdge, Direction, Node, node_add, node_sub
from toruslb.traffic import TrafficMatrix

VALUE_TOL = 1e-9


class SpecMismatch(ValueError):
    pass


@dataclass
class LoadReport:
    per_edge: dict[DirectedEdge, float]
    max_load: float
    argmax_edge: DirectedEdge | None
    avg_hops: float


@dataclass
class WorstCaseResult:
    value: float
    witness: TrafficMatrix
    edge: DirectedEdge


def edge_loads(p: Policy, d: TrafficMatrix) -> LoadReport:
    """Capacity-normalized load of every edge under demand ``d``, plus the
    demand-weighted mean path length."""
    if p.spec != d.spec:
        raise SpecMismatch("policy and traffic use different torus specs")
    spec = p.spec
    per_edge: dict[DirectedEdge, float] = {}
    hops = 0.0
    for (s, t), amount in d.entries.items():
        flows = p.pair_flows(s, t)
        for edge, frac in flows.items():
            per_edge[edge] = per_edge.get(edge, 0.0) + amount * frac / spec.capacity(edge.dir)
            hops += amount * frac
    total = d.total()
    if per_edge:
        argmax_edge = max(sorted(per_edge), key=lambda e: per_edge[e])
        max_load = per_edge[argmax_edge]
    else:
        argmax_edge, max_load = None, 0.0
    return LoadReport(
        per_edge=per_edge,
        max_load=max_load,
        argmax_edge=argmax_edge,
        avg_hops=hops / total if total > 0 else 0.0,
    )


@dataclass
class MatchingResult:
    value: float
    assignment: list[tuple[Hashable, Hashable]]
    row_duals: dict[Hashable, float]
    col_duals: dict[Hashable, float]
    card_dual: float


def _k_matching_sparse(
    weights: dict[tuple[Hashable, Hashable], float], k: int
) -> MatchingResult:
    """Maximum-weight bipartite matching with at most k edges, by successive
    shortest paths on the min-cost-flow formulation (costs are negated
    weights; augmentation stops when the marginal path is unprofitable)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    rows = sorted({r for r, _ in weights})
    cols = sorted({c for _, c in weights})
    nr, nc = len(rows), len(cols)
    if nr == 0:
        return MatchingResult(0.0, [], {}, {}, 0.0)
    row_id = {r: i for i, r in enumerate(rows)}
    col_id = {c: nr + i for i, c in enumerate(cols)}
    src, sink = nr + nc, nr + nc + 1
    n = nr + nc + 2

    # adjacency: lists of [to, cap, cost, rev_index]
    graph: list[list[list]] = [[] for _ in range(n)]

    def add_arc(u: int, v: int, cap: int, cost: float) -> None:
        graph[u].append([v, cap, cost, len(graph[v])])
        graph[v].append([u, 0, -cost, len(graph[u]) - 1])

    for r in rows:
        add_arc(src, row_id[r], 1, 0.0)
    for (r, c), w in sorted(weights.items()):
        if w > 0:
            add_arc(row_id[r], col_id[c], k, -w)
    for c in cols:
        add_arc(col_id[c], sink, 1, 0.0)

    potential = [0.0] * n
    # initial exact distances on the (acyclic) zero-flow graph
    dist0 = [float("inf")] * n
    dist0[src] = 0.0
    for u in (src, *range(nr), *range(nr, nr + nc)):
        if dist0[u] == float("inf"):
            continue
        for arc in graph[u]:
            v, cap, cost, _ = arc
            if cap > 0 and dist0[u] + cost < dist0[v]:
                dist0[v] = dist0[u] + cost
    finite = [x for x in dist0 if x < float("inf")]
    ceiling = max(finite) if finite else 0.0
    potential = [x if x < float("inf") else ceiling for x in dist0]

    value = 0.0
    flow_pairs: dict[tuple[int, int], int] = {}
    pushed = 0
    while pushed < k:
        # Dijkstra on reduced costs
        dist = [float("inf")] * n
        prev: list[tuple[int, int] | None] = [None] * n
        dist[src] = 0.0
        heap = [(0.0, src)]
        while heap:
            d_u, u = heapq.heappop(heap)
            if d_u > dist[u] + 1e-15:
                continue
            for idx, arc in enumerate(graph[u]):
                v, cap, cost, _ = arc
                if cap <= 0:
                    continue
                nd = d_u + cost + potential[u] - potential[v]
                if nd < dist[v] - 1e-15:
                    dist[v] = nd
                    prev[v] = (u, idx)
                    heapq.heappush(heap, (nd, v))
        if dist[sink] == float("inf"):
            break
        true_cost = dist[sink] + potential[sink] - potential[src]
        ceiling = max(x for x in dist if x < float("inf"))
        for v in range(n):
            potential[v] += dist[v] if dist[v] < float("inf") else ceiling
        if true_cost >= -VALUE_TOL:
            break
        # augment one unit along the recorded path
        v = sink
        while v != src:
            u, idx = prev[v]
            arc = graph[u][idx]
            arc[1] -= 1
            graph[v][arc[3]][1] += 1
            v = u
        value += -true_cost
        pushed += 1

    for u in range(nr):
        for arc in graph[u]:
            v, cap, cost, rev = arc
            if nr <= v < nr + nc and cost < 0 and graph[v][rev][1] > 0:
                flow_pairs[(u, v)] = graph[v][rev][1]

    assignment = [
        (rows[u], cols[v - nr]) for (u, v) in sorted(flow_pairs) for _ in range(1)
    ]

    # Hose-model duals from the final potentials (cardinality multiplier from
    # clamping the sink potential at the source's level).
    pi_src = potential[src]
    pi_sink = min(potential[sink], pi_src)
    card_dual = pi_src - pi_sink
    row_duals = {r: max(0.0, potential[row_id[r]] - pi_src) for r in rows}
    col_duals = {c: max(0.0, pi_sink - potential[col_id[c]]) for c in cols}
    return MatchingResult(value, assignment, row_duals, col_duals, card_dual)


def k_matching_max(
    weights: Sequence[Sequence[float]], k: int
) -> tuple[float, list[tuple[int, int]]]:
    """Maximum total weight of a matching using at most k entries of a dense
    matrix, with row/column multiplicity at most one."""
    sparse = {
        (i, j): float(w)
        for i, row in enumerate(weights)
        for j, w in enumerate(row)
        if w > 0
    }
    result = _k_matching_sparse(sparse, k)
    return result.value, result.assignment


def pair_weights_on_edge(p: Policy, edge: DirectedEdge) -> dict[tuple[Node, Node], float]:
    """f^{s,t}_edge for every pair with nonzero flow on ``edge``."""
    spec = p.spec
    weights: dict[tuple[Node, Node], float] = {}
    if isinstance(p, OriginPolicy):
        for t_off, flows in p.flows.items():
            for e, v in flows.items():
                if e.dir != edge.dir or v <= 0:
                    continue
                s = node_sub(spec, edge.tail, e.tail)
                weights[(s, node_add(spec, s, t_off))] = v
    else:
        for (s, t), flows in p.flows.items():
            v = flows.get(edge, 0.0)
            if v > 0:
                weights[(s, t)] = v
    return weights


def candidate_edges(p: Policy) -> list[DirectedEdge]:
    """Edges whose k-limited maxima determine the worst case.

    Origin policies are translation invariant, so only the four origin edges
    can differ; reflection invariance further collapses opposite directions,
    and the x=y reflection identifies the two axes on square symmetric specs.
    """
    origin = Node(0, 0)
    if isinstance(p, FullPolicy):
        return sorted(p.spec.edges())
    if check_reflection_invariance(p):
        if p.spec.is_square_symmetric():
            return [DirectedEdge(origin, Direction.POS_VERT)]
        return [
            DirectedEdge(origin, Direction.POS_VERT),
            DirectedEdge(origin, Direction.POS_HOR),
        ]
    return [DirectedEdge(origin, d) for d in Direction]


def worst_case_load(
    p: Policy, k: int, edges: list[DirectedEdge] | None = None
) -> WorstCaseResult:
    """Exact maximum of MaxLoad(p, d) over all k-limited demands, with an
    integral k-sparse witness."""
    spec = p.spec
    best: WorstCaseResult | None = None
    for edge in edges if edges is not None else candidate_edges(p):
        weights = pair_weights_on_edge(p, edge)
        if not weights:
            continue
        result = _k_matching_sparse(weights, k)
        load = result.value / spec.capacity(edge.dir)
        if best is None or load > best.value + VALUE_TOL:
            witness = TrafficMatrix(
                spec=spec, entries={pair: 1.0 for pair in result.assignment}
            )
            best = WorstCaseResult(value=load, witness=witness, edge=edge)
    if best is None:
        empty_edge = DirectedEdge(Node(0, 0), Direction.POS_VERT)
        return WorstCaseResult(
            value=0.0, witness=TrafficMatrix(spec=spec, entries={}), edge=empty_edge
        )
    return best


@dataclass
class TrialSummary:
    trials: int
    base_seed: int
    max_load_mean: float
    max_load_std: float
    max_load_min: float
    max_load_max: float
    avg_hops_mean: float
    avg_hops_std: float
    avg_hops_min: float
    avg_hops_max: float


def run_trials(
    p: Policy,
    generator: Callable[[int], TrafficMatrix],
    trials: int,
    base_seed: int,
    jobs: int = 1,
) -> TrialSummary:
    """Evaluate a policy on ``trials`` generated demands (trial i uses seed
    base_seed + i) and summarize max load and mean hops."""
    if trials < 1:
        raise ValueError("trials must be at least 1")

    def one(i: int) -> tuple[float, float]:
        report = edge_loads(p, generator(base_seed + i))
        return report.max_load, report.avg_hops

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(i) for i in range(trials)]
    loads = np.array([r[0] for r in results])
    hops = np.array([r[1] for r in results])
    return TrialSummary(
        trials=trials,
        base_seed=base_seed,
        max_load_mean=float(loads.mean()),
        max_load_std=float(loads.std()),
        max_load_min=float(loads.min()),
        max_load_max=float(loads.max()),
        avg_hops_mean=float(hops.mean()),
        avg_hops_std=float(hops.std()),
        avg_hops_min=float(hops.min()),
        avg_hops_max=float(hops.max()),
    )


def load_report_to_csv(report: LoadReport) -> str:
    lines = ["edge_tail_x,edge_tail_y,dir,load"]
    for edge, load in sorted(report.per_edge.items()):
        lines.append(f"{edge.tail.x},{edge.tail.y},{edge.dir.token},{load!r}")
    return "\n".join(lines) + "\n"


def trial_summary_to_csv(summary: TrialSummary) -> str:
    lines = ["metric,mean,std,min,max,trials,seed"]
    for metric, prefix in (("max_load", "max_load"), ("avg_hops", "avg_hops")):
        vals = [getattr(summary, f"{prefix}_{f}") for f in ("mean", "std", "min", "max")]
        lines.append(
            f"{metric},{vals[0]!r},{vals[1]!r},{vals[2]!r},{vals[3]!r},"
            f"{summary.trials},{summary.base_seed}"
        )
    return "\n".join(lines) + "\n"
