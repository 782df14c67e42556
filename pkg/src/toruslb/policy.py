"""Routing-policy representations and their structural checks.

An :class:`OriginPolicy` stores, for each destination offset t, the fraction
of origin-to-t traffic carried by each directed edge.  Translation invariance
turns it into a full policy: the pair (s, s+t) uses edge (i, e) with fraction
``g[t][(i - s, e)]``.  A :class:`FullPolicy` stores per-pair flows directly
and is used for symmetrization experiments and arbitrary-policy evaluation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from io import StringIO

from toruslb.torus import (
    Automorphism,
    DIRECTION_FROM_TOKEN,
    DirectedEdge,
    Node,
    TorusSpec,
    apply_automorphism,
    apply_to_edge,
    invert_automorphism,
    node_add,
    node_sub,
    point_group,
)

CONSERVATION_TOL = 1e-9
BOUND_TOL = 1e-12

EdgeFlows = dict[DirectedEdge, float]


@dataclass(frozen=True)
class OriginPolicy:
    spec: TorusSpec
    flows: dict[Node, EdgeFlows]

    def pair_flows(self, s: Node, t: Node) -> EdgeFlows:
        """Edge flows for the pair s -> t, obtained by translating the
        origin-to-offset route."""
        offset = node_sub(self.spec, t, s)
        base = self.flows.get(offset, {})
        return {
            DirectedEdge(node_add(self.spec, e.tail, s), e.dir): v
            for e, v in base.items()
        }

    def destinations(self) -> list[Node]:
        return sorted(self.flows.keys())


@dataclass(frozen=True)
class FullPolicy:
    spec: TorusSpec
    flows: dict[tuple[Node, Node], EdgeFlows]

    def pair_flows(self, s: Node, t: Node) -> EdgeFlows:
        return self.flows.get((s, t), {})


Policy = OriginPolicy | FullPolicy


def _balance_violations(
    spec: TorusSpec, label: str, flows: EdgeFlows, source: Node, dest: Node
) -> list[str]:
    violations = []
    balance: dict[Node, float] = {}
    for edge, v in flows.items():
        if v < -BOUND_TOL or v > 1.0 + BOUND_TOL:
            violations.append(f"{label}: flow {v!r} on {edge} outside [0, 1]")
        balance[edge.tail] = balance.get(edge.tail, 0.0) + v
        head = spec.edge_head(edge)
        balance[head] = balance.get(head, 0.0) - v
    balance[source] = balance.get(source, 0.0) - 1.0
    balance[dest] = balance.get(dest, 0.0) + 1.0
    for node, residual in sorted(balance.items()):
        if abs(residual) > CONSERVATION_TOL:
            violations.append(f"{label}: node {node} residual {residual:.3e}")
    return violations


def validate_policy(p: Policy) -> list[str]:
    """Flow-conservation and box-bound check; empty list means valid."""
    violations: list[str] = []
    if isinstance(p, OriginPolicy):
        origin = Node(0, 0)
        for t in p.destinations():
            violations.extend(
                _balance_violations(p.spec, f"dest {t}", p.flows[t], origin, t)
            )
    else:
        for (s, t) in sorted(p.flows.keys()):
            violations.extend(
                _balance_violations(p.spec, f"pair {s}->{t}", p.flows[(s, t)], s, t)
            )
    return violations


def expand(g: OriginPolicy) -> FullPolicy:
    """Materialize the translation-invariant full policy for every pair."""
    flows: dict[tuple[Node, Node], EdgeFlows] = {}
    for s in g.spec.nodes():
        for t_off in g.flows:
            t = node_add(g.spec, s, t_off)
            flows[(s, t)] = {
                DirectedEdge(node_add(g.spec, e.tail, s), e.dir): v
                for e, v in g.flows[t_off].items()
            }
    return FullPolicy(spec=g.spec, flows=flows)


def symmetrize(f: FullPolicy, group: list[Automorphism]) -> FullPolicy:
    """Average a policy over a set of automorphisms.  The result is invariant
    under every group element and its worst-case load never exceeds the
    input's."""
    if not group:
        raise ValueError("group must be nonempty")
    spec = f.spec
    weight = 1.0 / len(group)
    out: dict[tuple[Node, Node], EdgeFlows] = {}
    for phi in group:
        inv = invert_automorphism(spec, phi)
        for (a, b), edge_flows in f.flows.items():
            s = apply_automorphism(spec, inv, a)
            t = apply_automorphism(spec, inv, b)
            dst = out.setdefault((s, t), {})
            for e, v in edge_flows.items():
                e_pre = apply_to_edge(spec, inv, e)
                dst[e_pre] = dst.get(e_pre, 0.0) + weight * v
    return FullPolicy(spec=spec, flows=out)


def symmetrize_origin(g: OriginPolicy) -> OriginPolicy:
    """Average an origin policy over the spec's point group, enforcing the
    reflection identities destination class by destination class."""
    spec = g.spec
    group = point_group(spec)
    weight = 1.0 / len(group)
    out: dict[Node, EdgeFlows] = {}
    for phi in group:
        for t, edge_flows in g.flows.items():
            t_img = apply_automorphism(spec, phi, t)
            dst = out.setdefault(t_img, {})
            for e, v in edge_flows.items():
                e_img = apply_to_edge(spec, phi, e)
                dst[e_img] = dst.get(e_img, 0.0) + weight * v
    # Every point-group image of a built destination is covered, so each
    # destination accumulated |stabilizer| * weight * (its own copies); the
    # total per destination stays 1 because the group acts by bijections.
    return OriginPolicy(spec=spec, flows=out)


def check_reflection_invariance(g: OriginPolicy, tol: float = CONSERVATION_TOL) -> bool:
    """True iff the applicable reflection identities hold: origin reflection
    always, the x=y reflection additionally on square symmetric specs."""
    spec = g.spec
    for phi in point_group(spec):
        if not phi.reflect_origin and not phi.reflect_xy:
            continue
        for t, edge_flows in g.flows.items():
            t_img = apply_automorphism(spec, phi, t)
            image = g.flows.get(t_img, {})
            mapped = {apply_to_edge(spec, phi, e): v for e, v in edge_flows.items()}
            keys = set(mapped) | set(image)
            for e in keys:
                if abs(mapped.get(e, 0.0) - image.get(e, 0.0)) > tol:
                    return False
    return True


ORIGIN_CSV_HEADER = ["dst_x", "dst_y", "tail_x", "tail_y", "dir", "fraction"]
FULL_CSV_HEADER = ["src_x", "src_y"] + ORIGIN_CSV_HEADER


def policy_to_csv(p: Policy) -> str:
    buf = StringIO()
    writer = csv.writer(buf)
    if isinstance(p, OriginPolicy):
        writer.writerow(ORIGIN_CSV_HEADER)
        for t in p.destinations():
            for e, v in sorted(p.flows[t].items()):
                writer.writerow([t.x, t.y, e.tail.x, e.tail.y, e.dir.token, repr(v)])
    else:
        writer.writerow(FULL_CSV_HEADER)
        for (s, t) in sorted(p.flows.keys()):
            for e, v in sorted(p.flows[(s, t)].items()):
                writer.writerow(
                    [s.x, s.y, t.x, t.y, e.tail.x, e.tail.y, e.dir.token, repr(v)]
                )
    return buf.getvalue()


def origin_policy_from_csv(spec: TorusSpec, text: str) -> OriginPolicy:
    reader = csv.reader(StringIO(text))
    header = next(reader)
    if header != ORIGIN_CSV_HEADER:
        raise ValueError(f"unexpected header {header}")
    flows: dict[Node, EdgeFlows] = {}
    for row in reader:
        if not row:
            continue
        tx, ty, ex, ey, tok, v = row
        edge = DirectedEdge(Node(int(ex), int(ey)), DIRECTION_FROM_TOKEN[tok])
        flows.setdefault(Node(int(tx), int(ty)), {})[edge] = float(v)
    return OriginPolicy(spec=spec, flows=flows)
