"""Emit the reduced oblivious-routing LP and the fixed-demand optimal-routing
LP in CPLEX LP text format, for external solvers.

The oblivious program minimizes the load bound theta over origin-rooted,
reflection-tied flow variables.  Its inner maximization over k-limited
demands is replaced by hose-model duals: per load-edge class, multipliers
a_s, b_t >= 0 and gam >= 0 must cover every pair's flow coefficient on that
edge, and their total (with gam weighted by k) is charged against the edge
capacity times theta.  No solver is embedded; a round-trip parser is
included so tests can verify the emitted files coefficient by coefficient.

Variable naming (bit-exact, asserted by tests):

* ``g_t{tx}_{ty}_e{ex}_{ey}_{dir}`` - flow toward destination offset (tx, ty)
  on the edge with tail (ex, ey); dir is pv/nv/ph/nh.  With deduplication the
  name used is the lexicographically smallest point-group image, which is how
  the reflection ties are encoded.
* ``th`` - the load bound being minimized.
* ``a_{cls}_s{x}_{y}``, ``b_{cls}_t{x}_{y}``, ``gam_{cls}`` - per-source,
  per-sink, and total-demand hose multipliers for load-edge class ``cls``
  (``v`` always, plus ``h`` on specs without the x=y symmetry).
* ``f_p{i}_e{ex}_{ey}_{dir}`` - per-pair flows in the fixed-demand program,
  with pairs indexed in sorted order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import IO, Iterable

from toruslb.policy import OriginPolicy
from toruslb.torus import (
    DirectedEdge,
    Direction,
    Node,
    TorusSpec,
    apply_automorphism,
    apply_to_edge,
    node_sub,
    point_group,
)
from toruslb.traffic import TrafficMatrix

_DIR_NAME = {
    Direction.POS_VERT: "pv",
    Direction.NEG_VERT: "nv",
    Direction.POS_HOR: "ph",
    Direction.NEG_HOR: "nh",
}
MAX_LINE = 255


class IoError(OSError):
    pass


@dataclass
class LpConstraint:
    name: str
    terms: dict[str, float]
    sense: str  # one of <=, >=, =
    rhs: float


@dataclass
class LpModel:
    sense: str
    objective: dict[str, float]
    constraints: list[LpConstraint]
    bounds: dict[str, tuple[float | None, float | None]]

    def variables(self) -> set[str]:
        out = set(self.objective)
        for c in self.constraints:
            out.update(c.terms)
        out.update(self.bounds)
        return out


@dataclass
class LpCounts:
    variables: int
    constraints: int
    flow_variables: int = 0


def _g_name(t: Node, edge: DirectedEdge) -> str:
    return (
        f"g_t{t.x}_{t.y}_e{edge.tail.x}_{edge.tail.y}_{_DIR_NAME[edge.dir]}"
    )


def load_edge_classes(spec: TorusSpec) -> list[tuple[str, DirectedEdge, float]]:
    """Representative load edges: one per direction class surviving the
    spec's reflections."""
    origin = Node(0, 0)
    classes = [("v", DirectedEdge(origin, Direction.POS_VERT), spec.cap_vertical)]
    if not spec.is_square_symmetric():
        classes.append(
            ("h", DirectedEdge(origin, Direction.POS_HOR), spec.cap_horizontal)
        )
    return classes


class _OrbitIndex:
    """Canonical representative of (destination, edge) under the point group,
    so reflection-tied flow variables collapse to one name."""

    def __init__(self, spec: TorusSpec, dedup: bool):
        self.spec = spec
        self.dedup = dedup
        self.group = point_group(spec)

    def orbit(self, t: Node, edge: DirectedEdge) -> list[tuple[Node, DirectedEdge]]:
        return [
            (
                apply_automorphism(self.spec, phi, t),
                apply_to_edge(self.spec, phi, edge),
            )
            for phi in self.group
        ]

    def canonical(self, t: Node, edge: DirectedEdge) -> str:
        if not self.dedup:
            return _g_name(t, edge)
        rep = min(self.orbit(t, edge))
        return _g_name(rep[0], rep[1])


def _emit(sink: IO[str], lines: Iterable[str]) -> None:
    for line in lines:
        while len(line) > MAX_LINE:
            cut = line.rfind(" ", 0, MAX_LINE)
            if cut <= 0:
                break
            sink.write(line[:cut] + "\n")
            line = " " + line[cut + 1 :]
        sink.write(line + "\n")


def _format_terms(terms: list[tuple[float, str]]) -> str:
    parts = []
    for coef, name in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        parts.append(f"{sign} {mag:.17g} {name}")
    joined = " ".join(parts)
    return joined[2:] if joined.startswith("+ ") else joined


def export_reduced_oblivious_lp(
    spec: TorusSpec, k: int, sink: IO[str], dedup: bool = True
) -> LpCounts:
    """Write the dualized reduced oblivious LP: minimize theta subject to
    origin-rooted flow conservation for every destination, reflection ties
    (as variable dedup, or explicit equalities with ``dedup=False``), box
    bounds, and one dualized hose constraint block per load-edge class."""
    origin = Node(0, 0)
    index = _OrbitIndex(spec, dedup)
    nodes = list(spec.nodes())
    dests = [t for t in nodes if t != origin]
    classes = load_edge_classes(spec)

    gvars: set[str] = set()
    for t in dests:
        for edge in spec.edges():
            gvars.add(index.canonical(t, edge))

    constraints: list[tuple[str, list[tuple[float, str]], str, float]] = []

    # flow conservation per (destination, node), on canonical variables
    seen_dest: set[str] = set()
    for t in dests:
        rep_t = min(apply_automorphism(spec, phi, t) for phi in index.group) if dedup else t
        key = f"t{rep_t.x}_{rep_t.y}"
        if key in seen_dest:
            continue
        seen_dest.add(key)
        for i in nodes:
            terms: dict[str, float] = {}
            for d in Direction:
                out_name = index.canonical(rep_t, DirectedEdge(i, d))
                terms[out_name] = terms.get(out_name, 0.0) + 1.0
                tail = spec.wrap(i.x - d.delta[0], i.y - d.delta[1])
                in_name = index.canonical(rep_t, DirectedEdge(tail, d))
                terms[in_name] = terms.get(in_name, 0.0) - 1.0
            rhs = 1.0 if i == origin else (-1.0 if i == rep_t else 0.0)
            constraints.append(
                (
                    f"cons_{key}_n{i.x}_{i.y}",
                    sorted(((c, n) for n, c in terms.items() if c != 0.0), key=lambda x: x[1]),
                    "=",
                    rhs,
                )
            )

    if not dedup:
        # explicit reflection ties binding each variable to its orbit head
        tied: set[tuple[str, str]] = set()
        for t in dests:
            for edge in spec.edges():
                orbit = index.orbit(t, edge)
                head = _g_name(*min(orbit))
                me = _g_name(t, edge)
                if me != head and (me, head) not in tied:
                    tied.add((me, head))
                    constraints.append(
                        (f"tie_{len(tied)}", [(1.0, me), (-1.0, head)], "=", 0.0)
                    )

    dual_vars: set[str] = set()
    for label, edge, cap in classes:
        a_names = {s: f"a_{label}_s{s.x}_{s.y}" for s in nodes}
        b_names = {t: f"b_{label}_t{t.x}_{t.y}" for t in nodes}
        gam = f"gam_{label}"
        dual_vars.update(a_names.values())
        dual_vars.update(b_names.values())
        dual_vars.add(gam)
        budget = [(1.0, name) for name in sorted(a_names.values())]
        budget += [(1.0, name) for name in sorted(b_names.values())]
        budget += [(float(k), gam), (-cap, "th")]
        constraints.append((f"load_{label}", budget, "<=", 0.0))
        for s in nodes:
            for tau in nodes:
                if s == tau:
                    continue
                offset = node_sub(spec, tau, s)
                pair_edge = DirectedEdge(node_sub(spec, origin, s), edge.dir)
                gname = index.canonical(offset, pair_edge)
                constraints.append(
                    (
                        f"hose_{label}_s{s.x}_{s.y}_t{tau.x}_{tau.y}",
                        [(1.0, a_names[s]), (1.0, b_names[tau]), (1.0, gam), (-1.0, gname)],
                        ">=",
                        0.0,
                    )
                )

    lines = ["\\ reduced oblivious routing program", "Minimize", " obj: th", "Subject To"]
    for name, terms, sense, rhs in constraints:
        sense_tok = {"=": "=", "<=": "<=", ">=": ">="}[sense]
        lines.append(f" {name}: {_format_terms(terms)} {sense_tok} {rhs:.17g}")
    lines.append("Bounds")
    for name in sorted(gvars):
        lines.append(f" 0 <= {name} <= 1")
    for name in sorted(dual_vars):
        lines.append(f" 0 <= {name}")
    lines.append(" 0 <= th")
    lines.append("End")
    _emit(sink, lines)
    return LpCounts(
        variables=len(gvars) + len(dual_vars) + 1,
        constraints=len(constraints),
        flow_variables=len(gvars),
    )


def export_opt_lp(spec: TorusSpec, d: TrafficMatrix, sink: IO[str]) -> LpCounts:
    """Write the fixed-demand optimal-routing LP: per-pair flow conservation
    and per-edge load at most capacity times theta, minimized over theta."""
    pairs = sorted(d.entries.items())
    fvars: dict[tuple[int, DirectedEdge], str] = {}
    for p, _ in enumerate(pairs):
        for edge in spec.edges():
            fvars[(p, edge)] = (
                f"f_p{p}_e{edge.tail.x}_{edge.tail.y}_{_DIR_NAME[edge.dir]}"
            )
    constraints: list[tuple[str, list[tuple[float, str]], str, float]] = []
    for p, ((s, tau), _) in enumerate(pairs):
        for i in spec.nodes():
            terms: dict[str, float] = {}
            for dd in Direction:
                terms[fvars[(p, DirectedEdge(i, dd))]] = 1.0
                tail = spec.wrap(i.x - dd.delta[0], i.y - dd.delta[1])
                name = fvars[(p, DirectedEdge(tail, dd))]
                terms[name] = terms.get(name, 0.0) - 1.0
            rhs = 1.0 if i == s else (-1.0 if i == tau else 0.0)
            constraints.append(
                (
                    f"cons_p{p}_n{i.x}_{i.y}",
                    sorted(((c, n) for n, c in terms.items() if c != 0.0), key=lambda x: x[1]),
                    "=",
                    rhs,
                )
            )
    for edge in spec.edges():
        terms = [
            (amount, fvars[(p, edge)]) for p, (_, amount) in enumerate(pairs)
        ]
        terms.append((-spec.capacity(edge.dir), "th"))
        constraints.append(
            (
                f"load_e{edge.tail.x}_{edge.tail.y}_{_DIR_NAME[edge.dir]}",
                terms,
                "<=",
                0.0,
            )
        )

    lines = ["\\ optimal routing for a fixed demand", "Minimize", " obj: th", "Subject To"]
    for name, terms, sense, rhs in constraints:
        lines.append(f" {name}: {_format_terms(terms)} {sense} {rhs:.17g}")
    lines.append("Bounds")
    for name in sorted(fvars.values()):
        lines.append(f" 0 <= {name} <= 1")
    lines.append(" 0 <= th")
    lines.append("End")
    _emit(sink, lines)
    return LpCounts(
        variables=len(fvars) + 1,
        constraints=len(constraints),
        flow_variables=len(fvars),
    )


_TERM_RE = re.compile(r"([+-])\s*([0-9.eE+-]*?)\s*([A-Za-z_][A-Za-z0-9_]*)")


def _parse_expression(text: str) -> dict[str, float]:
    terms: dict[str, float] = {}
    if not text.lstrip().startswith(("+", "-")):
        text = "+ " + text
    for sign, mag, name in _TERM_RE.findall(text):
        coef = float(mag) if mag not in ("", "+", "-") else 1.0
        if sign == "-":
            coef = -coef
        terms[name] = terms.get(name, 0.0) + coef
    return terms


_ENTRY_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*\s*:")


def parse_lp(text: str) -> LpModel:
    """Parse the subset of CPLEX LP format emitted by this module.  A line is
    a new entry when it names a section or starts with ``name:``; anything
    else continues the previous entry (wrapped long constraints)."""
    sections = {"minimize", "maximize", "subject to", "bounds", "end"}
    entries: list[tuple[str, str]] = []  # (mode, full text)
    mode = None
    sense = "min"
    for raw in text.splitlines():
        ln = raw.strip()
        if not ln or ln.startswith("\\"):
            continue
        low = ln.lower()
        if low in sections:
            if low == "minimize":
                sense, mode = "min", "obj"
            elif low == "maximize":
                sense, mode = "max", "obj"
            elif low == "subject to":
                mode = "cons"
            elif low == "bounds":
                mode = "bounds"
            else:
                mode = "end"
            continue
        if mode == "end":
            break
        if mode == "bounds" or _ENTRY_RE.match(ln) or not entries:
            entries.append((mode, ln))
        else:
            prev_mode, prev = entries[-1]
            entries[-1] = (prev_mode, prev + " " + ln)

    objective: dict[str, float] = {}
    constraints: list[LpConstraint] = []
    bounds: dict[str, tuple[float | None, float | None]] = {}
    for entry_mode, ln in entries:
        if entry_mode == "obj":
            body = ln.split(":", 1)[1] if ":" in ln else ln
            objective.update(_parse_expression(body))
        elif entry_mode == "cons":
            name, body = ln.split(":", 1)
            m = re.search(r"(<=|>=|=)\s*([0-9.eE+-]+)\s*$", body)
            if not m:
                raise ValueError(f"cannot parse constraint: {ln!r}")
            constraints.append(
                LpConstraint(
                    name=name.strip(),
                    terms=_parse_expression(body[: m.start()]),
                    sense=m.group(1),
                    rhs=float(m.group(2)),
                )
            )
        elif entry_mode == "bounds":
            two = re.match(
                r"([0-9.eE+-]+)\s*<=\s*([A-Za-z_][A-Za-z0-9_]*)\s*<=\s*([0-9.eE+-]+)", ln
            )
            one = re.match(r"([0-9.eE+-]+)\s*<=\s*([A-Za-z_][A-Za-z0-9_]*)\s*$", ln)
            if two:
                bounds[two.group(2)] = (float(two.group(1)), float(two.group(3)))
            elif one:
                bounds[one.group(2)] = (float(one.group(1)), None)
            else:
                raise ValueError(f"cannot parse bound: {ln!r}")
    return LpModel(sense=sense, objective=objective, constraints=constraints, bounds=bounds)


def check_opt_feasibility(
    spec: TorusSpec,
    demand: TrafficMatrix,
    model: LpModel,
    pair_flows: dict[tuple[Node, Node], dict[DirectedEdge, float]],
    theta: float,
    tol: float = 1e-7,
) -> list[str]:
    """Substitute per-pair flows and a load bound into a parsed fixed-demand
    model and report every violated constraint."""
    values: dict[str, float] = {"th": theta}
    for p, (pair, _) in enumerate(sorted(demand.entries.items())):
        flows = pair_flows.get(pair, {})
        for edge in spec.edges():
            name = f"f_p{p}_e{edge.tail.x}_{edge.tail.y}_{_DIR_NAME[edge.dir]}"
            values[name] = flows.get(edge, 0.0)
    failures = []
    for con in model.constraints:
        lhs = sum(coef * values.get(name, 0.0) for name, coef in con.terms.items())
        ok = (
            lhs <= con.rhs + tol
            if con.sense == "<="
            else lhs >= con.rhs - tol if con.sense == ">=" else abs(lhs - con.rhs) <= tol
        )
        if not ok:
            failures.append(f"{con.name}: lhs={lhs:.9g} {con.sense} {con.rhs}")
    return failures


def check_oblivious_feasibility(
    spec: TorusSpec,
    k: int,
    model: LpModel,
    policy: OriginPolicy,
    theta: float,
    duals: dict[str, float],
    tol: float = 1e-7,
) -> list[str]:
    """Substitute a policy's flows (with hose duals and its worst-case theta)
    into a parsed model and report every violated constraint."""
    index = _OrbitIndex(spec, dedup=True)
    values: dict[str, float] = {"th": theta}
    values.update(duals)
    origin = Node(0, 0)
    for t, flows in policy.flows.items():
        for edge in spec.edges():
            name = index.canonical(t, edge)
            values.setdefault(name, flows.get(edge, 0.0))
    for t in spec.nodes():
        if t == origin:
            continue
        for edge in spec.edges():
            values.setdefault(index.canonical(t, edge), 0.0)

    failures = []
    for con in model.constraints:
        lhs = sum(coef * values.get(name, 0.0) for name, coef in con.terms.items())
        ok = (
            lhs <= con.rhs + tol
            if con.sense == "<="
            else lhs >= con.rhs - tol if con.sense == ">=" else abs(lhs - con.rhs) <= tol
        )
        if not ok:
            failures.append(f"{con.name}: lhs={lhs:.9g} {con.sense} {con.rhs}")
    for name, (lo, hi) in model.bounds.items():
        v = values.get(name, 0.0)
        if lo is not None and v < lo - tol:
            failures.append(f"bound {name}: {v} < {lo}")
        if hi is not None and v > hi + tol:
            failures.append(f"bound {name}: {v} > {hi}")
    return failures
