"""Closed-form bounds on worst-case load as a pure formula library.

All values are in traffic units per unit capacity.  The square-torus bounds
take k alone; the general-torus bounds normalize by the geometric mean of the
two capacities and by L, the bisection bandwidth over twice that mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from toruslb.paths import max_flow
from toruslb.torus import Node, TorusSpec


class OutOfRegime(ValueError):
    pass


class Regime(Enum):
    SPARSE = "sparse"
    MID = "mid"
    DENSE = "dense"


def cut_lower_bound(k: int, n: int | None = None) -> float:
    """Cut-based floor sqrt(k)/4, valid for any routing policy.  The minimum
    cut isolating k sources is about 4*sqrt(k) links."""
    if k < 1:
        raise OutOfRegime("k must be positive")
    if n is not None and k > n * n / 4:
        raise OutOfRegime(f"cut bound applies for k <= N^2/4, got k={k}, N={n}")
    return math.sqrt(k) / 4


def oblivious_lower_bound(k: int) -> float:
    """Tight floor for translation/reflection-invariant policies.

    When 2k is a perfect square this is sqrt(2k)/4; otherwise the convex
    interpolation between the neighboring diamond sizes, (m + alpha)/2 with
    m = floor(sqrt(k/2)) and alpha = (k - 2m^2)/(4m + 2), which dominates the
    plain floor at the largest admissible diamond.
    """
    if k < 1:
        raise OutOfRegime("k must be positive")
    root = math.isqrt(2 * k)
    if root * root == 2 * k:
        return root / 4
    m = math.isqrt(k // 2)
    while 2 * (m + 1) * (m + 1) <= k:
        m += 1
    alpha = (k - 2 * m * m) / (4 * m + 2)
    return (m + alpha) / 2


def oblivious_lower_bound_floor(k: int) -> float:
    """The plain floor sqrt(2k')/4 with k' the largest integer <= k for which
    2k' is a perfect square."""
    if k < 1:
        raise OutOfRegime("k must be positive")
    m = math.isqrt(k // 2)
    while 2 * (m + 1) * (m + 1) <= k:
        m += 1
    return 2 * m / 4


def vlb_hotspot_lower_bound(n: int, k: int) -> float:
    """Load Valiant routing must pay on the shared cut edges of two adjacent
    k-node square clusters: (2*sqrt(k)/4)*(1 - k/N^2)."""
    if k < 1 or k > n * n:
        raise OutOfRegime("need 1 <= k <= N^2")
    return (2 * math.sqrt(k) / 4) * (1 - k / (n * n))


def llb_load_upper(r: int, k: int) -> float:
    """Worst-case load of the stem scheme with radius r: r/4 + k/(8r)."""
    if r < 1:
        raise OutOfRegime("r must be positive")
    return r / 4 + k / (8 * r)


def best_llb_radius(k: int, max_r: int | None = None) -> int:
    """Integer radius minimizing llb_load_upper."""
    candidates = range(1, (max_r or max(1, k)) + 1)
    return min(candidates, key=lambda r: (llb_load_upper(r, k), r))


def vlb_dense_optimum(n: int) -> float:
    """Valiant routing's load for dense traffic (k >= N^2/2): N/4."""
    if n % 2 != 0:
        raise OutOfRegime("defined for even N")
    return n / 4


def bisection_bandwidth(spec: TorusSpec) -> float:
    """Minimum capacity of a directed cut splitting the torus into halves,
    computed by explicit max flow between two opposite quarter bands."""
    best = math.inf
    # candidate halves: split along rows or along columns
    rows, cols = spec.rows, spec.cols
    half_rows = {Node(x, y) for x in range(cols) for y in range(rows // 2)}
    half_cols = {Node(x, y) for x in range(cols // 2) for y in range(rows)}
    for half in (half_rows, half_cols):
        rest = set(spec.nodes()) - half
        value, _ = max_flow(spec, set(), half, rest)
        best = min(best, value)
    return best


def bisection_bandwidth_formula(spec: TorusSpec) -> float:
    """Closed-form min(2*c1*N, 2*c2*M); disagrees with the explicit min cut
    whenever the capacities differ, because a cut between row halves severs
    vertical links in every column (2*M of them) and vice versa."""
    return min(2 * spec.cap_vertical * spec.rows, 2 * spec.cap_horizontal * spec.cols)


def normalized_size(spec: TorusSpec) -> float:
    """L = min(sqrt(c2/c1)*N, sqrt(c1/c2)*M), the bisection bandwidth over
    twice the geometric capacity mean."""
    c1, c2 = spec.cap_vertical, spec.cap_horizontal
    return min(math.sqrt(c2 / c1) * spec.rows, math.sqrt(c1 / c2) * spec.cols)


@dataclass
class BoundSet:
    cut_lb: float
    oblivious_lb: float
    vlb_hotspot_lb: float
    llb_ub: float
    vlb_dense: float
    general_lb: float
    general_ub: float
    regime: Regime
    slack: float
    bisection_bw: float
    bisection_formula_agrees: bool


def general_torus_bounds(spec: TorusSpec, k: int) -> BoundSet:
    """Lower and upper bounds for an N x M torus with per-axis capacities,
    with the regime chosen by k against L^2/2 and NM/2.

    The additive slack on the sparse-regime upper bound is 1/min(c1, c2),
    the concrete correction carried by the generalized stem scheme.
    """
    if k < 1:
        raise OutOfRegime("k must be positive")
    c1, c2 = spec.cap_vertical, spec.cap_horizontal
    gm = math.sqrt(c1 * c2)
    n, m = spec.rows, spec.cols
    big_l = normalized_size(spec)
    slack = 1 / min(c1, c2)
    if k <= big_l * big_l / 2:
        regime = Regime.SPARSE
        general_lb = math.sqrt(2 * k) / (4 * gm)
        general_ub = general_lb + slack
    elif k <= n * m / 2:
        regime = Regime.MID
        general_lb = k / (2 * big_l * gm)
        general_ub = general_lb
    else:
        regime = Regime.DENSE
        general_lb = n * m / (4 * big_l * gm)
        general_ub = general_lb
    explicit = bisection_bandwidth(spec)
    agrees = abs(explicit - bisection_bandwidth_formula(spec)) < 1e-9
    return BoundSet(
        cut_lb=math.sqrt(k) / 4,
        oblivious_lb=oblivious_lower_bound(k),
        vlb_hotspot_lb=vlb_hotspot_lower_bound(n, k) if k <= n * n else 0.0,
        llb_ub=llb_load_upper(best_llb_radius(k, max_r=max(1, min(n, m) // 2)), k),
        vlb_dense=n / 4,
        general_lb=general_lb,
        general_ub=general_ub,
        regime=regime,
        slack=slack,
        bisection_bw=explicit,
        bisection_formula_agrees=agrees,
    )
