import math

import pytest

from toruslb.bounds import (
    OutOfRegime,
    Regime,
    best_llb_radius,
    bisection_bandwidth,
    bisection_bandwidth_formula,
    cut_lower_bound,
    general_torus_bounds,
    llb_load_upper,
    normalized_size,
    oblivious_lower_bound,
    oblivious_lower_bound_floor,
    vlb_dense_optimum,
    vlb_hotspot_lower_bound,
)
from toruslb.evaluate import worst_case_load
from toruslb.schemes import build_ecmp, build_gllb, build_llb, build_ring_lb, build_vlb, gllb_radii
from toruslb.torus import TorusSpec


def test_cut_lower_bound():
    assert cut_lower_bound(16) == 1.0
    assert cut_lower_bound(18) == pytest.approx(1.0607, abs=1e-4)
    with pytest.raises(OutOfRegime):
        cut_lower_bound(0)
    with pytest.raises(OutOfRegime):
        cut_lower_bound(30, n=10)


def test_oblivious_lower_bound_values():
    assert oblivious_lower_bound(18) == 1.5
    assert oblivious_lower_bound(8) == 1.0
    assert oblivious_lower_bound(10) == pytest.approx(1.1)
    assert oblivious_lower_bound_floor(10) == 1.0
    for k in range(2, 60):
        assert oblivious_lower_bound(k) >= oblivious_lower_bound_floor(k) - 1e-12
        assert cut_lower_bound(k) <= oblivious_lower_bound(k)


def test_gap_ratio_window():
    for k in range(2, 201):
        ratio = oblivious_lower_bound(k) / cut_lower_bound(k)
        assert 1.30 <= ratio <= 1.4143, (k, ratio)


def test_vlb_hotspot_lower_bound():
    assert vlb_hotspot_lower_bound(10, 18) == pytest.approx(1.7395, abs=1e-4)
    assert vlb_hotspot_lower_bound(10, 100) == 0.0


def test_llb_upper():
    assert llb_load_upper(3, 18) == 1.5
    assert llb_load_upper(1, 2) == 0.5
    assert best_llb_radius(18, 9) == 3
    assert min(llb_load_upper(r, 18) for r in range(1, 10)) == 1.5


def test_vlb_dense_optimum():
    assert vlb_dense_optimum(8) == 2.0
    assert vlb_dense_optimum(10) == 2.5
    with pytest.raises(OutOfRegime):
        vlb_dense_optimum(7)


def test_general_bounds_square_reduction():
    spec = TorusSpec(10, 10)
    bs = general_torus_bounds(spec, 18)
    assert normalized_size(spec) == 10
    assert bs.general_lb == pytest.approx(math.sqrt(36) / 4)
    assert bs.regime == Regime.SPARSE
    assert bs.bisection_formula_agrees


def test_general_bounds_4x10():
    spec = TorusSpec(4, 10)
    at_boundary = general_torus_bounds(spec, 8)
    assert at_boundary.general_lb == pytest.approx(1.0)
    assert math.sqrt(2 * 8) / 4 == pytest.approx(8 / (2 * 4))  # regime continuity
    dense = general_torus_bounds(spec, 20)
    assert dense.general_lb == pytest.approx(2.5)
    beyond = general_torus_bounds(spec, 30)
    assert beyond.general_lb == pytest.approx(2.5)
    assert beyond.regime == Regime.DENSE


def test_bisection_flags_formula_disagreement():
    symmetric = TorusSpec(4, 10)
    assert bisection_bandwidth(symmetric) == bisection_bandwidth_formula(symmetric) == 8
    skewed = TorusSpec(4, 10, cap_vertical=2.0, cap_horizontal=1.0)
    assert bisection_bandwidth(skewed) == 8.0  # cutting horizontal links
    assert bisection_bandwidth_formula(skewed) == 16.0
    assert not general_torus_bounds(skewed, 4).bisection_formula_agrees


def test_sandwich_on_8x8():
    spec = TorusSpec(8, 8)
    schemes = {
        "ecmp": build_ecmp(spec),
        "vlb": build_vlb(spec),
        "ring": build_ring_lb(spec),
    }
    for k in (2, 8):
        schemes[f"llb"] = build_llb(spec, best_llb_radius(k, 3))
        lb = oblivious_lower_bound(k)
        for name, policy in schemes.items():
            assert worst_case_load(policy, k).value >= lb - 1e-9, (name, k)
    r = best_llb_radius(8, 3)
    assert worst_case_load(build_llb(spec, r), 8).value <= llb_load_upper(r, 8) + 1e-9


@pytest.mark.parametrize("dims", [(4, 10), (6, 8)])
def test_gllb_within_general_bounds(dims):
    spec = TorusSpec(*dims)
    for k in (2, 8, 18):
        if k > spec.num_nodes // 2:
            continue
        r1, r2 = gllb_radii(spec, k)
        r1 = min(r1, spec.rows // 2)
        r2 = min(r2, spec.cols // 2)
        policy = build_gllb(spec, r1, r2)
        bs = general_torus_bounds(spec, k)
        value = worst_case_load(policy, k).value
        assert bs.general_lb - 1e-9 <= value, (dims, k, value)
        upper = bs.general_ub if bs.regime == Regime.SPARSE else bs.general_ub + bs.slack
        assert value <= upper + 1e-9, (dims, k, value, upper)
