import numpy as np
import pytest

from toruslb.torus import Automorphism, Node, TorusSpec, automorphism_group, hop_distance, node_sub
from toruslb.traffic import (
    DoesNotFit,
    NotSquare,
    OddSizeUnsupported,
    TrafficError,
    TrafficMatrix,
    classify,
    gen_generalized_split,
    gen_hotspot,
    gen_random_sparse,
    gen_split_diamond,
    traffic_from_csv,
    traffic_to_csv,
    transform_traffic,
)


def test_split_diamond_8_3():
    spec = TorusSpec(8, 8)
    d = gen_split_diamond(spec, 3)
    assert d.total() == 18
    assert {node_sub(spec, t, s) for (s, t) in d.entries} == {Node(4, 4)}
    report = classify(d, 18)
    assert report.is_k_limited and report.is_k_sparse
    assert report.total == 18


def test_split_diamond_totals():
    assert gen_split_diamond(TorusSpec(10, 10), 1).total() == 2
    assert gen_split_diamond(TorusSpec(10, 10), 3).total() == 18
    assert classify(gen_split_diamond(TorusSpec(10, 10), 3), 18).is_k_sparse


def test_split_diamond_rejections():
    with pytest.raises(NotSquare):
        gen_split_diamond(TorusSpec(4, 6), 1)
    with pytest.raises(OddSizeUnsupported):
        gen_split_diamond(TorusSpec(7, 7), 1)
    with pytest.raises(TrafficError):
        gen_split_diamond(TorusSpec(8, 8), 6)


def test_classify_cases():
    spec = TorusSpec(6, 6)
    empty = classify(TrafficMatrix(spec=spec, entries={}), 3)
    assert empty.is_hose and empty.is_k_limited and empty.is_k_sparse
    assert empty.total == 0
    overloaded = TrafficMatrix(
        spec=spec,
        entries={
            (Node(0, 0), Node(1, 0)): 0.5,
            (Node(0, 0), Node(2, 0)): 0.5,
            (Node(0, 0), Node(3, 0)): 0.5,
        },
    )
    report = classify(overloaded, 1)
    assert not report.is_hose and not report.is_k_limited
    assert any("rate" in v for v in report.violations)


def test_k_sparse_implies_k_limited():
    # container relation: sparse membership forces limited membership
    spec = TorusSpec(5, 5)
    rng = np.random.default_rng(0)
    for seed in range(30):
        d = gen_random_sparse(spec, int(rng.integers(1, 8)), seed)
        report = classify(d, len(d.sources()))
        if report.is_k_sparse:
            assert report.is_k_limited


def test_hotspot_layout():
    d = gen_hotspot(TorusSpec(10, 10), 4)
    assert d.sources() == {Node(0, 0), Node(1, 0), Node(0, 1), Node(1, 1)}
    assert d.sinks() == {Node(2, 0), Node(3, 0), Node(2, 1), Node(3, 1)}
    big = gen_hotspot(TorusSpec(10, 10), 18)
    assert big.total() == 18
    assert classify(big, 18).is_k_sparse
    with pytest.raises(DoesNotFit):
        gen_hotspot(TorusSpec(3, 8), 12)


def test_random_sparse_contract():
    spec = TorusSpec(10, 10)
    a = gen_random_sparse(spec, 18, 7)
    b = gen_random_sparse(spec, 18, 7)
    assert a.entries == b.entries
    assert a.total() == 18
    assert len(a.sources()) == 18 and len(a.sinks()) == 18
    c = gen_random_sparse(spec, 18, 8)
    assert c.entries != a.entries


def test_random_sparse_mean_distance():
    # expectation of the torus distance between the endpoints is N/4 per axis
    spec = TorusSpec(10, 10)
    total, count = 0.0, 0
    for seed in range(400):
        d = gen_random_sparse(spec, 18, seed)
        for s, t in d.entries:
            total += hop_distance(spec, s, t)
            count += 1
    assert total / count == pytest.approx(5.0, abs=0.2)


def test_random_sparse_source_uniformity():
    spec = TorusSpec(6, 6)
    k, trials = 4, 600
    counts = {node: 0 for node in spec.nodes()}
    for seed in range(trials):
        for s in gen_random_sparse(spec, k, seed).sources():
            counts[s] += 1
    p = k / spec.num_nodes
    sigma = np.sqrt(trials * p * (1 - p))
    for node, c in counts.items():
        assert abs(c - trials * p) <= 5 * sigma, (node, c)


def test_generalized_split_instance():
    spec = TorusSpec(4, 10)
    d1, d2 = gen_generalized_split(spec, 1.0, 0.5, 2.0)
    bound = 2 * 2.0**2 / (1.0 * 0.5)
    assert d1.total() <= bound and d2.total() <= bound
    assert d1.total() == 16.0
    assert d2.total() == 16.0
    assert {node_sub(spec, t, s) for (s, t) in d1.entries} == {Node(5, 2)}
    assert classify(d1, 16).is_k_sparse


def test_generalized_split_square_reduction():
    spec = TorusSpec(8, 8)
    d1, _ = gen_generalized_split(spec, 1.0, 1.0, 3.0)
    assert d1.sources() == gen_split_diamond(spec, 3).sources()


def test_transform_traffic_closure():
    spec = TorusSpec(8, 8)
    d = gen_split_diamond(spec, 2)
    ident = transform_traffic(d, Automorphism())
    assert ident.entries == d.entries
    for phi in automorphism_group(spec)[:20]:
        moved = transform_traffic(d, phi)
        assert moved.total() == d.total()
        assert len(moved.sources()) == len(d.sources())
        assert len(moved.sinks()) == len(d.sinks())
        rep = classify(moved, 8)
        assert rep.is_k_sparse and rep.is_k_limited


def test_traffic_csv_roundtrip():
    spec = TorusSpec(5, 5)
    d = gen_random_sparse(spec, 5, 3)
    text = traffic_to_csv(d)
    assert text.splitlines()[0] == "src_x,src_y,dst_x,dst_y,demand"
    back = traffic_from_csv(spec, text)
    assert back.entries == d.entries


def test_traffic_matrix_validation():
    spec = TorusSpec(4, 4)
    with pytest.raises(TrafficError):
        TrafficMatrix(spec=spec, entries={(Node(0, 0), Node(0, 0)): 1.0})
    with pytest.raises(TrafficError):
        TrafficMatrix(spec=spec, entries={(Node(0, 0), Node(1, 0)): -0.5})
