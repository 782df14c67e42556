from collections import Counter

import pytest

from toruslb.paths import (
    CutTooSmall,
    RadiusTooLarge,
    StemsOverlap,
    find_disjoint_stem_paths,
    max_flow,
    min_cut_between_stems,
    stem,
)
from toruslb.torus import Node, TorusSpec


def test_stem_sizes():
    assert len(stem(TorusSpec(7, 7), Node(0, 0), 2, 2)) == 8
    assert len(stem(TorusSpec(6, 10), Node(0, 0), 1, 2)) == 6
    assert len(stem(TorusSpec(5, 5), Node(3, 3), 0, 0)) == 0


def test_stem_radius_validation():
    with pytest.raises(RadiusTooLarge):
        stem(TorusSpec(6, 6), Node(0, 0), 4, 1)
    # radius exactly half the extent folds the two legs at the antipode
    folded = stem(TorusSpec(4, 10), Node(0, 0), 2, 2)
    assert len(folded) == 2 * 2 + 2 * 2 - 1


def test_min_cut_examples():
    assert min_cut_between_stems(TorusSpec(8, 8), Node(0, 0), Node(4, 4), 2, 2) == 20
    assert min_cut_between_stems(TorusSpec(8, 8), Node(0, 0), Node(4, 4), 3, 3) == 28
    assert min_cut_between_stems(TorusSpec(4, 10), Node(0, 0), Node(5, 2), 2, 2) == 8


def test_min_cut_rejects_overlap():
    with pytest.raises(StemsOverlap):
        min_cut_between_stems(TorusSpec(8, 8), Node(0, 0), Node(2, 2), 2, 2)


def check_path_bundle(spec, paths, src_stem, dst_stem, expected):
    assert len(paths) == expected
    all_edges = [e for p in paths for e in p]
    assert len(all_edges) == len(set(all_edges)), "paths share an edge"
    for path in paths:
        assert path
        seen = set()
        for a, b in zip(path, path[1:]):
            assert spec.edge_head(a) == b.tail
        for e in path:
            assert e not in seen
            seen.add(e)
    starts = Counter(p[0].tail for p in paths)
    ends = Counter(spec.edge_head(p[-1]) for p in paths)
    assert set(starts) == set(src_stem.members) and set(starts.values()) == {2}
    assert set(ends) == set(dst_stem.members) and set(ends.values()) == {2}


def test_disjoint_paths_examples():
    spec = TorusSpec(7, 7)
    paths = find_disjoint_stem_paths(spec, Node(0, 0), Node(3, 3), 2, 2)
    check_path_bundle(
        spec, paths, stem(spec, Node(0, 0), 2, 2), stem(spec, Node(3, 3), 2, 2), 16
    )
    spec8 = TorusSpec(8, 8)
    paths8 = find_disjoint_stem_paths(spec8, Node(0, 0), Node(4, 4), 3, 3)
    check_path_bundle(
        spec8, paths8, stem(spec8, Node(0, 0), 3, 3), stem(spec8, Node(4, 4), 3, 3), 24
    )


def test_disjoint_paths_exhaustive_8x8():
    spec = TorusSpec(8, 8)
    origin = Node(0, 0)
    for r in (1, 2, 3):
        plus0 = set(stem(spec, origin, r, r).members) | {origin}
        for t in spec.nodes():
            if t == origin:
                continue
            plust = set(stem(spec, t, r, r).members) | {t}
            if plus0 & plust:
                continue
            paths = find_disjoint_stem_paths(spec, origin, t, r, r)
            check_path_bundle(
                spec, paths, stem(spec, origin, r, r), stem(spec, t, r, r), 8 * r
            )


def test_disjoint_paths_deterministic():
    spec = TorusSpec(8, 8)
    a = find_disjoint_stem_paths(spec, Node(0, 0), Node(4, 4), 2, 2)
    b = find_disjoint_stem_paths(spec, Node(0, 0), Node(4, 4), 2, 2)
    assert a == b


def test_disjoint_paths_cut_too_small():
    # stems of the full vertical extent on a skewed torus are bisection-capped
    spec = TorusSpec(4, 12)
    with pytest.raises(CutTooSmall):
        find_disjoint_stem_paths(spec, Node(0, 0), Node(6, 2), 2, 3)


def test_max_flow_basics():
    spec = TorusSpec(5, 5)
    value, cut = max_flow(spec, set(), {Node(0, 0)}, {Node(1, 0)})
    assert value >= 1
    everything = set(spec.edges())
    value0, _ = max_flow(spec, everything, {Node(0, 0)}, {Node(1, 0)})
    assert value0 == 0
    with pytest.raises(Exception):
        max_flow(spec, set(), {Node(0, 0)}, {Node(0, 0)})


def test_max_flow_matches_stem_cut():
    spec = TorusSpec(8, 8)
    direct, cut = max_flow(
        spec,
        set(),
        set(stem(spec, Node(0, 0), 2, 2).members),
        set(stem(spec, Node(4, 4), 2, 2).members),
    )
    assert direct == min_cut_between_stems(spec, Node(0, 0), Node(4, 4), 2, 2)
    assert sum(spec.capacity(e.dir) for e in cut) == direct


def test_max_flow_respects_capacities():
    spec = TorusSpec(4, 4, cap_vertical=2.0, cap_horizontal=0.5)
    value, cut = max_flow(spec, set(), {Node(0, 0)}, {Node(2, 2)})
    assert value == sum(spec.capacity(e.dir) for e in cut)
    # out-degree of a single source: two vertical and two horizontal links
    assert value <= 2 * 2.0 + 2 * 0.5
