import numpy as np
import pytest

from toruslb.evaluate import worst_case_load
from toruslb.policy import (
    OriginPolicy,
    check_reflection_invariance,
    expand,
    origin_policy_from_csv,
    policy_to_csv,
    symmetrize,
    validate_policy,
)
from toruslb.schemes import build_ecmp, build_gllb, build_llb
from toruslb.torus import (
    Automorphism,
    DirectedEdge,
    Direction,
    Node,
    TorusSpec,
    automorphism_group,
    node_add,
)

from tests.test_evaluate import random_origin_policy


def test_validate_ecmp_clean():
    assert validate_policy(build_ecmp(TorusSpec(6, 6))) == []


def test_validate_flags_injected_fault():
    policy = build_ecmp(TorusSpec(6, 6))
    flows = {t: dict(f) for t, f in policy.flows.items()}
    victim = Node(2, 1)
    edge = next(iter(flows[victim]))
    broken = dict(flows)
    broken[victim] = {e: v for e, v in flows[victim].items() if e != edge}
    violations = validate_policy(OriginPolicy(spec=policy.spec, flows=broken))
    assert violations
    assert any("residual" in v for v in violations)


def test_validate_empty_policy():
    assert validate_policy(OriginPolicy(spec=TorusSpec(4, 4), flows={})) == []


def test_expand_translation():
    spec = TorusSpec(6, 6)
    g = build_ecmp(spec)
    full = expand(g)
    assert validate_policy(full) == []
    s, t_off = Node(2, 3), Node(1, 2)
    translated = full.pair_flows(s, node_add(spec, s, t_off))
    for edge, v in g.flows[t_off].items():
        shifted = DirectedEdge(node_add(spec, edge.tail, s), edge.dir)
        assert translated[shifted] == pytest.approx(v)
    origin_pair = full.pair_flows(Node(0, 0), t_off)
    assert origin_pair == g.flows[t_off]


def test_expand_llb_validates():
    spec = TorusSpec(8, 8)
    assert validate_policy(expand(build_llb(spec, 2))) == []


def test_symmetrize_fixed_point_and_idempotence():
    spec = TorusSpec(4, 4)
    group = automorphism_group(spec)
    invariant = expand(build_ecmp(spec))
    fixed = symmetrize(invariant, group)
    for pair, flows in invariant.flows.items():
        for e, v in flows.items():
            assert fixed.flows[pair][e] == pytest.approx(v, abs=1e-12)
    rng = np.random.default_rng(4)
    random_full = expand(random_origin_policy(spec, rng))
    once = symmetrize(random_full, group)
    twice = symmetrize(once, group)
    for pair in once.flows:
        for e, v in once.flows[pair].items():
            assert twice.flows[pair].get(e, 0.0) == pytest.approx(v, abs=1e-12)


def test_symmetrize_singleton_identity():
    spec = TorusSpec(4, 4)
    f = expand(random_origin_policy(spec, np.random.default_rng(9)))
    same = symmetrize(f, [Automorphism()])
    assert same.flows == f.flows


def test_symmetrize_never_increases_worst_case():
    spec = TorusSpec(4, 4)
    group = automorphism_group(spec)
    rng = np.random.default_rng(12)
    for _ in range(5):
        f = expand(random_origin_policy(spec, rng))
        avg = symmetrize(f, group)
        assert validate_policy(avg) == []
        before = worst_case_load(f, 2).value
        after = worst_case_load(avg, 2).value
        assert after <= before + 1e-9


def test_reflection_invariance_checks():
    assert check_reflection_invariance(build_llb(TorusSpec(8, 8), 2))
    assert check_reflection_invariance(build_gllb(TorusSpec(4, 10), 2, 2))
    # a policy routing clockwise-only is asymmetric by construction
    spec = TorusSpec(5, 5)
    flows = {}
    for t in spec.nodes():
        if t == Node(0, 0):
            continue
        edge_flows = {}
        node = Node(0, 0)
        for _ in range(t.x):
            edge_flows[DirectedEdge(node, Direction.POS_HOR)] = 1.0
            node = spec.step(node, Direction.POS_HOR)
        for _ in range(t.y):
            edge_flows[DirectedEdge(node, Direction.POS_VERT)] = 1.0
            node = spec.step(node, Direction.POS_VERT)
        flows[t] = edge_flows
    assert not check_reflection_invariance(OriginPolicy(spec=spec, flows=flows))


def test_policy_csv_roundtrip():
    spec = TorusSpec(5, 5)
    g = build_ecmp(spec)
    text = policy_to_csv(g)
    assert text.splitlines()[0] == "dst_x,dst_y,tail_x,tail_y,dir,fraction"
    back = origin_policy_from_csv(spec, text)
    assert back.flows == g.flows


def test_full_policy_csv_header():
    spec = TorusSpec(4, 4)
    full = expand(build_ecmp(spec))
    header = policy_to_csv(full).splitlines()[0]
    assert header == "src_x,src_y,dst_x,dst_y,tail_x,tail_y,dir,fraction"
