import json
import random
from fractions import Fraction

import pytest

from gmnfbp import scalar as sc
from gmnfbp.errors import SizeLimitError, UsageError, size_caps
from gmnfbp.model import (DirectedGraph, cycle_product, delta, is_ratio_balanced_bruteforce,
                          is_ratio_balanced_gauge, load_instance, read_instance,
                          undirected_cycles, validate, write_instance)
from gmnfbp.scalar import Q

from helpers import make, path_example, single_edge, triangle


# ---------------------------------------------------------------- scalars

def test_parse_scalar_rational_strings_and_numbers():
    assert sc.parse_scalar("3/6") == Q(1, 2)
    assert sc.parse_scalar(" -4/2 ") == Q(-2)
    assert sc.parse_scalar(0.1) == Fraction(1, 10)
    assert sc.parse_scalar(7) == 7
    assert sc.parse_scalar("1/3", sc.FLOAT) == pytest.approx(1 / 3)
    assert isinstance(sc.parse_scalar(2, sc.FLOAT), float)


@pytest.mark.parametrize("bad", [True, None, "x/y", [1]])
def test_parse_scalar_rejects(bad):
    with pytest.raises((ValueError, ZeroDivisionError)):
        sc.parse_scalar(bad)


def test_format_scalar():
    assert sc.format_scalar(Q(4, 2)) == 2
    assert sc.format_scalar(Q(-3, 6)) == "-1/2"
    assert sc.format_scalar(0.25) == 0.25


def test_float_tolerance():
    assert sc.eq(0.1 + 0.2, 0.3)
    assert not sc.lt(0.3, 0.1 + 0.2)
    assert sc.le(1.0 + 1e-12, 1.0)
    assert not sc.eq(Q(1, 3), Q(1, 3) + Q(1, 10**12))


# ---------------------------------------------------------------- delta

def _star(coeffs):
    """Vertex 0 with one edge per coefficient; positive means an out-arc of 0."""
    edges, at, ah = [], [], []
    for i, a in enumerate(coeffs, start=1):
        if a > 0:
            edges.append((0, i))
            at.append(a)
            ah.append(-1)
        else:
            edges.append((i, 0))
            at.append(1)
            ah.append(a)
    n = len(coeffs) + 1
    return make(n, edges, [0] * len(edges), [1] * len(edges), at, ah, [0] * n)


@pytest.mark.parametrize("coeffs, expected", [((3, -6), Q(1, 2)), ((-1, -1), Q(1)), ((-4, 1), Q(4))])
def test_delta_examples(coeffs, expected):
    assert delta(_star(coeffs), 0, 0, 1) == expected


def test_delta_not_incident():
    with pytest.raises(UsageError):
        delta(_star((1, -1)), 1, 0, 1)


# ---------------------------------------------------------------- ratio balance

def test_unit_triangle_is_balanced():
    inst = triangle()
    ok, cert = is_ratio_balanced_gauge(inst)
    assert ok
    for e, (v, w) in enumerate(inst.edges):
        assert abs(inst.a_tail[e]) == cert.weights[e] * cert.potentials[v]
        assert abs(inst.a_head[e]) == cert.weights[e] * cert.potentials[w]
    assert is_ratio_balanced_bruteforce(inst) == (True, None)


def test_unbalanced_triangle():
    inst = triangle(a_head_first=-2)
    ok, cycle = is_ratio_balanced_gauge(inst)
    assert not ok
    assert cycle_product(inst, cycle) in (Q(2), Q(1, 2))  # depends on orientation
    ok2, cycle2 = is_ratio_balanced_bruteforce(inst)
    assert not ok2 and cycle_product(inst, cycle2) != 1
    rep = validate(inst)
    assert not rep.ok and rep.certificate is None and rep.violating_cycle is not None


def test_tree_with_arbitrary_coefficients_is_balanced():
    inst = make(4, [(0, 1), (2, 1), (1, 3)], [0] * 3, [1] * 3, [3, 5, 7], [-2, -11, -1], [0] * 4)
    assert is_ratio_balanced_gauge(inst)[0]
    assert is_ratio_balanced_bruteforce(inst)[0]


def test_four_cycle_telescoping():
    # deltas around the cycle: 2, 1/2, 3, 1/3
    inst = make(4, [(0, 1), (1, 2), (2, 3), (3, 0)], [0] * 4, [1] * 4,
                [3, 1, 2, 1], [-2, -1, -3, -1], [0] * 4)
    (cycle,) = list(undirected_cycles(inst.graph))
    assert cycle_product(inst, cycle) == 1
    assert is_ratio_balanced_gauge(inst)[0]
    assert is_ratio_balanced_bruteforce(inst)[0]


def test_parallel_edges_form_two_cycles():
    inst = make(2, [(0, 1), (0, 1)], [0, 0], [1, 1], [1, 2], [-1, -1], [0, 0])
    assert len(list(undirected_cycles(inst.graph))) == 1
    assert not is_ratio_balanced_gauge(inst)[0]
    assert not is_ratio_balanced_bruteforce(inst)[0]
    ok = make(2, [(0, 1), (1, 0)], [0, 0], [1, 1], [2, 1], [-1, -2], [0, 0])
    assert is_ratio_balanced_gauge(ok)[0] and is_ratio_balanced_bruteforce(ok)[0]


def test_disconnected_components_checked_separately():
    bad = make(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], [0] * 6, [1] * 6,
               [1] * 6, [-1, -1, -1, -3, -1, -1], [0] * 6)
    ok, cycle = is_ratio_balanced_gauge(bad)
    assert not ok and set(cycle.vertices) == {3, 4, 5}


def test_cycle_enumeration_counts():
    # K4 as an undirected simple graph has 7 cycles
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert len(list(undirected_cycles(DirectedGraph(4, edges)))) == 7


def test_gauge_matches_bruteforce_on_random_graphs():
    rng = random.Random(5)
    for _ in range(60):
        n = rng.randint(2, 5)
        m = rng.randint(1, 7)
        edges = []
        while len(edges) < m:
            v, w = rng.randrange(n), rng.randrange(n)
            if v != w:
                edges.append((v, w))
        p = [Q(rng.choice([1, 2, 3])) for _ in range(n)]
        at = [p[v] * rng.choice([1, 2]) for v, _ in edges]
        ah = [-p[w] * at[e] / p[v] for e, (v, w) in enumerate(edges)]
        if rng.random() < 0.5:
            ah[rng.randrange(m)] *= 2
        inst = make(n, edges, [0] * m, [1] * m, at, ah, [0] * n)
        assert is_ratio_balanced_gauge(inst)[0] == is_ratio_balanced_bruteforce(inst)[0]


def test_bruteforce_size_cap():
    n = size_caps().vertices + 1
    inst = make(n, [(i, i + 1) for i in range(n - 1)], [0] * (n - 1), [1] * (n - 1),
                [1] * (n - 1), [-1] * (n - 1), [0] * n)
    with pytest.raises(SizeLimitError):
        is_ratio_balanced_bruteforce(inst)
    assert is_ratio_balanced_bruteforce(inst, max_vertices=n)[0]


# ---------------------------------------------------------------- structure and I/O

def test_structural_errors_reported():
    inst = make(2, [(0, 0), (0, 1)], [0, 0], [1, -1], [1, -1], [-1, 1], [0, 0])
    errs = validate(inst).errors
    assert any("self-loop" in e for e in errs)
    assert any("a_tail must be positive" in e for e in errs)
    assert any("a_head must be negative" in e for e in errs)
    assert any("negative capacity" in e for e in errs)
    assert validate(inst).ratio_balanced is None


def test_objective_and_feasibility():
    inst = path_example()
    assert inst.is_feasible([Q(1), Q(2)])
    assert not inst.is_feasible([Q(1), Q(1)])
    assert not inst.is_feasible([Q(3), Q(6)])
    assert inst.objective([Q(1), Q(2)]) == 1


def _doc():
    return {"vertices": 2,
            "edges": [{"id": 7, "tail": 0, "head": 1, "cost": "1/3", "capacity": 2,
                       "a_tail": 1, "a_head": "-3/2"}],
            "balance": ["1/2", "-3/4"]}


def test_load_and_round_trip(tmp_path):
    inst = load_instance(_doc())
    assert inst.edge_ids == (7,)
    assert inst.cost == (Q(1, 3),) and inst.a_head == (Q(-3, 2),)
    path = tmp_path / "i.json"
    write_instance(inst, path)
    again = read_instance(path)
    assert again == inst
    assert again.fingerprint() == inst.fingerprint()
    assert json.loads(path.read_text())["edges"][0]["cost"] == "1/3"


def test_load_float_mode():
    inst = load_instance(_doc(), sc.FLOAT)
    assert inst.mode == sc.FLOAT and isinstance(inst.cost[0], float)


@pytest.mark.parametrize("patch", [
    {"a_tail": -1}, {"a_head": 2}, {"tail": 5}, {"cost": "abc"},
])
def test_load_rejects(patch):
    doc = _doc()
    doc["edges"][0].update(patch)
    with pytest.raises(UsageError):
        load_instance(doc)


def test_load_rejects_missing_key_and_wrong_lengths():
    doc = _doc()
    del doc["balance"]
    with pytest.raises(UsageError):
        load_instance(doc)
    doc = _doc()
    doc["balance"] = [0]
    with pytest.raises(UsageError):
        load_instance(doc)


def test_single_edge_fixture_is_sane():
    inst = single_edge()
    assert inst.is_feasible([Q(1)]) and validate(inst).ok
