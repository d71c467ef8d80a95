import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import normalized_mutual_info_score

from helpers import TWO_TRIANGLES, make_net
from oracles import best_modularity, modularity_matrix_form, set_partitions
from keiretsunet.community import (
    Partition,
    align_runs,
    consensus,
    louvain,
    louvain_levels,
    modularity,
    nmi,
    run_ensemble,
    write_ensemble,
    write_partition,
)
from keiretsunet.errors import DegenerateAnalysisError, InputError
from keiretsunet.graph import InvestorNetwork


def random_graph(rng, max_nodes=8, weighted=False):
    n = rng.randint(2, max_nodes)
    nodes = [f"n{i}" for i in range(n)]
    p = rng.uniform(0.2, 0.8)
    edges = [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1 :] if rng.random() < p]
    if not edges:
        edges = [(nodes[0], nodes[1])]
    weights = [rng.uniform(0.1, 1.0) for _ in edges] if weighted else None
    return make_net(edges, weights)


def triples(net):
    return [(e.u, e.v, e.weight) for e in net.edges]


def test_one_community_is_zero(two_triangles):
    net = make_net([("a", "b"), ("b", "c"), ("c", "d")])
    assert modularity(net, dict.fromkeys(net.nodes, 0)) == pytest.approx(0.0, abs=1e-15)


def test_two_triangles_modularity(two_triangles):
    split = {"a": 0, "b": 0, "c": 0, "d": 1, "e": 1, "f": 1}
    assert modularity(two_triangles, split) == pytest.approx(0.5, abs=1e-12)
    # exhaustive check over all 203 partitions of six nodes
    assert best_modularity(two_triangles.nodes, triples(two_triangles)) == pytest.approx(0.5, abs=1e-12)


def test_single_edge_singletons():
    net = make_net([("a", "b")])
    assert modularity(net, {"a": 0, "b": 1}) == pytest.approx(-0.5)


def test_modularity_requires_full_assignment(two_triangles):
    with pytest.raises(InputError):
        modularity(two_triangles, {"a": 0})


@pytest.mark.parametrize("seed", range(25))
def test_modularity_matches_matrix_form(seed):
    rng = random.Random(seed)
    net = random_graph(rng, weighted=seed % 2 == 1)
    for _ in range(5):
        assignment = {n: rng.randrange(3) for n in net.nodes}
        q = modularity(net, assignment)
        assert q == pytest.approx(modularity_matrix_form(net.nodes, triples(net), assignment), abs=1e-12)
        assert -1.0 <= q <= 1.0
        relabeled = {n: 10 - c for n, c in assignment.items()}
        assert modularity(net, relabeled) == pytest.approx(q, abs=1e-12)
    assert modularity(net, {n: i for i, n in enumerate(net.nodes)}) <= 1e-12


def test_louvain_two_triangles(two_triangles):
    p = louvain(two_triangles, seed=1)
    assert p.modularity == pytest.approx(0.5, abs=1e-12)
    assert sorted(p.communities()) == [["a", "b", "c"], ["d", "e", "f"]]


def test_louvain_k4_single_community():
    net = make_net([(u, v) for i, u in enumerate("abcd") for v in "abcd"[i + 1 :]])
    p = louvain(net, seed=3)
    assert p.n_communities == 1
    assert p.modularity == pytest.approx(0.0, abs=1e-12)
    assert best_modularity(net.nodes, triples(net)) == pytest.approx(0.0, abs=1e-12)


def test_louvain_single_edge():
    p = louvain(make_net([("a", "b")]), seed=0)
    assert p.assignment == {"a": 0, "b": 0}
    assert p.modularity == pytest.approx(0.0)


def test_louvain_empty_network():
    with pytest.raises(DegenerateAnalysisError, match="nothing to cluster"):
        louvain(InvestorNetwork((), ()), seed=0)


def test_louvain_contiguous_labels_and_determinism():
    rng = random.Random(5)
    net = random_graph(rng, max_nodes=30)
    a, b = louvain(net, 11), louvain(net, 11)
    assert a.assignment == b.assignment
    labels = set(a.assignment.values())
    assert labels == set(range(len(labels)))
    assert set(a.assignment) == set(net.nodes)


@pytest.mark.parametrize("seed", range(20))
def test_louvain_levels_monotone(seed):
    rng = random.Random(100 + seed)
    net = random_graph(rng, max_nodes=40, weighted=seed % 2 == 0)
    levels = louvain_levels(net, seed)
    qs = [modularity(net, p) for p in levels]
    assert all(b >= a - 1e-12 for a, b in zip(qs, qs[1:]))
    for p in levels:
        assert p.modularity == pytest.approx(modularity(net, p), abs=1e-9)
    singletons = {n: i for i, n in enumerate(net.nodes)}
    assert qs[-1] >= modularity(net, singletons)


@pytest.mark.parametrize("seed", range(30))
def test_louvain_near_optimum_small_graphs(seed):
    rng = random.Random(seed)
    net = random_graph(rng, max_nodes=7, weighted=seed % 3 == 0)
    opt = best_modularity(net.nodes, triples(net))
    assert louvain(net, seed).modularity >= opt - 0.05


def test_ensemble_single_run_and_determinism(two_triangles):
    rng = random.Random(9)
    net = random_graph(rng, max_nodes=25)
    one = run_ensemble(net, 1, seed=4)
    assert one.run_count == 1
    e1, e2 = run_ensemble(net, 6, seed=4), run_ensemble(net, 6, seed=4)
    assert [p.assignment for p in e1.runs] == [p.assignment for p in e2.runs]
    assert one.runs[0].assignment == e1.runs[0].assignment


def test_ensemble_two_triangles_all_identical(two_triangles):
    ens = run_ensemble(two_triangles, 12, seed=0)
    assert all(sorted(p.communities()) == [["a", "b", "c"], ["d", "e", "f"]] for p in ens.runs)


def test_ensemble_workers_match_serial():
    net = random_graph(random.Random(2), max_nodes=20)
    serial = run_ensemble(net, 5, seed=1)
    parallel = run_ensemble(net, 5, seed=1, workers=2)
    assert [p.assignment for p in serial.runs] == [p.assignment for p in parallel.runs]


def test_ensemble_rejects_zero_runs(two_triangles):
    with pytest.raises(InputError):
        run_ensemble(two_triangles, 0)


def test_alignment_maps_relabeled_runs_onto_reference():
    from keiretsunet.community import RunEnsemble

    ref = Partition({"a": 0, "b": 0, "c": 1, "d": 1, "e": 2})
    swapped = Partition({"a": 1, "b": 1, "c": 0, "d": 0, "e": 0})
    ens = RunEnsemble((ref, swapped), seed=0)
    aligned = align_runs(ens)
    assert aligned[1] == {"a": 0, "b": 0, "c": 1, "d": 1, "e": 1}
    assert consensus(ens) == {"a": 0, "b": 0, "c": 1, "d": 1, "e": 1}


def test_nmi_examples():
    p = {"a": 0, "b": 0, "c": 1, "d": 1}
    assert nmi(p, p) == pytest.approx(1.0)
    assert nmi(p, {"a": 7, "b": 7, "c": 3, "d": 3}) == pytest.approx(1.0)
    assert nmi(p, dict.fromkeys(p, 0)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InputError):
        nmi(p, {"a": 0})


labelings = st.lists(st.integers(0, 4), min_size=2, max_size=30)


@given(labelings, st.data())
@settings(max_examples=100)
def test_nmi_matches_sklearn(xs, data):
    ys = data.draw(st.lists(st.integers(0, 4), min_size=len(xs), max_size=len(xs)))
    p = {f"n{i}": x for i, x in enumerate(xs)}
    q = {f"n{i}": y for i, y in enumerate(ys)}
    expected = normalized_mutual_info_score(xs, ys, average_method="arithmetic")
    assert nmi(p, q) == pytest.approx(expected, abs=1e-9)
    assert nmi(p, q) == pytest.approx(nmi(q, p), abs=1e-12)


def test_partition_and_ensemble_csv(two_triangles):
    ens = run_ensemble(two_triangles, 3, seed=0)
    buf = io.StringIO()
    write_partition(ens.runs[0], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "investor_id,community_id" and len(lines) == 7
    buf = io.StringIO()
    write_ensemble(ens, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "investor_id,run_0,run_1,run_2,consensus"
    assert len(lines) == 7


def test_set_partition_counts():
    # Bell numbers
    assert [sum(1 for _ in set_partitions(range(n))) for n in range(1, 7)] == [1, 2, 5, 15, 52, 203]
