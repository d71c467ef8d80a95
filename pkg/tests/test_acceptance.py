"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every test records a short measurement through ``record_property`` and the
terminal summary (see conftest.py) prints one PASS/FAIL line per criterion.
"""

import math
import random
import statistics
import time
import warnings

import numpy as np
import pytest
from scipy.stats import kstest

from helpers import TWO_TRIANGLES, make_net, record
from oracles import best_modularity, chi_square_loops, exact_2x2_pvalue, naive_projection
from keiretsunet.cli import main
from keiretsunet.community import louvain
from keiretsunet.graph import ProjectionConfig, build_bipartite, cosine_similarity, degree_sequence, project
from keiretsunet.nullmodel import RewireConfig, RewireWarning, configuration_rewire, null_battery
from keiretsunet.stats import Verdict, analyze, build_network, chi_square_stat, mc_pvalue
from keiretsunet.synth import PlantSpec, generate, power_curve

pytestmark = pytest.mark.acceptance


def note(record_property, text):
    record_property("detail", text)


def test_criterion_01_planted_structure_detected(record_property):
    detected, slowest, ps = 0, 0.0, []
    for seed in range(20):
        t0 = time.perf_counter()
        records, memberships = generate(PlantSpec(seed=seed))
        res = analyze(records, memberships, runs=200, mc_samples=9999, seed=seed)
        slowest = max(slowest, time.perf_counter() - t0)
        ps.append(res.result.p_value)
        detected += res.result.p_value < 0.01
    note(record_property, f"{detected}/20 seeds with p < 0.01 (max p {max(ps):.4g}); slowest seed {slowest:.1f} s")
    assert detected >= 19
    assert slowest < 60.0


def test_criterion_02_null_model_collapse(record_property):
    records, memberships = generate(PlantSpec(seed=0))
    _, net = build_network(records, memberships)
    results = null_battery(net, memberships, replicas=20, seed=0, runs=200, mc_samples=9999, swaps_per_edge=20)
    ps = [r.p_value for r in results]
    median = statistics.median(ps)
    kept = sum(r.verdict is Verdict.NOT_REJECTED for r in results) / len(results)
    note(record_property, f"median p {median:.4f}; {kept:.0%} NotRejected over 20 replicas")
    assert median >= 0.5
    assert kept >= 0.8


def small_graph(rng):
    n = rng.randint(2, 8)
    nodes = [f"n{i}" for i in range(n)]
    p = rng.uniform(0.2, 0.9)
    edges = [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1 :] if rng.random() < p] or [(nodes[0], nodes[1])]
    weights = [rng.uniform(0.05, 1.0) for _ in edges] if rng.random() < 0.5 else None
    return make_net(edges, weights)


def test_criterion_03_louvain_near_exhaustive_optimum(record_property):
    rng = random.Random(2024)
    worst = 0.0
    for k in range(100):
        net = small_graph(rng)
        opt = best_modularity(net.nodes, [(e.u, e.v, e.weight) for e in net.edges])
        gap = opt - louvain(net, seed=k).modularity
        worst = max(worst, gap)
    q = louvain(make_net(TWO_TRIANGLES), seed=0).modularity
    note(record_property, f"largest gap to optimum {worst:.4f} over 100 graphs; two triangles Q = {q!r}")
    assert worst <= 0.05
    assert q == pytest.approx(0.5, abs=1e-12)


def test_criterion_04_chi_square_oracle(record_property):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        r, c = rng.integers(2, 11, size=2)
        cells = rng.integers(0, 30, size=(r, c))
        cells[rng.integers(r), :] += 1  # keep at least a few non-empty cells
        cells[:, rng.integers(c)] += 1
        if (cells.sum(axis=1) > 0).sum() < 2 or (cells.sum(axis=0) > 0).sum() < 2:
            continue
        ours = chi_square_stat(cells)
        ref = chi_square_loops(cells.tolist())
        worst = max(worst, abs(ours - ref))
    exact = chi_square_stat(np.array([[15, 5], [5, 15]]))
    note(record_property, f"max |diff| {worst:.2e} on 1000 tables; [[15,5],[5,15]] -> {exact!r}")
    assert worst <= 1e-9
    assert exact == 10.0


def test_criterion_05_mc_calibration(record_property):
    rng = np.random.default_rng(5)
    worst = 0.0
    checked = 0
    while checked < 30:
        total = int(rng.integers(6, 31))
        cells = rng.multinomial(total, rng.dirichlet([1, 1, 1, 1])).reshape(2, 2)
        if (cells.sum(axis=1) == 0).any() or (cells.sum(axis=0) == 0).any():
            continue
        exact = exact_2x2_pvalue(cells.tolist())
        mc = mc_pvalue(cells, samples=99_999, seed=int(rng.integers(1 << 31))).p_value
        worst = max(worst, abs(mc - exact))
        checked += 1

    pvals = []
    while len(pvals) < 500:
        rows, cols = rng.dirichlet([2] * 4), rng.dirichlet([2] * 5)
        cells = rng.multinomial(200, np.outer(rows, cols).ravel()).reshape(4, 5)
        pvals.append(mc_pvalue(cells, samples=999, seed=int(rng.integers(1 << 31))).p_value)
    ks = kstest(pvals, "uniform")
    note(record_property, f"max |MC - exact| {worst:.4f} on 30 tables; KS p {ks.pvalue:.3f} over 500 null tables")
    assert worst <= 0.01
    assert ks.pvalue > 0.01


def test_criterion_06_rewiring_preserves_degrees(record_property):
    rng = random.Random(6)
    preserved = simple = trials = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RewireWarning)
        while trials < 1000:
            n = rng.randint(4, 30)
            nodes = [f"v{i:02d}" for i in range(n)]
            p = rng.uniform(0.1, 0.6)
            edges = [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1 :] if rng.random() < p]
            if len(edges) < 2:
                continue
            net = make_net(edges)
            out = configuration_rewire(net, RewireConfig(seed=trials))
            trials += 1
            preserved += degree_sequence(out) == degree_sequence(net)
            pairs = [(e.u, e.v) for e in out.edges]
            simple += all(u != v for u, v in pairs) and len(set(pairs)) == len(pairs)
    note(record_property, f"degrees preserved {preserved}/1000; simple {simple}/1000")
    assert preserved == 1000
    assert simple == 1000


def test_criterion_07_cosine_properties(record_property):
    rng = np.random.default_rng(7)
    keys = [f"s{i}" for i in range(8)]
    bad = 0
    for _ in range(10_000):
        a = {k: float(v) for k, v in zip(keys, rng.exponential(100, 8) * (rng.random(8) < 0.6))}
        b = {k: float(v) for k, v in zip(keys, rng.exponential(100, 8) * (rng.random(8) < 0.6))}
        if not any(a.values()) or not any(b.values()):
            continue
        c = float(rng.uniform(1e-3, 1e3))
        ab = cosine_similarity(a, b)
        ok = 0.0 <= ab <= 1.0
        ok &= abs(ab - cosine_similarity(b, a)) <= 1e-12
        ok &= abs(ab - cosine_similarity({k: c * v for k, v in a.items()}, b)) <= 1e-9
        bad += not ok
    value = cosine_similarity({"s1": 100.0}, {"s1": 100.0, "s2": 100.0})
    # 0.70710678 in the criterion is 1/sqrt(2) written to 8 decimals; the tolerance applies to the exact value
    note(record_property, f"{bad} violations in 10,000 pairs; (100,0)v(100,100) = {value!r}, |v - 1/sqrt2| = {abs(value - 1 / math.sqrt(2)):.1e}")
    assert bad == 0
    assert abs(value - 1 / math.sqrt(2)) <= 1e-9
    assert round(value, 8) == 0.70710678


def test_criterion_08_projection_oracle(record_property):
    rng = random.Random(8)
    mismatches = non_monotone = 0
    for _ in range(500):
        invs = [f"I{i:02d}" for i in range(rng.randint(2, 12))]
        recs = [record(f"S{s}", rng.sample(invs, rng.randint(1, min(5, len(invs))))) for s in range(rng.randint(1, 30))]
        owners = {r.subsidiary_id: set(r.owner_ids) for r in recs}
        investors = set().union(*owners.values())
        bg = build_bipartite(recs)
        prev = None
        for n in (1, 2, 3):
            got = {(e.u, e.v): e.shared_count for e in project(bg, ProjectionConfig(min_shared=n)).edges}
            mismatches += got != naive_projection(owners, investors, n)
            if prev is not None and not set(got) <= prev:
                non_monotone += 1
            prev = set(got)
    note(record_property, f"{mismatches} mismatches, {non_monotone} monotonicity violations over 500 graphs x 3 thresholds")
    assert mismatches == 0
    assert non_monotone == 0


def test_criterion_09_power_curve(record_property):
    null_row, strong_row = power_curve(PlantSpec(seed=9), [1 / 6, 0.9], replicas=50)
    note(record_property, f"rejection rate {null_row.rejection_rate:.2f} at p_in = 1/6; {strong_row.rejection_rate:.2f} at p_in = 0.9")
    assert 0.0 <= null_row.rejection_rate <= 0.15
    assert strong_row.rejection_rate >= 0.95


def test_criterion_10_analyze_byte_reproducible(record_property, tmp_path):
    data = tmp_path / "data"
    assert main(["generate", "--seed", "10", "--out", str(data)]) == 0
    outs = [tmp_path / "run1", tmp_path / "run2"]
    for out in outs:
        assert main(["analyze", "--data-dir", str(data), "--runs", "200", "--seed", "10", "--out", str(out)]) == 0
    names = sorted(p.name for p in outs[0].iterdir() if p.name != "manifest.json")
    same = [n for n in names if (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes()]
    note(record_property, f"{len(same)}/{len(names)} output files identical ({', '.join(names)})")
    assert len(same) == len(names)
    assert {"results.csv", "contingency.csv", "partition.csv", "ensemble.csv"} <= set(names)
