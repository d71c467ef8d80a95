"""Louvain modularity maximization over the investor network.

The implementation works on integer-indexed adjacency dictionaries; each
level runs the local-move phase to convergence and then collapses the
communities into super-nodes, until a level produces no merge.
"""

from __future__ import annotations

import csv
import math
import random
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence, TextIO

import numpy as np

from .errors import DegenerateAnalysisError, InputError
from .graph import InvestorNetwork
from .seeding import derive_seed

__all__ = [
    "Partition",
    "RunEnsemble",
    "modularity",
    "louvain",
    "louvain_levels",
    "run_ensemble",
    "align_runs",
    "consensus",
    "nmi",
    "write_partition",
    "write_ensemble",
]

MOVE_TOL = 1e-12


@dataclass(frozen=True)
class Partition:
    assignment: Mapping[str, int]
    modularity: float = float("nan")

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    def communities(self) -> list[list[str]]:
        groups: dict[int, list[str]] = defaultdict(list)
        for node, c in self.assignment.items():
            groups[c].append(node)
        return [sorted(groups[c]) for c in sorted(groups)]


@dataclass(frozen=True)
class RunEnsemble:
    runs: tuple[Partition, ...]
    seed: int
    run_count: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "run_count", len(self.runs))


def _canonical(labels: Sequence[int]) -> list[int]:
    """Relabel to 0, 1, ... in order of first appearance."""
    remap: dict[int, int] = {}
    return [remap.setdefault(c, len(remap)) for c in labels]


def _index(net: InvestorNetwork):
    idx = {n: i for i, n in enumerate(net.nodes)}
    adj: list[dict[int, float]] = [{} for _ in net.nodes]
    for e in net.edges:
        i, j = idx[e.u], idx[e.v]
        adj[i][j] = adj[i].get(j, 0.0) + e.weight
        adj[j][i] = adj[j].get(i, 0.0) + e.weight
    return idx, adj


def modularity(net: InvestorNetwork, p: Partition | Mapping[str, int], resolution: float = 1.0) -> float:
    """Weighted Newman modularity of a partition; unweighted networks have w = 1."""
    assignment = p.assignment if isinstance(p, Partition) else p
    missing = [n for n in net.nodes if n not in assignment]
    if missing:
        raise InputError(f"partition does not assign {len(missing)} node(s), e.g. {missing[0]!r}")
    m = math.fsum(e.weight for e in net.edges)
    if m == 0:
        return 0.0
    internal: dict[int, float] = defaultdict(float)
    strength: dict[int, float] = defaultdict(float)
    for e in net.edges:
        cu, cv = assignment[e.u], assignment[e.v]
        strength[cu] += e.weight
        strength[cv] += e.weight
        if cu == cv:
            internal[cu] += e.weight
    return math.fsum(internal[c] / m - resolution * (strength[c] / (2 * m)) ** 2 for c in strength)


def _level_modularity(adj, self_w, degree, comm, m, resolution) -> float:
    internal: dict[int, float] = defaultdict(float)
    tot: dict[int, float] = defaultdict(float)
    for i, nbrs in enumerate(adj):
        c = comm[i]
        tot[c] += degree[i]
        internal[c] += self_w[i]
        for j, w in nbrs.items():
            if j > i and comm[j] == c:
                internal[c] += w
    return math.fsum(internal[c] / m - resolution * (tot[c] / (2 * m)) ** 2 for c in tot)


def _local_moves(adj, degree, m, rng: random.Random, resolution: float) -> list[int]:
    n = len(adj)
    comm = list(range(n))
    tot = list(degree)
    two_m = 2.0 * m
    tol = MOVE_TOL * m  # gains below are in units of m * dQ
    order = list(range(n))
    while True:
        rng.shuffle(order)
        moved = False
        for i in order:
            ci = comm[i]
            ki = degree[i]
            links: dict[int, float] = {}
            for j, w in adj[i].items():
                cj = comm[j]
                links[cj] = links.get(cj, 0.0) + w
            tot[ci] -= ki
            scale = resolution * ki / two_m
            best = ci
            best_gain = links.get(ci, 0.0) - tot[ci] * scale
            for c, w in links.items():
                gain = w - tot[c] * scale
                if gain > best_gain + tol:
                    best, best_gain = c, gain
            tot[best] += ki
            if best != ci:
                comm[i] = best
                moved = True
        if not moved:
            return comm


def _aggregate(adj, self_w, comm):
    labels = _canonical(comm)
    k = max(labels) + 1
    new_adj: list[dict[int, float]] = [{} for _ in range(k)]
    new_self = [0.0] * k
    for i, nbrs in enumerate(adj):
        ci = labels[i]
        new_self[ci] += self_w[i]
        for j, w in nbrs.items():
            cj = labels[j]
            if ci == cj:
                if j > i:
                    new_self[ci] += w
            else:
                new_adj[ci][cj] = new_adj[ci].get(cj, 0.0) + w
    return labels, new_adj, new_self


def louvain_levels(net: InvestorNetwork, seed: int, resolution: float = 1.0) -> list[Partition]:
    """Run Louvain and return the partition reached after every level.

    The first entry is the all-singletons starting point; the last is the
    final result.
    """
    if not net.edges:
        raise DegenerateAnalysisError("nothing to cluster: network has no edges")
    rng = random.Random(seed)
    _, adj = _index(net)
    n = len(adj)
    self_w = [0.0] * n
    degree = [math.fsum(nbrs.values()) for nbrs in adj]
    m = math.fsum(degree) / 2.0

    membership = list(range(n))  # original node -> current super-node
    levels = [_as_partition(net, membership, _level_modularity(adj, self_w, degree, membership, m, resolution))]
    while True:
        comm = _local_moves(adj, degree, m, rng, resolution)
        labels, new_adj, new_self = _aggregate(adj, self_w, comm)
        if len(new_adj) == len(adj):
            break
        membership = [labels[s] for s in membership]
        new_degree = [0.0] * len(new_adj)
        for i, d in enumerate(degree):
            new_degree[labels[i]] += d
        degree = new_degree
        adj, self_w = new_adj, new_self
        q = _level_modularity(adj, self_w, degree, list(range(len(adj))), m, resolution)
        levels.append(_as_partition(net, membership, q))
    return levels


def _as_partition(net: InvestorNetwork, membership: Sequence[int], q: float) -> Partition:
    labels = _canonical(membership)
    return Partition(dict(zip(net.nodes, labels)), q)


def louvain(net: InvestorNetwork, seed: int, resolution: float = 1.0) -> Partition:
    """Single randomized Louvain run; deterministic for a fixed seed."""
    final = louvain_levels(net, seed, resolution)[-1]
    # recompute on the original graph so the reported value is exact
    return Partition(final.assignment, modularity(net, final, resolution))


def _ensemble_member(args) -> Partition:
    net, seed, i, resolution = args
    return louvain(net, derive_seed(seed, "louvain", i), resolution)


def run_ensemble(
    net: InvestorNetwork,
    run_count: int = 1000,
    seed: int = 0,
    *,
    resolution: float = 1.0,
    workers: int = 1,
) -> RunEnsemble:
    """Repeated Louvain runs; run ``i`` is seeded from ``(seed, i)``.

    With ``workers > 1`` runs are spread over processes; results come back
    in run order either way.
    """
    if run_count < 1:
        raise InputError(f"run_count must be >= 1, got {run_count}")
    if not net.edges:
        raise DegenerateAnalysisError("nothing to cluster: network has no edges")
    jobs = [(net, seed, i, resolution) for i in range(run_count)]
    if workers > 1 and run_count > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_ensemble_member, jobs, chunksize=max(1, run_count // (4 * workers))))
    else:
        runs = [_ensemble_member(j) for j in jobs]
    return RunEnsemble(tuple(runs), seed)


# -- cross-run alignment -----------------------------------------------------


def _align_to(reference: Mapping[str, int], run: Mapping[str, int]) -> dict[int, int]:
    overlap = Counter((run[n], reference[n]) for n in reference)
    pairs = sorted(overlap.items(), key=lambda kv: (-kv[1], kv[0][1], kv[0][0]))
    mapping: dict[int, int] = {}
    used: set[int] = set()
    for (c_run, c_ref), _ in pairs:
        if c_run in mapping or c_ref in used:
            continue
        mapping[c_run] = c_ref
        used.add(c_ref)
    # leftover communities: fresh labels after the reference's, largest first
    sizes = Counter(run.values())
    fresh = max(reference.values()) + 1
    for c_run in sorted((c for c in sizes if c not in mapping), key=lambda c: (-sizes[c], c)):
        mapping[c_run] = fresh
        fresh += 1
    return mapping


def align_runs(ensemble: RunEnsemble) -> list[dict[str, int]]:
    """Relabel every run onto run 0's labels by greedy maximum overlap.

    Communities with no counterpart in run 0 receive labels past run 0's
    largest one.
    """
    if not ensemble.runs:
        raise InputError("empty ensemble")
    ref = dict(ensemble.runs[0].assignment)
    aligned = [ref]
    for p in ensemble.runs[1:]:
        mapping = _align_to(ref, p.assignment)
        aligned.append({n: mapping[c] for n, c in p.assignment.items()})
    return aligned


def consensus(ensemble: RunEnsemble) -> dict[str, int]:
    """Most frequent aligned label per node (smallest label on ties)."""
    aligned = align_runs(ensemble)
    out = {}
    for n in aligned[0]:
        counts = Counter(a[n] for a in aligned)
        out[n] = min(counts, key=lambda c: (-counts[c], c))
    return out


# -- comparison --------------------------------------------------------------


def _labels(p: Partition | Mapping[str, int]) -> Mapping[str, int]:
    return p.assignment if isinstance(p, Partition) else p


def nmi(p: Partition | Mapping[str, int], q: Partition | Mapping[str, int]) -> float:
    """Normalized mutual information, arithmetic-mean normalization.

    Two single-community partitions of the same nodes count as identical (1.0).
    """
    a, b = _labels(p), _labels(q)
    if set(a) != set(b):
        raise InputError("partitions cover different node sets")
    nodes = sorted(a)
    if not nodes:
        raise InputError("partitions are empty")
    _, ia = np.unique([a[n] for n in nodes], return_inverse=True)
    _, ib = np.unique([b[n] for n in nodes], return_inverse=True)
    joint = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(joint, (ia, ib), 1.0)
    pxy = joint / len(nodes)
    px, py = pxy.sum(1), pxy.sum(0)
    hx = -float(np.sum(px * np.log(px)))
    hy = -float(np.sum(py * np.log(py)))
    if hx == 0.0 and hy == 0.0:
        return 1.0
    nz = pxy > 0
    mi = float(np.sum(pxy[nz] * np.log(pxy[nz] / np.outer(px, py)[nz])))
    return min(1.0, max(0.0, 2.0 * mi / (hx + hy)))


# -- export ------------------------------------------------------------------


def write_partition(p: Partition | Mapping[str, int], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["investor_id", "community_id"])
    for node, c in sorted(_labels(p).items()):
        writer.writerow([node, c])


def write_ensemble(ensemble: RunEnsemble, stream: TextIO) -> None:
    """One column per (aligned) run plus the consensus label."""
    aligned = align_runs(ensemble)
    cons = consensus(ensemble)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["investor_id", *(f"run_{i}" for i in range(len(aligned))), "consensus"])
    for node in sorted(cons):
        writer.writerow([node, *(a[node] for a in aligned), cons[node]])
