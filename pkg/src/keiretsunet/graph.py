"""Investor-subsidiary bipartite graph and its one-mode investor projection."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Iterable, Mapping, TextIO

import networkx as nx

from .errors import DegenerateAllocationError, InputError
from .ingest import KeiretsuMembership, SubsidiaryRecord

__all__ = [
    "Weighting",
    "ProjectionConfig",
    "BipartiteGraph",
    "Edge",
    "InvestorNetwork",
    "CapitalAllocation",
    "build_bipartite",
    "cosine_similarity",
    "project",
    "degree_sequence",
    "keiretsu_labels",
    "records_for_weighting",
    "to_networkx",
    "write_graphml",
    "write_dot",
    "write_bipartite_dot",
]

CapitalAllocation = Mapping[str, float]


class Weighting(str, Enum):
    UNWEIGHTED = "unweighted"
    COSINE = "weighted"


@dataclass(frozen=True)
class ProjectionConfig:
    min_shared: int = 1
    weighting: Weighting = Weighting.UNWEIGHTED

    def __post_init__(self):
        if int(self.min_shared) < 1:
            raise InputError(f"min_shared must be >= 1, got {self.min_shared}")
        if not isinstance(self.weighting, Weighting):
            object.__setattr__(self, "weighting", Weighting(self.weighting))


@dataclass(frozen=True)
class BipartiteGraph:
    investor_nodes: frozenset[str]
    subsidiary_nodes: frozenset[str]
    # (investor_id, subsidiary_id, capital); capital is None when the
    # subsidiary's paid-up capital is unknown
    ownership_edges: tuple[tuple[str, str, float | None], ...]

    def allocations(self) -> dict[str, dict[str, float]]:
        """Per-investor capital vectors, skipping edges of unknown capital."""
        alloc: dict[str, dict[str, float]] = defaultdict(dict)
        for inv, sub, cap in self.ownership_edges:
            if cap is not None:
                alloc[inv][sub] = cap
        return dict(alloc)

    def owners_by_subsidiary(self) -> dict[str, list[str]]:
        owners: dict[str, list[str]] = defaultdict(list)
        for inv, sub, _ in self.ownership_edges:
            owners[sub].append(inv)
        return dict(owners)

    def ownership_degree(self) -> Counter:
        return Counter(inv for inv, _, _ in self.ownership_edges)


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    shared_count: int
    weight: float = 1.0


@dataclass(frozen=True)
class InvestorNetwork:
    """Undirected simple graph on investors.

    Edges are stored once with ``u < v``. ``labels`` maps an investor to its
    keiretsu groups (possibly several); unaffiliated investors are absent.
    """

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    labels: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    @property
    def number_of_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> dict[str, int]:
        deg = dict.fromkeys(self.nodes, 0)
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1
        return deg

    def with_labels(self, memberships: Iterable[KeiretsuMembership]) -> InvestorNetwork:
        return InvestorNetwork(self.nodes, self.edges, keiretsu_labels(self.nodes, memberships))


def keiretsu_labels(nodes: Iterable[str], memberships: Iterable[KeiretsuMembership]) -> dict[str, tuple[str, ...]]:
    groups: dict[str, list[str]] = defaultdict(list)
    for m in memberships:
        groups[m.investor_id].append(m.group.value)
    return {n: tuple(groups[n]) for n in nodes if n in groups}


def build_bipartite(records: Iterable[SubsidiaryRecord]) -> BipartiteGraph:
    investors, subsidiaries, edges = set(), set(), []
    for r in records:
        subsidiaries.add(r.subsidiary_id)
        for inv, share in r.owners:
            investors.add(inv)
            cap = None if r.paidup_capital is None else share * r.paidup_capital
            edges.append((inv, r.subsidiary_id, cap))
    return BipartiteGraph(frozenset(investors), frozenset(subsidiaries), tuple(edges))


def cosine_similarity(a: CapitalAllocation, b: CapitalAllocation) -> float:
    """Cosine of the angle between two sparse capital vectors.

    Missing keys are zeros, so the vectors live on the union of both
    supports. Raises :class:`DegenerateAllocationError` on a zero vector.
    """
    norm_a = math.sqrt(math.fsum(x * x for x in a.values()))
    norm_b = math.sqrt(math.fsum(x * x for x in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        raise DegenerateAllocationError("degenerate allocation: zero-norm capital vector")
    if len(b) < len(a):
        a, b = b, a
    dot = math.fsum(x * b[k] for k, x in a.items() if k in b)
    return min(1.0, max(0.0, dot / (norm_a * norm_b)))


def records_for_weighting(records: Iterable[SubsidiaryRecord], weighting: Weighting) -> list[SubsidiaryRecord]:
    """Weighted analyses drop subsidiaries whose capital is missing or zero."""
    records = list(records)
    if Weighting(weighting) is Weighting.UNWEIGHTED:
        return records
    return [r for r in records if r.paidup_capital]


def project(bg: BipartiteGraph, cfg: ProjectionConfig = ProjectionConfig()) -> InvestorNetwork:
    """One-mode projection onto investors.

    Two investors are linked when they co-own at least ``cfg.min_shared``
    subsidiaries. Investors left without any link are dropped.
    """
    shared: Counter = Counter()
    for owners in bg.owners_by_subsidiary().values():
        for u, v in combinations(sorted(set(owners)), 2):
            shared[(u, v)] += 1

    weighted = cfg.weighting is Weighting.COSINE
    alloc = bg.allocations() if weighted else None
    edges = []
    for (u, v), count in sorted(shared.items()):
        if count < cfg.min_shared:
            continue
        w = cosine_similarity(alloc.get(u, {}), alloc.get(v, {})) if weighted else 1.0
        edges.append(Edge(u, v, count, w))
    nodes = sorted({e.u for e in edges} | {e.v for e in edges})
    return InvestorNetwork(tuple(nodes), tuple(edges))


def degree_sequence(net: InvestorNetwork) -> list[int]:
    """Degrees in node order."""
    deg = net.degrees()
    return [deg[n] for n in net.nodes]


# -- export ------------------------------------------------------------------


def to_networkx(net: InvestorNetwork) -> nx.Graph:
    g = nx.Graph()
    for n in net.nodes:
        g.add_node(n, investor_id=n, keiretsu=";".join(net.labels.get(n, ())))
    for e in net.edges:
        g.add_edge(e.u, e.v, shared_count=e.shared_count, weight=e.weight)
    return g


def write_graphml(net: InvestorNetwork, path) -> None:
    nx.write_graphml(to_networkx(net), path)


def _dot_id(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_dot(net: InvestorNetwork, stream: TextIO) -> None:
    stream.write("graph investors {\n")
    for n in net.nodes:
        label = ";".join(net.labels.get(n, ()))
        stream.write(f"  {_dot_id(n)} [investor_id={_dot_id(n)}, keiretsu={_dot_id(label)}];\n")
    for e in net.edges:
        stream.write(f"  {_dot_id(e.u)} -- {_dot_id(e.v)} [shared_count={e.shared_count}, weight={e.weight!r}];\n")
    stream.write("}\n")


def write_bipartite_dot(bg: BipartiteGraph, stream: TextIO) -> None:
    stream.write("graph ownership {\n")
    for n in sorted(bg.investor_nodes):
        stream.write(f"  {_dot_id('I:' + n)} [label={_dot_id(n)}, node_class=investor];\n")
    for n in sorted(bg.subsidiary_nodes):
        stream.write(f"  {_dot_id('S:' + n)} [label={_dot_id(n)}, node_class=subsidiary];\n")
    for inv, sub, cap in bg.ownership_edges:
        attr = "" if cap is None else f" [capital={cap!r}]"
        stream.write(f"  {_dot_id('I:' + inv)} -- {_dot_id('S:' + sub)}{attr};\n")
    stream.write("}\n")
