from __future__ import annotations

from keiretsunet.graph import Edge, InvestorNetwork
from keiretsunet.ingest import SubsidiaryRecord

TWO_TRIANGLES = [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f")]


def make_net(edges, weights=None, labels=None) -> InvestorNetwork:
    """Build a network from ``(u, v)`` pairs; nodes are the edge endpoints."""
    out = []
    for k, (u, v) in enumerate(edges):
        u, v = (u, v) if u < v else (v, u)
        out.append(Edge(u, v, 1, 1.0 if weights is None else weights[k]))
    nodes = sorted({e.u for e in out} | {e.v for e in out})
    return InvestorNetwork(tuple(nodes), tuple(out), labels or {})


def record(sid, owners, capital=1000.0, country="Thailand", sector=1100, year=1990, local=0.0):
    owners = list(owners)
    if all(isinstance(o, str) for o in owners):
        owners = [(o, round(1.0 / len(owners), 4)) for o in owners]
    return SubsidiaryRecord(sid, f"name {sid}", country, sector, capital, tuple(owners), local, 100, year)
