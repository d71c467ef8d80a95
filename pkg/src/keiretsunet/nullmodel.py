"""Degree-preserving randomization of the investor network.

Rewiring uses double-edge swaps on the projected network: pick two edges
``(a, b)`` and ``(c, d)`` and reconnect them as ``(a, d)`` and ``(c, b)``.
Edge attributes stay attached to their slot in the edge list, so the
weight multiset survives while its placement is scrambled.
"""

from __future__ import annotations

import logging
import random
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .errors import InputError
from .graph import Edge, InvestorNetwork
from .ingest import KeiretsuMembership
from .seeding import derive_seed
from .stats.battery import test_network
from .stats.chisq import TestResult

logger = logging.getLogger(__name__)

__all__ = ["RewireConfig", "RewireWarning", "configuration_rewire", "null_battery"]


class RewireWarning(UserWarning):
    """No valid swap was found within the attempt budget."""


@dataclass(frozen=True)
class RewireConfig:
    swaps_per_edge: int = 20
    seed: int = 0
    allow_multiedges: bool = False

    def __post_init__(self):
        if self.swaps_per_edge < 1:
            raise InputError(f"swaps_per_edge must be >= 1, got {self.swaps_per_edge}")


def _key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u < v else (v, u)


def configuration_rewire(net: InvestorNetwork, cfg: RewireConfig = RewireConfig()) -> InvestorNetwork:
    """Randomize ``net`` by ``swaps_per_edge * |E|`` double-edge swap attempts.

    Swaps that would create a self-loop, or a duplicate edge unless
    ``allow_multiedges`` is set, are rejected. When not a single swap
    succeeds the input is returned unchanged and a :class:`RewireWarning`
    is issued.
    """
    m = len(net.edges)
    if m < 2:
        raise InputError(f"rewiring needs at least 2 edges, network has {m}")
    rng = random.Random(cfg.seed)
    pairs = [(e.u, e.v) for e in net.edges]
    present = Counter(_key(u, v) for u, v in pairs)

    accepted = 0
    for _ in range(cfg.swaps_per_edge * m):
        i = rng.randrange(m)
        j = rng.randrange(m)
        if i == j:
            continue
        a, b = pairs[i]
        c, d = pairs[j]
        if rng.random() < 0.5:
            c, d = d, c
        if a == d or c == b:
            continue
        new1, new2 = _key(a, d), _key(c, b)
        if not cfg.allow_multiedges and (present[new1] or present[new2] or new1 == new2):
            continue
        for old in (_key(a, b), _key(c, d)):
            present[old] -= 1
            if not present[old]:
                del present[old]
        present[new1] += 1
        present[new2] += 1
        pairs[i], pairs[j] = new1, new2
        accepted += 1

    if accepted == 0:
        warnings.warn("no valid double-edge swap found; returning the input network", RewireWarning, stacklevel=2)
        return net
    logger.debug("rewiring accepted %d of %d attempts", accepted, cfg.swaps_per_edge * m)
    edges = tuple(Edge(*_key(u, v), e.shared_count, e.weight) for (u, v), e in zip(pairs, net.edges))
    return InvestorNetwork(net.nodes, edges, net.labels)


def null_battery(
    net: InvestorNetwork,
    memberships: Iterable[KeiretsuMembership],
    replicas: int,
    seed: int = 0,
    *,
    runs: int = 1000,
    mc_samples: int = 9999,
    swaps_per_edge: int = 20,
    include_unaffiliated: bool = False,
    resolution: float = 1.0,
    workers: int = 1,
) -> list[TestResult]:
    """Rewire, re-detect and re-test ``replicas`` times; one result per replica."""
    if replicas < 1:
        raise InputError("replicas must be >= 1")
    memberships = list(memberships)
    results = []
    for r in range(replicas):
        rewired = configuration_rewire(
            net, RewireConfig(swaps_per_edge=swaps_per_edge, seed=derive_seed(seed, "rewire", r))
        )
        _, _, result = test_network(
            rewired,
            memberships,
            runs=runs,
            mc_samples=mc_samples,
            seed=derive_seed(seed, "null", r),
            include_unaffiliated=include_unaffiliated,
            resolution=resolution,
            workers=workers,
        )
        results.append(result)
    return results
