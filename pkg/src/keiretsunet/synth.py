"""Synthetic survey data with planted keiretsu-aligned co-ownership.

Each subsidiary draws a first owner uniformly over all investors. Every
further owner comes from the first owner's group with probability
``p_in``, otherwise uniformly from the investors outside that group.
With ``p_in = 1 / groups`` (and no unaffiliated investors) the draw is
uniform and there is no planted structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InputError
from .graph import ProjectionConfig, Weighting
from .ingest import (
    MANUFACTURING_CODES,
    Basis,
    Group,
    KeiretsuMembership,
    Macroarea,
    SubsidiaryRecord,
    load_macroareas,
    write_macroareas,
    write_memberships,
    write_subsidiaries,
)
from .seeding import derive_seed

__all__ = ["PlantSpec", "generate", "write_dataset", "same_group_fraction", "power_curve", "PowerRow"]

# owner-count histogram (1, 2, 3, 4, 5+) of ASEAN subsidiaries
ASEAN_OWNER_COUNTS = (1530, 553, 259, 99, 58)

DEFAULT_COUNTRIES = (
    "Thailand",
    "Indonesia",
    "Malaysia",
    "Singapore",
    "Philippines",
    "Vietnam",
    "China",
    "Hong Kong",
    "Taiwan",
    "United States",
    "Canada",
)

# mean of lognormal(mu, sigma) is exp(mu + sigma^2 / 2) = 21980
_CAPITAL_SIGMA = 1.0
_CAPITAL_MU = math.log(21980.0) - _CAPITAL_SIGMA**2 / 2


@dataclass(frozen=True)
class PlantSpec:
    groups: int = 6
    investors_per_group: int = 50
    unaffiliated_investors: int = 0
    subsidiaries: int = 2000
    # relative weights for 1, 2, 3, 4 and 5 owners ("5+" is drawn as exactly 5)
    owners_per_subsidiary: tuple[float, ...] = ASEAN_OWNER_COUNTS
    p_in: float = 0.8
    capital_lognormal: tuple[float, float] = (_CAPITAL_MU, _CAPITAL_SIGMA)
    seed: int = 0
    countries: tuple[str, ...] = DEFAULT_COUNTRIES
    sectors: tuple[int, ...] = tuple(sorted(MANUFACTURING_CODES))
    local_partner_rate: float = 0.3
    years: tuple[int, int] = (1960, 2005)

    def validate(self) -> None:
        if not 1 <= self.groups <= len(Group):
            raise InputError(f"groups must be in 1..{len(Group)}, got {self.groups}")
        if self.investors_per_group < 1:
            raise InputError("investors_per_group must be >= 1")
        if self.unaffiliated_investors < 0 or self.subsidiaries < 0:
            raise InputError("investor and subsidiary counts must be non-negative")
        if not 0.0 <= self.p_in <= 1.0:
            raise InputError(f"p_in must be in [0, 1], got {self.p_in}")
        w = self.owners_per_subsidiary
        if not w or any(x < 0 for x in w) or sum(w) <= 0:
            raise InputError("owners_per_subsidiary needs non-negative weights with a positive sum")
        max_owners = max(k + 1 for k, x in enumerate(w) if x > 0)
        if max_owners > self.n_investors:
            raise InputError(
                f"owners_per_subsidiary allows {max_owners} owners but only {self.n_investors} investors exist"
            )
        if not self.countries or not self.sectors:
            raise InputError("countries and sectors must be non-empty")

    @property
    def n_investors(self) -> int:
        return self.groups * self.investors_per_group + self.unaffiliated_investors

    def investor_groups(self) -> list[int]:
        """Group index per investor; -1 marks unaffiliated."""
        out = [g for g in range(self.groups) for _ in range(self.investors_per_group)]
        return out + [-1] * self.unaffiliated_investors


def _investor_id(i: int) -> str:
    return f"I{i + 1:04d}"


def _floor4(x: float) -> float:
    return math.floor(x * 1e4 + 1e-6) / 1e4


def _draw_owners(rng: np.random.Generator, k: int, first: int, groups: list[int], members, p_in: float) -> list[int]:
    owners = [first]
    g = groups[first]
    n = len(groups)
    while len(owners) < k:
        same = g >= 0 and rng.random() < p_in
        if same:
            pool = [i for i in members[g] if i not in owners]
        else:
            pool = [i for i in range(n) if (g < 0 or groups[i] != g) and i not in owners]
        if not pool:
            pool = [i for i in range(n) if i not in owners]
        owners.append(int(pool[rng.integers(len(pool))]))
    return owners


def generate(spec: PlantSpec = PlantSpec()) -> tuple[list[SubsidiaryRecord], list[KeiretsuMembership]]:
    """Build a synthetic dataset; deterministic for a given ``spec``."""
    spec.validate()
    rng = np.random.default_rng(derive_seed(spec.seed, "synth"))
    groups = spec.investor_groups()
    members = [[i for i, g in enumerate(groups) if g == k] for k in range(spec.groups)]
    group_names = list(Group)[: spec.groups]

    memberships = [
        KeiretsuMembership(_investor_id(i), group_names[g], list(Basis)[int(rng.integers(len(Basis)))])
        for i, g in enumerate(groups)
        if g >= 0
    ]

    weights = np.asarray(spec.owners_per_subsidiary, dtype=float)
    weights = weights / weights.sum()
    mu, sigma = spec.capital_lognormal
    n = spec.n_investors
    lo, hi = spec.years

    records = []
    for s in range(spec.subsidiaries):
        k = int(rng.choice(len(weights), p=weights)) + 1
        first = int(rng.integers(n))
        owners = _draw_owners(rng, k, first, groups, members, spec.p_in)

        has_local = rng.random() < spec.local_partner_rate
        raw = rng.dirichlet(np.ones(k + (1 if has_local else 0)))
        shares = [max(_floor4(x), 1e-4) for x in raw[:k]]
        excess = sum(shares) - 1.0
        if excess > 0:
            top = shares.index(max(shares))
            shares[top] = _floor4(shares[top] - excess - 1e-9)
        local = max(0.0, _floor4(1.0 - sum(shares))) if has_local else 0.0

        capital = round(float(rng.lognormal(mu, sigma)), 1)
        employees = int(rng.lognormal(math.log(300.0), 1.0))
        records.append(
            SubsidiaryRecord(
                subsidiary_id=f"S{s + 1:05d}",
                name=f"Subsidiary {s + 1}",
                country=spec.countries[int(rng.integers(len(spec.countries)))],
                sector_code=int(spec.sectors[int(rng.integers(len(spec.sectors)))]),
                paidup_capital=capital,
                owners=tuple((_investor_id(i), sh) for i, sh in zip(owners, shares)),
                local_share=local,
                num_employees=employees,
                year_established=int(rng.integers(lo, hi + 1)),
            )
        )
    return records, memberships


def write_dataset(
    records: Sequence[SubsidiaryRecord],
    memberships: Sequence[KeiretsuMembership],
    directory: str | Path,
    macroareas: dict[str, Macroarea] | None = None,
) -> dict[str, Path]:
    """Write the ``subsidiaries`` / ``memberships`` / ``macroareas`` CSV trio."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "subsidiaries": directory / "subsidiaries.csv",
        "memberships": directory / "memberships.csv",
        "macroareas": directory / "macroareas.csv",
    }
    with paths["subsidiaries"].open("w", encoding="utf-8", newline="") as fh:
        write_subsidiaries(records, fh)
    with paths["memberships"].open("w", encoding="utf-8", newline="") as fh:
        write_memberships(memberships, fh)
    with paths["macroareas"].open("w", encoding="utf-8", newline="") as fh:
        write_macroareas(load_macroareas() if macroareas is None else macroareas, fh)
    return paths


def same_group_fraction(records: Sequence[SubsidiaryRecord], memberships: Sequence[KeiretsuMembership]) -> float:
    """Share of non-first owners that sit in the first owner's group.

    Only subsidiaries whose first owner is affiliated contribute.
    """
    group = {m.investor_id: m.group for m in memberships}
    same = total = 0
    for r in records:
        ids = r.owner_ids
        g = group.get(ids[0]) if ids else None
        if g is None:
            continue
        for other in ids[1:]:
            total += 1
            same += group.get(other) == g
    return same / total if total else float("nan")


@dataclass(frozen=True)
class PowerRow:
    p_in: float
    replicas: int
    rejections: int
    alpha: float = 0.05
    p_values: tuple[float, ...] = field(default=(), repr=False)

    @property
    def rejection_rate(self) -> float:
        return self.rejections / self.replicas


def power_curve(
    spec: PlantSpec,
    p_in_values: Sequence[float],
    replicas: int,
    *,
    alpha: float = 0.05,
    runs: int = 50,
    mc_samples: int = 999,
    weighting: Weighting = Weighting.UNWEIGHTED,
    min_shared: int = 1,
    workers: int = 1,
) -> list[PowerRow]:
    """Rejection rate of the full pipeline at each planted mixing level.

    Replica ``r`` at level ``p_in`` generates data with a seed derived from
    ``(spec.seed, p_in, r)``.
    """
    from .stats.battery import analyze

    if replicas < 10:
        raise InputError(f"replicas must be >= 10, got {replicas}")
    projection = ProjectionConfig(min_shared, weighting)
    rows = []
    for p_in in p_in_values:
        ps = []
        for r in range(replicas):
            seed = derive_seed(spec.seed, "power", repr(float(p_in)), r)
            records, memberships = generate(replace(spec, p_in=float(p_in), seed=seed))
            res = analyze(records, memberships, projection=projection, runs=runs, mc_samples=mc_samples, seed=seed, workers=workers)
            ps.append(res.result.p_value)
        rows.append(PowerRow(float(p_in), replicas, sum(p < alpha for p in ps), alpha, tuple(ps)))
    return rows
