"""End-to-end analysis: filter, project, detect, tabulate, test.

``analyze`` runs one configuration; ``test_battery`` runs a list of them and
lays the results out like a hypothesis table (one row per label, with an
unweighted and a weighted block).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TextIO

from ..community import RunEnsemble, run_ensemble
from ..errors import DegenerateAnalysisError, InputError
from ..graph import (
    BipartiteGraph,
    InvestorNetwork,
    ProjectionConfig,
    Weighting,
    build_bipartite,
    project,
    records_for_weighting,
)
from ..ingest import FilterSpec, KeiretsuMembership, Macroarea, SubsidiaryRecord, apply_filter
from ..seeding import derive_seed
from .chisq import TestResult, mc_pvalue
from .tables import ContingencyTable, contingency

NO_DATA = "no data"
RESULT_COLUMNS = ("label", "weighting", "mrh_rejected", "chi_square", "p_value", "stars", "note")


@dataclass(frozen=True)
class AnalysisResult:
    bipartite: BipartiteGraph
    network: InvestorNetwork
    ensemble: RunEnsemble
    table: ContingencyTable
    result: TestResult


def test_network(
    net: InvestorNetwork,
    memberships: Iterable[KeiretsuMembership],
    *,
    runs: int = 1000,
    mc_samples: int = 9999,
    seed: int = 0,
    include_unaffiliated: bool = False,
    single_group: bool = False,
    resolution: float = 1.0,
    workers: int = 1,
) -> tuple[RunEnsemble, ContingencyTable, TestResult]:
    """Community ensemble, averaged contingency table and MC test for a built network."""
    if not net.edges:
        raise DegenerateAnalysisError("insufficient co-investment structure: network has no edges")
    ensemble = run_ensemble(
        net, runs, derive_seed(seed, "ensemble"), resolution=resolution, workers=workers
    )
    table = contingency(ensemble, memberships, include_unaffiliated, single_group=single_group)
    result = mc_pvalue(table, mc_samples, derive_seed(seed, "mc"))
    return ensemble, table, result


test_network.__test__ = False  # type: ignore[attr-defined]


def build_network(
    records: Iterable[SubsidiaryRecord],
    memberships: Iterable[KeiretsuMembership],
    filter_spec: FilterSpec = FilterSpec(),
    projection: ProjectionConfig = ProjectionConfig(),
    macroareas: Mapping[str, Macroarea] | None = None,
) -> tuple[BipartiteGraph, InvestorNetwork]:
    selected = apply_filter(records, filter_spec, macroareas)
    if not selected:
        raise DegenerateAnalysisError(NO_DATA)
    selected = records_for_weighting(selected, projection.weighting)
    bg = build_bipartite(selected)
    net = project(bg, projection).with_labels(memberships)
    if not net.edges:
        raise DegenerateAnalysisError("insufficient co-investment structure: no investor pair meets min_shared")
    return bg, net


def analyze(
    records: Iterable[SubsidiaryRecord],
    memberships: Iterable[KeiretsuMembership],
    filter_spec: FilterSpec = FilterSpec(),
    projection: ProjectionConfig = ProjectionConfig(),
    *,
    runs: int = 1000,
    mc_samples: int = 9999,
    seed: int = 0,
    include_unaffiliated: bool = False,
    single_group: bool = False,
    resolution: float = 1.0,
    macroareas: Mapping[str, Macroarea] | None = None,
    workers: int = 1,
) -> AnalysisResult:
    memberships = list(memberships)
    bg, net = build_network(records, memberships, filter_spec, projection, macroareas)
    ensemble, table, result = test_network(
        net,
        memberships,
        runs=runs,
        mc_samples=mc_samples,
        seed=seed,
        include_unaffiliated=include_unaffiliated,
        single_group=single_group,
        resolution=resolution,
        workers=workers,
    )
    return AnalysisResult(bg, net, ensemble, table, result)


# -- batteries ---------------------------------------------------------------


@dataclass(frozen=True)
class BatteryEntry:
    label: str
    filter: FilterSpec = FilterSpec()
    projection: ProjectionConfig = ProjectionConfig()


@dataclass(frozen=True)
class BatteryRow:
    label: str
    weighting: Weighting
    result: TestResult | None = None
    note: str = ""

    def as_row(self, replica: int | None = None) -> list:
        prefix = [] if replica is None else [replica]
        if self.result is None:
            return [*prefix, self.label, self.weighting.value, self.note, "", "", "", self.note]
        r = self.result
        return [
            *prefix,
            self.label,
            self.weighting.value,
            r.mrh_rejected,
            f"{r.chi_square:.4f}",
            f"{r.p_value:.6f}",
            r.stars,
            self.note,
        ]


def describe_filter(spec: FilterSpec) -> str:
    parts = []
    if spec.snapshot_year is not None:
        parts.append(str(spec.snapshot_year))
    if spec.macroarea is not None:
        parts.append(spec.macroarea.value)
    if spec.sector_codes is not None:
        parts.append("sectors " + ";".join(str(c) for c in sorted(spec.sector_codes)))
    return " / ".join(parts) or "Overall"


def _entry(item) -> BatteryEntry:
    if isinstance(item, BatteryEntry):
        return item
    if len(item) == 3:
        return BatteryEntry(*item)
    if len(item) == 2:
        spec, proj = item
        return BatteryEntry(describe_filter(spec), spec, proj)
    raise InputError(f"cannot interpret battery entry {item!r}")


def test_battery(
    records: Sequence[SubsidiaryRecord],
    memberships: Iterable[KeiretsuMembership],
    battery_spec: Iterable[BatteryEntry | tuple],
    *,
    runs: int = 1000,
    mc_samples: int = 9999,
    seed: int = 0,
    include_unaffiliated: bool = False,
    single_group: bool = False,
    resolution: float = 1.0,
    macroareas: Mapping[str, Macroarea] | None = None,
    workers: int = 1,
) -> list[BatteryRow]:
    """Run every battery entry; failures are recorded in their row, not raised.

    All entries share ``seed`` so that entries selecting identical data
    produce identical rows.
    """
    records = list(records)
    memberships = list(memberships)
    out = []
    for item in battery_spec:
        entry = _entry(item)
        weighting = entry.projection.weighting
        try:
            res = analyze(
                records,
                memberships,
                entry.filter,
                entry.projection,
                runs=runs,
                mc_samples=mc_samples,
                seed=seed,
                include_unaffiliated=include_unaffiliated,
                single_group=single_group,
                resolution=resolution,
                macroareas=macroareas,
                workers=workers,
            )
        except DegenerateAnalysisError as exc:
            msg = str(exc)
            note = NO_DATA if msg == NO_DATA else f"insufficient observations: {msg}"
            out.append(BatteryRow(entry.label, weighting, None, note))
            continue
        out.append(BatteryRow(entry.label, weighting, res.result))
    return out


test_battery.__test__ = False  # type: ignore[attr-defined]


def parse_battery(source: TextIO | str, *, default_min_shared: int = 1, manufacturing_only: bool = True) -> list[BatteryEntry]:
    """Read a battery file.

    Columns: ``label,macroarea,sector_codes,snapshot_year,weighting`` with an
    optional ``min_shared``. ``sector_codes`` is ``;``-separated; empty cells
    leave that filter off. ``weighting`` is ``unweighted``, ``weighted`` or
    ``both`` (the default), and ``both`` expands into two entries.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.DictReader(source)
    if not reader.fieldnames or "label" not in [f.strip() for f in reader.fieldnames]:
        raise InputError("battery file needs a header with at least a 'label' column")
    reader.fieldnames = [f.strip() for f in reader.fieldnames]
    entries = []
    for line, row in enumerate(reader, start=2):
        get = lambda k: (row.get(k) or "").strip()  # noqa: E731
        label = get("label")
        if not label:
            raise InputError(f"battery row {line}: empty label")
        try:
            spec = FilterSpec(
                macroarea=get("macroarea") or None,
                sector_codes=frozenset(int(x) for x in get("sector_codes").split(";") if x.strip()) or None,
                snapshot_year=int(get("snapshot_year")) if get("snapshot_year") else None,
                manufacturing_only=manufacturing_only,
            )
            min_shared = int(get("min_shared") or default_min_shared)
        except (ValueError, InputError) as exc:
            raise InputError(f"battery row {line}: {exc}") from None
        weighting = (get("weighting") or "both").lower()
        if weighting == "both":
            modes = [Weighting.UNWEIGHTED, Weighting.COSINE]
        else:
            try:
                modes = [Weighting(weighting)]
            except ValueError:
                raise InputError(f"battery row {line}: weighting must be unweighted, weighted or both") from None
        for mode in modes:
            entries.append(BatteryEntry(label, spec, ProjectionConfig(min_shared, mode)))
    return entries


def write_results(rows: Iterable[BatteryRow], stream: TextIO, *, replicas: bool = False) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow((["replica"] if replicas else []) + list(RESULT_COLUMNS))
    for i, row in enumerate(rows):
        writer.writerow(row.as_row(i if replicas else None))


def write_wide(rows: Iterable[BatteryRow], stream: TextIO) -> None:
    """Wide layout: one line per label, unweighted block then weighted block."""
    by_label: dict[str, dict[Weighting, BatteryRow]] = {}
    for row in rows:
        by_label.setdefault(row.label, {})[row.weighting] = row
    writer = csv.writer(stream, lineterminator="\n")
    header = ["label"]
    for mode in (Weighting.UNWEIGHTED, Weighting.COSINE):
        header += [f"{mode.value}_mrh_rejected", f"{mode.value}_chi_square", f"{mode.value}_p_value"]
    writer.writerow(header)
    for label, modes in by_label.items():
        line = [label]
        for mode in (Weighting.UNWEIGHTED, Weighting.COSINE):
            row = modes.get(mode)
            if row is None:
                line += ["", "", ""]
            elif row.result is None:
                line += [row.note, "", ""]
            else:
                r = row.result
                line += [f"{r.mrh_rejected} {r.stars}".strip(), f"{r.chi_square:.2f}", f"{r.p_value:.3f}"]
        writer.writerow(line)
