"""Community x keiretsu contingency tables."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from ..community import Partition, RunEnsemble, align_runs
from ..errors import DegenerateAnalysisError
from ..ingest import Group, KeiretsuMembership

logger = logging.getLogger(__name__)

UNAFFILIATED = "Unaffiliated"


@dataclass(frozen=True)
class ContingencyTable:
    rows: tuple[int, ...]
    cols: tuple[str, ...]
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=float)
        if cells.shape != (len(self.rows), len(self.cols)):
            raise ValueError(f"cells shape {cells.shape} does not match {len(self.rows)}x{len(self.cols)}")
        if (cells < 0).any():
            raise ValueError("contingency cells must be non-negative")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_array(cls, cells) -> ContingencyTable:
        cells = np.asarray(cells, dtype=float)
        r, c = cells.shape
        return cls(tuple(range(r)), tuple(f"c{j}" for j in range(c)), cells)

    @property
    def total(self) -> float:
        return float(self.cells.sum())

    def trimmed(self) -> ContingencyTable:
        """Copy without all-zero rows and columns."""
        keep_r = self.cells.sum(axis=1) > 0
        keep_c = self.cells.sum(axis=0) > 0
        return ContingencyTable(
            tuple(r for r, k in zip(self.rows, keep_r) if k),
            tuple(c for c, k in zip(self.cols, keep_c) if k),
            self.cells[np.ix_(keep_r, keep_c)],
        )


def _investor_groups(
    memberships: Iterable[KeiretsuMembership], single_group: bool
) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {}
    for m in memberships:
        lst = groups.setdefault(m.investor_id, [])
        if single_group and lst:
            continue
        if m.group.value not in lst:
            lst.append(m.group.value)
    return groups


def contingency(
    ensemble: RunEnsemble | Partition | Sequence[Partition],
    memberships: Iterable[KeiretsuMembership],
    include_unaffiliated: bool = False,
    *,
    single_group: bool = False,
) -> ContingencyTable:
    """Average the community x group joint counts over an ensemble.

    Runs are first aligned onto run 0's community labels. Investors with
    several affiliations count once in each group column unless
    ``single_group`` keeps only their first listed group.
    """
    if isinstance(ensemble, Partition):
        ensemble = RunEnsemble((ensemble,), seed=0)
    elif not isinstance(ensemble, RunEnsemble):
        ensemble = RunEnsemble(tuple(ensemble), seed=0)
    if not ensemble.runs:
        raise ValueError("empty ensemble")

    aligned = align_runs(ensemble)
    groups = _investor_groups(memberships, single_group)
    nodes = sorted(aligned[0])
    labelled = [n for n in nodes if n in groups]
    if not labelled:
        raise DegenerateAnalysisError("no keiretsu overlap: no network investor has a membership")
    duals = sum(1 for n in labelled if len(groups[n]) > 1)
    if duals:
        logger.info("%d dual-affiliated investor(s) counted in every group they belong to", duals)

    cols = [g.value for g in Group]
    if include_unaffiliated:
        cols.append(UNAFFILIATED)
    col_idx = {c: j for j, c in enumerate(cols)}
    counted = nodes if include_unaffiliated else labelled
    entries = [(n, col_idx[g]) for n in counted for g in groups.get(n, [UNAFFILIATED])]

    rows = sorted({a[n] for a in aligned for n, _ in entries})
    row_idx = {r: i for i, r in enumerate(rows)}
    cells = np.zeros((len(rows), len(cols)))
    cols_arr = np.array([j for _, j in entries], dtype=int)
    for a in aligned:
        node_pos = np.array([row_idx[a[n]] for n, _ in entries], dtype=int)
        np.add.at(cells, (node_pos, cols_arr), 1.0)
    cells /= len(aligned)
    return ContingencyTable(tuple(rows), tuple(cols), cells)


def write_table(t: ContingencyTable, stream: TextIO) -> None:
    """Heatmap-ready matrix: header of group names, one row per community."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["community", *t.cols])
    for r, row in zip(t.rows, t.cells):
        writer.writerow([r, *(f"{x:.6g}" for x in row)])
