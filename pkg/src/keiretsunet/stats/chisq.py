"""Pearson chi-square statistic with Monte-Carlo p-values under fixed margins."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import random_table

from ..errors import DegenerateAnalysisError, InputError
from .tables import ContingencyTable

# sampled statistics this close below the observed one still count as ties
_TIE_FACTOR = 1.0 - 64 * np.finfo(float).eps


class Verdict(str, Enum):
    REJECTED_AT_001 = "RejectedAt001"
    REJECTED_AT_01 = "RejectedAt01"
    REJECTED_AT_05 = "RejectedAt05"
    NOT_REJECTED = "NotRejected"

    @classmethod
    def from_p(cls, p: float) -> Verdict:
        if p < 0.001:
            return cls.REJECTED_AT_001
        if p < 0.01:
            return cls.REJECTED_AT_01
        if p < 0.05:
            return cls.REJECTED_AT_05
        return cls.NOT_REJECTED

    @property
    def stars(self) -> str:
        return {"RejectedAt001": "***", "RejectedAt01": "**", "RejectedAt05": "*"}.get(self.value, "")

    @property
    def rejected(self) -> bool:
        return self is not Verdict.NOT_REJECTED


def stars(p: float) -> str:
    return Verdict.from_p(p).stars


@dataclass(frozen=True)
class TestResult:
    chi_square: float
    p_value: float
    mc_samples: int
    dof_note: str
    verdict: Verdict

    __test__ = False  # keep pytest from collecting this class

    @property
    def stars(self) -> str:
        return self.verdict.stars

    @property
    def mrh_rejected(self) -> str:
        return "YES" if self.verdict.rejected else "NO"


def _as_table(t) -> ContingencyTable:
    return t if isinstance(t, ContingencyTable) else ContingencyTable.from_array(t)


def chi_square_stat(t: ContingencyTable | np.ndarray) -> float:
    """Pearson X^2 after dropping all-empty rows and columns.

    Works on averaged (non-integer) tables as-is.
    """
    t = _as_table(t).trimmed()
    r, c = t.cells.shape
    if r < 2 or c < 2:
        raise DegenerateAnalysisError(f"degenerate table: {r}x{c} after dropping empty rows/columns")
    obs = t.cells
    expected = np.outer(obs.sum(axis=1), obs.sum(axis=0)) / obs.sum()
    return float(((obs - expected) ** 2 / expected).sum())


def round_margin(margin: np.ndarray, total: int) -> np.ndarray:
    """Largest-remainder rounding of ``margin`` to integers summing to ``total``."""
    margin = np.asarray(margin, dtype=float)
    scaled = margin * (total / margin.sum()) if margin.sum() > 0 else margin
    base = np.floor(scaled + 1e-9).astype(np.int64)
    short = int(total - base.sum())
    if short > 0:
        order = np.argsort(-(scaled - base), kind="stable")
        base[order[:short]] += 1
    elif short < 0:
        order = np.argsort(scaled - base, kind="stable")
        for i in order:
            if short == 0:
                break
            if base[i] > 0:
                base[i] -= 1
                short += 1
    return base


def _batch_stats(tables: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    expected = np.outer(rows, cols) / rows.sum()
    return (((tables - expected) ** 2) / expected).sum(axis=(1, 2))


def mc_pvalue(t: ContingencyTable | np.ndarray, samples: int = 9999, seed: int = 0) -> TestResult:
    """Monte-Carlo p-value for independence with both margins held fixed.

    Random tables are drawn with the (rounded) row and column totals of
    ``t``; p is ``(1 + #{X^2_sim >= X^2_obs}) / (samples + 1)``.
    """
    if samples < 100:
        raise InputError(f"mc samples must be >= 100, got {samples}")
    table = _as_table(t).trimmed()
    observed = chi_square_stat(table)

    total = int(round(table.total))
    rows = round_margin(table.cells.sum(axis=1), total)
    cols = round_margin(table.cells.sum(axis=0), total)
    rows, cols = rows[rows > 0], cols[cols > 0]
    if len(rows) < 2 or len(cols) < 2:
        sims = np.zeros(samples)
    else:
        rng = np.random.default_rng(seed)
        sampled = random_table(rows, cols, seed=rng).rvs(size=samples)
        sims = _batch_stats(sampled.astype(float), rows.astype(float), cols.astype(float))
    hits = int(np.count_nonzero(sims >= observed * _TIE_FACTOR))
    p = (1 + hits) / (samples + 1)
    r, c = table.cells.shape
    note = f"{r}x{c} table (asymptotic dof {(r - 1) * (c - 1)} not used); p by Monte Carlo with fixed margins"
    return TestResult(observed, p, samples, note, Verdict.from_p(p))
