"""Contingency tables, chi-square testing and the analysis battery."""

from .battery import (
    NO_DATA,
    RESULT_COLUMNS,
    AnalysisResult,
    BatteryEntry,
    BatteryRow,
    analyze,
    build_network,
    describe_filter,
    parse_battery,
    test_battery,
    test_network,
    write_results,
    write_wide,
)
from .chisq import TestResult, Verdict, chi_square_stat, mc_pvalue, round_margin, stars
from .tables import UNAFFILIATED, ContingencyTable, contingency, write_table

__all__ = [
    "NO_DATA",
    "RESULT_COLUMNS",
    "AnalysisResult",
    "BatteryEntry",
    "BatteryRow",
    "ContingencyTable",
    "TestResult",
    "UNAFFILIATED",
    "Verdict",
    "analyze",
    "build_network",
    "chi_square_stat",
    "contingency",
    "describe_filter",
    "mc_pvalue",
    "parse_battery",
    "round_margin",
    "stars",
    "test_battery",
    "test_network",
    "write_results",
    "write_table",
    "write_wide",
]
