"""Co-ownership network analysis of Japanese overseas investors.

Build investor networks from subsidiary ownership records, detect
communities with Louvain, and test whether they line up with declared
keiretsu membership against degree-preserving null models.
"""

__version__ = "0.1.0"

from .community import Partition, RunEnsemble, louvain, modularity, nmi, run_ensemble
from .errors import DegenerateAnalysisError, InputError, ParseError
from .graph import InvestorNetwork, ProjectionConfig, Weighting, build_bipartite, cosine_similarity, project
from .ingest import FilterSpec, apply_filter, parse_memberships, parse_subsidiaries
from .nullmodel import RewireConfig, configuration_rewire, null_battery
from .stats import ContingencyTable, TestResult, analyze, chi_square_stat, contingency, mc_pvalue, test_battery
from .synth import PlantSpec, generate

__all__ = [
    "ContingencyTable",
    "DegenerateAnalysisError",
    "FilterSpec",
    "InputError",
    "InvestorNetwork",
    "ParseError",
    "Partition",
    "PlantSpec",
    "ProjectionConfig",
    "RewireConfig",
    "RunEnsemble",
    "TestResult",
    "Weighting",
    "analyze",
    "apply_filter",
    "build_bipartite",
    "chi_square_stat",
    "configuration_rewire",
    "contingency",
    "cosine_similarity",
    "generate",
    "louvain",
    "mc_pvalue",
    "modularity",
    "nmi",
    "null_battery",
    "parse_memberships",
    "parse_subsidiaries",
    "project",
    "run_ensemble",
    "test_battery",
]
